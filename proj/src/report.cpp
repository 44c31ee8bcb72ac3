#include "urllc/report.hpp"

#include <cstdio>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace urllc::report {

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string envelope_line(const Envelope& e) {
    std::ostringstream out;
    out << R"({"tool_version":")" << e.tool_version << R"(","scenario_digest":")"
        << e.scenario_digest << R"(","command":")" << e.command << R"(","timestamp":")"
        << e.timestamp << R"("})";
    return out.str();
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::logic_error("csv row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header_.size(); ++i)
        out << header_[i] << (i + 1 < header_.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    return out.str();
}

}  // namespace urllc::report
