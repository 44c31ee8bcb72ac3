// Report envelope and CSV emission helpers shared by the CLI subcommands.
#pragma once

#include <string>
#include <vector>

namespace urllc::report {

inline constexpr const char* kToolVersion = "1.0.0";

struct Envelope {
    std::string tool_version = kToolVersion;
    std::string scenario_digest;
    std::string command;
    std::string timestamp;  // ISO 8601 UTC
};

std::string iso8601_utc_now();

/// One-line JSON rendering of the envelope (logged to stderr; the payload file
/// itself stays byte-reproducible).
std::string envelope_line(const Envelope& e);

/// Fixed 12-significant-digit float formatting for stable CSV output.
std::string format_number(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> cells);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace urllc::report
