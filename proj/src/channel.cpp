#include "urllc/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace urllc::channel {

namespace {

constexpr double kLog2E = 1.4426950408889634;  // log2(e)
constexpr double kSqrt2 = 1.4142135623730951;

void require_link(const LinkSpec& link) {
    if (!(link.sinr_linear > 0.0))
        throw std::domain_error("sinr_linear must be > 0, got " + std::to_string(link.sinr_linear));
    if (link.payload_bits < 1)
        throw std::domain_error("payload_bits must be >= 1, got " + std::to_string(link.payload_bits));
}

double phi(double x) {  // standard normal density
    return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

}  // namespace

double shannon_capacity(double sinr_linear) {
    if (!(sinr_linear > 0.0))
        throw std::domain_error("shannon_capacity: sinr_linear must be > 0");
    return std::log2(1.0 + sinr_linear);
}

double channel_dispersion(double sinr_linear) {
    if (!(sinr_linear > 0.0))
        throw std::domain_error("channel_dispersion: sinr_linear must be > 0");
    const double one_plus = 1.0 + sinr_linear;
    return kLog2E * kLog2E * (1.0 - 1.0 / (one_plus * one_plus));
}

double q_function(double x) {
    return 0.5 * std::erfc(x / kSqrt2);
}

double q_inverse(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("q_inverse: argument must be in (0, 1)");
    if (delta == 0.5) return 0.0;
    if (delta > 0.5) return -q_inverse(1.0 - delta);

    // delta in (0, 0.5): root of Q(x) - delta on [0, 40]. Newton from the
    // asymptotic seed sqrt(-2 ln delta), safeguarded by bisection.
    double lo = 0.0, hi = 40.0;
    double x = std::sqrt(-2.0 * std::log(delta));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = q_function(x) - delta;
        if (f > 0.0) lo = x; else hi = x;
        const double step = f / phi(x);  // Q' = -phi
        double next = x + step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::abs(x)) { x = next; break; }
        x = next;
    }
    return x;
}

double blocklength_for_reliability(const LinkSpec& link, double target_p) {
    require_link(link);
    if (!(target_p > 0.0 && target_p < 1.0))
        throw std::domain_error("blocklength_for_reliability: target_p must be in (0, 1)");
    const double C = shannon_capacity(link.sinr_linear);
    const double V = channel_dispersion(link.sinr_linear);
    const double L = static_cast<double>(link.payload_bits);
    const double t = q_inverse(target_p);
    // L = r C - t sqrt(r V) is quadratic in x = sqrt(r); positive root:
    const double x = (t * std::sqrt(V) + std::sqrt(t * t * V + 4.0 * C * L)) / (2.0 * C);
    return x * x;
}

double failure_probability(double blocklength, const LinkSpec& link) {
    require_link(link);
    if (!(blocklength > 0.0))
        throw std::domain_error("failure_probability: blocklength must be > 0");
    const double C = shannon_capacity(link.sinr_linear);
    const double V = channel_dispersion(link.sinr_linear);
    const double L = static_cast<double>(link.payload_bits);
    return q_function((blocklength * C - L) / std::sqrt(blocklength * V));
}

double blocklength_with_log_correction(const LinkSpec& link, double target_p) {
    require_link(link);
    if (!(target_p > 0.0 && target_p < 1.0))
        throw std::domain_error("blocklength_with_log_correction: target_p must be in (0, 1)");
    const double C = shannon_capacity(link.sinr_linear);
    const double V = channel_dispersion(link.sinr_linear);
    const double L = static_cast<double>(link.payload_bits);
    const double t = q_inverse(target_p);
    // Bits carried at blocklength r under the untruncated model.
    const auto bits = [&](double r) {
        return r * C - t * std::sqrt(r * V) + 0.5 * std::log2(r);
    };
    // The log term makes small blocklengths carry extra bits; bracket the root
    // around the truncated solution, which the correction can only shrink.
    double hi = blocklength_for_reliability(link, target_p) + 1.0;
    double lo = hi;
    while (bits(lo) > L && lo > 1e-12) lo *= 0.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bits(mid) < L) lo = mid; else hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

LogTermComparison blocklength_model_comparison(const LinkSpec& link, double target_p) {
    return {CodingPoint{blocklength_for_reliability(link, target_p), target_p},
            CodingPoint{blocklength_with_log_correction(link, target_p), target_p}};
}

}  // namespace urllc::channel
