// Finite-blocklength AWGN channel model: normal-approximation rate penalty,
// blocklength/failure-probability inversion, Gaussian tail utilities.
#pragma once

namespace urllc::channel {

// One link: linear-scale SINR (dB conversion is a CLI concern) and payload size.
struct LinkSpec {
    double sinr_linear;  // > 0
    int payload_bits;    // >= 1
};

// A (blocklength, decode-failure-probability) operating point on a link.
struct CodingPoint {
    double blocklength;    // channel uses, > 0
    double failure_prob;   // in (0, 1)
};

/// AWGN capacity log2(1 + sinr) in bits per channel use. Throws std::domain_error
/// for sinr <= 0.
double shannon_capacity(double sinr_linear);

/// Channel dispersion (log2 e)^2 (1 - (1+sinr)^-2); strictly increasing in sinr,
/// bounded above by (log2 e)^2.
double channel_dispersion(double sinr_linear);

/// Standard normal tail probability Q(x) = P(N(0,1) > x).
double q_function(double x);

/// Inverse of q_function on (0, 1); residual |Q(Q^-1(d)) - d| <= ~1e-13 * d.
double q_inverse(double delta);

/// Blocklength (real-valued channel uses) such that a codeword carrying
/// link.payload_bits fails to decode with probability exactly target_p under the
/// truncated normal approximation L = r*C - Q^-1(p) sqrt(r*V). Exact algebraic
/// inverse of failure_probability; collapses to L/C at target_p = 0.5.
double blocklength_for_reliability(const LinkSpec& link, double target_p);

/// Decode failure probability p = Q((r*C - L) / sqrt(r*V)); strictly decreasing
/// in r, equal to 0.5 at r = L/C.
double failure_probability(double blocklength, const LinkSpec& link);

/// Blocklength solving the untruncated model L = r*C - Q^-1(p) sqrt(r*V)
/// + 0.5*log2(r), for sensitivity studies only; every analytic path in the
/// toolkit uses the truncated form above.
double blocklength_with_log_correction(const LinkSpec& link, double target_p);

// One row of the truncated-vs-corrected model comparison at a common target.
struct LogTermComparison {
    CodingPoint truncated;
    CodingPoint with_log_term;
};

/// Operating points of both blocklength models at the same failure target.
LogTermComparison blocklength_model_comparison(const LinkSpec& link, double target_p);

}  // namespace urllc::channel
