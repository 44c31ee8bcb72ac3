#include "urllc/harq_optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "urllc/errors.hpp"

namespace urllc::harq_optimizer {

namespace {

// Expected transmissions sum_{j=0}^{terms-1} p^j; p stays well below 1 on the
// feasible range (p <= delta^(1/m)).
double geometric_sum(double p, int terms) {
    if (p <= 0.0) return 1.0;
    if (p >= 1.0 - 1e-12) return static_cast<double>(terms);
    return (1.0 - std::pow(p, terms)) / (1.0 - p);
}

struct InnerProblem {
    channel::LinkSpec link;
    int stages;
    double stage_duration;
    Regime regime;

    // per-unit-lambda, kappa = 1 objective; kappa scaling is applied by callers
    double value(double r) const {
        const double p = channel::failure_probability(r, link);
        const double g = geometric_sum(p, stages);
        const double base = regime == Regime::variance_dominated ? r * r / stage_duration : r;
        return base * g;
    }
    double base(double r) const {
        return regime == Regime::variance_dominated ? r * r / stage_duration : r;
    }
};

// Minimize over real r >= r_feas: bracket by base(r) > F(r_feas), coarse scan,
// golden-section refinement.
std::pair<double, double> minimize_blocklength(const InnerProblem& prob, double r_feas) {
    const double f0 = prob.value(r_feas);
    double hi = r_feas;
    while (prob.base(hi) <= f0) hi *= 1.25;

    constexpr int kScan = 256;
    double best_x = r_feas, best_f = f0;
    for (int k = 0; k <= kScan; ++k) {
        const double x = r_feas + (hi - r_feas) * k / kScan;
        const double f = prob.value(x);
        if (f < best_f) { best_f = f; best_x = x; }
    }
    const double step = (hi - r_feas) / kScan;
    double a = std::max(r_feas, best_x - step);
    double b = std::min(hi, best_x + step);
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = prob.value(c), fd = prob.value(d);
    for (int it = 0; it < 160 && (b - a) > 1e-12 * b; ++it) {
        if (fc < fd) { b = d; d = c; fd = fc; c = b - kInvPhi * (b - a); fc = prob.value(c); }
        else         { a = c; c = d; fc = fd; d = a + kInvPhi * (b - a); fd = prob.value(d); }
    }
    const double x = 0.5 * (a + b);
    const double f = prob.value(x);
    if (f0 <= f) return {r_feas, f0};  // boundary optimum
    return {x, f};
}

double per_stage_target(double delta, int m) {
    return m == 1 ? delta : std::exp(std::log(delta) / m);
}

}  // namespace

long long minimal_blocklength_for_stage_target(const channel::LinkSpec& link, double per_stage_p) {
    if (!(per_stage_p > 0.0 && per_stage_p < 1.0))
        throw std::domain_error("per-stage failure target must be in (0, 1)");
    const double r_real = channel::blocklength_for_reliability(link, per_stage_p);
    long long r = static_cast<long long>(std::ceil(r_real - 1e-9));
    if (r < 1) r = 1;
    while (channel::failure_probability(static_cast<double>(r), link) > per_stage_p) ++r;
    while (r > 1 && channel::failure_probability(static_cast<double>(r - 1), link) <= per_stage_p) --r;
    return r;
}

RegimeObjective objective_for_scheme(const HarqScheme& scheme, Regime regime, double lambda,
                                     double kappa, bool include_final_term) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    const int terms = scheme.stages + (include_final_term ? 1 : 0);
    const double g = geometric_sum(scheme.stage_failure_prob, terms);
    RegimeObjective out;
    out.regime = regime;
    if (regime == Regime::variance_dominated)
        out.value = lambda / (kappa * kappa) *
                    (scheme.blocklength * scheme.blocklength / scheme.duration) * g;
    else
        out.value = lambda / kappa * scheme.blocklength * g;
    return out;
}

OptimizationResult optimize(const TrafficClass& cls, Regime regime, double bandwidth,
                            double kappa, int m_max) {
    if (m_max < 1) throw ValidationError("m_max must be >= 1");
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    if (!(cls.deadline > cls.feedback_delay))
        throw ValidationError("deadline must exceed the feedback delay");
    if (!(cls.reliability_eps > 0.0 && cls.reliability_eps < 1.0))
        throw ValidationError("reliability target must be in (0, 1)");
    const channel::LinkSpec link{cls.sinr_linear, cls.payload_bits};

    OptimizationResult result;
    result.objective.regime = regime;
    int best_m = -1;
    double best_obj = 0.0;

    for (int m = 1; m <= m_max; ++m) {
        PerMRow row;
        row.stages = m;
        const double s = cls.deadline / m - cls.feedback_delay;
        row.stage_duration = s;
        if (!(s > 0.0)) {
            row.infeasible_reason = "stage duration d/m - f <= 0";
            result.per_m_table.push_back(row);
            continue;
        }
        const double target = per_stage_target(cls.reliability_eps, m);
        const double r_feas = channel::blocklength_for_reliability(link, target);
        const auto [r_opt, obj] = minimize_blocklength({link, m, s, regime}, r_feas);

        row.blocklength = r_opt;
        row.stage_bandwidth = r_opt / (kappa * s);
        row.stage_failure_prob = channel::failure_probability(r_opt, link);
        row.objective = regime == Regime::variance_dominated ? obj / (kappa * kappa) : obj / kappa;

        // the materialized scheme must fit in the system bandwidth
        const double r_int = std::max(1.0, std::ceil(r_opt - 1e-9));
        if (r_int / (kappa * s) > bandwidth * (1.0 + 1e-12)) {
            row.infeasible_reason = "stage bandwidth exceeds W";
            result.per_m_table.push_back(row);
            continue;
        }
        row.feasible = true;
        result.per_m_table.push_back(row);

        if (best_m < 0 || row.objective < best_obj * (1.0 - 1e-9)) {
            best_m = m;
            best_obj = row.objective;
        }
    }

    if (best_m < 0) {
        std::string why = "no feasible stage count in 1.." + std::to_string(m_max) + ":";
        for (const auto& row : result.per_m_table)
            why += " m=" + std::to_string(row.stages) + ": " + row.infeasible_reason + ";";
        throw InfeasibilityError(why);
    }

    const PerMRow& best = result.per_m_table[static_cast<std::size_t>(best_m - 1)];
    result.objective.value = best.objective;

    HarqScheme scheme;
    scheme.stages = best_m;
    scheme.blocklength = std::max(1.0, std::ceil(best.blocklength - 1e-9));
    scheme.duration = best.stage_duration;
    scheme.stage_bandwidth = scheme.blocklength / (kappa * scheme.duration);
    scheme.stage_failure_prob = channel::failure_probability(scheme.blocklength, link);
    result.best_scheme = scheme;
    return result;
}

std::vector<PerMRow> sweep_table(const TrafficClass& cls, Regime regime, double lambda,
                                 double kappa, int m_max, double bandwidth) {
    auto result = optimize(cls, regime, bandwidth, kappa, m_max);
    for (auto& row : result.per_m_table) row.objective *= lambda;
    return std::move(result.per_m_table);
}

}  // namespace urllc::harq_optimizer
