#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/dimensioning.hpp"
#include "urllc/errors.hpp"

using namespace urllc;
using namespace urllc::dimensioning;

namespace {

TrafficClass default_class() {
    TrafficClass t;
    t.arrival_rate = 1e4;
    t.payload_bits = 256;
    t.sinr_linear = 10.0;
    t.deadline = 1e-3;
    t.reliability_eps = 1e-6;
    t.feedback_delay = 0.0;
    return t;
}

SystemConfig harq_system(int stages, double r, double s, double p, double lambda, double f,
                         double d, double kappa = 1.0) {
    SystemConfig sys;
    sys.bandwidth = 1e12;
    sys.channel_use_density = kappa;
    ConfiguredClass cc;
    cc.traffic = default_class();
    cc.traffic.arrival_rate = lambda;
    cc.traffic.feedback_delay = f;
    cc.traffic.deadline = d;
    cc.scheme = HarqScheme{stages, r, s, r / (kappa * s), p};
    sys.classes.push_back(cc);
    return sys;
}

}  // namespace

TEST_CASE("one-shot staffing basics") {
    SUBCASE("empty load") {
        std::vector<OneShotClassLoad> cs{{0.0, 93.0, 1e-3}};
        const auto res = one_shot_staffing(cs, 1e-6, 1.0);
        CHECK(res.required_bandwidth == 0.0);
    }
    SUBCASE("delta = 0.5 gives the mean exactly") {
        std::vector<OneShotClassLoad> cs{{1e4, 93.0, 1e-3}, {2e3, 200.0, 2e-3}};
        const auto res = one_shot_staffing(cs, 0.5, 1.0);
        CHECK(res.safety_coefficient == 0.0);
        CHECK(res.required_bandwidth == res.mean_utilization);
    }
    SUBCASE("composed with the channel model") {
        const double r = channel::blocklength_for_reliability({10.0, 256}, 1e-6);
        CHECK(r == doctest::Approx(93.04272530978336).epsilon(1e-12));
        std::vector<OneShotClassLoad> cs{{1e4, r, 1e-3}};
        const auto res = one_shot_staffing(cs, 1e-6, 1.0);
        CHECK(res.mean_utilization == doctest::Approx(930427.2530978336).epsilon(1e-12));
        CHECK(res.utilization_variance == doctest::Approx(86569487330.71802).epsilon(1e-12));
        CHECK(res.required_bandwidth == doctest::Approx(2329012.7024954255).epsilon(1e-12));
    }
    SUBCASE("domain errors") {
        std::vector<OneShotClassLoad> cs{{1.0, 93.0, 1e-3}};
        CHECK_THROWS_AS(one_shot_staffing(cs, 0.0, 1.0), std::domain_error);
        CHECK_THROWS_AS(one_shot_staffing(cs, 1.0, 1.0), std::domain_error);
    }
}

TEST_CASE("staffing monotonicity") {
    const double r0 = 93.0;
    std::vector<OneShotClassLoad> base{{1e4, r0, 1e-3}};
    const double w0 = one_shot_staffing(base, 1e-6, 1.0).required_bandwidth;
    {
        std::vector<OneShotClassLoad> cs{{1.2e4, r0, 1e-3}};
        CHECK(one_shot_staffing(cs, 1e-6, 1.0).required_bandwidth > w0);
    }
    {
        std::vector<OneShotClassLoad> cs{{1e4, r0 * 1.1, 1e-3}};
        CHECK(one_shot_staffing(cs, 1e-6, 1.0).required_bandwidth > w0);
    }
    CHECK(one_shot_staffing(base, 1e-7, 1.0).required_bandwidth > w0);
}

TEST_CASE("harq staffing") {
    SUBCASE("one-stage schemes reduce bit-exactly to the one-shot rule") {
        SystemConfig sys = harq_system(1, 93.0, 0.875e-3, 3.4e-7, 1e4, 0.125e-3, 1e-3);
        ConfiguredClass second;
        second.traffic = default_class();
        second.traffic.arrival_rate = 3e3;
        second.traffic.feedback_delay = 0.25e-3;
        second.scheme = HarqScheme{1, 210.0, 0.75e-3, 280.0, 1e-7};
        sys.classes.push_back(second);

        const auto h = harq_staffing(sys, 1e-6);
        std::vector<OneShotClassLoad> cs{{1e4, 93.0, 0.875e-3}, {3e3, 210.0, 0.75e-3}};
        const auto o = one_shot_staffing(cs, 1e-6, 1.0);
        CHECK(h.mean_utilization == o.mean_utilization);
        CHECK(h.utilization_variance == o.utilization_variance);
        CHECK(h.required_bandwidth == o.required_bandwidth);
    }
    SUBCASE("homogeneous scheme matches the geometric series") {
        const double p = 0.02, r = 82.0, s = 0.125e-3, lambda = 5e3;
        const int m = 4;
        const auto h = harq_staffing(harq_system(m, r, s, p, lambda, 0.125e-3, 1e-3), 1e-6);
        const double geo = (1.0 - std::pow(p, m)) / (1.0 - p);
        CHECK(h.mean_utilization == doctest::Approx(lambda * r * geo).epsilon(1e-12));
        CHECK(h.utilization_variance == doctest::Approx(lambda * r * r / s * geo).epsilon(1e-12));
    }
    SUBCASE("p = 0 counts only first transmissions") {
        const auto h = harq_staffing(harq_system(3, 82.0, 0.2e-3, 0.0, 5e3, 0.1e-3, 1e-3), 1e-6);
        CHECK(h.mean_utilization == doctest::Approx(5e3 * 82.0).epsilon(1e-14));
    }
    SUBCASE("deadline violation names the class") {
        SystemConfig sys = harq_system(4, 82.0, 0.3e-3, 0.01, 5e3, 0.1e-3, 1e-3);
        sys.classes[0].name = "edge-users";
        CHECK_THROWS_WITH_AS(harq_staffing(sys, 1e-6),
                             doctest::Contains("edge-users"), ValidationError);
    }
}

TEST_CASE("single-class capacity") {
    SUBCASE("no safety margin at delta = 0.5") {
        TrafficClass t = default_class();
        t.reliability_eps = 0.5;
        const double r = channel::blocklength_for_reliability({t.sinr_linear, t.payload_bits}, 0.5);
        const auto cap = single_class_capacity(1e6, t, 1.0);
        CHECK(cap.feasible);
        CHECK(cap.lambda_star == doctest::Approx(1e6 / r).epsilon(1e-14));
    }
    SUBCASE("frozen point") {
        const auto cap = single_class_capacity(1e6, default_class(), 1.0);
        CHECK(cap.lambda_star == doctest::Approx(2797.41821420462).epsilon(1e-12));
    }
    SUBCASE("fixed point with the staffing rule") {
        std::mt19937_64 rng(20240917ULL);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        int tested = 0;
        while (tested < 100) {
            TrafficClass t = default_class();
            t.payload_bits = 64 + static_cast<int>(u01(rng) * 1936);
            t.sinr_linear = std::pow(10.0, 2.0 * u01(rng));        // 1 .. 100
            t.deadline = 0.5e-3 * std::pow(4.0, u01(rng));         // 0.5 .. 2 ms
            t.reliability_eps = std::pow(10.0, -7.0 + 5.0 * u01(rng));
            const double kappa = 0.5 + 1.5 * u01(rng);
            const double r = channel::blocklength_for_reliability(
                {t.sinr_linear, t.payload_bits}, t.reliability_eps);
            const double wmin = r / (kappa * t.deadline);
            const double w = wmin * std::pow(10.0, 0.1 + 3.0 * u01(rng));
            const auto cap = single_class_capacity(w, t, kappa);
            REQUIRE(cap.feasible);
            std::vector<OneShotClassLoad> cs{{cap.lambda_star, r, t.deadline}};
            const double w_back = one_shot_staffing(cs, t.reliability_eps, kappa).required_bandwidth;
            CHECK(std::abs(w_back - w) / w <= 1e-8);
            ++tested;
        }
    }
    SUBCASE("infeasible bandwidth flags zero capacity") {
        TrafficClass t = default_class();
        const auto cap = single_class_capacity(1e3, t, 1.0);  // kappa W d = 1 < r ~ 93
        CHECK_FALSE(cap.feasible);
        CHECK(cap.lambda_star == 0.0);
    }
    SUBCASE("doubling W at large W doubles capacity within 1%") {
        TrafficClass t = default_class();
        const double w = 1e10;
        const double l1 = single_class_capacity(w, t, 1.0).lambda_star;
        const double l2 = single_class_capacity(2.0 * w, t, 1.0).lambda_star;
        CHECK(std::abs(l2 / l1 - 2.0) / 2.0 <= 0.01);
    }
}

TEST_CASE("scaling curves") {
    TrafficClass t = default_class();
    SUBCASE("bandwidth sweep ratios approach 2 monotonically") {
        const double base = 1e5;
        std::vector<double> grid{10 * base, 20 * base, 40 * base, 80 * base};
        const auto curve = scaling_curves(t, 1e6, 1.0, SweepVariable::bandwidth, grid);
        REQUIRE(curve.size() == 4);
        double prev_ratio = 1e9;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            const double ratio = curve[i].lambda_star / curve[i - 1].lambda_star;
            CHECK(ratio > 2.0);
            CHECK(ratio < prev_ratio);
            prev_ratio = ratio;
        }
    }
    SUBCASE("reliability sweep band") {
        std::vector<double> grid{1e-6, 1e-5, 1e-4, 1e-3};
        const auto curve = scaling_curves(t, 1e6, 1.0, SweepVariable::reliability, grid);
        double lo = 1e300, hi = 0.0;
        for (const auto& pt : curve) {
            lo = std::min(lo, pt.diagnostic_ratio);
            hi = std::max(hi, pt.diagnostic_ratio);
        }
        CHECK(hi / lo <= 2.0);
    }
    SUBCASE("deadline sweep: concave increasing") {
        std::vector<double> grid;
        for (int k = 0; k < 8; ++k) grid.push_back(1e-3 + 0.5e-3 * k);
        const auto curve = scaling_curves(t, 1e6, 1.0, SweepVariable::deadline, grid);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].lambda_star > curve[i - 1].lambda_star);
        for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
            const double second_diff =
                curve[i + 1].lambda_star - 2.0 * curve[i].lambda_star + curve[i - 1].lambda_star;
            CHECK(second_diff <= 1e-9);
        }
    }
    SUBCASE("single-point sweep equals the direct call") {
        std::vector<double> grid{1e6};
        const auto curve = scaling_curves(t, 5e5, 1.0, SweepVariable::bandwidth, grid);
        CHECK(curve[0].lambda_star == single_class_capacity(1e6, t, 1.0).lambda_star);
    }
    SUBCASE("non-increasing grid rejected") {
        std::vector<double> grid{2.0, 1.0};
        CHECK_THROWS_AS(scaling_curves(t, 1e6, 1.0, SweepVariable::bandwidth, grid),
                        ValidationError);
    }
}
