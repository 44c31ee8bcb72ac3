#include "urllc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>

#include "urllc/errors.hpp"
#include "urllc/exact_queue.hpp"

namespace urllc::simulator {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent substream per (replication, class, purpose); adding a class never
// perturbs existing streams.
std::uint64_t stream_seed(std::uint64_t master, int rep, int cls, int purpose) {
    std::uint64_t x = splitmix(master ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rep + 1)));
    x = splitmix(x ^ (0xC2B2AE3D27D4EB4FULL * static_cast<std::uint64_t>(cls + 1)));
    return splitmix(x ^ (0x165667B19E3779F9ULL * static_cast<std::uint64_t>(purpose + 1)));
}

// mt19937_64 output is pinned by the standard; the transforms are hand-rolled
// so sample paths are reproducible across library implementations.
struct Stream {
    std::mt19937_64 eng;
    explicit Stream(std::uint64_t seed) : eng(seed) {}
    double u01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }  // [0, 1)
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }
    bool bernoulli(double p) { return u01() < p; }
};

// 97.5% Student-t quantiles for small replication counts.
double t_quantile_975(int df) {
    static constexpr double kT[] = {0.0,    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                    2.306,  2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
                                    2.120,  2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                    2.064,  2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) return 0.0;
    if (df <= 30) return kT[df];
    return 1.96;
}

enum class EvType : std::uint8_t { StageEnd, Arrival, FeedbackEnd };

struct Ev {
    double time;
    std::uint8_t rank;  // 0 = bandwidth release, 1 = admission-side events
    std::uint64_t seq;
    EvType type;
    int cls;
    int stage;
    std::int64_t pkt;
};

struct EvOrder {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.rank != b.rank) return a.rank > b.rank;
        return a.seq > b.seq;
    }
};

struct Packet {
    double arrival_time;
    int cls;
    int stage;
    bool counted;
};

struct RepResult {
    struct PerClass {
        std::int64_t arrivals = 0, delivered = 0, blocked_dropped = 0, decode_exhausted = 0,
                     in_flight = 0, delivered_within = 0;
        double delay_sum = 0.0;
        std::vector<std::int64_t> requests, blocked, delivered_by_stage;
        std::vector<double> occupancy_int;
        double blocked_time = 0.0;
    };
    std::vector<PerClass> per_class;
    double occ_int = 0.0, occ2_int = 0.0;
};

struct Engine {
    const SimConfig& cfg;
    const exact_queue::BandwidthGrid& grid;
    std::uint64_t rep;

    std::priority_queue<Ev, std::vector<Ev>, EvOrder> heap;
    std::vector<Packet> pool;
    std::vector<std::int64_t> free_slots;
    std::vector<Stream> arrivals_rng, decode_rng;
    std::vector<std::int64_t> alive;

    std::int64_t occupied = 0;
    double occupied_hz = 0.0;
    double now = 0.0;
    std::uint64_t seq = 0;
    std::vector<std::vector<std::int64_t>> stage_count;  // per class, per stage

    RepResult res;
    std::vector<TraceRow>* trace = nullptr;

    Engine(const SimConfig& c, const exact_queue::BandwidthGrid& g, int rep_index)
        : cfg(c), grid(g), rep(static_cast<std::uint64_t>(rep_index)) {
        const std::size_t C = cfg.system.classes.size();
        res.per_class.resize(C);
        alive.assign(C, 0);
        for (std::size_t i = 0; i < C; ++i) {
            const int m = cfg.system.classes[i].scheme.stages;
            res.per_class[i].requests.assign(m, 0);
            res.per_class[i].blocked.assign(m, 0);
            res.per_class[i].delivered_by_stage.assign(m + 1, 0);
            res.per_class[i].occupancy_int.assign(m, 0.0);
            stage_count.emplace_back(m, 0);
            arrivals_rng.emplace_back(stream_seed(cfg.seed, rep, static_cast<int>(i), 0));
            decode_rng.emplace_back(stream_seed(cfg.seed, rep, static_cast<int>(i), 1));
        }
    }

    std::int64_t alloc(int cls, double t, bool counted) {
        std::int64_t id;
        if (!free_slots.empty()) {
            id = free_slots.back();
            free_slots.pop_back();
        } else {
            id = static_cast<std::int64_t>(pool.size());
            pool.push_back({});
        }
        pool[id] = Packet{t, cls, 0, counted};
        return id;
    }

    void push(double time, std::uint8_t rank, EvType type, int cls, int stage, std::int64_t pkt) {
        heap.push(Ev{time, rank, seq++, type, cls, stage, pkt});
    }

    void integrate_to(double t) {
        const double tt = std::min(t, cfg.horizon);
        const double lo = std::max(now, cfg.warmup);
        if (tt > lo) {
            const double dt = tt - lo;
            res.occ_int += occupied_hz * dt;
            res.occ2_int += occupied_hz * occupied_hz * dt;
            for (std::size_t c = 0; c < stage_count.size(); ++c) {
                if (occupied + grid.weights[c] > grid.capacity)
                    res.per_class[c].blocked_time += dt;
                for (std::size_t m = 0; m < stage_count[c].size(); ++m)
                    res.per_class[c].occupancy_int[m] +=
                        static_cast<double>(stage_count[c][m]) * dt;
            }
        }
        if (tt > now) now = tt;
    }

    void release(int cls, int stage) {
        occupied -= grid.weights[cls];
        occupied_hz = static_cast<double>(occupied) * grid.unit;
        --stage_count[cls][stage - 1];
    }

    void finalize(std::int64_t pkt) {
        if (pool[pkt].counted) --alive[pool[pkt].cls];
        free_slots.push_back(pkt);
    }

    // A first transmission or retransmission request at time t (Assumption:
    // blocked requests drop the packet permanently).
    void attempt(std::int64_t pkt, int stage, double t) {
        Packet& p = pool[pkt];
        p.stage = stage;
        const int cls = p.cls;
        auto& pc = res.per_class[cls];
        if (p.counted) ++pc.requests[stage - 1];
        const auto& scheme = cfg.system.classes[cls].scheme;
        if (occupied + grid.weights[cls] <= grid.capacity) {
            occupied += grid.weights[cls];
            if (occupied > grid.capacity)
                throw std::logic_error("simulator: occupied bandwidth exceeded W");
            occupied_hz = static_cast<double>(occupied) * grid.unit;
            ++stage_count[cls][stage - 1];
            push(t + scheme.duration, 0, EvType::StageEnd, cls, stage, pkt);
        } else {
            if (p.counted) {
                ++pc.blocked[stage - 1];
                ++pc.blocked_dropped;
                if (trace) trace->push_back({cls, stage, t, t, "blocked"});
            }
            finalize(pkt);
        }
    }

    void run() {
        for (std::size_t c = 0; c < cfg.system.classes.size(); ++c) {
            const double rate = cfg.system.classes[c].traffic.arrival_rate;
            if (rate > 0.0)
                push(arrivals_rng[c].exponential(rate), 1, EvType::Arrival,
                     static_cast<int>(c), 0, -1);
        }
        while (!heap.empty()) {
            const Ev ev = heap.top();
            if (ev.time > cfg.horizon) break;
            heap.pop();
            integrate_to(ev.time);
            switch (ev.type) {
                case EvType::Arrival: {
                    const int cls = ev.cls;
                    const auto& tr = cfg.system.classes[cls].traffic;
                    const bool counted = ev.time >= cfg.warmup;
                    auto& pc = res.per_class[cls];
                    if (counted) {
                        ++pc.arrivals;
                        ++alive[cls];
                    }
                    attempt(alloc(cls, ev.time, counted), 1, ev.time);
                    push(ev.time + arrivals_rng[cls].exponential(tr.arrival_rate), 1,
                         EvType::Arrival, cls, 0, -1);
                    break;
                }
                case EvType::StageEnd: {
                    release(ev.cls, ev.stage);
                    push(ev.time + cfg.system.classes[ev.cls].traffic.feedback_delay, 1,
                         EvType::FeedbackEnd, ev.cls, ev.stage, ev.pkt);
                    break;
                }
                case EvType::FeedbackEnd: {
                    const int cls = ev.cls;
                    const auto& cc = cfg.system.classes[cls];
                    Packet& p = pool[ev.pkt];
                    auto& pc = res.per_class[cls];
                    const bool failed = decode_rng[cls].bernoulli(cc.scheme.stage_failure_prob);
                    const double tx_end = ev.time - cc.traffic.feedback_delay;
                    const double tx_start = tx_end - cc.scheme.duration;
                    if (!failed) {
                        if (p.counted) {
                            ++pc.delivered;
                            ++pc.delivered_by_stage[ev.stage];
                            const double delay = ev.time - p.arrival_time;
                            pc.delay_sum += delay;
                            if (delay <= cc.traffic.deadline * (1.0 + 1e-12)) ++pc.delivered_within;
                            if (trace) trace->push_back({cls, ev.stage, tx_start, tx_end, "decoded"});
                        }
                        finalize(ev.pkt);
                    } else if (ev.stage >= cc.scheme.stages) {
                        if (p.counted) {
                            ++pc.decode_exhausted;
                            if (trace) trace->push_back({cls, ev.stage, tx_start, tx_end, "failed"});
                        }
                        finalize(ev.pkt);
                    } else {
                        if (p.counted && trace)
                            trace->push_back({cls, ev.stage, tx_start, tx_end, "failed"});
                        attempt(ev.pkt, ev.stage + 1, ev.time);
                    }
                    break;
                }
            }
        }
        integrate_to(cfg.horizon);
        for (std::size_t c = 0; c < alive.size(); ++c) {
            res.per_class[c].in_flight = alive[c];
            const auto& pc = res.per_class[c];
            if (pc.arrivals !=
                pc.delivered + pc.blocked_dropped + pc.decode_exhausted + pc.in_flight)
                throw std::logic_error("simulator: packet conservation violated");
        }
    }
};

Estimate reduce(const std::vector<double>& per_rep) {
    Estimate e;
    const auto n = per_rep.size();
    if (n == 0) return e;
    double sum = 0.0;
    for (double v : per_rep) sum += v;
    e.value = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : per_rep) ss += (v - e.value) * (v - e.value);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        e.half_width = t_quantile_975(static_cast<int>(n - 1)) * sd / std::sqrt(static_cast<double>(n));
    }
    return e;
}

double ratio(std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

double default_warmup(const SystemConfig& system) {
    double dmax = 0.0;
    for (const auto& c : system.classes) dmax = std::max(dmax, c.traffic.deadline);
    return 10.0 * dmax;
}

double default_horizon(const SystemConfig& system, double warmup) {
    double dmax = 0.0;
    double min_rate = std::numeric_limits<double>::infinity();
    for (const auto& c : system.classes) {
        dmax = std::max(dmax, c.traffic.deadline);
        if (c.traffic.arrival_rate > 0.0) {
            min_rate = std::min(min_rate, c.traffic.arrival_rate);
            const double exhaust =
                c.traffic.arrival_rate * std::pow(c.scheme.stage_failure_prob, c.scheme.stages);
            if (exhaust > 0.0) min_rate = std::min(min_rate, exhaust);
        }
    }
    const double floor_t = std::max(1000.0 * dmax, 10.0 * dmax);
    const double cap_t = std::max(120.0, floor_t);
    double needed = std::isfinite(min_rate) ? 100.0 / min_rate : floor_t;
    needed = std::clamp(needed, floor_t, cap_t);
    return warmup + needed;
}

SimReport simulate(const SimConfig& config, int threads, const TraceSink* trace) {
    validate(config.system);
    if (!(config.warmup >= 0.0)) throw ValidationError("warmup must be >= 0");
    if (!(config.horizon > config.warmup)) throw ValidationError("horizon must exceed warmup");
    if (config.replications < 1) throw ValidationError("replications must be >= 1");

    const std::size_t C = config.system.classes.size();
    std::vector<double> stage_bw;
    for (const auto& c : config.system.classes) stage_bw.push_back(c.scheme.stage_bandwidth);
    const auto grid = exact_queue::make_bandwidth_grid(stage_bw, config.system.bandwidth);

    const int R = config.replications;
    std::vector<RepResult> results(R);
    std::vector<std::vector<TraceRow>> traces(trace ? 1 : 0);

    const int workers = std::clamp(threads, 1, R);
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= R) return;
            Engine eng(config, grid, rep);
            if (trace && rep == 0) eng.trace = &traces[0];
            eng.run();
            results[rep] = std::move(eng.res);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool_threads;
        for (int w = 0; w < workers; ++w) pool_threads.emplace_back(work);
        for (auto& t : pool_threads) t.join();
    }

    if (trace)
        for (const auto& row : traces[0]) (*trace)(row);

    SimReport report;
    report.horizon = config.horizon;
    report.warmup = config.warmup;
    report.seed = config.seed;
    report.replications = R;
    const double T = config.horizon - config.warmup;

    {  // system-wide occupancy
        std::vector<double> mean_v, var_v;
        for (const auto& r : results) {
            const double mean = r.occ_int / T;
            mean_v.push_back(mean);
            var_v.push_back(std::max(0.0, r.occ2_int / T - mean * mean));
        }
        report.occupancy_mean = reduce(mean_v);
        report.occupancy_variance = reduce(var_v);
    }

    report.per_class.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        auto& out = report.per_class[c];
        const int m = config.system.classes[c].scheme.stages;
        const auto& scheme = config.system.classes[c].scheme;
        const auto& traffic = config.system.classes[c].traffic;

        std::vector<double> block_v, ablock_v, tfrac_v, dfail_v, qos_v, dmean_v;
        for (const auto& r : results) {
            const auto& pc = r.per_class[c];
            out.arrivals += pc.arrivals;
            out.delivered += pc.delivered;
            out.blocked_dropped += pc.blocked_dropped;
            out.decode_exhausted += pc.decode_exhausted;
            out.in_flight += pc.in_flight;
            std::int64_t req = 0, blk = 0;
            for (int s = 0; s < m; ++s) { req += pc.requests[s]; blk += pc.blocked[s]; }
            block_v.push_back(ratio(blk, req));
            ablock_v.push_back(ratio(pc.blocked[0], pc.requests[0]));
            tfrac_v.push_back(pc.blocked_time / T);
            dfail_v.push_back(ratio(pc.decode_exhausted, pc.arrivals));
            qos_v.push_back(pc.arrivals > 0 ? 1.0 - ratio(pc.delivered_within, pc.arrivals) : 0.0);
            dmean_v.push_back(pc.delivered > 0 ? pc.delay_sum / static_cast<double>(pc.delivered)
                                               : 0.0);
        }
        out.blocking_rate = reduce(block_v);
        out.arrival_blocking = reduce(ablock_v);
        out.time_blocked_fraction = reduce(tfrac_v);
        out.decode_failure_rate = reduce(dfail_v);
        out.qos_violation_rate = reduce(qos_v);
        out.delay_mean = reduce(dmean_v);

        out.per_stage.resize(m);
        for (int s = 0; s < m; ++s) {
            std::vector<double> srate_v, socc_v;
            for (const auto& r : results) {
                const auto& pc = r.per_class[c];
                out.per_stage[s].requests += pc.requests[s];
                out.per_stage[s].blocked += pc.blocked[s];
                srate_v.push_back(ratio(pc.blocked[s], pc.requests[s]));
                socc_v.push_back(pc.occupancy_int[s] / T);
            }
            out.per_stage[s].blocking_rate = reduce(srate_v);
            out.per_stage[s].mean_occupancy = reduce(socc_v);
        }

        // pooled delay percentiles over the discrete per-stage delay values
        std::vector<std::int64_t> pooled(m + 1, 0);
        std::int64_t total = 0;
        for (const auto& r : results)
            for (int s = 1; s <= m; ++s) {
                pooled[s] += r.per_class[c].delivered_by_stage[s];
                total += r.per_class[c].delivered_by_stage[s];
            }
        auto percentile = [&](double q) {
            if (total == 0) return 0.0;
            const double target = q * static_cast<double>(total);
            std::int64_t cum = 0;
            for (int s = 1; s <= m; ++s) {
                cum += pooled[s];
                if (static_cast<double>(cum) >= target)
                    return static_cast<double>(s) * (scheme.duration + traffic.feedback_delay);
            }
            return static_cast<double>(m) * (scheme.duration + traffic.feedback_delay);
        };
        out.delay_p99 = percentile(0.99);
        out.delay_p999 = percentile(0.999);
    }

    if (R == 1)
        report.warnings.push_back("single replication: confidence half-widths are zero");
    for (std::size_t c = 0; c < C; ++c) {
        const auto& cc = config.system.classes[c];
        if (cc.traffic.arrival_rate <= 0.0) continue;
        const double exhaust_rate =
            cc.traffic.arrival_rate * std::pow(cc.scheme.stage_failure_prob, cc.scheme.stages);
        const double expected = exhaust_rate * T * R;
        if (exhaust_rate > 0.0 && expected < 100.0)
            report.warnings.push_back(
                class_label(cc, c) + ": expected decode-exhaust count " +
                std::to_string(expected) +
                " < 100; rare-event estimates at this horizon are unreliable");
    }
    return report;
}

ValidationDiff validate_against_exact(const SimConfig& config, double k_sigmas, int threads) {
    std::vector<exact_queue::LossClass> loss;
    for (std::size_t c = 0; c < config.system.classes.size(); ++c) {
        const auto& cc = config.system.classes[c];
        if (cc.scheme.stages != 1)
            throw ValidationError(class_label(cc, c) +
                                  ": exact validation needs one-shot (single-stage) schemes");
        loss.push_back({cc.traffic.arrival_rate, cc.scheme.stage_bandwidth, cc.scheme.duration});
    }
    const auto exact =
        exact_queue::blocking_probability(loss, config.system.bandwidth).per_class_blocking;
    const auto sim = simulate(config, threads);

    ValidationDiff diff;
    diff.pass = true;
    for (std::size_t c = 0; c < exact.size(); ++c) {
        ValidationRow row;
        row.exact = exact[c];
        row.simulated = sim.per_class[c].arrival_blocking;
        const double err = std::abs(row.simulated.value - row.exact);
        row.sigmas = row.simulated.half_width > 0.0
                         ? err / row.simulated.half_width
                         : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        row.pass = err <= k_sigmas * row.simulated.half_width || err == 0.0;
        diff.pass = diff.pass && row.pass;
        diff.per_class.push_back(row);
    }
    return diff;
}

}  // namespace urllc::simulator
