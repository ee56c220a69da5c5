#pragma once

// Monte Carlo estimation of synchronization probabilities and of the OU
// large-deviation tail. Every trial owns the random stream addressed by
// (seed, trial_index), and results are reduced in trial order, so estimates
// are identical for any number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lifsync/bounds.hpp"
#include "lifsync/ou.hpp"
#include "lifsync/params.hpp"
#include "lifsync/random.hpp"
#include "lifsync/simulator.hpp"

namespace lifsync {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double confidence = 0.95) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("wilson_interval: confidence must lie in (0, 1)");
    const double z = std_normal_quantile(0.5 * (1.0 + confidence));
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    Interval ci{centre - half, centre + half};
    // pin the boundaries exactly and keep the point inside after rounding
    if (successes == 0) ci.low = 0.0;
    if (successes == trials) ci.high = 1.0;
    ci.low = std::clamp(ci.low, 0.0, p);
    ci.high = std::clamp(ci.high, p, 1.0);
    return ci;
}

// One-sided Wilson upper limit, used when no success was observed.
inline double wilson_upper_one_sided(std::uint64_t successes, std::uint64_t trials,
                                     double confidence = 0.95) {
    return wilson_interval(successes, trials, 2.0 * confidence - 1.0).high;
}

struct Estimate {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    // Trials that hit the horizon (or never fired) before the event could be
    // decided; they count as failures.
    std::uint64_t censored = 0;

    double half_width() const { return 0.5 * (ci_high - ci_low); }
};

inline Estimate make_estimate(std::uint64_t successes, std::uint64_t trials,
                              double confidence = 0.95, std::uint64_t censored = 0) {
    const Interval ci = wilson_interval(successes, trials, confidence);
    return {static_cast<double>(successes) / static_cast<double>(trials), ci.low, ci.high, trials,
            successes, censored};
}

// LIFSYNC_WORKERS if set, otherwise all hardware threads.
inline unsigned default_workers() {
    if (const char* env = std::getenv("LIFSYNC_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for every i in [0, count) on `workers` threads. fn must only
// touch state owned by index i. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                           std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct MonteCarloOptions {
    double confidence = 0.95;
    unsigned workers = 0;  // 0 = default_workers()

    unsigned resolved_workers() const { return workers ? workers : default_workers(); }
};

// Trial t uses the stream (config.seed, config.trial_index + t); sweeps that
// keep seed and trial_index share their streams (common random numbers).
inline RandomStream trial_stream(const SimConfig& cfg, std::uint64_t t,
                                 std::uint32_t substream = 0) {
    return RandomStream(cfg.seed, cfg.trial_index + t, substream);
}

// P(S_1 | synchronized start): every neuron starts at reset and we record
// whether the first firing involves the whole network.
inline Estimate estimate_stay_sync(const NetworkParams& p, const SimConfig& cfg,
                                   std::uint64_t trials, const MonteCarloOptions& opts = {}) {
    if (trials == 0) throw std::invalid_argument("estimate_stay_sync: trials must be positive");
    validate(p);
    validate(cfg);
    // 0 = failure, 1 = success, 2 = censored
    std::vector<std::uint8_t> outcome(trials, 0);
    parallel_for(trials, opts.resolved_workers(), [&](std::size_t t) {
        RandomStream rng = trial_stream(cfg, t);
        NetworkState s{std::vector<volts>(p.n_neurons, p.reset), 0.0, 0};
        const AdvanceResult r = advance_to_next_firing(std::move(s), p, cfg, rng);
        if (r.status != AdvanceStatus::fired)
            outcome[t] = 2;
        else
            outcome[t] = r.event->is_full_sync ? 1 : 0;
    });
    const auto successes = static_cast<std::uint64_t>(std::count(outcome.begin(), outcome.end(), 1));
    const auto censored = static_cast<std::uint64_t>(std::count(outcome.begin(), outcome.end(), 2));
    return make_estimate(successes, trials, opts.confidence, censored);
}

struct SyncCurve {
    std::vector<std::size_t> n_values;
    std::vector<Estimate> bs_estimates;     // P(BS_n)
    std::vector<Estimate> first_sync_pmf;   // P(BS_n \ BS_{n-1})
    std::uint64_t truncated = 0;            // trials stopped by the horizon
    std::uint64_t never_synchronized = 0;   // no synchronization within n_max
};

inline SyncCurve estimate_bs(const NetworkParams& p, const SimConfig& cfg, std::uint64_t trials,
                             std::size_t n_max, InitialCondition init,
                             const MonteCarloOptions& opts = {}) {
    if (trials == 0) throw std::invalid_argument("estimate_bs: trials must be positive");
    validate(p);
    validate(cfg);
    SyncCurve curve;
    if (n_max == 0) return curve;

    // first synchronization index per trial, 0 if none
    std::vector<std::size_t> first(trials, 0);
    std::vector<std::uint8_t> truncated(trials, 0);
    parallel_for(trials, opts.resolved_workers(), [&](std::size_t t) {
        RandomStream init_rng = trial_stream(cfg, t, 1);
        RandomStream rng = trial_stream(cfg, t, 0);
        const TrialRecord rec = run_trial(initial_potentials(init, p, init_rng), p, cfg, n_max,
                                          rng, {.stop_at_first_sync = true, .compact_events = true});
        first[t] = rec.first_sync_index.value_or(0);
        truncated[t] = rec.truncated && !rec.first_sync_index;
    });

    std::vector<std::uint64_t> hits(n_max + 1, 0);
    for (std::size_t f : first) ++hits[f];
    curve.truncated = static_cast<std::uint64_t>(std::count(truncated.begin(), truncated.end(), 1));
    curve.never_synchronized = hits[0];

    std::uint64_t cumulative = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        cumulative += hits[n];
        curve.n_values.push_back(n);
        curve.bs_estimates.push_back(make_estimate(cumulative, trials, opts.confidence));
        curve.first_sync_pmf.push_back(make_estimate(hits[n], trials, opts.confidence));
    }
    for (auto& e : curve.bs_estimates) e.censored = curve.truncated;
    return curve;
}

struct LdpPoint {
    double epsilon = 0.0;
    Estimate estimate;
    double eps_log_p = 0.0;          // eps * log(point); eps * log(ci_high) when below resolution
    double neg_rate = 0.0;           // -ldp_rate(gamma, delta, T), the limit of eps_log_p
    bool below_resolution = false;   // zero successes
};

struct LdpTailSettings {
    double gamma = 1.0;
    volts drive = 0.0;
    volts x0 = 0.0;
    volts delta = 0.0;
    seconds horizon = 0.0;

    bool operator==(const LdpTailSettings&) const = default;
};

// Whether one OU path leaves the tube |X - x| < delta around its noiseless
// flow during [0, T]. The grid uses steps of at most cfg.dt ending exactly on
// T; with bridge_correction each step also tests both tube walls.
inline bool ldp_tube_exit(const LdpTailSettings& s, double eps, const SimConfig& cfg,
                          RandomStream& rng) {
    const auto steps = static_cast<std::uint64_t>(std::ceil(s.horizon / cfg.dt));
    const seconds h = s.horizon / static_cast<double>(steps);
    const OuParams ou{s.gamma, s.drive, eps};
    const OuStep step(ou, h);
    const double decay = std::exp(-s.gamma * h);
    const double scale = -2.0 / (eps * h);
    volts x = s.x0;       // stochastic
    volts flow_x = s.x0;  // deterministic
    double dev = 0.0;
    for (std::uint64_t k = 0; k < steps; ++k) {
        x = step(x, rng);
        flow_x = (flow_x - s.drive) * decay + s.drive;
        const double next = x - flow_x;
        if (std::abs(next) >= s.delta) return true;
        if (cfg.bridge_correction) {
            const double up = scale * (s.delta - dev) * (s.delta - next);
            const double down = scale * (s.delta + dev) * (s.delta + next);
            const double hi = std::max(up, down);
            if (hi > detail::kExpUnderflow) {
                const double pu = up > detail::kExpUnderflow ? std::exp(up) : 0.0;
                const double pd = down > detail::kExpUnderflow ? std::exp(down) : 0.0;
                if (rng.uniform() < 1.0 - (1.0 - pu) * (1.0 - pd)) return true;
            }
        }
        dev = next;
    }
    return false;
}

inline std::vector<LdpPoint> estimate_ldp_tail(const LdpTailSettings& s,
                                               const std::vector<double>& eps_list,
                                               const SimConfig& cfg, std::uint64_t trials,
                                               const MonteCarloOptions& opts = {}) {
    if (trials == 0) throw std::invalid_argument("estimate_ldp_tail: trials must be positive");
    if (!(s.delta > 0.0)) throw std::invalid_argument("estimate_ldp_tail: delta must be > 0");
    if (!(s.horizon > 0.0)) throw std::invalid_argument("estimate_ldp_tail: horizon must be > 0");
    if (!(s.gamma > 0.0)) throw std::invalid_argument("estimate_ldp_tail: gamma must be > 0");
    validate(cfg);
    const double neg_rate = -ldp_rate(s.gamma, s.delta, s.horizon);

    std::vector<LdpPoint> out;
    out.reserve(eps_list.size());
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw std::invalid_argument("estimate_ldp_tail: epsilon must be > 0");
        std::vector<std::uint8_t> left(trials, 0);
        parallel_for(trials, opts.resolved_workers(), [&](std::size_t t) {
            RandomStream rng = trial_stream(cfg, t);
            left[t] = ldp_tube_exit(s, eps, cfg, rng);
        });
        const auto k = static_cast<std::uint64_t>(std::count(left.begin(), left.end(), 1));
        LdpPoint pt;
        pt.epsilon = eps;
        pt.estimate = make_estimate(k, trials, opts.confidence);
        pt.neg_rate = neg_rate;
        if (k == 0) {
            pt.below_resolution = true;
            pt.estimate.ci_high = wilson_upper_one_sided(0, trials, opts.confidence);
            pt.eps_log_p = eps * std::log(pt.estimate.ci_high);
        } else {
            pt.eps_log_p = eps * std::log(pt.estimate.point);
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace lifsync
