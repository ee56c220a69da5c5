#pragma once

// Event-driven simulation: alternate sub-threshold OU evolution and cascade
// resolution. Threshold crossings are detected on a fixed grid whose points
// carry exact OU marginals, optionally refined by a Brownian-bridge test for
// excursions above threshold between grid points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lifsync/cascade.hpp"
#include "lifsync/ou.hpp"
#include "lifsync/params.hpp"
#include "lifsync/random.hpp"

namespace lifsync {

struct SimConfig {
    seconds dt = 1e-4;
    bool bridge_correction = true;
    seconds max_time = 10.0;  // horizon for a single inter-spike interval
    std::uint64_t seed = 0;
    std::uint64_t trial_index = 0;

    bool operator==(const SimConfig&) const = default;
};

inline void validate(const SimConfig& c) {
    if (!(c.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(c.max_time > 0.0)) throw std::invalid_argument("max_time must be > 0");
}

struct FiringEvent {
    seconds time = 0.0;
    FiringOutcome outcome;
    bool is_full_sync = false;
};

enum class AdvanceStatus { fired, truncated, never_fires };

struct AdvanceResult {
    AdvanceStatus status = AdvanceStatus::fired;
    NetworkState state;
    std::optional<FiringEvent> event;  // set iff status == fired
};

// Time for the noiseless flow started at x_max to reach threshold; empty when
// the drive does not exceed the threshold.
inline std::optional<seconds> deterministic_next_fire_time(volts x_max, const NetworkParams& p) {
    if (x_max >= p.threshold)
        throw std::invalid_argument("deterministic_next_fire_time: x_max >= threshold");
    if (!(p.drive > p.threshold)) return std::nullopt;
    return std::log((p.drive - x_max) / (p.drive - p.threshold)) / p.leak_rate;
}

// Probability that a Brownian bridge with diffusion coefficient eps, pinned at
// a and b over dt, reaches the threshold. Exact for the driftless bridge and a
// first-order approximation of the OU bridge (error vanishes as gamma*dt -> 0).
inline double bridge_crossing_prob(volts a, volts b, seconds dt, const NetworkParams& p) {
    if (a >= p.threshold || b >= p.threshold) return 1.0;
    if (!(dt > 0.0)) throw std::invalid_argument("bridge_crossing_prob: dt must be > 0");
    if (!(p.noise_intensity > 0.0))
        throw std::invalid_argument("bridge_crossing_prob: noise_intensity must be > 0");
    return std::exp(-2.0 * (p.threshold - a) * (p.threshold - b) / (p.noise_intensity * dt));
}

namespace detail {

inline AdvanceResult fire_now(NetworkState state, std::span<const volts> pre, seconds time,
                              const NetworkParams& p) {
    FiringEvent ev;
    ev.time = time;
    ev.outcome = resolve_firing(pre, p);
    ev.is_full_sync = ev.outcome.all_spiked();
    state.potentials = ev.outcome.post_potentials;
    state.time = time;
    ++state.firing_count;
    return {AdvanceStatus::fired, std::move(state), std::move(ev)};
}

// exp() of anything below this is exactly 0 in double precision
inline constexpr double kExpUnderflow = -746.0;

}  // namespace detail

inline AdvanceResult advance_to_next_firing(NetworkState state, const NetworkParams& p,
                                            const SimConfig& cfg, RandomStream& rng) {
    const std::size_t n = state.potentials.size();
    if (n != p.n_neurons) throw std::invalid_argument("state size != n_neurons");
    const volts theta = p.threshold;

    const auto max_it = std::max_element(state.potentials.begin(), state.potentials.end());
    if (*max_it >= theta) {
        std::vector<volts> pre = state.potentials;
        const seconds now = state.time;
        return detail::fire_now(std::move(state), pre, now, p);
    }

    if (p.noise_intensity == 0.0) {
        const volts x_max = *max_it;
        const auto hit = deterministic_next_fire_time(x_max, p);
        if (!hit) return {AdvanceStatus::never_fires, std::move(state), std::nullopt};
        if (*hit > cfg.max_time) {
            for (volts& v : state.potentials) v = flow(v, cfg.max_time, p);
            state.time += cfg.max_time;
            return {AdvanceStatus::truncated, std::move(state), std::nullopt};
        }
        std::vector<volts> pre(n);
        for (std::size_t i = 0; i < n; ++i) {
            // the leading neurons land on threshold exactly, not one rounding below
            pre[i] = state.potentials[i] == x_max ? theta : flow(state.potentials[i], *hit, p);
        }
        const seconds t = state.time + *hit;
        return detail::fire_now(std::move(state), pre, t, p);
    }

    const seconds dt = cfg.dt;
    const OuParams ou = p.ou();
    const OuStep step(ou, dt);
    const double bridge_scale = -2.0 / (p.noise_intensity * dt);
    const auto max_steps = static_cast<std::uint64_t>(std::ceil(cfg.max_time / dt));

    std::vector<volts> prev = state.potentials;
    std::vector<volts>& cur = state.potentials;
    const seconds t0 = state.time;

    for (std::uint64_t k = 1; k <= max_steps; ++k) {
        bool crossed = false;
        // earliest bridge-detected crossing within this step, as a fraction of dt
        double bridge_frac = 2.0;
        std::size_t bridge_neuron = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const volts a = prev[i];
            const volts b = step(a, rng);
            cur[i] = b;
            if (b >= theta) {
                crossed = true;
            } else if (cfg.bridge_correction) {
                const double e = bridge_scale * (theta - a) * (theta - b);
                if (e > detail::kExpUnderflow && rng.uniform() < std::exp(e)) {
                    const double frac = rng.uniform();
                    if (frac < bridge_frac) {
                        bridge_frac = frac;
                        bridge_neuron = i;
                    }
                }
            }
        }

        if (bridge_frac < 1.0) {
            // Fire inside the step: the detected neuron sits on threshold and
            // every other neuron is drawn from its OU bridge at that instant.
            const seconds s = bridge_frac * dt;
            std::vector<volts> pre(n);
            for (std::size_t i = 0; i < n; ++i)
                pre[i] = i == bridge_neuron ? theta
                                            : ou_bridge_sample(prev[i], cur[i], s, dt, ou, rng);
            const seconds t = t0 + (static_cast<double>(k - 1) * dt + s);
            return detail::fire_now(std::move(state), pre, t, p);
        }
        if (crossed) {
            std::vector<volts> pre = cur;
            const seconds t = t0 + static_cast<double>(k) * dt;
            return detail::fire_now(std::move(state), pre, t, p);
        }
        std::swap(prev, cur);
    }
    // after the final swap the latest values live in prev
    state.potentials = std::move(prev);
    state.time = t0 + static_cast<double>(max_steps) * dt;
    return {AdvanceStatus::truncated, std::move(state), std::nullopt};
}

struct TrialRecord {
    std::vector<FiringEvent> events;
    std::optional<std::size_t> first_sync_index;  // 1-based
    bool truncated = false;
    bool never_fires = false;

    // Event BS_n: synchronized at least once within the first n firings.
    bool synchronized_within(std::size_t n) const {
        return first_sync_index && *first_sync_index <= n;
    }
};

struct TrialOptions {
    // Stop as soon as full synchronization occurs; later events do not
    // affect first_sync_index.
    bool stop_at_first_sync = false;
    // Drop layer/post-potential detail from stored events.
    bool compact_events = false;
};

inline TrialRecord run_trial(std::vector<volts> initial, const NetworkParams& p,
                             const SimConfig& cfg, std::size_t n_max, RandomStream& rng,
                             TrialOptions opts = {}) {
    if (n_max == 0) throw std::invalid_argument("run_trial: n_max must be positive");
    if (initial.size() != p.n_neurons) throw std::invalid_argument("initial size != n_neurons");
    for (volts v : initial)
        if (!(v >= p.floor && v < p.threshold))
            throw std::invalid_argument("run_trial: initial potential outside [floor, threshold)");

    TrialRecord rec;
    NetworkState state{std::move(initial), 0.0, 0};
    while (rec.events.size() < n_max) {
        AdvanceResult r = advance_to_next_firing(std::move(state), p, cfg, rng);
        if (r.status == AdvanceStatus::never_fires) {
            rec.truncated = true;
            rec.never_fires = true;
            break;
        }
        if (r.status == AdvanceStatus::truncated) {
            rec.truncated = true;
            break;
        }
        state = std::move(r.state);
        FiringEvent& ev = *r.event;
        if (ev.is_full_sync && !rec.first_sync_index) rec.first_sync_index = rec.events.size() + 1;
        if (opts.compact_events) {
            ev.outcome.layers.clear();
            ev.outcome.post_potentials.clear();
        }
        const bool stop = opts.stop_at_first_sync && ev.is_full_sync;
        rec.events.push_back(std::move(ev));
        if (stop) break;
    }
    return rec;
}

enum class InitialCondition { at_reset, uniform };

// Draws from the trial's stream when the condition is random.
inline std::vector<volts> initial_potentials(InitialCondition init, const NetworkParams& p,
                                             RandomStream& rng) {
    std::vector<volts> v(p.n_neurons, p.reset);
    if (init == InitialCondition::uniform) {
        const volts width = p.threshold - p.floor;
        for (volts& x : v) {
            x = p.floor + width * rng.uniform();
            if (x >= p.threshold) x = std::nextafter(p.threshold, p.floor);
        }
    }
    return v;
}

}  // namespace lifsync
