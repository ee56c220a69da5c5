#pragma once

// Reference oracles shared by the unit suites and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <vector>

#include "lifsync/lifsync.hpp"

namespace lifsync::oracle {

// Sequential absorption: add any one neuron whose potential plus the kicks of
// the current set reaches threshold, in random order, until nothing changes.
inline std::vector<NeuronIndex> absorption_oracle(const std::vector<volts>& pre,
                                                  const NetworkParams& p, RandomStream& rng) {
    const std::size_t n = pre.size();
    std::vector<char> in(n, 0);
    for (std::size_t i = 0; i < n; ++i) in[i] = pre[i] >= p.threshold;
    for (;;) {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < n; ++i) {
            if (in[i]) continue;
            volts v = pre[i];
            for (std::size_t j = 0; j < n; ++j)
                if (in[j] && j != i) v += p.weights(j, i);
            if (v >= p.threshold) ready.push_back(i);
        }
        if (ready.empty()) break;
        in[ready[rng() % ready.size()]] = 1;
    }
    std::vector<NeuronIndex> s;
    for (std::size_t i = 0; i < n; ++i)
        if (in[i]) s.push_back(i);
    return s;
}

inline NetworkParams unit_network(std::size_t n, double weight) {
    return uniform_network(n, 1.0, 2.0, 1.0, 0.0, 0.0, 0.0, weight);
}

inline NetworkParams dense_network(std::size_t n, std::vector<volts> w) {
    NetworkParams p = unit_network(n, 1.0);
    p.weights = WeightMatrix::dense(n, std::move(w));
    validate(p);
    return p;
}

struct CascadeInstance {
    std::vector<volts> pre;
    NetworkParams params;
};

// dyadic: values on a 1/64 grid, so every partial sum is exact and ties at
// threshold are common.
inline CascadeInstance random_cascade_instance(RandomStream& rng, bool dyadic) {
    const std::size_t n = 1 + rng() % 12;
    auto draw = [&](double lo, double hi) {
        const double u = lo + (hi - lo) * rng.uniform();
        return dyadic ? std::round(u * 64.0) / 64.0 : u;
    };
    std::vector<volts> w(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) w[j * n + i] = std::max(draw(0.0, 0.4), 1.0 / 64.0);
    std::vector<volts> pre(n);
    for (auto& v : pre) v = draw(-0.5, 0.99);
    pre[rng() % n] = dyadic ? 1.0 : 1.0 + 0.2 * rng.uniform();
    return {pre, dense_network(n, w)};
}

struct AccumulationCheck {
    double max_error = 0.0;
    std::size_t comparisons = 0;
};

// Noiseless network with random weights and start: a neuron that has not
// spiked through event n sits at
//   flow(V0, tau_n) + sum_{l <= n} exp(-gamma (tau_n - tau_l)) sum_{j in J(l)} H_ji.
inline AccumulationCheck accumulation_case(std::uint64_t seed, std::size_t n_events = 25) {
    RandomStream rng(seed, 0);
    const std::size_t n = 6;
    std::vector<volts> w(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) w[j * n + i] = 0.0005 + 0.0025 * rng.uniform();
    NetworkParams p = uniform_network(n, 100.0, -0.052, -0.055, -0.070, -0.100, 0.0, 1e-3);
    p.weights = WeightMatrix::dense(n, w);
    validate(p);
    std::vector<volts> v0(n);
    for (auto& v : v0) v = p.floor + (p.threshold - p.floor) * rng.uniform();

    const SimConfig cfg{};
    const TrialRecord rec = run_trial(v0, p, cfg, n_events, rng);
    AccumulationCheck out;
    std::vector<char> spiked(n, 0);
    for (std::size_t e = 0; e < rec.events.size(); ++e) {
        const FiringEvent& ev = rec.events[e];
        for (auto j : ev.outcome.spikers) spiked[j] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (spiked[i]) continue;
            double expected = flow(v0[i], ev.time, p);
            for (std::size_t l = 0; l <= e; ++l) {
                double kick = 0.0;
                for (auto j : rec.events[l].outcome.spikers) kick += p.weights(j, i);
                expected += std::exp(-p.leak_rate * (ev.time - rec.events[l].time)) * kick;
            }
            out.max_error = std::max(out.max_error, std::abs(ev.outcome.post_potentials[i] - expected));
            ++out.comparisons;
        }
    }
    return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

// Critical value at level 0.001.
inline double ks_critical_001(std::size_t n, std::size_t m) {
    return 1.949 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

}  // namespace lifsync::oracle
