#pragma once

// Firing regime: resolution of the spike cascade triggered at a firing time.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lifsync/params.hpp"

namespace lifsync {

using NeuronIndex = std::size_t;

struct FiringOutcome {
    // layers[0] spiked spontaneously, layers[p+1] were pushed over threshold by
    // the kicks of layers[0..p]. Each layer is sorted by index.
    std::vector<std::vector<NeuronIndex>> layers;
    // Union of the layers, sorted by index.
    std::vector<NeuronIndex> spikers;
    std::vector<volts> post_potentials;

    bool all_spiked() const { return spikers.size() == post_potentials.size(); }
    bool operator==(const FiringOutcome&) const = default;
};

// Layered construction of the spiking set. The set is the least fixpoint of
// the monotone map S -> {i : pre_i + sum_{j in S, j != i} H_ji >= theta}, so
// the result does not depend on absorption order.
inline FiringOutcome resolve_firing(std::span<const volts> pre, const NetworkParams& params) {
    const std::size_t n = pre.size();
    if (n != params.n_neurons)
        throw std::invalid_argument("resolve_firing: potential vector size != n_neurons");
    const volts theta = params.threshold;
    const WeightMatrix& w = params.weights;

    FiringOutcome out;
    std::vector<char> spiked(n, 0);
    // kick[i] = sum over current spikers j of H_ji; maintained only for non-spikers
    std::vector<volts> kick(n, 0.0);
    std::size_t total = 0;

    std::vector<NeuronIndex> layer;
    for (NeuronIndex i = 0; i < n; ++i)
        if (pre[i] >= theta) layer.push_back(i);
    if (layer.empty())
        throw std::invalid_argument("resolve_firing: no neuron at or above threshold");

    while (!layer.empty()) {
        for (NeuronIndex j : layer) spiked[j] = 1;
        total += layer.size();
        if (w.is_uniform()) {
            const volts k = w(0, 0) * static_cast<double>(total);
            for (NeuronIndex i = 0; i < n; ++i)
                if (!spiked[i]) kick[i] = k;
        } else {
            for (NeuronIndex j : layer)
                for (NeuronIndex i = 0; i < n; ++i)
                    if (!spiked[i]) kick[i] += w(j, i);
        }
        out.layers.push_back(std::move(layer));
        layer.clear();
        if (total == n) break;
        for (NeuronIndex i = 0; i < n; ++i)
            if (!spiked[i] && pre[i] + kick[i] >= theta) layer.push_back(i);
    }

    out.spikers.reserve(total);
    out.post_potentials.resize(n);
    for (NeuronIndex i = 0; i < n; ++i) {
        if (spiked[i]) {
            out.spikers.push_back(i);
            out.post_potentials[i] = params.reset;
        } else {
            out.post_potentials[i] = pre[i] + kick[i];
        }
    }
    return out;
}

}  // namespace lifsync
