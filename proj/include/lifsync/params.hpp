#pragma once

// Model constants and state of a fully-connected excitatory noisy LIF network.
// All quantities are SI: volts, seconds, volts^2/second.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lifsync {

using volts = double;
using seconds = double;

// Synaptic weights. entry(j, i) is the increment received by neuron i when
// neuron j spikes. The diagonal is never read.
class WeightMatrix {
public:
    WeightMatrix() = default;

    static WeightMatrix uniform(std::size_t n, volts weight) {
        if (!(weight > 0.0)) throw std::invalid_argument("uniform weight must be > 0");
        WeightMatrix w;
        w.n_ = n;
        w.min_weight_ = weight;
        w.uniform_value_ = weight;
        return w;
    }

    // Row-major entries, entries[j * n + i] = H_ji.
    static WeightMatrix dense(std::size_t n, std::vector<volts> entries) {
        if (entries.size() != n * n)
            throw std::invalid_argument("weight matrix must have n*n entries");
        WeightMatrix w;
        w.n_ = n;
        w.entries_ = std::move(entries);
        volts mn = std::numeric_limits<volts>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) continue;
                const volts h = w.entries_[j * n + i];
                if (!(h > 0.0))
                    throw std::invalid_argument("off-diagonal weights must be > 0 (entry " +
                                                std::to_string(j) + "," + std::to_string(i) + ")");
                mn = std::min(mn, h);
            }
        // a single neuron has no off-diagonal entry
        w.min_weight_ = n > 1 ? mn : 0.0;
        return w;
    }

    std::size_t size() const { return n_; }
    bool is_uniform() const { return uniform_value_.has_value(); }
    volts min_weight() const { return min_weight_; }

    volts operator()(std::size_t j, std::size_t i) const {
        return uniform_value_ ? *uniform_value_ : entries_[j * n_ + i];
    }

    // Empty when uniform.
    const std::vector<volts>& entries() const { return entries_; }

    bool operator==(const WeightMatrix&) const = default;

private:
    std::size_t n_ = 0;
    volts min_weight_ = 0.0;
    std::optional<volts> uniform_value_;
    std::vector<volts> entries_;
};

// Parameters of the sub-threshold Ornstein-Uhlenbeck law of one neuron.
struct OuParams {
    double leak_rate = 0.0;        // gamma, 1/s
    volts drive = 0.0;             // beta
    double noise_intensity = 0.0;  // epsilon, V^2/s
};

struct NetworkParams {
    std::size_t n_neurons = 0;
    double leak_rate = 0.0;        // gamma, 1/s
    volts drive = 0.0;             // beta
    volts threshold = 0.0;         // theta
    volts reset = 0.0;             // V_r
    volts floor = 0.0;             // alpha, lower end of the initial support
    double noise_intensity = 0.0;  // epsilon, V^2/s
    WeightMatrix weights;

    volts min_weight() const { return weights.min_weight(); }
    OuParams ou() const { return {leak_rate, drive, noise_intensity}; }
    bool drive_above_threshold() const { return drive > threshold; }

    bool operator==(const NetworkParams&) const = default;
};

// Throws std::invalid_argument on a hard violation. drive <= threshold is
// legal (noise-driven firing) and only reported by the bound calculators.
inline void validate(const NetworkParams& p) {
    if (p.n_neurons == 0) throw std::invalid_argument("n_neurons must be positive");
    if (!(p.leak_rate > 0.0)) throw std::invalid_argument("leak_rate must be > 0");
    if (!(p.noise_intensity >= 0.0)) throw std::invalid_argument("noise_intensity must be >= 0");
    if (!(p.reset < p.threshold)) throw std::invalid_argument("reset must be < threshold");
    if (!(p.floor <= p.reset)) throw std::invalid_argument("floor must be <= reset");
    if (p.weights.size() != p.n_neurons)
        throw std::invalid_argument("weight matrix size does not match n_neurons");
    if (p.n_neurons > 1 && !(p.weights.min_weight() > 0.0))
        throw std::invalid_argument("min_weight must be > 0");
}

inline NetworkParams uniform_network(std::size_t n, double leak_rate, volts drive, volts threshold,
                                     volts reset, volts floor, double noise_intensity,
                                     volts weight) {
    NetworkParams p;
    p.n_neurons = n;
    p.leak_rate = leak_rate;
    p.drive = drive;
    p.threshold = threshold;
    p.reset = reset;
    p.floor = floor;
    p.noise_intensity = noise_intensity;
    p.weights = WeightMatrix::uniform(n, weight);
    validate(p);
    return p;
}

struct NetworkState {
    std::vector<volts> potentials;
    seconds time = 0.0;
    std::uint64_t firing_count = 0;

    bool operator==(const NetworkState&) const = default;
};

}  // namespace lifsync
