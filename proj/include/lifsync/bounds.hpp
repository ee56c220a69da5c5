#pragma once

// Closed-form synchronization guarantees and the Ornstein-Uhlenbeck large
// deviation rate. Formulas are evaluated even outside the regime where the
// underlying theorems hold; the report says which hypotheses failed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lifsync/ou.hpp"
#include "lifsync/params.hpp"

namespace lifsync {

struct BoundReport {
    double value = 0.0;
    bool preconditions_met = true;
    std::vector<std::string> violated_conditions;
    // Hypotheses that cannot be checked numerically, and other remarks.
    std::vector<std::string> caveats;

    void violate(std::string what) {
        preconditions_met = false;
        violated_conditions.push_back(std::move(what));
    }
};

namespace detail {

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// (1 - q)_+^n evaluated through log1p so that n in the thousands and q near
// machine epsilon keep full precision.
inline double complement_power(double q, double n) {
    if (q >= 1.0) return 0.0;
    if (q <= 0.0) return std::pow(1.0 - q, n);
    return std::exp(n * std::log1p(-q));
}

}  // namespace detail

// Lower bound on P(S_{n+1} | S_n): (1 - exp(-gamma m^2 / (4 eps)))^N.
inline double theorem1_value(double leak_rate, volts min_weight, double noise_intensity,
                             std::size_t n_neurons) {
    if (noise_intensity == 0.0) return 1.0;
    const double exponent = -leak_rate * min_weight * min_weight / (4.0 * noise_intensity);
    return detail::complement_power(std::exp(exponent), static_cast<double>(n_neurons));
}

inline BoundReport theorem1_bound(const NetworkParams& p) {
    BoundReport r;
    r.value = theorem1_value(p.leak_rate, p.min_weight(), p.noise_intensity, p.n_neurons);
    if (!p.drive_above_threshold()) r.violate("drive > threshold");
    if (p.noise_intensity == 0.0)
        r.caveats.push_back("noise_intensity = 0: deterministic orbit stays synchronized");
    else
        r.caveats.push_back("holds only for noise_intensity <= eps0, which is not explicit");
    return r;
}

struct DimensionlessParams {
    double p1 = 0.0;  // m sqrt(2 gamma / eps)
    double p2 = 0.0;  // (theta - alpha) / m
    double p3 = 0.0;  // (beta - theta) / m
    long long n0 = 0; // ceil(p2) + 1
    bool drive_above_threshold = false;
};

namespace detail {

// ceil, except that ratios a few ulps above an integer (45 mV / 0.03 mV
// evaluates to 1500.0000000000002) count as that integer
inline long long ceil_ratio(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
        return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

}  // namespace detail

inline DimensionlessParams dimensionless_from(double p1, double p2, double p3) {
    DimensionlessParams d;
    d.p1 = p1;
    d.p2 = p2;
    d.p3 = p3;
    d.n0 = detail::ceil_ratio(p2) + 1;
    d.drive_above_threshold = p3 > 0.0;
    return d;
}

inline DimensionlessParams dimensionless_params(const NetworkParams& p) {
    const volts m = p.min_weight();
    if (!(p.noise_intensity > 0.0))
        throw std::invalid_argument("dimensionless_params: noise_intensity must be > 0");
    if (!(m > 0.0)) throw std::invalid_argument("dimensionless_params: min_weight must be > 0");
    return dimensionless_from(m * std::sqrt(2.0 * p.leak_rate / p.noise_intensity),
                              (p.threshold - p.floor) / m, (p.drive - p.threshold) / m);
}

namespace detail {

inline void check_theorem2_hypotheses(const DimensionlessParams& d, std::size_t n_neurons,
                                      BoundReport& r) {
    const double needed = d.p2 * (d.p2 + 2.0);
    if (static_cast<double>(n_neurons) < needed)
        r.violate("N >= p2 (p2 + 2) = " + std::to_string(needed));
}

inline void require_drive_above_threshold(const DimensionlessParams& d) {
    if (!d.drive_above_threshold)
        throw std::domain_error("synchronization bound requires drive > threshold");
}

}  // namespace detail

// Lower bound on P(BS_n) for n in [p2, N / p2].
inline BoundReport theorem2_bound(const DimensionlessParams& d, std::size_t n_neurons,
                                  std::size_t n) {
    detail::require_drive_above_threshold(d);
    if (n == 0) throw std::invalid_argument("theorem2_bound: n must be positive");
    BoundReport r;
    detail::check_theorem2_hypotheses(d, n_neurons, r);
    const double N = static_cast<double>(n_neurons);
    const double nn = static_cast<double>(n);
    if (nn < d.p2 || nn > N / d.p2)
        r.violate("n in [p2, N / p2] = [" + std::to_string(d.p2) + ", " +
                  std::to_string(N / d.p2) + "]");
    if (!r.preconditions_met) r.caveats.push_back("outside stated validity");

    const double first =
        detail::positive_part(1.0 - N * std_normal_cdf(-d.p1 * std::min(nn - d.p2, d.p3)));
    const double q = std_normal_cdf(-d.p1 * (N / nn - d.p2)) + nn * std_normal_cdf(-d.p1);
    r.value = first * detail::complement_power(q, N);
    return r;
}

inline BoundReport theorem2_bound(const NetworkParams& p, std::size_t n) {
    return theorem2_bound(dimensionless_params(p), p.n_neurons, n);
}

// Lower bound on P(BS_n) valid for every n >= n0; increasing in p1 and
// decreasing in p2.
inline BoundReport boundpam_bound(const DimensionlessParams& d, std::size_t n_neurons) {
    detail::require_drive_above_threshold(d);
    BoundReport r;
    detail::check_theorem2_hypotheses(d, n_neurons, r);
    if (!r.preconditions_met) r.caveats.push_back("outside stated validity");
    const double N = static_cast<double>(n_neurons);
    const double first =
        detail::positive_part(1.0 - N * std_normal_cdf(-d.p1 * std::min(1.0, d.p3)));
    const double span = static_cast<double>(detail::ceil_ratio(d.p2) + 1);
    const double q = std_normal_cdf(-N * d.p1 / span + d.p1 * d.p2) +
                     (d.p2 + 2.0) * std_normal_cdf(-d.p1);
    r.value = first * detail::complement_power(q, N);
    return r;
}

inline BoundReport boundpam_bound(const NetworkParams& p) {
    return boundpam_bound(dimensionless_params(p), p.n_neurons);
}

// Large deviation rate of sup_{[0,T]} |X_eps - x| >= delta for an OU process
// with leak gamma: (gamma delta^2 / 2)(1 + coth(gamma T)). Positive; the
// probability decays like exp(-rate / eps).
inline double ldp_rate(double gamma, double delta, double horizon) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ldp_rate: gamma must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("ldp_rate: delta must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("ldp_rate: horizon must be > 0");
    return 0.5 * gamma * delta * delta * (1.0 + 1.0 / std::tanh(gamma * horizon));
}

struct SyncWindow {
    seconds t1 = 0.0;
    seconds t2 = 0.0;
};

// Times at which the noiseless orbit from reset, shifted by +delta and
// -delta, reaches threshold.
inline SyncWindow sync_window(volts delta, const NetworkParams& p) {
    if (!p.drive_above_threshold())
        throw std::domain_error("sync_window requires drive > threshold");
    const volts limit = std::min(p.drive - p.threshold, p.threshold - p.reset);
    if (!(delta > 0.0 && delta < limit))
        throw std::invalid_argument("sync_window: delta must lie in (0, min(drive - threshold, "
                                    "threshold - reset))");
    const double span = p.drive - p.reset;
    return {std::log(span / (p.drive - p.threshold + delta)) / p.leak_rate,
            std::log(span / (p.drive - p.threshold - delta)) / p.leak_rate};
}

}  // namespace lifsync
