#pragma once

// Exact sub-threshold dynamics of a single neuron:
//   dV = -gamma (V - beta) dt + sqrt(eps) dW,
// an Ornstein-Uhlenbeck process with closed-form Gaussian transitions.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "lifsync/params.hpp"
#include "lifsync/random.hpp"

namespace lifsync {

// Deterministic flow (x - beta) e^{-gamma t} + beta.
inline volts flow(volts x, seconds t, const OuParams& ou) {
    if (t < 0.0) throw std::invalid_argument("flow: negative time");
    return (x - ou.drive) * std::exp(-ou.leak_rate * t) + ou.drive;
}

inline volts flow(volts x, seconds t, const NetworkParams& p) { return flow(x, t, p.ou()); }

struct TransitionMoments {
    volts mean;
    double variance;  // V^2
};

inline TransitionMoments ou_transition_moments(volts x, seconds dt, const OuParams& ou) {
    if (dt < 0.0) throw std::invalid_argument("ou_transition_moments: negative dt");
    // -expm1 keeps the variance accurate when gamma*dt is tiny
    const double var = ou.noise_intensity * -std::expm1(-2.0 * ou.leak_rate * dt) /
                       (2.0 * ou.leak_rate);
    return {flow(x, dt, ou), var};
}

inline TransitionMoments ou_transition_moments(volts x, seconds dt, const NetworkParams& p) {
    return ou_transition_moments(x, dt, p.ou());
}

inline volts ou_transition_sample(volts x, seconds dt, const OuParams& ou, RandomStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_transition_sample: dt must be > 0");
    const auto m = ou_transition_moments(x, dt, ou);
    if (m.variance == 0.0) return m.mean;
    return m.mean + std::sqrt(m.variance) * rng.normal();
}

inline volts ou_transition_sample(volts x, seconds dt, const NetworkParams& p, RandomStream& rng) {
    return ou_transition_sample(x, dt, p.ou(), rng);
}

// Precomputed fixed-step transition, used by the grid simulators.
class OuStep {
public:
    OuStep(const OuParams& ou, seconds dt)
        : drive_(ou.drive),
          decay_(std::exp(-ou.leak_rate * dt)),
          sd_(std::sqrt(ou_transition_moments(0.0, dt, ou).variance)) {
        if (!(dt > 0.0)) throw std::invalid_argument("OuStep: dt must be > 0");
    }

    volts operator()(volts x, RandomStream& rng) const {
        const volts mean = (x - drive_) * decay_ + drive_;
        return sd_ == 0.0 ? mean : mean + sd_ * rng.normal();
    }

private:
    volts drive_;
    double decay_;
    double sd_;
};

// Value at offset s in (0, dt) of the OU bridge pinned at a (time 0) and b
// (time dt). Gaussian conditioning of the forward transition on the endpoint.
inline volts ou_bridge_sample(volts a, volts b, seconds s, seconds dt, const OuParams& ou,
                              RandomStream& rng) {
    const double v1 = ou_transition_moments(0.0, s, ou).variance;
    const double v2 = ou_transition_moments(0.0, dt - s, ou).variance;
    const double c = std::exp(-ou.leak_rate * (dt - s));
    const double ya = a - ou.drive;
    const double yb = b - ou.drive;
    const double prior = ya * std::exp(-ou.leak_rate * s);
    const double denom = v2 + c * c * v1;
    if (denom == 0.0) return prior + ou.drive;
    const double mean = prior + v1 * c * (yb - c * prior) / denom;
    const double var = v1 * v2 / denom;
    return ou.drive + mean + std::sqrt(var) * rng.normal();
}

// Standard Gaussian CDF through the complementary error function; accurate in
// both tails since erfc is evaluated on the side that does not cancel.
inline double std_normal_cdf(double x) {
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse of std_normal_cdf. Acklam's rational approximation polished with
// one Halley step.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("std_normal_quantile: p outside [0, 1]");
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace lifsync
