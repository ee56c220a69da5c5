#pragma once

// Counter-based random streams. A stream is addressed by (seed, trial,
// substream); its output never depends on how many other streams exist or on
// the order in which they are consumed, so trials can run on any worker.

#include <array>
#include <cmath>
#include <cstdint>

namespace lifsync {

// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
public:
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static counter_type block(counter_type ctr, key_type key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// One independent stream of uniform and Gaussian variates.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t substream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_(trial),
          substream_(substream) {}

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        if (used_ == 2) refill();
        return buffer_[used_++];
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    // Marsaglia polar method; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    void refill() {
        const Philox4x32::counter_type ctr{
            static_cast<std::uint32_t>(block_), substream_, static_cast<std::uint32_t>(trial_),
            static_cast<std::uint32_t>(trial_ >> 32)};
        const auto out = Philox4x32::block(ctr, key_);
        buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        used_ = 0;
        ++block_;
    }

    Philox4x32::key_type key_;
    std::uint64_t trial_;
    std::uint32_t substream_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int used_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lifsync
