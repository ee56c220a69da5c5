#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "lifsync/random.hpp"

using namespace lifsync;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::counter_type;
    using K = Philox4x32::key_type;
    EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}),
              (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, SameCoordinatesSameSequence) {
    RandomStream a(42, 7, 1), b(42, 7, 1);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, DistinctCoordinatesDiffer) {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {0ull, 1ull, 1ull << 40})
        for (std::uint64_t trial : {0ull, 1ull, 1ull << 33})
            for (std::uint32_t sub : {0u, 1u}) firsts.insert(RandomStream(seed, trial, sub)());
    EXPECT_EQ(firsts.size(), 18u);
}

TEST(RandomStream, UniformOpenInterval) {
    RandomStream rng(3, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, NormalMoments) {
    RandomStream rng(4, 0);
    const int n = 1000000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s3 / n, 0.0, 4.0 * std::sqrt(15.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RandomStream, WorksWithStdDistributions) {
    RandomStream rng(5, 0);
    std::uniform_int_distribution<int> d(1, 6);
    std::array<int, 7> counts{};
    for (int i = 0; i < 60000; ++i) ++counts[d(rng)];
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(counts[k], 10000, 500);
}
