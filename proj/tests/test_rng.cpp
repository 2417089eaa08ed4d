#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fdmean/rng.hpp"

namespace {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

TEST(Rng, DeterministicAndSeedSensitive) {
    fdmean::SplitMix64 a(42), b(42), c(43);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 64; ++i) {
        va.push_back(a.next());
        vb.push_back(b.next());
        vc.push_back(c.next());
    }
    EXPECT_EQ(va, vb);
    EXPECT_NE(va, vc);
}

TEST(Rng, Uniform01Range) {
    fdmean::SplitMix64 rng(7);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, UniformIntCoversRangeUniformly) {
    fdmean::SplitMix64 rng(123);
    std::vector<int> counts(6, 0);
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
        int v = rng.uniform_int(3, 8);
        ASSERT_GE(v, 3);
        ASSERT_LE(v, 8);
        counts[static_cast<std::size_t>(v - 3)]++;
    }
    for (int cnt : counts) {
        EXPECT_NEAR(static_cast<double>(cnt) / draws, 1.0 / 6.0, 0.01);
    }
}

TEST(Rng, InverseNormalCdfRoundTrip) {
    for (double p : {1e-9, 1e-6, 0.01, 0.02425, 0.3, 0.5, 0.7, 0.975,
                     0.999999, 1.0 - 1e-9}) {
        double x = fdmean::detail::norm_inv_cdf(p);
        EXPECT_NEAR(normal_cdf(x), p, 1e-12 * std::max(p, 1e-3))
            << "p = " << p;
    }
    EXPECT_EQ(fdmean::detail::norm_inv_cdf(0.5), 0.0);
    EXPECT_NEAR(fdmean::detail::norm_inv_cdf(0.975), 1.959963984540054, 1e-9);
}

TEST(Rng, NormalMomentsFixedSeed) {
    fdmean::SplitMix64 rng(2718281828ULL);
    const int draws = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / draws;
    double var = sumsq / draws - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Rng, NormalScaleAndShift) {
    fdmean::SplitMix64 a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        double z = a.normal();
        double y = b.normal(2.0, 3.0);
        EXPECT_NEAR(y, 2.0 + 3.0 * z, 1e-12);
    }
}

TEST(Rng, DeriveKeyIsOrderAndDepthSensitive) {
    using fdmean::derive_key;
    std::uint64_t base = derive_key(99, {1, 2});
    EXPECT_EQ(base, derive_key(99, {1, 2}));
    EXPECT_NE(base, derive_key(99, {2, 1}));
    EXPECT_NE(base, derive_key(99, {1, 2, 0}));
    EXPECT_NE(base, derive_key(100, {1, 2}));
    EXPECT_NE(base, derive_key(99, {1}));
}

TEST(Rng, DeriveStreamMatchesDeriveKey) {
    auto s = fdmean::derive_stream(7, {3, 1});
    fdmean::SplitMix64 t(fdmean::derive_key(7, {3, 1}));
    for (int i = 0; i < 16; ++i) EXPECT_EQ(s.next(), t.next());
}

TEST(Rng, StreamsWithDistinctTagsDecorrelate) {
    auto a = fdmean::derive_stream(
        11, {static_cast<std::uint64_t>(fdmean::StreamTag::points), 0});
    auto b = fdmean::derive_stream(
        11, {static_cast<std::uint64_t>(fdmean::StreamTag::noise), 0});
    int equal = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next() == b.next()) ++equal;
    EXPECT_EQ(equal, 0);
}

}  // namespace
