#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "diffsched/rng.hpp"

using namespace diffsched;

TEST(SplitMix64, KnownAnswerSeedZero) {
    SplitMix64 g(0);
    EXPECT_EQ(g.next(), 0xE220A8397B1DCDAFull);
    EXPECT_EQ(g.next(), 0x6E789E6AA1B965F4ull);
    EXPECT_EQ(g.next(), 0x06C45D188009454Full);
}

TEST(RngStream, SameLabelSameSequence) {
    auto a = derive_stream(42, StreamPurpose::StepNoise, 3);
    auto b = derive_stream(42, StreamPurpose::StepNoise, 3);
    for (int k = 0; k < 100; ++k) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, NeighbouringLabelsDiffer) {
    auto a = derive_stream(42, StreamPurpose::StepNoise, 0);
    auto b = derive_stream(42, StreamPurpose::StepNoise, 1);
    auto c = derive_stream(42, StreamPurpose::InitNoise, 0);
    auto d = derive_stream(43, StreamPurpose::StepNoise, 0);
    const auto first = a.next_u64();
    EXPECT_NE(first, b.next_u64());
    EXPECT_NE(first, c.next_u64());
    EXPECT_NE(first, d.next_u64());
}

TEST(RngStream, InitialStateFollowsLabelMixing) {
    const std::uint64_t seed = 1234, index = 9;
    const auto purpose = StreamPurpose::MetricProjection;
    const std::uint64_t mixed = splitmix64_mix(seed ^ (kGoldenRatio64 * (static_cast<std::uint64_t>(purpose) + 1)) ^
                                               (index * kGoldenRatio64));
    SplitMix64 ref(mixed);
    ref.next();
    auto s = derive_stream(seed, purpose, index);
    EXPECT_EQ(s.state(), ref.state());
    EXPECT_EQ(s.next_u64(), ref.next());
}

TEST(RngStream, CopyForksContinuation) {
    auto a = derive_stream(1, StreamPurpose::InitNoise, 0);
    a.next_u64();
    auto b = a;
    EXPECT_EQ(a.next_gaussian(), b.next_gaussian());
    EXPECT_EQ(a.label(), b.label());
}

TEST(BoxMuller, HandValues) {
    EXPECT_NEAR(box_muller(0.5, 0.5), -1.1774100225154747, 1e-15);
    EXPECT_EQ(box_muller(1.0, 0.3), 0.0);
    EXPECT_NEAR(box_muller(std::exp(-0.5), 1.0), 1.0, 1e-15);
}

TEST(BoxMuller, GaussianUsesOneUniformPair) {
    auto s = derive_stream(5, StreamPurpose::StepNoise, 2);
    auto raw = s;
    const double u1 = to_unit_interval(raw.next_u64());
    const double u2 = to_unit_interval(raw.next_u64());
    EXPECT_EQ(s.next_gaussian(), box_muller(u1, u2));
    EXPECT_EQ(s.state(), raw.state());
}

TEST(Uniform, HalfOpenUnitInterval) {
    EXPECT_EQ(to_unit_interval(0), 0x1.0p-53);
    EXPECT_EQ(to_unit_interval(~0ull), 1.0);
    auto s = derive_stream(3, StreamPurpose::InitNoise, 0);
    for (int k = 0; k < 10000; ++k) {
        const double u = s.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
    }
}

TEST(Gaussian, MomentsOverAMillionDraws) {
    auto s = derive_stream(7, StreamPurpose::StepNoise, 0);
    const int n = 1000000;
    double sum = 0, sq = 0;
    for (int k = 0; k < n; ++k) {
        const double z = s.next_gaussian();
        ASSERT_TRUE(std::isfinite(z));
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
    EXPECT_LE(std::abs(mean), 0.005);
    EXPECT_GE(sd, 0.997);
    EXPECT_LE(sd, 1.003);
}

TEST(DeriveSeed, DistinctChildren) {
    EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
    EXPECT_NE(derive_seed(0, 0), derive_seed(1, 0));
    EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(Purpose, Names) {
    EXPECT_EQ(purpose_name(StreamPurpose::InitNoise), "init_noise");
    EXPECT_EQ(purpose_name(StreamPurpose::StepNoise), "step_noise");
    EXPECT_EQ(purpose_name(StreamPurpose::MetricProjection), "metric_projection");
}
