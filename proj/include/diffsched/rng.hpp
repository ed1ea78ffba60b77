#pragma once

#include <cstdint>
#include <string_view>

namespace diffsched {

inline constexpr std::uint64_t kGoldenRatio64 = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Plain SplitMix64 engine: state advances by the golden-ratio increment,
/// output is the finalizer of the new state.
class SplitMix64 {
  public:
    constexpr explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kGoldenRatio64;
        return splitmix64_mix(state_);
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

  private:
    std::uint64_t state_;
};

enum class StreamPurpose : std::uint64_t {
    InitNoise = 0,
    StepNoise = 1,
    MetricProjection = 2,
    ReferenceDraw = 3,
};

std::string_view purpose_name(StreamPurpose purpose);

struct StreamLabel {
    std::uint64_t seed = 0;
    StreamPurpose purpose = StreamPurpose::InitNoise;
    std::uint64_t index = 0;

    friend bool operator==(const StreamLabel&, const StreamLabel&) = default;
};

/// Deterministic random stream identified by (seed, purpose, index).
///
/// Streams are values: copying one forks an identical continuation. Gaussian
/// draws use one Box-Muller pair per variate (cosine branch only), so the
/// sequence of normals is a pure function of the label and the draw ordinal.
class RngStream {
  public:
    explicit RngStream(StreamLabel label);

    std::uint64_t next_u64() noexcept { return engine_.next(); }

    /// Top 53 bits mapped to (0, 1].
    double next_uniform() noexcept;

    double next_gaussian() noexcept;

    const StreamLabel& label() const noexcept { return label_; }
    std::uint64_t state() const noexcept { return engine_.state(); }

  private:
    StreamLabel label_;
    SplitMix64 engine_;
};

RngStream derive_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

/// Child seed for the index-th member of a batch generated under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// z = sqrt(-2 ln u1) * cos(2 pi u2), with u1, u2 in (0, 1].
double box_muller(double u1, double u2) noexcept;

/// Maps a raw 64-bit output to (0, 1] using its top 53 bits.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace diffsched
