#include "diffsched/rng.hpp"

#include <cmath>
#include <numbers>

namespace diffsched {

std::string_view purpose_name(StreamPurpose purpose) {
    switch (purpose) {
        case StreamPurpose::InitNoise: return "init_noise";
        case StreamPurpose::StepNoise: return "step_noise";
        case StreamPurpose::MetricProjection: return "metric_projection";
        case StreamPurpose::ReferenceDraw: return "reference_draw";
    }
    return "unknown";
}

namespace {

std::uint64_t initial_state(const StreamLabel& label) noexcept {
    const auto code = static_cast<std::uint64_t>(label.purpose);
    return splitmix64_mix(label.seed ^ (kGoldenRatio64 * (code + 1)) ^ (label.index * kGoldenRatio64));
}

}  // namespace

RngStream::RngStream(StreamLabel label) : label_(label), engine_(initial_state(label)) {
    // warm-up advance
    engine_.next();
}

double RngStream::next_uniform() noexcept { return to_unit_interval(engine_.next()); }

double RngStream::next_gaussian() noexcept {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return box_muller(u1, u2);
}

RngStream derive_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
    return RngStream(StreamLabel{seed, purpose, index});
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64_mix(seed ^ ((index + 1) * kGoldenRatio64));
}

double box_muller(double u1, double u2) noexcept {
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace diffsched
