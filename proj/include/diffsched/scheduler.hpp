#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "diffsched/oracle.hpp"
#include "diffsched/samplers.hpp"
#include "diffsched/schedule.hpp"

namespace diffsched {

class ParseError : public std::invalid_argument {
  public:
    ParseError(const std::string& what, std::size_t offset);
    /// Byte offset into the spec text where parsing failed.
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

class PresetNotFound : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

struct Segment {
    SamplerKind kind = SamplerKind::Euler;
    int steps = 1;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct ScheduleOptions {
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double rho = 7.0;
    ScheduleMode mode = ScheduleMode::Regenerate;
    bool append_zero = false;
};

struct ScheduleSpec {
    std::vector<Segment> segments;
    ScheduleOptions options;

    int total_steps() const noexcept;
    /// Canonical `name:steps+name:steps` text.
    std::string text() const;
    bool ode_only() const noexcept;
};

/// spec := segment ("+" segment)* ; segment := name ":" integer. Whitespace is ignored.
ScheduleSpec parse_schedule_spec(std::string_view text, const ScheduleOptions& options = {});

/// Full ladder over all segments: karras(T + 1) levels, or karras(T) + {0}
/// with append_zero, for T total steps.
NoiseSchedule global_schedule(const ScheduleSpec& spec);

/// Per-segment ladders produced by sub_schedule in the spec's mode.
std::vector<NoiseSchedule> plan_segments(const ScheduleSpec& spec);

/// Denoiser evaluations the spec will spend, counting the final zero step fallback.
int nfe_total(const ScheduleSpec& spec);

struct RunOptions {
    /// Keep multistep history across segment boundaries instead of cold-starting.
    bool carry_history = false;
    Dpm2aVariant dpm2a_variant = Dpm2aVariant::Literal;
    /// Pre-seeded history, e.g. an exact D(x_{-1}) for warm-started multistep runs.
    PredictionCache initial_cache;
};

struct Trajectory {
    std::vector<SampleState> states;
    std::vector<double> sigma_trace;
    int nfe = 0;
    std::uint64_t seed = 0;
    /// Global step indices at which segments 1..M-1 begin.
    std::vector<std::size_t> segment_boundaries;
    /// Segment that produced each state (state 0 is attributed to segment 0).
    std::vector<int> segment_of_state;
    std::vector<int> nfe_cumulative;

    const Vector& final_x() const { return states.back().x; }
};

/// Draws x_0 ~ N(0, sigma_max^2 I) from the seed's init_noise stream, then
/// runs every segment in order on its own sub-schedule.
Trajectory run_scheduler(const ScheduleSpec& spec, const DenoiserOracle& denoiser, std::uint64_t seed, int dim,
                         const RunOptions& options = {});

/// Same, starting from a caller-supplied x_0.
Trajectory run_scheduler_from(const ScheduleSpec& spec, const DenoiserOracle& denoiser, Vector x0,
                              std::uint64_t seed, const RunOptions& options = {});

/// Final state only; identical arithmetic to run_scheduler without recording.
Vector sample_final(const ScheduleSpec& spec, const DenoiserOracle& denoiser, std::uint64_t seed, int dim,
                    const RunOptions& options = {});

Vector initial_draw(std::uint64_t seed, int dim, double sigma_max);

/// CSV columns: step, segment, sigma, nfe_cum, x_0 .. x_{D-1}.
std::string trajectory_csv(const Trajectory& trajectory);

/// Named Sampler Scheduler configurations at an NFE budget of 6N.
ScheduleSpec preset(std::string_view name, int n, const ScheduleOptions& options = {});
std::vector<std::string> preset_names();
/// The six two-unit configurations reported as performing best.
std::vector<std::string> best_preset_names();
/// Single-sampler baselines (one per sampler kind) at NFE = 6N.
std::vector<std::string> single_preset_names();

}  // namespace diffsched
