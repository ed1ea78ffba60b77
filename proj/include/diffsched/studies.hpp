#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diffsched/oracle.hpp"
#include "diffsched/report.hpp"
#include "diffsched/samplers.hpp"
#include "diffsched/scheduler.hpp"

namespace diffsched {

struct ConvergenceConfig {
    double sigma_data = 1.0;
    ScheduleOptions schedule;
    std::vector<int> step_counts{8, 16, 32, 64, 128, 256};
    int dim = 4;
    std::uint64_t seed = 0;
    /// Seed multistep kinds with the exact state one ladder step above sigma_max.
    bool warm_start = true;
};

struct ConvergencePoint {
    int steps = 0;
    int nfe = 0;
    double error = 0.0;  // relative to the exact endpoint
};

struct ConvergenceResult {
    SamplerKind kind = SamplerKind::Euler;
    std::vector<ConvergencePoint> points;
    double order = 0.0;
};

/// Integrates the Gaussian-data probability-flow ODE from sigma_max to
/// sigma_min with `kind:N` and measures the error against the exact endpoint.
ConvergenceResult convergence_study(SamplerKind kind, const ConvergenceConfig& config);

/// The level the Karras ramp with `n_intervals` spacings would place one
/// spacing before sigma_max.
double karras_extension_below_zero(int n_intervals, double sigma_min, double sigma_max, double rho);

/// Replaces `N` and `<k>N` step counts, e.g. "dpm2_a:N+dpm2:2N" at n = 3.
std::string instantiate_spec_template(std::string_view text, int n);

struct SweepEntry {
    std::string label;
    std::function<ScheduleSpec(int n)> make;
};

/// Resolves `all`, `best`, `singles` or a preset name.
std::vector<SweepEntry> preset_entries(std::string_view selector, const ScheduleOptions& options);
/// A literal or N-templated spec.
SweepEntry spec_entry(const std::string& text, const ScheduleOptions& options);

struct SweepConfig {
    std::vector<SweepEntry> entries;
    std::vector<int> n_values{1};
    std::vector<std::uint64_t> seeds{0};
    int samples = 256;
    int projections = 64;
    int dim = 2;
    OracleConfig oracle;
    RunOptions run;
    int jobs = 1;
    bool timing = true;
};

/// One record per (entry, N, seed), ordered by entry, then N, then seed.
///
/// Each seed produces a batch of `samples` trajectories (child seeds from
/// derive_seed) compared by sliced-W2 against an equally sized ground-truth
/// batch drawn from the oracle's data distribution.
std::vector<RunRecord> run_sweep(const SweepConfig& config);

/// Ground-truth draw of the data distribution behind `oracle`.
Vector draw_reference(const OracleConfig& oracle, const GmmSpec* gmm, int dim, RngStream& stream);

/// Per-label mean metric against NFE, in first-seen label order.
std::vector<ChartSeries> aggregate_by_spec(const std::vector<RunRecord>& records, const std::vector<SweepEntry>& entries);

}  // namespace diffsched
