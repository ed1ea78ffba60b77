#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "diffsched/oracle.hpp"
#include "diffsched/rng.hpp"
#include "diffsched/schedule.hpp"
#include "diffsched/vector.hpp"

namespace diffsched {

/// Raised when a step is asked to use history that the cache does not hold.
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

enum class SamplerKind {
    Euler,
    Heun,
    Dpm2,
    DpmPP2M,
    EulerA,
    Dpm2A,
    DpmPPSDE,
    DpmPP2SA,
    DpmPP2MSDE,
};

enum class SamplerClass { Ode, Sde };

inline constexpr std::array<SamplerKind, 9> kAllSamplerKinds = {
    SamplerKind::Euler,  SamplerKind::Heun,     SamplerKind::Dpm2,     SamplerKind::DpmPP2M,    SamplerKind::EulerA,
    SamplerKind::Dpm2A,  SamplerKind::DpmPPSDE, SamplerKind::DpmPP2SA, SamplerKind::DpmPP2MSDE,
};

SamplerClass sampler_class(SamplerKind kind) noexcept;
/// euler, heun, dpm2, dpmpp2m, euler_a, dpm2_a, dpmpp_sde, dpmpp_2s_a, dpmpp_2m_sde
std::string_view canonical_name(SamplerKind kind) noexcept;
std::optional<SamplerKind> parse_sampler_name(std::string_view name) noexcept;
/// Uses the previous step's prediction (DPM++ 2M and DPM++ 2M SDE).
bool is_multistep(SamplerKind kind) noexcept;
/// Has a correction term whose weight `correction_scale` may rescale.
bool has_correction_term(SamplerKind kind) noexcept;

/// Denoiser evaluations per step; multi-evaluation kinds degrade to a single
/// evaluation on a final step into sigma = 0.
int nfe_cost(SamplerKind kind, bool is_final_zero_step) noexcept;

/// Position on the noise ladder: integer node `base` when frac == 0,
/// otherwise the interior point base + frac with frac in (0, 1).
struct Node {
    std::int64_t base = 0;
    double frac = 0.0;

    static Node at(std::int64_t i) noexcept { return Node{i, 0.0}; }
    static Node between(const FractionalNode& f) noexcept {
        return f.frac == 1.0 ? Node{f.base + 1, 0.0} : Node{f.base, f.frac};
    }
    bool is_integer() const noexcept { return frac == 0.0; }

    friend auto operator<=>(const Node&, const Node&) = default;
};

/// Sparse weights c_j over ladder nodes. Weights sum to one for every
/// sampler; individual weights may be negative or exceed one.
class CoeffVector {
  public:
    using Entry = std::pair<Node, double>;

    CoeffVector() = default;
    CoeffVector(std::initializer_list<Entry> entries);

    void add(Node node, double weight);
    double weight(Node node) const noexcept;
    double sum() const noexcept;
    std::size_t size() const noexcept { return entries_.size(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

  private:
    std::vector<Entry> entries_;  // kept sorted by node
};

struct SigmaWindow {
    std::optional<double> prev;  // sigma_{i-1}, when history exists
    double current = 0.0;        // sigma_i
    double next = 0.0;           // sigma_{i+1}
};

/// Which form of the DPM2 ancestral correction to use.
///  - Literal: weight (sigma_i^2 - sigma_{i+1}^2) / (sigma_i sigma_{i+1}^2) on the half node.
///  - Ancestral: weight sigma_i / sigma_{i+1} on node i+1 (matches k-diffusion's DPM2 ancestral).
enum class Dpm2aVariant { Literal, Ancestral };

std::string_view dpm2a_variant_name(Dpm2aVariant v) noexcept;
Dpm2aVariant parse_dpm2a_variant(std::string_view text);

struct CoefficientOptions {
    double correction_scale = 1.0;
    Dpm2aVariant dpm2a_variant = Dpm2aVariant::Literal;
};

CoeffVector coefficient_vector(SamplerKind kind, std::int64_t i, const SigmaWindow& sigmas, bool history_available,
                               const CoefficientOptions& options = {});

enum class PredictionDirection { NoiseToData, DataToNoise };

/// data->noise: (x - D) / sigma;  noise->data: x - sigma * eps.
Vector convert_prediction(const Vector& value, const Vector& x, double sigma, PredictionDirection direction);

/// Provisional state at sigma_target from a single Euler step:
/// (sigma_target / sigma_i) x_i + (1 - sigma_target / sigma_i) d_i.
Vector euler_baseline_estimate(const Vector& x_i, const Vector& d_i, double sigma_i, double sigma_target);

struct SampleState {
    Vector x;
    std::int64_t step_index = 0;
    double sigma = 0.0;
};

struct NoiseDraw {
    Vector eps;

    static NoiseDraw draw(RngStream& stream, Eigen::Index dim);
    static NoiseDraw zeros(Eigen::Index dim) { return NoiseDraw{Vector::Zero(dim)}; }
};

enum class Provenance { History, Current, EulerEstimate };

struct CachedPrediction {
    Vector value;
    double sigma = 0.0;
    Provenance provenance = Provenance::History;
};

/// Denoiser outputs keyed by ladder node. A step returns a cache holding only
/// its own D(x_i), tagged as history for the following step.
class PredictionCache {
  public:
    void store(Node node, CachedPrediction prediction);
    const CachedPrediction* find(Node node) const noexcept;
    void clear() noexcept { entries_.clear(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

  private:
    std::vector<std::pair<Node, CachedPrediction>> entries_;
};

struct StepOptions {
    /// Fail with ContractViolation if a multistep kind finds no history.
    bool expect_history = false;
    /// Multiplies the second-order correction weight (SDE kinds only).
    double correction_scale = 1.0;
    Dpm2aVariant dpm2a_variant = Dpm2aVariant::Literal;
};

struct StepResult {
    SampleState state;
    PredictionCache cache;
    int nfe = 0;
    CoeffVector coefficients;
};

/// x' = (s'/s) x + (1 - s'/s) * sum_j c_j D(x_j).
StepResult ode_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                    const PredictionCache& cache, const StepOptions& options = {});

/// x' = (s'/s)^2 x + (1 - (s'/s)^2) * sum_j c_j D(x_j) + (s'/s) sqrt(s^2 - s'^2) eps.
StepResult sde_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                    const PredictionCache& cache, const NoiseDraw& noise, const StepOptions& options = {});

/// Dispatches on the sampler class; `noise` is required for SDE kinds.
StepResult take_step(SamplerKind kind, const SampleState& state, double sigma_next, const DenoiserOracle& denoiser,
                     const PredictionCache& cache, const NoiseDraw* noise, const StepOptions& options = {});

}  // namespace diffsched
