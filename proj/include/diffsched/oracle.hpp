#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "diffsched/rng.hpp"
#include "diffsched/vector.hpp"

namespace diffsched {

struct NoiseDraw;

/// Closed-form stand-in for a trained denoiser D(x, sigma).
///
/// Wraps a pure function; copies share the same callable. Evaluation must be
/// deterministic so that trajectories are reproducible.
class DenoiserOracle {
  public:
    using Function = std::function<Vector(const Vector& x, double sigma)>;

    DenoiserOracle(Function fn, std::string description);

    Vector operator()(const Vector& x, double sigma) const { return (*fn_)(x, sigma); }
    const std::string& description() const noexcept { return description_; }

  private:
    std::shared_ptr<const Function> fn_;
    std::string description_;
};

/// Posterior mean for N(0, sigma_data^2 I) data: sigma_data^2 / (sigma_data^2 + sigma^2) * x.
DenoiserOracle gaussian_denoiser(double sigma_data);

/// Always returns `x0`; the ideal denoiser for a single known data point.
DenoiserOracle constant_denoiser(Vector x0);

/// D(x, sigma) = x.
DenoiserOracle identity_denoiser();

struct GmmComponent {
    double weight = 1.0;
    Vector mean;
    double stddev = 1.0;
};

/// Isotropic Gaussian mixture over R^D.
class GmmSpec {
  public:
    explicit GmmSpec(std::vector<GmmComponent> components);

    /// One component per line: `weight mean_0 ... mean_{D-1} std`; '#' starts a comment.
    static GmmSpec parse(std::string_view text);
    static GmmSpec load(const std::string& path);

    const std::vector<GmmComponent>& components() const noexcept { return components_; }
    Eigen::Index dim() const noexcept { return components_.front().mean.size(); }

    /// Weighted mean of the mixture.
    Vector mean() const;

  private:
    std::vector<GmmComponent> components_;
};

/// Tweedie-exact posterior mean under a Gaussian mixture prior, computed with
/// log-sum-exp responsibilities.
DenoiserOracle gmm_denoiser(GmmSpec spec, std::string description = "gmm");

/// Draw from the mixture itself (ground-truth samples).
Vector sample_gmm(const GmmSpec& spec, RngStream& stream);

/// Exact probability-flow solution under the Gaussian oracle:
/// x_start * sqrt((sigma_data^2 + sigma_end^2) / (sigma_data^2 + sigma_start^2)).
Vector exact_gaussian_ode_endpoint(const Vector& x_start, double sigma_start, double sigma_end, double sigma_data);

/// x0 + sigma * eps.
Vector forward_perturb(const Vector& x0, double sigma, const NoiseDraw& noise);

/// (D(x, sigma) - x) / sigma^2.
Vector score_from_denoiser(const DenoiserOracle& oracle, const Vector& x, double sigma);

/// Parsed form of the --oracle flag: `gaussian:<sigma_data>` or `gmm:<path>`.
struct OracleConfig {
    enum class Kind { Gaussian, Gmm } kind = Kind::Gaussian;
    double sigma_data = 1.0;
    std::string gmm_path;
    std::string label;
};

OracleConfig parse_oracle_flag(std::string_view text);

DenoiserOracle make_oracle(const OracleConfig& config);

}  // namespace diffsched
