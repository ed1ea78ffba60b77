#pragma once

// Brute-force numerical oracles: quadrature, finite differences and
// fine-grid integration. None of these call into the sampler engine.

#include <functional>

#include "diffsched/oracle.hpp"

namespace diffsched::verify {

/// E[x0 | x] for a 1-D mixture prior under x = x0 + sigma * eps, by composite
/// Simpson quadrature per component over a window covering both the
/// component and the likelihood to 12 standard deviations.
double gmm_tweedie_quadrature_1d(const GmmSpec& spec, double x, double sigma, int intervals_per_component = 200000);

/// log sum_k w_k N(x; mu_k, (s_k^2 + sigma^2) I).
double gmm_perturbed_log_density(const GmmSpec& spec, const Vector& x, double sigma);

/// Five-point central-difference gradient.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h);

/// Explicit Euler on dx/dsigma = (x - D(x, sigma)) / sigma over a uniform
/// sigma grid with `steps` intervals.
Vector fine_grid_euler(const DenoiserOracle& denoiser, const Vector& x, double sigma_start, double sigma_end,
                       int steps);

/// Two isotropic modes at (+-2, 0) with std 0.5 and equal weights.
GmmSpec two_mode_gmm();

}  // namespace diffsched::verify
