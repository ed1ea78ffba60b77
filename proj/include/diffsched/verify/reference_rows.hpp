#pragma once

// Direct, per-sampler update formulas written without the coefficient-vector
// machinery. Used as the independent side of the generic-vs-concrete checks.

#include "diffsched/oracle.hpp"
#include "diffsched/samplers.hpp"

namespace diffsched::verify {

struct RowInputs {
    Vector x;
    double sigma = 0.0;
    double sigma_next = 0.0;
    /// D(x_{i-1}) and sigma_{i-1}; only read by multistep rows.
    Vector prev_denoised;
    double sigma_prev = 0.0;
    Vector eps;
};

Vector euler_row(const RowInputs& in, const DenoiserOracle& D);
/// d = (x - D)/s, Euler predictor, averaged slopes.
Vector heun_row(const RowInputs& in, const DenoiserOracle& D);
/// Midpoint in log-sigma, derivative form.
Vector dpm2_row(const RowInputs& in, const DenoiserOracle& D);
/// Exponential-integrator form with t = -log sigma, r = h_last / h.
Vector dpmpp2m_row(const RowInputs& in, const DenoiserOracle& D);

/// Split into sigma_down / sigma_up, Euler to sigma_down plus sigma_up * eps.
Vector euler_a_row(const RowInputs& in, const DenoiserOracle& D);
Vector dpmpp_sde_row(const RowInputs& in, const DenoiserOracle& D);
Vector dpmpp_2s_a_row(const RowInputs& in, const DenoiserOracle& D);
/// Exponential-integrator form with eta = 1, midpoint correction.
Vector dpmpp_2m_sde_row(const RowInputs& in, const DenoiserOracle& D);
/// Literal row: (s^2 - s'^2) / (s s'^2) correction on the half node.
Vector dpm2_a_literal_row(const RowInputs& in, const DenoiserOracle& D);
/// DPM2 step to sigma_down followed by sigma_up * eps.
Vector dpm2_a_ancestral_row(const RowInputs& in, const DenoiserOracle& D);

/// The row the generic step should reproduce for `kind` (with history when
/// in.prev_denoised is non-empty).
Vector reference_row(SamplerKind kind, const RowInputs& in, const DenoiserOracle& D,
                     Dpm2aVariant variant = Dpm2aVariant::Literal);

}  // namespace diffsched::verify
