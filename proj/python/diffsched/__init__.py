"""Diffusion samplers, coefficient vectors and sampler scheduling."""

from ._core import (
    ContractViolation,
    Denoiser,
    PresetNotFound,
    SpecParseError,
    best_preset_names,
    coefficient_vector,
    convergence,
    exact_gaussian_ode_endpoint,
    fit_convergence_order,
    gaussian_denoiser,
    gaussians,
    gmm_denoiser,
    karras_schedule,
    make_oracle,
    nfe_cost,
    nfe_total,
    parse_spec,
    preset,
    preset_names,
    run,
    sample,
    sampler_names,
    selfcheck,
    sigma_interpolate,
    sliced_w2,
    step,
    w2_gaussian,
)

__all__ = [name for name in dir() if not name.startswith("_")]
