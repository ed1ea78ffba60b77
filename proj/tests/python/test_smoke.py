import math
import pathlib

import numpy as np
import pytest

import diffsched as ds

DATA = pathlib.Path(__file__).resolve().parents[2] / "data" / "two_modes.txt"


def test_karras_endpoints():
    assert ds.karras_schedule(2, 0.1, 10.0, 7.0) == [10.0, 0.1]
    assert ds.karras_schedule(2, 0.1, 10.0, 7.0, True) == [10.0, 0.1, 0.0]
    assert ds.karras_schedule(3, 0.1, 10.0, 1.0)[1] == pytest.approx(5.05)


def test_coefficients_sum_to_one():
    for name in ds.sampler_names():
        coeffs = ds.coefficient_vector(name, 3, 2.0, 0.7, sigma_prev=5.0)
        assert sum(w for _, w in coeffs) == pytest.approx(1.0, abs=1e-12)
    assert ds.coefficient_vector("dpm2", 0, 4.0, 1.0) == [(0.0, -1.0), (0.5, 2.0)]


def test_heun_hand_value():
    x = ds.step("heun", np.array([4.0]), 2.0, 1.0, oracle="gaussian:1")
    assert x[0] == pytest.approx(2.6, abs=1e-14)


def test_euler_ancestral_noise_term():
    x = ds.step("euler_a", np.array([4.0]), 2.0, 1.0, oracle=lambda x, s: np.full_like(x, 2.0), eps=np.array([1.0]))
    assert x[0] == pytest.approx(2.5 + 0.5 * math.sqrt(3.0))


def test_spec_and_presets():
    assert ds.parse_spec("dpm2_a:2+dpm2:4") == [("dpm2_a", 2), ("dpm2", 4)]
    assert ds.nfe_total("dpm2_a:2+dpm2:4") == 12
    assert ds.preset("heun-euler", 2) == "heun:2+euler:8"
    assert len(ds.preset_names()) == 79
    with pytest.raises(ValueError):
        ds.parse_spec("heun:0")
    with pytest.raises(KeyError):
        ds.preset("missing", 1)


def test_run_is_deterministic():
    a = ds.run("dpm2_a:2+dpm2:4", oracle="gaussian:1", seed=7, dim=2)
    b = ds.run("dpm2_a:2+dpm2:4", oracle="gaussian:1", seed=7, dim=2)
    assert a["nfe"] == 12
    assert a["states"].shape == (7, 2)
    assert np.array_equal(a["states"], b["states"])
    assert a["sigmas"][0] == 80.0


def test_gmm_samples_close_to_truth():
    gen = ds.sample("dpmpp_sde:4+dpmpp2m:8", oracle=f"gmm:{DATA}", seed=1, count=2000, dim=2)
    rng = np.random.default_rng(0)
    modes = rng.choice([-2.0, 2.0], size=2000)
    truth = np.column_stack([modes, np.zeros(2000)]) + 0.5 * rng.standard_normal((2000, 2))
    assert ds.sliced_w2(gen, truth, 64, 0) < 0.25


def test_gmm_tweedie_value():
    d = ds.gmm_denoiser("0.5 -2 0.1\n0.5 2 0.1\n")
    assert d(np.array([0.5]), 1.0)[0] == pytest.approx(1.5047614635669868, abs=1e-12)


def test_convergence_order():
    assert ds.convergence("heun")["order"] > 1.7
    assert 0.8 < ds.convergence("euler")["order"] < 1.2


def test_gaussians_reproducible():
    assert ds.gaussians(3, 1, 0, 5) == ds.gaussians(3, 1, 0, 5)
    assert ds.gaussians(3, 1, 0, 5) != ds.gaussians(3, 1, 1, 5)


def test_selfcheck_passes():
    results = ds.selfcheck()
    assert results and all(passed for _, passed, _ in results)
