import numpy as np
import pytest

from timegrit.materials import (MU0, VACUUM_RELUCTIVITY, ConstantReluctivity,
                                SplineReluctivity, default_bh_table,
                                linear_materials, load_bh_table,
                                nonlinear_materials, save_bh_table)
from timegrit.sources import PwmSource, SineSource, pwm_excitation

T, N_TEETH = 0.02, 1100


def test_constant_reluctivity():
    model = ConstantReluctivity(123.0)
    np.testing.assert_array_equal(model.nu(np.array([0.0, 1.0, 5.0])), 123.0)
    np.testing.assert_array_equal(model.dnu_db(np.array([0.0, 2.0])), 0.0)
    with pytest.raises(ValueError):
        ConstantReluctivity(2.0 * VACUUM_RELUCTIVITY)


def test_spline_curve_bounds_and_monotonicity():
    model = SplineReluctivity(*default_bh_table())
    b = np.linspace(0.0, model.b_max, 2001)
    nu = model.nu(b)
    assert np.all(nu > 0.0)
    assert np.all(nu <= VACUUM_RELUCTIVITY)
    assert np.all(nu >= model.nu_samples[0] * (1 - 1e-12))
    assert np.all(np.diff(nu) >= -1e-9 * nu[:-1])  # monotone nondecreasing


def test_spline_first_derivative_continuous():
    model = SplineReluctivity(*default_bh_table())
    b = np.linspace(1e-4, model.b_max - 1e-4, 400)
    h = 1e-7
    fd = (model.nu(b + h) - model.nu(b - h)) / (2 * h)
    analytic = model.dnu_db(b)
    scale = np.max(np.abs(analytic)) + 1.0
    assert np.max(np.abs(fd - analytic)) <= 1e-3 * scale


def test_spline_extrapolation_caps_at_vacuum():
    model = SplineReluctivity(*default_bh_table())
    b_far = np.array([model.b_max + 50.0, model.b_max + 5000.0])
    nu_far = model.nu(b_far)
    assert np.all(np.diff(model.nu(np.array([model.b_max, model.b_max + 1.0]))) >= 0.0)
    assert nu_far[-1] == VACUUM_RELUCTIVITY
    assert np.all(nu_far <= VACUUM_RELUCTIVITY)


def test_bh_table_io_roundtrip(tmp_path):
    b, h = default_bh_table()
    path = tmp_path / "steel.bh"
    save_bh_table(path, b, h)
    b2, h2 = load_bh_table(path)
    np.testing.assert_allclose(b2, b, rtol=0, atol=0)
    np.testing.assert_allclose(h2, h, rtol=0, atol=0)


def test_material_maps():
    lin = linear_materials(shield_mu_r=500.0)
    assert lin.is_linear
    assert lin.sigma == (0.0, 0.0, 1.0e7)
    assert lin.reluctivity[0].nu(0.0) == pytest.approx(1.0 / MU0)
    nonlin = nonlinear_materials()
    assert not nonlin.is_linear


# -- excitation signals ------------------------------------------------------

def test_pwm_zero_at_t0():
    assert pwm_excitation(0.0, T, N_TEETH) == 0.0


def test_pwm_quarter_period_positive():
    assert pwm_excitation(T / 4, T, N_TEETH) == 1.0


def test_pwm_three_quarter_period_negative():
    assert pwm_excitation(3 * T / 4, T, N_TEETH) == -1.0


def test_pwm_range_is_three_valued():
    t = np.linspace(0.0, 2 * T, 200001)
    vals = pwm_excitation(t, T, N_TEETH)
    assert set(np.unique(vals)).issubset({-1.0, 0.0, 1.0})


def test_pwm_duty_cycle_tracks_sine():
    # moving average over a window of 10 teeth reconstructs sin(2 pi t / T)
    samples_per_tooth = 200
    n_samples = N_TEETH * samples_per_tooth
    t = (np.arange(n_samples) + 0.5) * (T / n_samples)
    vals = pwm_excitation(t, T, N_TEETH)
    window = 10 * samples_per_tooth
    kernel = np.ones(window) / window
    avg = np.convolve(vals, kernel, mode="valid")
    centers = t[window // 2 - 1: window // 2 - 1 + avg.size]
    target = np.sin(2 * np.pi * centers / T)
    assert np.max(np.abs(avg - target)) <= 0.1


def test_pwm_periodic_in_t(rng):
    # sample away from the sawtooth discontinuities, where the signal is defined
    t = rng.uniform(0.0, T, size=5000)
    a = pwm_excitation(t, T, N_TEETH)
    b = pwm_excitation(t + T, T, N_TEETH)
    np.testing.assert_array_equal(a, b)


def test_source_objects_scale_amplitude():
    pwm = PwmSource(period=T, teeth=N_TEETH, amplitude=2.5)
    assert pwm(T / 4) == 2.5
    sine = SineSource(period=1.0, amplitude=3.0)
    assert sine(0.25) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        PwmSource(period=-1.0)
    with pytest.raises(ValueError):
        PwmSource(teeth=0)
