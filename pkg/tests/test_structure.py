"""Shear-frame surrogate and Newmark integration."""

import math

import numpy as np
import pytest

from flumeuq.errors import (EmptyHistory, InvalidParams, TimestepTooCoarse)
from flumeuq.structure import (ShearFrameModel, StructuralParams,
                               TABLE3_MEANS, build_frame, extract_edp,
                               newmark_response)


def sdof(k=1.0e5, m=100.0, vy=1e9, alpha=0.05, zeta=0.0):
    return ShearFrameModel(story_masses=[m], story_stiffness=[k],
                           story_yield_shear=[vy], post_yield_ratio=alpha,
                           damping_ratio=zeta, story_height=3.0, n_stories=1)


# ---------------------------------------------------------------------------
# build_frame
# ---------------------------------------------------------------------------

def test_invalid_params_positivity():
    with pytest.raises(InvalidParams):
        StructuralParams(yield_strength=1.0, col_weight_per_len=1.0,
                         beam_weight_per_len=1.0, girder_weight_per_len=0.0,
                         youngs_modulus=1.0)
    with pytest.raises(InvalidParams):
        StructuralParams(yield_strength=-5.0, col_weight_per_len=1.0,
                         beam_weight_per_len=1.0, girder_weight_per_len=1.0,
                         youngs_modulus=1.0)


def test_stiffness_linear_in_youngs_modulus():
    base = build_frame(TABLE3_MEANS)
    doubled_params = StructuralParams(
        yield_strength=TABLE3_MEANS.yield_strength,
        col_weight_per_len=TABLE3_MEANS.col_weight_per_len,
        beam_weight_per_len=TABLE3_MEANS.beam_weight_per_len,
        girder_weight_per_len=TABLE3_MEANS.girder_weight_per_len,
        youngs_modulus=2.0 * TABLE3_MEANS.youngs_modulus)
    doubled = build_frame(doubled_params)
    np.testing.assert_allclose(doubled.story_stiffness,
                               2.0 * base.story_stiffness, rtol=1e-14)
    np.testing.assert_allclose(doubled.story_masses, base.story_masses)


def test_mean_frame_period_in_sanity_window():
    # eigenvalue oracle on the 2x2 system
    model = build_frame(TABLE3_MEANS)
    m = model.story_masses[0]
    k = model.story_stiffness[0]
    # uniform 2-story chain: omega1^2 = (3 - sqrt(5))/2 * k/m
    w1 = math.sqrt((3.0 - math.sqrt(5.0)) / 2.0 * k / m)
    t1 = 2.0 * math.pi / w1
    assert model.fundamental_period() == pytest.approx(t1, rel=1e-10)
    assert 0.1 <= t1 <= 1.0


def test_yield_shear_scales_with_column_weight():
    heavier = StructuralParams(
        yield_strength=TABLE3_MEANS.yield_strength,
        col_weight_per_len=2.0 * TABLE3_MEANS.col_weight_per_len,
        beam_weight_per_len=TABLE3_MEANS.beam_weight_per_len,
        girder_weight_per_len=TABLE3_MEANS.girder_weight_per_len,
        youngs_modulus=TABLE3_MEANS.youngs_modulus)
    base = build_frame(TABLE3_MEANS)
    up = build_frame(heavier)
    np.testing.assert_allclose(up.story_yield_shear,
                               2.0 * base.story_yield_shear, rtol=1e-14)


# ---------------------------------------------------------------------------
# Newmark integration
# ---------------------------------------------------------------------------

def test_zero_load_zero_response():
    model = sdof()
    edp = newmark_response(model, np.zeros((1, 200)), 1e-3)
    np.testing.assert_array_equal(edp.displacement_history, 0.0)
    np.testing.assert_array_equal(edp.acceleration_history, 0.0)
    assert edp.rmsa_envelope == 0.0


def test_sdof_free_vibration_closed_form():
    model = sdof()
    w = math.sqrt(1e5 / 100.0)
    period = 2.0 * math.pi / w
    dt = period / 1000.0
    nt = int(round(10.0 * period / dt)) + 1
    edp = newmark_response(model, np.zeros((1, nt)), dt, u0=[0.01])
    t = np.arange(nt) * dt
    exact = 0.01 * np.cos(w * t)
    err = np.abs(edp.displacement_history[0] - exact).max() / 0.01
    assert err < 1e-3


def test_sdof_convergence_rate():
    model = sdof()
    w = math.sqrt(1e5 / 100.0)
    period = 2.0 * math.pi / w

    def max_err(dt):
        nt = int(round(10.0 * period / dt)) + 1
        edp = newmark_response(model, np.zeros((1, nt)), dt, u0=[0.01])
        t = np.arange(nt) * dt
        return np.abs(edp.displacement_history[0] - 0.01 * np.cos(w * t)).max()

    e1 = max_err(period / 1000.0)
    e2 = max_err(period / 2000.0)
    assert e1 / e2 >= 3.5


def test_elastic_linearity_in_load():
    model = build_frame(TABLE3_MEANS)
    t = np.arange(0, 6.0, 0.005)
    load = 800.0 * np.exp(-((t - 2.0) / 0.4) ** 2)
    loads = np.vstack([load, 0.3 * load])
    a = newmark_response(model, loads, 0.005)
    b = newmark_response(model, 3.0 * loads, 0.005)
    scale = np.abs(a.displacement_history).max()
    np.testing.assert_allclose(b.displacement_history,
                               3.0 * a.displacement_history, rtol=1e-9,
                               atol=1e-9 * scale)
    np.testing.assert_allclose(b.rmsa, 3.0 * a.rmsa, rtol=1e-9)


def test_energy_conservation_elastic_undamped():
    model = sdof()
    w = math.sqrt(1e5 / 100.0)
    period = 2.0 * math.pi / w
    dt = period / 400.0
    nt = int(round(10.0 * period / dt)) + 1
    edp = newmark_response(model, np.zeros((1, nt)), dt, u0=[0.01])
    u = edp.displacement_history[0]
    v = edp.velocity_history[0]
    energy = 0.5 * 1e5 * u**2 + 0.5 * 100.0 * v**2
    e0 = 0.5 * 1e5 * 0.01**2
    assert np.abs(energy - e0).max() / e0 < 0.005


def test_hysteretic_dissipation_non_negative():
    # strong cycling drives the spring well past yield
    model = sdof(vy=500.0, alpha=0.05)
    w = math.sqrt(1e5 / 100.0)
    dt = 2.0 * math.pi / w / 200.0
    t = np.arange(0, 12.0 * 2.0 * math.pi / w, dt)
    load = 900.0 * np.sin(w * t)
    edp = newmark_response(model, load[np.newaxis, :], dt)
    u = edp.displacement_history[0]
    v = edp.velocity_history[0]
    # input work minus recoverable (elastic estimate) and kinetic energy
    work = np.concatenate([[0.0], np.cumsum(0.5 * (load[1:] + load[:-1])
                                            * np.diff(u))])
    recoverable = 0.5 * model.story_stiffness[0] * u**2
    kinetic = 0.5 * model.story_masses[0] * v**2
    slack = 1e-9 * max(1.0, work.max())
    assert np.all(work + slack >= kinetic)          # energy cannot appear
    assert work[-1] > kinetic[-1] + 0.9 * recoverable[-1]  # net dissipation
    assert np.abs(u).max() > 500.0 / 1e5            # actually yielded


def test_yielding_caps_story_shear():
    elastic = sdof(vy=1e9)
    yielding = sdof(vy=300.0, alpha=0.0)  # perfectly plastic: hard cap at Vy
    dt = 0.002
    t = np.arange(0, 4.0, dt)
    load = np.where(t < 0.5, 1200.0 * np.sin(2 * math.pi * t / 0.5), 0.0)
    e = newmark_response(elastic, load[np.newaxis, :], dt)
    y = newmark_response(yielding, load[np.newaxis, :], dt)

    def story_shear(edp):  # undamped SDOF: fs = F - m a
        return load - 100.0 * edp.acceleration_history[0]

    assert np.abs(story_shear(y)).max() < np.abs(story_shear(e)).max()
    assert np.abs(story_shear(y)).max() <= 300.0 * (1.0 + 1e-9)
    # plastic excursion leaves residual drift
    assert abs(y.displacement_history[0, -1]) > 1e-5


def test_rmsa_constant_acceleration_identity():
    edp = extract_edp(np.zeros((1, 64)), 2.0 * np.ones((1, 64)))
    assert edp.rmsa[0] == 2.0
    assert edp.rmsa_envelope == 2.0


def test_rmsa_square_wave():
    a = 3.0 * np.where(np.arange(100) % 2 == 0, 1.0, -1.0)
    edp = extract_edp(np.zeros((1, 100)), a[np.newaxis, :])
    assert edp.rmsa[0] == pytest.approx(3.0, rel=1e-14)


def test_peak_displacement_sine():
    t = np.linspace(0, 2.0 * math.pi, 5000)
    edp = extract_edp(np.sin(t)[np.newaxis, :], np.zeros((1, 5000)))
    assert edp.peak_displacement[0] == pytest.approx(1.0, abs=1e-3)


def test_rmsa_brute_force_oracle():
    rng = np.random.default_rng(12)
    a = rng.normal(0.0, 2.0, (2, 333))
    edp = extract_edp(np.zeros((2, 333)), a)
    for i in range(2):
        brute = math.sqrt(sum(float(x) ** 2 for x in a[i]) / 333.0)
        assert edp.rmsa[i] == pytest.approx(brute, rel=1e-12)
    assert edp.rmsa_envelope == pytest.approx(max(edp.rmsa), rel=1e-15)


def test_empty_history_raises():
    with pytest.raises(EmptyHistory):
        extract_edp(np.zeros((1, 0)), np.zeros((1, 0)))


def test_timestep_too_coarse():
    model = sdof()  # T1 ~ 0.199 s
    with pytest.raises(TimestepTooCoarse):
        newmark_response(model, np.zeros((1, 10)), 0.05)


def test_rayleigh_damping_two_modes():
    model = build_frame(TABLE3_MEANS)
    a_m, a_k = model.rayleigh_coefficients()
    w1, w2 = model.natural_frequencies()
    for w in (w1, w2):
        zeta = 0.5 * (a_m / w + a_k * w)
        assert zeta == pytest.approx(model.damping_ratio, rel=1e-12)
