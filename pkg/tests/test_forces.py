"""Force estimators: code formula, semi-empirical split, SPH summation, Froude."""

import math

import numpy as np
import pytest

from flumeuq.errors import (CoefficientOutOfRange, LengthMismatch,
                            NonPositiveDepth)
from flumeuq.flume import GaugeTrace, build_wall_load_tank
from flumeuq.forces import (AsceParams, Estimator, ForceRecord,
                            SemiEmpiricalParams, asce_envelope_record,
                            asce_force_per_length, asce_pressure,
                            effective_velocity, froude_number,
                            semi_empirical_force, sph_structure_force,
                            strip_kinematics)
from flumeuq.runner import advance


# ---------------------------------------------------------------------------
# ASCE formulas
# ---------------------------------------------------------------------------

def test_asce_pressure_zero_depth():
    assert asce_pressure(AsceParams(cp=2.0, ds=0.0)) == 0.0


def test_asce_pressure_direct_evaluation():
    p = AsceParams(cp=1.6, ds=1.0, gamma_w=9810.0)
    assert asce_pressure(p) == pytest.approx((1.6 + 1.2) * 9810.0, rel=1e-14)
    assert asce_pressure(p) == pytest.approx(27468.0, rel=1e-12)


def test_asce_force_direct_evaluation():
    p = AsceParams(cp=3.5, ds=0.75, gamma_w=9810.0)
    expected = (1.1 * 3.5 + 2.4) * 9810.0 * 0.75**2
    assert asce_force_per_length(p) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(34488.28125, rel=1e-12)


def test_asce_coefficient_bounds():
    with pytest.raises(CoefficientOutOfRange):
        AsceParams(cp=3.6, ds=1.0)
    with pytest.raises(CoefficientOutOfRange):
        AsceParams(cp=1.5, ds=1.0)
    AsceParams(cp=1.6, ds=1.0)
    AsceParams(cp=3.5, ds=1.0)


def test_asce_quadratic_depth_scaling():
    rng = np.random.default_rng(11)
    for _ in range(25):
        cp = rng.uniform(1.6, 3.5)
        ds = rng.uniform(0.05, 3.0)
        gw = rng.uniform(9000.0, 11000.0)
        f1 = asce_force_per_length(AsceParams(cp=cp, ds=ds, gamma_w=gw))
        f2 = asce_force_per_length(AsceParams(cp=cp, ds=2.0 * ds, gamma_w=gw))
        assert f2 == pytest.approx(4.0 * f1, rel=1e-12)
        p1 = asce_pressure(AsceParams(cp=cp, ds=ds, gamma_w=gw))
        p2 = asce_pressure(AsceParams(cp=cp, ds=2.0 * ds, gamma_w=gw))
        assert p2 == pytest.approx(2.0 * p1, rel=1e-12)


def test_asce_envelope_record_single_row():
    rec = asce_envelope_record(AsceParams(cp=3.5, ds=0.75), width=0.4)
    assert rec.times.size == 1
    assert rec.estimator is Estimator.ASCE
    assert rec.peak() == pytest.approx(34488.28125 * 0.4, rel=1e-12)


# ---------------------------------------------------------------------------
# semi-empirical split
# ---------------------------------------------------------------------------

def test_semi_empirical_both_terms_vanish():
    trace = GaugeTrace(times=[0.0, 1.0], eta=[0.0, 0.0])
    rec = semi_empirical_force(trace, [0.0, 0.0], SemiEmpiricalParams())
    np.testing.assert_array_equal(rec.force, 0.0)


def test_semi_empirical_static_direct_evaluation():
    # h_b = 1.15 m absolute surface height -> 0.4 m head above the datum
    trace = GaugeTrace(times=[0.0], eta=[0.4])
    p = SemiEmpiricalParams(cd=2.0, width=0.4, area=0.2)
    rec = semi_empirical_force(trace, [0.0], p)
    expected = 0.5 * 0.4 * 0.4 * (1000.0 * 9.81 * 0.4)
    assert expected == pytest.approx(313.92, rel=1e-12)
    assert rec.force[0] == pytest.approx(expected, rel=1e-12)


def test_semi_empirical_dynamic_direct_evaluation():
    trace = GaugeTrace(times=[0.0], eta=[0.0])
    p = SemiEmpiricalParams(cd=2.0, width=0.4, area=0.2)
    rec = semi_empirical_force(trace, [3.0], p)
    assert rec.force[0] == pytest.approx(0.5 * 1000.0 * 2.0 * 0.2 * 9.0, rel=1e-12)
    assert rec.force[0] == pytest.approx(1800.0, rel=1e-12)


def test_semi_empirical_clamps_below_datum():
    trace = GaugeTrace(times=[0.0, 1.0, 2.0], eta=[-0.3, -0.01, 0.0])
    rec = semi_empirical_force(trace, [0.0, 0.0, 0.0], SemiEmpiricalParams())
    np.testing.assert_array_equal(rec.force, 0.0)


def test_semi_empirical_non_negative_property():
    rng = np.random.default_rng(4)
    times = np.arange(50) * 0.1
    trace = GaugeTrace(times=times, eta=rng.uniform(-0.8, 1.0, 50))
    rec = semi_empirical_force(trace, rng.uniform(-4.0, 4.0, 50),
                               SemiEmpiricalParams())
    assert (rec.force >= 0.0).all()


def test_semi_empirical_length_mismatch():
    trace = GaugeTrace(times=[0.0, 1.0], eta=[0.0, 0.1])
    with pytest.raises(LengthMismatch):
        semi_empirical_force(trace, [0.0], SemiEmpiricalParams())


# ---------------------------------------------------------------------------
# ForceRecord normalisation
# ---------------------------------------------------------------------------

def test_force_record_normalisation_rescale():
    rec = ForceRecord(times=[0.0, 1.0], force=[100.0, 300.0],
                      estimator=Estimator.SPH, f0=695.0)
    doubled = ForceRecord(times=[0.0, 1.0], force=[100.0, 300.0],
                          estimator=Estimator.SPH, f0=2.0 * 695.0)
    np.testing.assert_allclose(doubled.force_normalized,
                               rec.force_normalized / 2.0, rtol=1e-14)


def test_force_record_default_f0():
    rec = ForceRecord(times=[0.0], force=[695.0], estimator=Estimator.SPH)
    assert rec.force_normalized[0] == pytest.approx(1.0)


def test_force_record_peak_discrete_max():
    rec = ForceRecord(times=np.arange(4.0), force=[1.0, 9.0, 3.0, 8.5],
                      estimator=Estimator.SPH)
    assert rec.peak() == 9.0


# ---------------------------------------------------------------------------
# Froude number
# ---------------------------------------------------------------------------

def test_froude_zero_velocity():
    fr = froude_number(0.0, 0.5)
    assert fr.value == 0.0 and fr.regime == "subcritical"


def test_froude_critical_boundary():
    d = 0.37
    fr = froude_number(math.sqrt(9.81 * d), d)
    assert fr.value == pytest.approx(1.0, rel=1e-12)


def test_froude_supercritical():
    assert froude_number(4.0, 0.3).regime == "supercritical"


def test_froude_direct_evaluation():
    rng = np.random.default_rng(2)
    for _ in range(50):
        v = rng.uniform(0.0, 6.0)
        d = rng.uniform(0.01, 2.0)
        g = rng.uniform(9.0, 10.5)
        assert froude_number(v, d, g).value == pytest.approx(
            v / math.sqrt(g * d), rel=1e-15)


def test_froude_nonpositive_depth():
    with pytest.raises(NonPositiveDepth):
        froude_number(1.0, 0.0)


# ---------------------------------------------------------------------------
# SPH structure force and the probe strip
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def relaxed_wall_load_tank():
    state, kern, consts, struct = build_wall_load_tank(1.0, 0.5, 0.05)
    advance(state, kern, consts, 0.8, damping=4.0)
    advance(state, kern, consts, 1.2)
    return state, kern, consts, struct


def test_dry_structure_zero_force():
    state, kern, consts, struct = build_wall_load_tank(1.0, 0.5, 0.05)
    state.pos[state.fluid_indices, 0] -= 10.0  # teleport the water far away
    f = sph_structure_force(state, struct, consts, kern, 0.05, width=0.4)
    assert f == 0.0


def test_hydrostatic_wall_load_oracle(relaxed_wall_load_tank):
    state, kern, consts, struct = relaxed_wall_load_tank
    f = sph_structure_force(state, struct, consts, kern, 0.05, width=0.4)
    exact = 0.4 * 0.5 * consts.rho0 * consts.g * 0.5**2
    assert f == pytest.approx(exact, rel=0.10)


def test_effective_velocity_uniform_flow(relaxed_wall_load_tank):
    state, kern, consts, struct = relaxed_wall_load_tank
    state = _clone(state)
    state.vel[state.fluid_indices] = [2.0, 0.0]
    assert effective_velocity(state, struct.box, 0.05) == pytest.approx(2.0)


def test_effective_velocity_brute_force_oracle(relaxed_wall_load_tank):
    state, kern, consts, struct = relaxed_wall_load_tank
    state = _clone(state)
    rng = np.random.default_rng(9)
    state.vel[state.fluid_indices] = rng.uniform(-2, 2, (state.fluid_indices.size, 2))
    got = effective_velocity(state, struct.box, 0.05)
    x0, _, z0, z1 = struct.box
    x_probe = x0 - 2 * 0.05
    speeds = []
    for i in state.fluid_indices:
        x, z = state.pos[i]
        if abs(x - x_probe) <= 2 * 0.05 and z0 <= z <= z1:
            speeds.append(math.hypot(*state.vel[i]))
    assert got == pytest.approx(sum(speeds) / len(speeds), rel=1e-12)


def test_effective_velocity_dry_strip():
    state, kern, consts, struct = build_wall_load_tank(1.0, 0.5, 0.05)
    state.pos[state.fluid_indices, 0] -= 10.0
    v, d = strip_kinematics(state, struct.box, 0.05)
    assert v == 0.0 and d == 0.0


def _clone(state):
    from flumeuq.sph import CellGrid, SimState
    g = state.grid
    return SimState(pos=state.pos.copy(), vel=state.vel.copy(),
                    rho=state.rho.copy(), mass=state.mass.copy(),
                    kind=state.kind.copy(),
                    grid=CellGrid(x0=g.x0, z0=g.z0, cell_size=g.cell_size,
                                  nx=g.nx, nz=g.nz),
                    time=state.time, step_count=state.step_count)
