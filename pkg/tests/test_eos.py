"""Barotropic equation of state."""

import math

import numpy as np
import pytest

from flumeuq.sph import FluidConstants, eos_pressure

C0 = 10.0 * math.sqrt(9.81 * 0.75)


def test_reference_state_is_zero():
    consts = FluidConstants(c0=C0)
    assert eos_pressure(1000.0, consts) == 0.0


def test_gamma_one_linear_limit():
    consts = FluidConstants(c0=C0, gamma=1.0)
    for rho in (950.0, 1000.0, 1013.0, 1100.0):
        assert eos_pressure(rho, consts) == pytest.approx(
            C0**2 * (rho - 1000.0), rel=1e-12, abs=1e-9)


def test_direct_formula_oracle():
    consts = FluidConstants(c0=27.1385)
    rho, rho0, gamma = 1010.0, 1000.0, 7.0
    expected = (27.1385**2 * rho0 / gamma) * ((rho / rho0) ** gamma - 1.0)
    assert eos_pressure(rho, consts) == pytest.approx(expected, rel=1e-10)


def test_strictly_increasing():
    consts = FluidConstants(c0=C0)
    rhos = np.linspace(950.0, 1100.0, 601)
    p = eos_pressure(rhos, consts)
    assert np.all(np.diff(p) > 0.0)


def test_speed_of_sound_from_depth():
    consts = FluidConstants.for_still_depth(0.75)
    assert consts.c0 == pytest.approx(10.0 * math.sqrt(9.81 * 0.75), rel=1e-12)
    assert consts.c0 == pytest.approx(27.125, abs=1e-3)
    assert consts.gamma == 7.0 and consts.rho0 == 1000.0
    assert consts.alpha_visc == 0.01
