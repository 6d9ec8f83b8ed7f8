"""Rayleigh solitary-wave piston trajectory.

The paddle drives the shallow-water mass flux of a solitary wave of height H
on depth d: the free surface seen by the paddle is

    eta(x_s, t) = H sech^2[ k (c (t - T_f/2) + S/2 - x_s) ]

with celerity c = sqrt(g (H + d)), outskirt decay coefficient
k = sqrt(3 H / (4 d^2 (H + d))) and total stroke S = 2 H / (k d)
= 4 sqrt(H (H + d) / 3).  The paddle position follows the board-velocity
ODE

    dx_s/dt = c eta / (d + eta)

which is integrated once with fixed-step RK4 and tabulated; displacement and
velocity lookups interpolate the table.  The ramp time T_f is sized so the
sech^2 tails at t = 0 and t = T_f are below a configurable fraction of H,
which makes the motion start and end essentially at rest.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class RayleighPiston:
    """Tabulated piston trajectory for one solitary-wave scenario."""

    wave_height: float                 # H [m]
    depth: float                       # still-water depth at the paddle [m]
    gravity: float = 9.81
    tail_fraction: float = 0.002       # sech^2 level treated as "at rest"
    table_points: int = 4001
    ramp_time: Optional[float] = None  # T_f [s]; sized from the tails if None

    celerity: float = field(init=False)
    outskirt_k: float = field(init=False)
    stroke: float = field(init=False)

    def __post_init__(self):
        if self.wave_height <= 0.0 or self.depth <= 0.0:
            raise ValueError("wave height and depth must be positive")
        hh, d, g = self.wave_height, self.depth, self.gravity
        self.celerity = math.sqrt(g * (hh + d))
        self.outskirt_k = math.sqrt(3.0 * hh / (4.0 * d * d * (hh + d)))
        self.stroke = 2.0 * hh / (self.outskirt_k * d)
        if self.ramp_time is None:
            lam = math.acosh(1.0 / math.sqrt(self.tail_fraction))
            self.ramp_time = 2.0 * lam / (self.outskirt_k * self.celerity) \
                + self.stroke / self.celerity
        self._tabulate()

    @property
    def half_stroke(self) -> float:
        return 0.5 * self.stroke

    def surface_at_paddle(self, x_s: float, t: float) -> float:
        phase = self.outskirt_k * (self.celerity * (t - 0.5 * self.ramp_time)
                                   + self.half_stroke - x_s)
        return self.wave_height / math.cosh(phase) ** 2

    def _board_velocity(self, x_s: float, t: float) -> float:
        eta = self.surface_at_paddle(x_s, t)
        return self.celerity * eta / (self.depth + eta)

    def _tabulate(self) -> None:
        n = self.table_points
        t_end = self.ramp_time
        dt = t_end / (n - 1)
        ts = np.linspace(0.0, t_end, n)
        xs = np.empty(n)
        x = 0.0
        xs[0] = 0.0
        for i in range(n - 1):
            t = ts[i]
            k1 = self._board_velocity(x, t)
            k2 = self._board_velocity(x + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = self._board_velocity(x + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = self._board_velocity(x + dt * k3, t + dt)
            x += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            xs[i + 1] = x
        self._ts = ts
        self._xs = xs
        self._vs = np.array([self._board_velocity(xi, ti) for xi, ti in zip(xs, ts)])

    def displacement(self, t: float) -> float:
        """Paddle displacement x_s(t) [m]; holds the final stroke after T_f."""
        if t <= 0.0:
            return 0.0
        if t >= self._ts[-1]:
            return float(self._xs[-1])
        return float(np.interp(t, self._ts, self._xs))

    def velocity(self, t: float) -> float:
        """Paddle velocity [m/s]; zero outside the generation window."""
        if t <= 0.0 or t >= self._ts[-1]:
            return 0.0
        return float(np.interp(t, self._ts, self._vs))


@functools.lru_cache(maxsize=32)
def _cached_piston(wave_height, depth, ramp_time, gravity):
    return RayleighPiston(wave_height=wave_height, depth=depth,
                          ramp_time=ramp_time, gravity=gravity)


def wavemaker_trajectory(t: float, wave_height: float, depth: float,
                         ramp_time: Optional[float] = None,
                         gravity: float = 9.81) -> float:
    """Piston displacement x_s(t) [m] for a solitary wave of the given height."""
    piston = _cached_piston(wave_height, depth, ramp_time, gravity)
    return piston.displacement(t)
