"""Wendland C2 smoothing kernel in two dimensions.

W(r, h) = alpha_d * (1 - q/2)^4 * (1 + 2q),  q = r/h in [0, 2]

with compact support radius 2h and the standard 2-D normalisation
alpha_d = 7 / (4 pi h^2).  The gradient is radial,

grad W = -(5 alpha_d / h^2) * (1 - q/2)^3 * r_vec

which is finite at r = 0 (where it evaluates to the zero vector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

KAPPA = 2.0


@dataclass(frozen=True)
class KernelConfig:
    """Smoothing length and derived constants for the Wendland C2 kernel."""

    h: float
    kappa: float = KAPPA
    alpha_d: float = field(init=False)
    support_radius: float = field(init=False)

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("smoothing length must be positive")
        object.__setattr__(self, "alpha_d", 7.0 / (4.0 * math.pi * self.h**2))
        object.__setattr__(self, "support_radius", self.kappa * self.h)

    @classmethod
    def from_dp(cls, dp: float, h_over_dp: float = 2.0) -> "KernelConfig":
        """Kernel sized from the particle spacing; h = 2*dp by default."""
        return cls(h=h_over_dp * dp)


@njit(cache=True)
def _w_scalar(r, h, alpha_d):
    q = r / h
    if q >= 2.0:
        return 0.0
    t = 1.0 - 0.5 * q
    return alpha_d * t * t * t * t * (1.0 + 2.0 * q)


@njit(cache=True)
def _grad_coeff(r, h, alpha_d):
    """F(r) such that grad W = F(r) * r_vec.  Finite for r -> 0."""
    q = r / h
    if q >= 2.0:
        return 0.0
    t = 1.0 - 0.5 * q
    return -5.0 * alpha_d * t * t * t / (h * h)


def wendland_w(r, cfg: KernelConfig):
    """Kernel weight at separation ``r`` [m]; accepts scalars or arrays."""
    r = np.asarray(r, dtype=float)
    q = r / cfg.h
    t = np.clip(1.0 - 0.5 * q, 0.0, None)
    out = cfg.alpha_d * t**4 * (1.0 + 2.0 * q)
    return float(out) if out.ndim == 0 else out


def wendland_grad_w(r_vec, cfg: KernelConfig):
    """Kernel gradient for displacement vector(s) ``r_vec`` of shape (..., 2)."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = np.sqrt(np.sum(r_vec**2, axis=-1))
    q = r / cfg.h
    t = np.clip(1.0 - 0.5 * q, 0.0, None)
    coeff = -5.0 * cfg.alpha_d * t**3 / cfg.h**2
    return coeff[..., np.newaxis] * r_vec if r_vec.ndim > 1 else coeff * r_vec
