"""Weakly-compressible SPH engine on a 2-D (x, z) slice.

Particles carry mass, density, velocity and a kind flag (fluid, fixed wall,
piston wall).  Density evolves through the continuity equation for every
particle -- this is what turns the wall particles into dynamic boundary
particles: their density rises as fluid approaches, the equation of state
turns that into pressure, and the pressure-gradient term in the fluid
momentum equation repels the flow.  Wall particles never move; piston
particles follow an externally prescribed trajectory.

Rates are evaluated with a gather pattern over a uniform cell grid (cell
size equal to the kernel support 2h), so each particle's neighbour sums run
in a fixed order and repeated runs are bit-identical.

Equations:
  continuity   d(rho_a)/dt = rho_a * sum_b V_b (u_a - u_b) . grad W_ab + Diff
  momentum     d(u_a)/dt   = -sum_b m_b ((P_a + P_b)/(rho_a rho_b) + Pi_ab) grad W_ab + g
  EOS          P = (c0^2 rho0 / gamma) [ (rho/rho0)^gamma - 1 ]
with Monaghan artificial viscosity Pi_ab and a density-diffusion term that
relaxes the dynamic (hydrostatic-corrected) part of the density field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import CflViolation, NonFiniteRate, UnphysicalState
from .kernels import KernelConfig

FLUID = 0
WALL_FIXED = 1
WALL_PISTON = 2

ETA2_FACTOR = 0.01  # regularisation (0.01 h^2) in the viscosity/diffusion denominators


@dataclass(frozen=True)
class FluidConstants:
    """Reference fluid state and the numerical closure coefficients."""

    c0: float                  # numerical speed of sound [m/s]
    rho0: float = 1000.0       # reference density [kg/m^3]
    gamma: float = 7.0         # polytropic index
    alpha_visc: float = 0.01   # artificial viscosity coefficient
    delta_diff: float = 0.1    # density diffusion coefficient
    g: float = 9.81            # gravity magnitude [m/s^2]
    cfl: float = 0.2           # CFL factor for the adaptive step

    @property
    def b_stiffness(self) -> float:
        """EOS stiffness B = c0^2 rho0 / gamma [Pa]."""
        return self.c0**2 * self.rho0 / self.gamma

    @classmethod
    def for_still_depth(cls, depth: float, **overrides) -> "FluidConstants":
        """Speed of sound from the water depth at rest, c0 = 10 sqrt(g d)."""
        g = overrides.get("g", 9.81)
        return cls(c0=10.0 * math.sqrt(g * depth), **overrides)


def eos_pressure(rho, consts: FluidConstants):
    """Barotropic pressure from density; P(rho0) = 0, strictly increasing."""
    rho = np.asarray(rho, dtype=float)
    out = consts.b_stiffness * ((rho / consts.rho0) ** consts.gamma - 1.0)
    return float(out) if out.ndim == 0 else out


def artificial_viscosity(u_ab, r_ab, rho_mean, c_mean, cfg: KernelConfig,
                         consts: FluidConstants) -> float:
    """Monaghan viscosity term Pi_ab for one interacting pair.

    Active only for approaching pairs (u_ab . r_ab < 0); zero otherwise.
    """
    u_ab = np.asarray(u_ab, dtype=float)
    r_ab = np.asarray(r_ab, dtype=float)
    udotr = float(np.dot(u_ab, r_ab))
    if udotr >= 0.0:
        return 0.0
    h = cfg.h
    mu = h * udotr / (float(np.dot(r_ab, r_ab)) + ETA2_FACTOR * h * h)
    return -consts.alpha_visc * c_mean * mu / rho_mean


# ---------------------------------------------------------------------------
# Cell grid
# ---------------------------------------------------------------------------

@njit(cache=True)
def _fill_cells(pos, x0, z0, inv_cs, nx, nz, cell_of, cell_count, cell_start, order, fill):
    n = pos.shape[0]
    ncell = nx * nz
    for c in range(ncell):
        cell_count[c] = 0
    for i in range(n):
        ix = int(math.floor((pos[i, 0] - x0) * inv_cs))
        iz = int(math.floor((pos[i, 1] - z0) * inv_cs))
        if ix < 0:
            ix = 0
        elif ix >= nx:
            ix = nx - 1
        if iz < 0:
            iz = 0
        elif iz >= nz:
            iz = nz - 1
        c = iz * nx + ix
        cell_of[i] = c
        cell_count[c] += 1
    s = 0
    for c in range(ncell):
        cell_start[c] = s
        fill[c] = s
        s += cell_count[c]
    for i in range(n):  # ascending i keeps within-cell order deterministic
        c = cell_of[i]
        order[fill[c]] = i
        fill[c] += 1


@dataclass
class CellGrid:
    """Uniform spatial hash; cell size equals the kernel support radius."""

    x0: float
    z0: float
    cell_size: float
    nx: int
    nz: int
    cell_of: np.ndarray = field(init=False)
    cell_count: np.ndarray = field(init=False)
    cell_start: np.ndarray = field(init=False)
    order: np.ndarray = field(init=False)
    _fill: np.ndarray = field(init=False)

    def bind(self, n_particles: int) -> None:
        ncell = self.nx * self.nz
        self.cell_of = np.empty(n_particles, dtype=np.int64)
        self.cell_count = np.empty(ncell, dtype=np.int64)
        self.cell_start = np.empty(ncell, dtype=np.int64)
        self.order = np.empty(n_particles, dtype=np.int64)
        self._fill = np.empty(ncell, dtype=np.int64)

    def rebuild(self, pos: np.ndarray) -> None:
        _fill_cells(pos, self.x0, self.z0, 1.0 / self.cell_size, self.nx, self.nz,
                    self.cell_of, self.cell_count, self.cell_start, self.order, self._fill)

    @classmethod
    def for_bbox(cls, x_min, x_max, z_min, z_max, support_radius) -> "CellGrid":
        cs = support_radius
        pad = 2.0 * cs
        x0, z0 = x_min - pad, z_min - pad
        nx = max(1, int(math.ceil((x_max + pad - x0) / cs)))
        nz = max(1, int(math.ceil((z_max + pad - z0) / cs)))
        return cls(x0=x0, z0=z0, cell_size=cs, nx=nx, nz=nz)


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

_FASTMATH = {"contract", "arcp", "nsz", "reassoc"}


@njit(cache=True, fastmath=_FASTMATH)
def _rates_kernel(pos, vel, rho, press, mass, kind,
                  cell_of, cell_start, cell_count, nx, nz,
                  h, alpha_d, rho0, c0, gamma, alpha_visc, delta_diff, g,
                  drho, acc):
    """Pair sums over cell-sorted arrays; slot index == storage index.

    Boundary-boundary pairs are skipped: dynamic boundary particles take
    their density from the fluid alone, which avoids spurious compression
    where the piston slides along the bed.
    """
    n = pos.shape[0]
    r2max = 4.0 * h * h
    eta2 = ETA2_FACTOR * h * h
    inv_h = 1.0 / h
    inv_h2 = inv_h * inv_h
    inv_c02 = 1.0 / (c0 * c0)
    diff_pref = delta_diff * h * c0
    for a in range(n):
        xa = pos[a, 0]
        za = pos[a, 1]
        uxa = vel[a, 0]
        uza = vel[a, 1]
        rhoa = rho[a]
        pa = press[a]
        fluid_a = kind[a] == 0
        dr = 0.0
        ax = 0.0
        az = 0.0
        ca = cell_of[a]
        cax = ca % nx
        caz = ca // nx
        cz_lo = caz - 1 if caz > 0 else 0
        cz_hi = caz + 1 if caz < nz - 1 else nz - 1
        cx_lo = cax - 1 if cax > 0 else 0
        cx_hi = cax + 1 if cax < nx - 1 else nx - 1
        for cz in range(cz_lo, cz_hi + 1):
            row = cz * nx
            for cx in range(cx_lo, cx_hi + 1):
                c = row + cx
                b0 = cell_start[c]
                for b in range(b0, b0 + cell_count[c]):
                    if b == a:
                        continue
                    fluid_b = kind[b] == 0
                    if not (fluid_a or fluid_b):
                        continue
                    dx = xa - pos[b, 0]
                    dz = za - pos[b, 1]
                    r2 = dx * dx + dz * dz
                    if r2 >= r2max or r2 == 0.0:
                        continue
                    q = math.sqrt(r2) * inv_h
                    t = 1.0 - 0.5 * q
                    fg = -5.0 * alpha_d * t * t * t * inv_h2
                    gwx = fg * dx
                    gwz = fg * dz
                    rhob = rho[b]
                    vb = mass[b] / rhob
                    dux = uxa - vel[b, 0]
                    duz = uza - vel[b, 1]
                    # continuity: density rises when the pair approaches
                    dr += rhoa * vb * (dux * gwx + duz * gwz)
                    if fluid_a:
                        if fluid_b and delta_diff > 0.0:
                            # diffuse the non-hydrostatic part of the density
                            psi = 2.0 * (rhoa - rhob) \
                                - 2.0 * rho0 * g * (pos[b, 1] - za) * inv_c02
                            rdotg = dx * gwx + dz * gwz
                            dr += diff_pref * vb * psi * rdotg / (r2 + eta2)
                        udotr = dux * dx + duz * dz
                        pi_ab = 0.0
                        if udotr < 0.0:
                            mu = h * udotr / (r2 + eta2)
                            pi_ab = -alpha_visc * c0 * mu / (0.5 * (rhoa + rhob))
                        coef = -mass[b] * ((pa + press[b]) / (rhoa * rhob) + pi_ab)
                        ax += coef * gwx
                        az += coef * gwz
        drho[a] = dr
        if fluid_a:
            acc[a, 0] = ax
            acc[a, 1] = az - g
        else:
            acc[a, 0] = 0.0
            acc[a, 1] = 0.0


@dataclass
class PistonMotion:
    """Prescribed wavemaker motion applied to the piston particle block."""

    displacement: Callable[[float], float]
    velocity: Callable[[float], float]
    indices: np.ndarray
    x_seed: np.ndarray

    def apply(self, state: "SimState", t: float) -> None:
        state.pos[self.indices, 0] = self.x_seed + self.displacement(t)
        state.vel[self.indices, 0] = self.velocity(t)


@dataclass
class SimState:
    """Particle arrays plus the spatial hash; owned by a single simulation."""

    pos: np.ndarray    # (n, 2) [m]
    vel: np.ndarray    # (n, 2) [m/s]
    rho: np.ndarray    # (n,) [kg/m^3]
    mass: np.ndarray   # (n,) [kg] -- immutable after seeding
    kind: np.ndarray   # (n,) uint8
    grid: CellGrid
    time: float = 0.0
    step_count: int = 0
    suggested_dt: float = 0.0

    def __post_init__(self):
        self.grid.bind(self.n)
        self._fluid = np.flatnonzero(self.kind == FLUID)
        self._wall = np.flatnonzero(self.kind != FLUID)
        self.mass.setflags(write=False)

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    @property
    def fluid_indices(self) -> np.ndarray:
        return self._fluid

    @property
    def wall_indices(self) -> np.ndarray:
        return self._wall

    def pressure(self, consts: FluidConstants) -> np.ndarray:
        return eos_pressure(self.rho, consts)

    def total_fluid_momentum(self) -> np.ndarray:
        f = self._fluid
        return (self.mass[f, np.newaxis] * self.vel[f]).sum(axis=0)

    def total_mass(self) -> float:
        return float(self.mass.sum())


def compute_rates(state: SimState, cfg: KernelConfig, consts: FluidConstants):
    """Continuity and momentum rates for every particle.

    Returns (drho, acc) with acc zero for boundary particles.  Raises
    NonFiniteRate when the interaction sums blow up.
    """
    if state.grid.cell_size < cfg.support_radius * (1.0 - 1e-12):
        raise ValueError("cell grid finer than the kernel support radius")
    state.grid.rebuild(state.pos)
    n = state.n
    # gather into cell order: neighbour walks become contiguous reads, and
    # the fixed slot order keeps every particle's accumulation deterministic
    order = state.grid.order
    pos_s = state.pos[order]
    vel_s = state.vel[order]
    rho_s = state.rho[order]
    press_s = eos_pressure(rho_s, consts)
    mass_s = state.mass[order]
    kind_s = state.kind[order]
    cell_s = state.grid.cell_of[order]
    drho_s = np.empty(n, dtype=float)
    acc_s = np.empty((n, 2), dtype=float)
    _rates_kernel(pos_s, vel_s, rho_s, press_s, mass_s, kind_s,
                  cell_s, state.grid.cell_start, state.grid.cell_count,
                  state.grid.nx, state.grid.nz,
                  cfg.h, cfg.alpha_d, consts.rho0, consts.c0, consts.gamma,
                  consts.alpha_visc, consts.delta_diff, consts.g,
                  drho_s, acc_s)
    drho = np.empty(n, dtype=float)
    acc = np.empty((n, 2), dtype=float)
    drho[order] = drho_s
    acc[order] = acc_s
    if not (np.isfinite(drho).all() and np.isfinite(acc).all()):
        bad = np.flatnonzero(~np.isfinite(drho) | ~np.isfinite(acc).all(axis=1))[:5]
        raise NonFiniteRate(
            f"non-finite rates at t={state.time:.6f}s, step {state.step_count}, "
            f"particles {bad.tolist()} near {state.pos[bad].tolist()}")
    return drho, acc


def stable_timestep(state: SimState, cfg: KernelConfig, consts: FluidConstants,
                    acc: Optional[np.ndarray] = None) -> float:
    """CFL-limited step: cfl * min(h/(c0 + |u|max), sqrt(h/|a|max))."""
    if acc is None:
        _, acc = compute_rates(state, cfg, consts)
    vmax = float(np.sqrt((state.vel**2).sum(axis=1)).max(initial=0.0))
    amax = float(np.sqrt((acc**2).sum(axis=1)).max(initial=0.0))
    dt_c = cfg.h / (consts.c0 + vmax)
    dt_f = math.sqrt(cfg.h / amax) if amax > 0.0 else math.inf
    return consts.cfl * min(dt_c, dt_f)


def _enforce_density(state: SimState, consts: FluidConstants) -> None:
    w = state._wall
    if w.size:
        state.rho[w] = np.maximum(state.rho[w], consts.rho0)
    f = state._fluid
    if f.size and float(state.rho[f].min()) <= 0.0:
        i = f[int(np.argmin(state.rho[f]))]
        raise UnphysicalState(
            f"fluid particle {i} reached density {state.rho[i]:.3e} kg/m^3 "
            f"at t={state.time:.6f}s near {state.pos[i].tolist()}")


def verlet_step(state: SimState, dt: float, cfg: KernelConfig, consts: FluidConstants,
                piston: Optional[PistonMotion] = None) -> SimState:
    """Advance one symplectic position-Verlet step of size dt.

    Kick-drift-kick: the velocity takes a half kick from the rates at t, the
    position advances with r + dt u + dt^2 a / 2, the density takes matching
    half-updates, and a second rate evaluation at the drifted state closes
    the step.  Fixed walls never move; piston particles track the prescribed
    trajectory; both evolve density only.
    """
    t0 = state.time
    drho1, acc1 = compute_rates(state, cfg, consts)
    dt_ok = stable_timestep(state, cfg, consts, acc=acc1)
    if dt > dt_ok * (1.0 + 1e-9):
        raise CflViolation(f"dt={dt:.3e}s exceeds stable step {dt_ok:.3e}s "
                           f"at t={t0:.6f}s")
    f = state._fluid
    u_half = state.vel[f] + 0.5 * dt * acc1[f]
    state.pos[f] += dt * state.vel[f] + 0.5 * dt * dt * acc1[f]
    state.rho += 0.5 * dt * drho1
    if piston is not None:
        piston.apply(state, t0 + dt)
    _enforce_density(state, consts)
    state.vel[f] = u_half

    drho2, acc2 = compute_rates(state, cfg, consts)
    state.vel[f] = u_half + 0.5 * dt * acc2[f]
    state.rho += 0.5 * dt * drho2
    _enforce_density(state, consts)

    state.time = t0 + dt
    state.step_count += 1
    state.suggested_dt = stable_timestep(state, cfg, consts, acc=acc2)
    return state
