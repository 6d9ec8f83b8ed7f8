"""Simulation driver: adaptive stepping, gauge/force sampling, snapshots."""

from __future__ import annotations

import logging
import math
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CflViolation
from .flume import FlumeSetup, GaugeTrace, sample_gauge
from .forces import Estimator, ForceRecord, sph_structure_force, strip_kinematics
from .kernels import KernelConfig
from .sph import FluidConstants, PistonMotion, SimState, stable_timestep, verlet_step

log = logging.getLogger(__name__)


def advance(state: SimState, kernel: KernelConfig, consts: FluidConstants,
            t_target: float, piston: Optional[PistonMotion] = None,
            damping: float = 0.0, on_step: Optional[Callable] = None) -> SimState:
    """Step the state to t_target with the CFL-limited adaptive step.

    `damping` applies an exponential velocity decay per unit time to fluid
    particles (quieting for relaxation runs); zero leaves the dynamics alone.
    """
    if state.suggested_dt <= 0.0:
        state.suggested_dt = stable_timestep(state, kernel, consts)
    while state.time < t_target - 1e-12:
        # 0.9 margin: the stable step can shrink a little within one step
        dt = min(0.9 * state.suggested_dt, t_target - state.time)
        try:
            verlet_step(state, dt, kernel, consts, piston=piston)
        except CflViolation:
            dt = min(0.9 * stable_timestep(state, kernel, consts),
                     t_target - state.time)
            verlet_step(state, dt, kernel, consts, piston=piston)
        if damping > 0.0:
            f = state.fluid_indices
            state.vel[f] *= math.exp(-damping * dt)
        if on_step is not None:
            on_step(state)
    return state


@dataclass
class RunConfig:
    output_dt: float = 0.02        # gauge/force sampling cadence [s]
    snapshot_dt: Optional[float] = None
    relax_time: float = 0.0        # quieting window before t = 0 dynamics
    relax_damping: float = 0.0
    log_every: float = 1.0         # seconds of simulated time between log lines


@dataclass
class RunResult:
    gauge_traces: dict                  # gauge id -> GaugeTrace
    sph_force: Optional[ForceRecord]
    veff: np.ndarray                    # effective velocity at the probe strip
    strip_depth: np.ndarray             # wetted depth at the probe strip
    times: np.ndarray
    n_particles: int
    wall_time: float
    snapshots: list = field(default_factory=list)  # (t, SimState copy) if requested
    final_state: Optional[SimState] = None


def run_flume(setup: FlumeSetup, cfg: RunConfig = RunConfig(),
              keep_final_state: bool = False) -> RunResult:
    """Drive a seeded flume to its scenario duration, sampling as it goes."""
    scn = setup.scenario
    state = setup.state
    t_start = _time.perf_counter()
    n_out = int(round(scn.duration / cfg.output_dt)) + 1
    times = np.arange(n_out) * cfg.output_dt
    eta = {g.id: np.empty(n_out) for g in scn.gauges}
    force = np.empty(n_out)
    veff = np.empty(n_out)
    depth = np.empty(n_out)
    snapshots = []
    next_snap = 0.0
    next_log = 0.0

    for i, t in enumerate(times):
        if t > 0.0:
            advance(state, setup.kernel, setup.constants, t, piston=setup.piston,
                    damping=cfg.relax_damping if t <= cfg.relax_time else 0.0)
        for g in scn.gauges:
            eta[g.id][i] = sample_gauge(state, g, scn)
        if setup.structure is not None:
            force[i] = sph_structure_force(state, setup.structure, setup.constants,
                                           setup.kernel, scn.dp,
                                           width=scn.structure_width_y)
            veff[i], depth[i] = strip_kinematics(state, setup.structure.box, scn.dp)
        else:
            force[i] = veff[i] = depth[i] = 0.0
        if cfg.snapshot_dt is not None and t >= next_snap - 1e-12:
            snapshots.append((t, _copy_state(state)))
            next_snap += cfg.snapshot_dt
        if t >= next_log:
            log.info("t=%.2fs dt=%.2es particles=%d", t, state.suggested_dt, state.n)
            next_log += cfg.log_every

    traces = {gid: GaugeTrace(times=times.copy(), eta=vals, gauge_id=gid)
              for gid, vals in eta.items()}
    record = None
    if setup.structure is not None:
        record = ForceRecord(times=times.copy(), force=force, estimator=Estimator.SPH)
    return RunResult(gauge_traces=traces, sph_force=record, veff=veff,
                     strip_depth=depth, times=times, n_particles=state.n,
                     wall_time=_time.perf_counter() - t_start,
                     snapshots=snapshots,
                     final_state=state if keep_final_state else None)


def _copy_state(state: SimState) -> SimState:
    clone = SimState(pos=state.pos.copy(), vel=state.vel.copy(),
                     rho=state.rho.copy(), mass=state.mass.copy(),
                     kind=state.kind.copy(), grid=state.grid.__class__(
                         x0=state.grid.x0, z0=state.grid.z0,
                         cell_size=state.grid.cell_size,
                         nx=state.grid.nx, nz=state.grid.nz),
                     time=state.time, step_count=state.step_count)
    return clone
