"""Shared fixtures: expensive SPH runs are computed once per configuration.

Results are cached on disk keyed by a hash of the solver sources and the run
configuration, so iterating on tests does not re-run unchanged physics.  The
cache entry stores the wall time of the original computation; runtime
assertions use it when the run is not repeated.
"""

import hashlib
import json
import os
from pathlib import Path

import numpy as np
import pytest

import flumeuq
from flumeuq.flume import GaugeSpec, build_scenario, seed_particles
from flumeuq.runner import RunConfig, run_flume

CACHE_DIR = Path(os.environ.get("FLUMEUQ_TEST_CACHE",
                                Path(__file__).parent / ".cache"))

_SOLVER_SOURCES = ("sph.py", "kernels.py", "flume.py", "wavemaker.py",
                   "runner.py", "forces.py")


def _source_hash() -> str:
    root = Path(flumeuq.__file__).parent
    digest = hashlib.sha256()
    for name in _SOLVER_SOURCES:
        digest.update((root / name).read_bytes())
    return digest.hexdigest()[:16]


def cached_flume_run(tag: str, scenario_kwargs: dict, output_dt: float = 0.02):
    """Run (or reload) a flume simulation; returns a plain dict of arrays."""
    key_blob = json.dumps({"tag": tag, "scn": scenario_kwargs,
                           "output_dt": output_dt, "src": _source_hash()},
                          sort_keys=True, default=repr)
    key = hashlib.sha256(key_blob.encode()).hexdigest()[:24]
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    path = CACHE_DIR / f"{tag}_{key}.npz"
    if path.exists():
        data = dict(np.load(path, allow_pickle=False))
        data["cached"] = True
        return data
    scn = build_scenario(**scenario_kwargs)
    setup = seed_particles(scn)
    result = run_flume(setup, RunConfig(output_dt=output_dt))
    data = {
        "times": result.times,
        "veff": result.veff,
        "strip_depth": result.strip_depth,
        "wall_time": np.array(result.wall_time),
        "n_particles": np.array(result.n_particles),
    }
    if result.sph_force is not None:
        data["force"] = result.sph_force.force
    for gid, trace in result.gauge_traces.items():
        data[f"eta_{gid}"] = trace.eta
    np.savez(path, **data)
    data["cached"] = False
    return data


FLAT_GAUGES = (GaugeSpec("WGA", 3.0), GaugeSpec("WGB", 8.0), GaugeSpec("WGC", 13.0))
CONV_GAUGES = (GaugeSpec("WGM", 7.0),)


def flat_bed_kwargs(dp: float, length: float = 18.0, duration: float = 6.5,
                    gauges=FLAT_GAUGES) -> dict:
    return dict(flat_bed_length=length, slope_run=0.0, terrace_length=0.0,
                terrace_height=0.0, has_structure=False, wave_height=0.4,
                dp=dp, duration=duration, gauges=gauges)


@pytest.fixture(scope="session")
def solitary_run_dp05():
    """Flat-bed H = 0.4 run at dp = 0.05 (celerity / decay checks)."""
    return cached_flume_run("flat05", flat_bed_kwargs(0.05))


@pytest.fixture(scope="session")
def convergence_runs():
    """Short flat-bed flume at dp = H/4, H/8, H/16 with a mid-flume gauge."""
    runs = {}
    for dp in (0.1, 0.05, 0.025):
        kwargs = flat_bed_kwargs(dp, length=11.0, duration=4.6,
                                 gauges=CONV_GAUGES)
        runs[dp] = cached_flume_run(f"conv{dp}", kwargs)
    return runs


CATALOGUE_HEIGHTS = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@pytest.fixture(scope="session")
def height_library_runs():
    """Full-flume runs at dp = 0.1 for each catalogue wave height."""
    runs = {}
    for h in CATALOGUE_HEIGHTS:
        runs[h] = cached_flume_run(f"lib{h}", dict(wave_height=h, dp=0.1,
                                                   duration=12.0))
    return runs


def cached_tank_relaxation():
    """Hydrostatic tank protocol: quieting then free evolution; measurements."""
    key_blob = json.dumps({"tag": "tank", "src": _source_hash()}, sort_keys=True)
    key = hashlib.sha256(key_blob.encode()).hexdigest()[:24]
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    path = CACHE_DIR / f"tank_{key}.npz"
    if path.exists():
        data = dict(np.load(path))
        data["cached"] = True
        return data
    import time

    from flumeuq.flume import build_hydrostatic_tank
    from flumeuq.runner import advance

    t0 = time.perf_counter()
    state, kernel, consts = build_hydrostatic_tank(1.0, 0.75, 0.02)
    advance(state, kernel, consts, 2.5, damping=4.0)
    advance(state, kernel, consts, 3.5)
    p_before = state.total_fluid_momentum()
    advance(state, kernel, consts, 4.5)
    p_after = state.total_fluid_momentum()
    f = state.fluid_indices
    bottom = f[state.pos[f, 1] < 2 * 0.02]
    press = state.pressure(consts)[bottom]
    expected = consts.rho0 * consts.g * (0.75 - state.pos[bottom, 1])
    data = {
        "momentum_before": p_before,
        "momentum_after": p_after,
        "fluid_mass": np.array(state.mass[f].sum()),
        "bottom_rel_err": np.abs(press / expected - 1.0),
        "wall_time": np.array(time.perf_counter() - t0),
    }
    np.savez(path, **data)
    data["cached"] = False
    return data


@pytest.fixture(scope="session")
def tank_relaxation():
    return cached_tank_relaxation()


@pytest.fixture(scope="session")
def force_library(height_library_runs):
    """Height -> SPH ForceRecord, the cached one-way coupling interface."""
    from flumeuq.forces import Estimator, ForceRecord
    return {h: ForceRecord(times=data["times"], force=data["force"],
                           estimator=Estimator.SPH)
            for h, data in height_library_runs.items()}
