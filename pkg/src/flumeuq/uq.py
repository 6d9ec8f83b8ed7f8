"""Forward propagation of sampled uncertainties through the coupled pipeline.

Each sample row carries structural section properties, an optional load
scale factor and a wave height; propagation builds the shear frame, scales
the cached force history for that height, integrates the response and
extracts EDPs.  Rows are independent, evaluated (optionally in a bounded
thread pool) and gathered in row order, so a sweep is deterministic given
the seed and configuration.

Response PDFs are estimated with a Gaussian kernel density (Silverman
bandwidth unless given) and summarised by Tukey box statistics.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import PropagationError, TooFewSamples
from .forces import ForceRecord
from .sampling import RandomVariableSpec, SampleMatrix, lhs_sample
from .structure import (FrameGeometry, StructuralParams, TABLE3_MEANS,
                        build_frame, newmark_response)

STRUCTURAL_COLUMNS = ("yield_strength", "col_weight_per_len", "beam_weight_per_len",
                      "girder_weight_per_len", "youngs_modulus")


# ---------------------------------------------------------------------------
# Load-factor study catalogue
# ---------------------------------------------------------------------------

def load_factor_spec(kind: str) -> RandomVariableSpec:
    """The five load-scale distributions of the sensitivity study."""
    if kind == "constant":
        return RandomVariableSpec("load_factor", "constant", value=1.0)
    if kind == "lognormal":
        return RandomVariableSpec("load_factor", "lognormal", mean=1.0, sd=0.2)
    if kind == "normal":
        return RandomVariableSpec("load_factor", "normal", mean=1.0, sd=0.2,
                                  floor=1e-6)
    if kind == "uniform":
        return RandomVariableSpec("load_factor", "uniform", minimum=0.4, maximum=1.6)
    if kind == "beta":
        return RandomVariableSpec("load_factor", "beta", alpha=5.0, beta=2.0,
                                  minimum=0.4, maximum=1.6)
    raise ValueError(f"unknown load factor distribution {kind!r}")

LOAD_FACTOR_KINDS = ("constant", "lognormal", "normal", "uniform", "beta")


def wave_height_spec(heights: Sequence[float]) -> RandomVariableSpec:
    """Uniform variable over the discretised wave-height domain.

    The continuous value is binned back to the catalogue heights during
    propagation; with q a multiple of the bin count, stratification places
    exactly q / n_heights rows in each bin.
    """
    heights = sorted(heights)
    step = heights[1] - heights[0] if len(heights) > 1 else 0.1
    return RandomVariableSpec("wave_height", "uniform",
                              minimum=heights[0], maximum=heights[-1] + step)


def bin_wave_height(value: float, heights: Sequence[float]) -> float:
    """Snap a continuous wave-height sample onto the catalogue grid."""
    heights = sorted(heights)
    edges = list(heights[1:]) + [math.inf]
    for h, edge in zip(heights, edges):
        if value < edge:
            return h
    return heights[-1]


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

@dataclass
class EdpRow:
    sample_id: int
    wave_height: float
    load_factor: float
    rmsa: np.ndarray
    rmsa_envelope: float
    peak_displacement: np.ndarray
    peak_displacement_envelope: float


@dataclass
class PropagationResult:
    rows: list
    failures: list  # (sample_id, message)

    def rmsa_envelope(self) -> np.ndarray:
        return np.array([r.rmsa_envelope for r in self.rows])

    def peak_displacement_envelope(self) -> np.ndarray:
        return np.array([r.peak_displacement_envelope for r in self.rows])

    def wave_heights(self) -> np.ndarray:
        return np.array([r.wave_height for r in self.rows])


def _structural_params(samples: SampleMatrix, i: int) -> StructuralParams:
    kwargs = {}
    names = samples.names
    for col in STRUCTURAL_COLUMNS:
        if col in names:
            kwargs[col] = float(samples.column(col)[i])
        else:
            kwargs[col] = getattr(TABLE3_MEANS, col)
    return StructuralParams(**kwargs)


def _story_loads(record: ForceRecord, fractions: np.ndarray, dt: float) -> np.ndarray:
    """Resample the force history onto a uniform grid and split across stories."""
    t_end = float(record.times[-1])
    nt = max(2, int(math.floor(t_end / dt)) + 1)
    t = np.arange(nt) * dt
    f = np.interp(t, record.times, record.force)
    return fractions[:, np.newaxis] * f[np.newaxis, :]


def propagate(samples: SampleMatrix, load_library: Dict[float, ForceRecord],
              geom: FrameGeometry = FrameGeometry(),
              story_fractions: Optional[np.ndarray] = None,
              dt: Optional[float] = None,
              max_failure_fraction: float = 0.01,
              jobs: int = 1) -> PropagationResult:
    """Run the structural model for every sample row; gather EDPs in order.

    Row failures are recorded without aborting; the sweep raises
    PropagationError only when more than max_failure_fraction of rows fail.
    """
    heights = sorted(load_library)
    names = samples.names
    has_height = "wave_height" in names
    has_factor = "load_factor" in names
    if not has_height and len(heights) != 1:
        raise PropagationError("samples carry no wave_height column and the "
                               "library holds more than one height")
    if story_fractions is None:
        fractions = np.zeros(geom.n_stories)
        fractions[0] = 1.0  # wetted height stays below the first story level
    else:
        fractions = np.asarray(story_fractions, dtype=float)

    def run_row(i: int):
        params = _structural_params(samples, i)
        h = bin_wave_height(float(samples.column("wave_height")[i]), heights) \
            if has_height else heights[0]
        factor = float(samples.column("load_factor")[i]) if has_factor else 1.0
        model = build_frame(params, geom)
        record = load_library[h]
        step = dt if dt is not None else min(model.fundamental_period() / 40.0,
                                             _record_dt(record))
        loads = _story_loads(record.scaled(factor), fractions, step)
        edp = newmark_response(model, loads, step, keep_histories=False)
        return EdpRow(sample_id=i, wave_height=h, load_factor=factor,
                      rmsa=edp.rmsa, rmsa_envelope=edp.rmsa_envelope,
                      peak_displacement=edp.peak_displacement,
                      peak_displacement_envelope=edp.peak_displacement_envelope)

    q = samples.q
    rows, failures = [], []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_guard(run_row), range(q)))
    else:
        outcomes = [_guard(run_row)(i) for i in range(q)]
    for i, out in enumerate(outcomes):
        if isinstance(out, EdpRow):
            rows.append(out)
        else:
            failures.append((i, out))
    if len(failures) > max_failure_fraction * q:
        raise PropagationError(
            f"{len(failures)}/{q} sample rows failed; first: {failures[0][1]}")
    return PropagationResult(rows=rows, failures=failures)


def _record_dt(record: ForceRecord) -> float:
    if record.times.size < 2:
        return math.inf
    return float(np.diff(record.times).min())


def _guard(fn):
    def wrapped(i):
        try:
            return fn(i)
        except Exception as exc:  # per-row accounting, sweep continues
            return f"{type(exc).__name__}: {exc}"
    return wrapped


def distribution_study(structural_specs, q: int, seed: int,
                       load_library: Dict[float, ForceRecord],
                       wave_height: float,
                       kinds: Sequence[str] = LOAD_FACTOR_KINDS,
                       geom: FrameGeometry = FrameGeometry(),
                       jobs: int = 1) -> Dict[str, PropagationResult]:
    """Propagate the same structural samples under each load-factor family.

    The structural matrix is drawn once, so the factor distribution is the
    only thing that changes between the study branches.
    """
    base = lhs_sample(structural_specs, q, seed)
    out = {}
    for idx, kind in enumerate(kinds):
        spec = load_factor_spec(kind)
        factor_col = lhs_sample([spec], q, seed + 7919 * (idx + 1)).values[:, 0]
        matrix = base.with_column(spec, factor_col)
        out[kind] = propagate(matrix, {wave_height: load_library[wave_height]},
                              geom=geom, jobs=jobs)
    return out


# ---------------------------------------------------------------------------
# Density estimation and box statistics
# ---------------------------------------------------------------------------

@dataclass
class BoxplotStats:
    q1: float
    q2: float
    q3: float
    iqr: float
    lo_whisker: float
    hi_whisker: float
    outliers: np.ndarray


def boxplot_stats(samples) -> BoxplotStats:
    """Tukey statistics: linear-interpolation quartiles, 1.5 IQR whiskers."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise TooFewSamples("boxplot needs at least one sample")
    q1, q2, q3 = np.percentile(x, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    return BoxplotStats(q1=float(q1), q2=float(q2), q3=float(q3), iqr=float(iqr),
                        lo_whisker=float(lo), hi_whisker=float(hi),
                        outliers=np.sort(x[(x < lo) | (x > hi)]))


def silverman_bandwidth(samples: np.ndarray) -> float:
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise TooFewSamples("automatic bandwidth needs at least two samples")
    std = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    spread = min(std, (q75 - q25) / 1.34) if q75 > q25 else std
    if spread <= 0.0:
        raise TooFewSamples("samples have zero spread; give a bandwidth")
    return 0.9 * spread * x.size ** (-0.2)


@dataclass
class ResponseDistribution:
    """KDE of an EDP sample set plus its Tukey box summary."""

    samples: np.ndarray
    kde_bandwidth: float
    grid: np.ndarray
    density: np.ndarray
    box: BoxplotStats

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def kde_estimate(samples, bandwidth: Optional[float] = None,
                 grid_size: int = 512, pad_bandwidths: float = 5.0) -> ResponseDistribution:
    """Gaussian KDE: mean of normal kernels centred on the samples.

    The grid spans the sample range padded by pad_bandwidths * h on each
    side so that the discrete density integrates to one within truncation
    error.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0 or (bandwidth is None and x.size < 2):
        raise TooFewSamples("need >= 2 samples for automatic bandwidth")
    h = float(bandwidth) if bandwidth is not None else silverman_bandwidth(x)
    if h <= 0.0:
        raise TooFewSamples("bandwidth must be positive")
    grid = np.linspace(x.min() - pad_bandwidths * h, x.max() + pad_bandwidths * h,
                       grid_size)
    z = (grid[:, np.newaxis] - x[np.newaxis, :]) / h
    density = np.exp(-0.5 * z**2).sum(axis=1) / (x.size * h * math.sqrt(2.0 * math.pi))
    return ResponseDistribution(samples=x, kde_bandwidth=h, grid=grid,
                                density=density, box=boxplot_stats(x))
