"""Latin hypercube sampling over named random variables.

Each variable is described by a RandomVariableSpec (constant, normal,
lognormal, uniform or beta, plus an optional positivity floor).  Sampling
stratifies the unit interval into q equi-probable bins per column: a
Fisher-Yates shuffle assigns one bin to each row, a uniform jitter picks a
point inside the bin, and the spec's inverse CDF maps it to parameter space.
Floored variables are resampled within their bin, which preserves the
stratification while enforcing positivity.

Identical (specs, q, seed) inputs reproduce the matrix bit for bit.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import betaincinv, ndtri

from .errors import DomainError, InvalidSpec

DISTRIBUTIONS = ("constant", "normal", "lognormal", "uniform", "beta")
_MAX_TRUNCATION_TRIES = 1000


@dataclass(frozen=True)
class RandomVariableSpec:
    """One input variable: distribution family, parameters, optional floor."""

    name: str
    distribution: str
    mean: Optional[float] = None      # normal / lognormal (arithmetic moments)
    sd: Optional[float] = None
    minimum: Optional[float] = None   # uniform / beta support
    maximum: Optional[float] = None
    alpha: Optional[float] = None     # beta shape parameters
    beta: Optional[float] = None
    value: Optional[float] = None     # constant
    floor: Optional[float] = None     # truncation: resample below this

    def __post_init__(self):
        d = self.distribution
        if d not in DISTRIBUTIONS:
            raise InvalidSpec(f"{self.name}: unknown distribution {d!r}")
        if d == "constant":
            if self.value is None:
                raise InvalidSpec(f"{self.name}: constant needs a value")
        elif d in ("normal", "lognormal"):
            if self.mean is None or self.sd is None or self.sd <= 0.0:
                raise InvalidSpec(f"{self.name}: {d} needs mean and sd > 0")
            if d == "lognormal" and self.mean <= 0.0:
                raise InvalidSpec(f"{self.name}: lognormal needs mean > 0")
        elif d == "uniform":
            if self.minimum is None or self.maximum is None \
                    or not self.maximum > self.minimum:
                raise InvalidSpec(f"{self.name}: uniform needs max > min")
        elif d == "beta":
            if self.minimum is None or self.maximum is None \
                    or not self.maximum > self.minimum:
                raise InvalidSpec(f"{self.name}: beta needs max > min")
            if self.alpha is None or self.beta is None \
                    or self.alpha <= 0.0 or self.beta <= 0.0:
                raise InvalidSpec(f"{self.name}: beta needs alpha, beta > 0")


def inverse_cdf(spec: RandomVariableSpec, u: float) -> float:
    """Quantile of the spec at probability u in (0, 1).

    Closed forms for constant/uniform, the rational-approximation normal
    quantile for (log)normal, and monotone inversion of the regularised
    incomplete beta function for beta variables.
    """
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u}")
    d = spec.distribution
    if d == "constant":
        return float(spec.value)
    if d == "uniform":
        return spec.minimum + (spec.maximum - spec.minimum) * u
    if d == "normal":
        return spec.mean + spec.sd * float(ndtri(u))
    if d == "lognormal":
        sigma2 = math.log(1.0 + (spec.sd / spec.mean) ** 2)
        mu = math.log(spec.mean) - 0.5 * sigma2
        return math.exp(mu + math.sqrt(sigma2) * float(ndtri(u)))
    # beta
    x = float(betaincinv(spec.alpha, spec.beta, u))
    return spec.minimum + (spec.maximum - spec.minimum) * x


def cdf(spec: RandomVariableSpec, x) -> np.ndarray:
    """Forward CDF, used to verify stratification."""
    from scipy.special import betainc, ndtr
    x = np.asarray(x, dtype=float)
    d = spec.distribution
    if d == "constant":
        return np.where(x >= spec.value, 1.0, 0.0)
    if d == "uniform":
        return np.clip((x - spec.minimum) / (spec.maximum - spec.minimum), 0.0, 1.0)
    if d == "normal":
        return ndtr((x - spec.mean) / spec.sd)
    if d == "lognormal":
        sigma2 = math.log(1.0 + (spec.sd / spec.mean) ** 2)
        mu = math.log(spec.mean) - 0.5 * sigma2
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = ndtr((np.log(x[pos]) - mu) / math.sqrt(sigma2))
        return out
    t = np.clip((x - spec.minimum) / (spec.maximum - spec.minimum), 0.0, 1.0)
    return betainc(spec.alpha, spec.beta, t)


def fisher_yates(q: int, rng: np.random.Generator) -> np.ndarray:
    """Random permutation of 1..q by the Fisher-Yates shuffle."""
    perm = np.arange(1, q + 1, dtype=np.int64)
    for i in range(q - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass
class SampleMatrix:
    """q x n stratified sample table with the generating specs and seed."""

    values: np.ndarray
    specs: tuple
    seed: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def q(self) -> int:
        return self.values.shape[0]

    @property
    def names(self) -> tuple:
        return tuple(s.name for s in self.specs)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.names.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None
        return self.values[:, j]

    def with_column(self, spec: RandomVariableSpec, values) -> "SampleMatrix":
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        return SampleMatrix(values=np.hstack([self.values, values]),
                            specs=self.specs + (spec,), seed=self.seed)


def _sample_column(spec: RandomVariableSpec, q: int, rng: np.random.Generator) -> np.ndarray:
    perm = fisher_yates(q, rng)
    out = np.empty(q)
    for i in range(q):
        b = perm[i]
        for attempt in range(_MAX_TRUNCATION_TRIES):
            jitter = rng.random()
            u = (b - 1.0 + jitter) / q
            if u <= 0.0:
                u = 0.5 / q / _MAX_TRUNCATION_TRIES
            x = inverse_cdf(spec, u)
            if spec.floor is None or x >= spec.floor:
                out[i] = x
                break
        else:
            raise InvalidSpec(
                f"{spec.name}: bin {b}/{q} lies entirely below floor {spec.floor}")
    return out


def lhs_sample(specs: Sequence[RandomVariableSpec], q: int, seed: int) -> SampleMatrix:
    """Stratified q x n sample matrix; one sample per bin per column."""
    if q < 1:
        raise InvalidSpec(f"sample count q must be >= 1, got {q}")
    specs = tuple(specs)
    if not specs:
        raise InvalidSpec("at least one random variable is required")
    rng = np.random.Generator(np.random.PCG64(seed))
    cols = [_sample_column(s, q, rng) for s in specs]
    return SampleMatrix(values=np.column_stack(cols), specs=specs, seed=seed)


#: Default structural random variables of the two-storey study.
def table3_specs(floor: float = 1e-6) -> tuple:
    return (
        RandomVariableSpec("yield_strength", "normal", mean=413.685e6, sd=82e6,
                           floor=floor),
        RandomVariableSpec("col_weight_per_len", "normal", mean=173.4, sd=34.0,
                           floor=floor),
        RandomVariableSpec("beam_weight_per_len", "normal", mean=133.554, sd=26.0,
                           floor=floor),
        RandomVariableSpec("girder_weight_per_len", "normal", mean=133.554, sd=26.0,
                           floor=floor),
        RandomVariableSpec("youngs_modulus", "normal", mean=200e9, sd=40e9,
                           floor=floor),
    )


# ---------------------------------------------------------------------------
# Spec files: one block per variable
# ---------------------------------------------------------------------------

_FLOAT_KEYS = ("mean", "sd", "minimum", "maximum", "alpha", "beta", "value", "floor")


def read_rv_specs(path) -> tuple:
    """Parse a random-variable spec file (INI blocks, one per variable)."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    specs = []
    for section in parser.sections():
        block = parser[section]
        kwargs = {"name": section, "distribution": block.get("distribution", "")}
        for key in _FLOAT_KEYS:
            if key in block:
                kwargs[key] = float(block[key])
        specs.append(RandomVariableSpec(**kwargs))
    if not specs:
        raise InvalidSpec(f"no variable blocks found in {path}")
    return tuple(specs)


def write_rv_specs(specs: Sequence[RandomVariableSpec], path) -> None:
    parser = configparser.ConfigParser()
    for spec in specs:
        fields = {"distribution": spec.distribution}
        for key in _FLOAT_KEYS:
            v = getattr(spec, key)
            if v is not None:
                fields[key] = repr(v)
        parser[spec.name] = fields
    path = Path(path)
    with open(path, "w") as fh:
        parser.write(fh)
