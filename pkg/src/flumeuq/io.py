"""CSV and config-file formats.

All CSVs use a header row, '.' decimal and SI units; floats are written
with repr so identical runs produce identical bytes.  Scenario files are
flat key = value blocks readable by configparser.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
from pathlib import Path

import numpy as np

from .errors import MissingInput
from .flume import FlumeScenario, GaugeSpec, GaugeTrace, build_scenario
from .forces import Estimator, ForceRecord
from .sph import FluidConstants, SimState

KIND_NAMES = {0: "fluid", 1: "wall", 2: "piston"}


def _fmt(x) -> str:
    return repr(float(x))


def write_particles_csv(state: SimState, consts: FluidConstants, path) -> None:
    """Snapshot: id, kind, x, z, vx, vz, rho, p."""
    press = state.pressure(consts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "kind", "x", "z", "vx", "vz", "rho", "p"])
        for i in range(state.n):
            w.writerow([i, KIND_NAMES[int(state.kind[i])],
                        _fmt(state.pos[i, 0]), _fmt(state.pos[i, 1]),
                        _fmt(state.vel[i, 0]), _fmt(state.vel[i, 1]),
                        _fmt(state.rho[i]), _fmt(press[i])])


def write_gauge_trace_csv(trace: GaugeTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "t_over_T0", "eta", "eta_over_eta0"])
        for t, tn, e, en in zip(trace.times, trace.t_normalized,
                                trace.eta, trace.eta_normalized):
            w.writerow([_fmt(t), _fmt(tn), _fmt(e), _fmt(en)])


def read_gauge_trace_csv(path, gauge_id: str = "") -> GaugeTrace:
    times, eta = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t"]))
            eta.append(float(row["eta"]))
    return GaugeTrace(times=np.array(times), eta=np.array(eta), gauge_id=gauge_id)


def write_force_csv(record: ForceRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "t_over_T0", "F", "F_over_F0", "estimator"])
        name = record.estimator.value
        for t, tn, f, fn in zip(record.times, record.t_normalized,
                                record.force, record.force_normalized):
            w.writerow([_fmt(t), _fmt(tn), _fmt(f), _fmt(fn), name])


def read_force_csv(path) -> ForceRecord:
    times, force, est = [], [], Estimator.SPH
    f0 = None
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t"]))
            force.append(float(row["F"]))
            est = Estimator(row["estimator"])
            fn = float(row["F_over_F0"])
            if f0 is None and fn != 0.0:
                f0 = float(row["F"]) / fn
    kwargs = {"f0": f0} if f0 is not None else {}
    return ForceRecord(times=np.array(times), force=np.array(force),
                       estimator=est, **kwargs)


def write_timeseries_csv(path, header, columns) -> None:
    """Generic aligned-column writer."""
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(columns[0])):
            w.writerow([_fmt(c[i]) for c in columns])


def read_timeseries_csv(path):
    """Returns (header, dict of float columns)."""
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"missing file {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(float(v))
    return header, {h: np.array(v) for h, v in cols.items()}


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

_SCALAR_FIELDS = [f.name for f in dataclasses.fields(FlumeScenario)
                  if f.name != "gauges"]


def write_scenario_file(scn: FlumeScenario, path) -> None:
    parser = configparser.ConfigParser()
    parser["scenario"] = {name: repr(getattr(scn, name)) for name in _SCALAR_FIELDS}
    parser["gauges"] = {g.id: f"{g.x_position!r}, {g.sampling_dt!r}"
                        for g in scn.gauges}
    with open(path, "w") as fh:
        parser.write(fh)


def read_scenario_file(path, **overrides) -> FlumeScenario:
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"missing scenario file {path}")
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    kwargs = {}
    block = parser["scenario"]
    for name in _SCALAR_FIELDS:
        if name in block:
            raw = block[name]
            if name in ("has_structure",):
                kwargs[name] = raw.strip().lower() in ("1", "true", "yes")
            elif name == "wall_layers":
                kwargs[name] = int(raw)
            else:
                kwargs[name] = float(raw)
    if parser.has_section("gauges"):
        gauges = []
        for gid, raw in parser["gauges"].items():
            parts = [p.strip() for p in raw.split(",")]
            gauges.append(GaugeSpec(gid.upper(), float(parts[0]),
                                    float(parts[1]) if len(parts) > 1 else 0.02))
        kwargs["gauges"] = tuple(gauges)
    kwargs.update(overrides)
    return build_scenario(**kwargs)
