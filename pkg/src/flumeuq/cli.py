"""Command-line pipeline: simulate | forces | uq | report.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 more UQ
sample rows failed than tolerated.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io as fio
from .errors import (FlumeError, InvalidGeometry, InvalidSpec, MissingInput,
                     NonFiniteRate, PropagationError, ResolutionTooCoarse,
                     UnphysicalState)
from .flume import build_scenario, seed_particles
from .forces import (AsceParams, SemiEmpiricalParams, asce_envelope_record,
                     froude_number, semi_empirical_from_heights)
from .manifest import RunManifest, config_hash
from .runner import RunConfig, run_flume
from .sampling import lhs_sample, read_rv_specs, table3_specs
from .structure import FrameGeometry
from .uq import (LOAD_FACTOR_KINDS, boxplot_stats, distribution_study,
                 kde_estimate, load_factor_spec, propagate, wave_height_spec)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_UQ_PARTIAL = 4

CONFIG_ERRORS = (InvalidGeometry, ResolutionTooCoarse, InvalidSpec, MissingInput,
                 FileNotFoundError)
SOLVER_ERRORS = (NonFiniteRate, UnphysicalState)

log = logging.getLogger("flumeuq")


def _max_jobs(requested: int) -> int:
    cap = os.environ.get("FLUME_UQ_THREADS")
    if cap:
        return max(1, min(requested, int(cap)))
    return max(1, requested)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    overrides = {}
    if args.wave_height is not None:
        overrides["wave_height"] = args.wave_height
    if args.dp is not None:
        overrides["dp"] = args.dp
    if args.duration is not None:
        overrides["duration"] = args.duration
    if args.scenario:
        scn = fio.read_scenario_file(args.scenario, **overrides)
    else:
        scn = build_scenario(**overrides)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    setup = seed_particles(scn)
    cfg = RunConfig(output_dt=args.output_dt, snapshot_dt=args.snapshot_dt)
    man = RunManifest(config_hash=config_hash({"scenario": scn, "run": cfg}),
                      seed=args.seed, scenarios=[{"wave_height": scn.wave_height,
                                                  "dp": scn.dp}])
    man.particle_counts["total"] = setup.state.n
    man.particle_counts["fluid"] = int(setup.state.fluid_indices.size)
    log.info("simulate: H=%.2fm dp=%.3fm particles=%d", scn.wave_height, scn.dp,
             setup.state.n)

    t0 = time.perf_counter()
    result = run_flume(setup, cfg)
    man.timings["simulate"] = time.perf_counter() - t0

    fio.write_scenario_file(scn, out / "scenario.ini")
    man.add_file(out, "scenario.ini")
    for gid, trace in result.gauge_traces.items():
        name = f"{gid.lower()}.csv"
        fio.write_gauge_trace_csv(trace, out / name)
        man.add_file(out, name)
    if result.sph_force is not None:
        fio.write_force_csv(result.sph_force, out / "force_sph.csv")
        man.add_file(out, "force_sph.csv")
        fio.write_timeseries_csv(out / "probe.csv",
                                 ["t", "veff", "depth"],
                                 [result.times, result.veff, result.strip_depth])
        man.add_file(out, "probe.csv")
    for t_snap, snap in result.snapshots:
        name = f"particles_{t_snap:08.3f}.csv"
        fio.write_particles_csv(snap, setup.constants, out / name)
        man.add_file(out, name)
    man.save(out)
    print(f"simulate: {result.n_particles} particles, "
          f"{result.wall_time:.1f}s wall time, outputs in {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# forces
# ---------------------------------------------------------------------------

def _load_run(run_dir: Path):
    man = RunManifest.load(run_dir)
    scn = fio.read_scenario_file(run_dir / "scenario.ini")
    return man, scn


def cmd_forces(args) -> int:
    run_dir = Path(args.run_dir)
    _, scn = _load_run(run_dir)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]

    records = {}
    if "sph" in estimators:
        records["sph"] = fio.read_force_csv(run_dir / "force_sph.csv")
    if "asce" in estimators:
        ds = args.ds if args.ds is not None else scn.still_water_depth
        rec = asce_envelope_record(AsceParams(cp=args.cp, ds=ds),
                                   width=scn.structure_width_y)
        fio.write_force_csv(rec, out / "force_asce.csv")
        records["asce"] = rec
    if "semi" in estimators or "semi_empirical" in estimators:
        gauge = fio.read_gauge_trace_csv(run_dir / f"{args.gauge.lower()}.csv")
        _, probe = fio.read_timeseries_csv(run_dir / "probe.csv")
        hb = gauge.eta + scn.still_water_depth
        p = SemiEmpiricalParams(cd=args.cd, width=scn.structure_width_y,
                                area=scn.structure_width_y * scn.structure_height,
                                base_offset=scn.still_water_depth)
        rec = semi_empirical_from_heights(gauge.times, hb, probe["veff"], p)
        fio.write_force_csv(rec, out / "force_semi_empirical.csv")
        records["semi_empirical"] = rec

    rows = [(name, rec.peak(), rec.peak() / rec.f0) for name, rec in records.items()]
    with open(out / "force_comparison.csv", "w") as fh:
        fh.write("estimator,peak_force,peak_over_F0\n")
        for name, peak, norm in rows:
            fh.write(f"{name},{peak!r},{norm!r}\n")

    _, probe = fio.read_timeseries_csv(run_dir / "probe.csv")
    fr_max, fr_regime = _max_froude(probe)
    with open(out / "froude.csv", "w") as fh:
        fh.write("wave_height,max_froude,regime\n")
        fh.write(f"{scn.wave_height!r},{fr_max!r},{fr_regime}\n")
    for name, peak, _ in rows:
        print(f"forces: peak[{name}] = {peak:.1f} N")
    print(f"forces: max Froude = {fr_max:.3f} ({fr_regime})")
    return EXIT_OK


def _max_froude(probe) -> tuple:
    veff = probe["veff"]
    depth = probe["depth"]
    best, regime = 0.0, "subcritical"
    for v, d in zip(veff, depth):
        if d > 0.0:
            fr = froude_number(v, d)
            if fr.value > best:
                best, regime = fr.value, fr.regime
    return best, regime


# ---------------------------------------------------------------------------
# uq
# ---------------------------------------------------------------------------

def _load_force_library(library_dir: Path) -> dict:
    library = {}
    for sub in sorted(Path(library_dir).iterdir()):
        if not (sub / "manifest.json").exists():
            continue
        scn = fio.read_scenario_file(sub / "scenario.ini")
        library[round(scn.wave_height, 3)] = fio.read_force_csv(sub / "force_sph.csv")
    if not library:
        raise MissingInput(f"no force libraries found under {library_dir}")
    return library


def cmd_uq(args) -> int:
    library = _load_force_library(Path(args.force_library))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = read_rv_specs(args.rv_spec) if args.rv_spec else table3_specs()
    jobs = _max_jobs(args.jobs)
    geom = FrameGeometry()

    if args.distribution_study:
        return _run_distribution_study(args, specs, library, out, geom, jobs)

    heights = sorted(library)
    columns = list(specs)
    if len(heights) > 1:
        columns.append(wave_height_spec(heights))
    if args.load_factor != "constant":
        columns.append(load_factor_spec(args.load_factor))
    samples = lhs_sample(columns, args.samples, args.seed)
    result = propagate(samples, library, geom=geom, jobs=jobs)

    _write_samples_csv(samples, result, out / "samples.csv")
    _write_edp_csv(result, out / "edp.csv")
    rmsa = result.rmsa_envelope()
    dist = kde_estimate(rmsa) if rmsa.size >= 2 else None
    if dist is not None:
        fio.write_timeseries_csv(out / "kde.csv", ["rmsa", "density"],
                                 [dist.grid, dist.density])
    with open(out / "boxplot.csv", "w") as fh:
        fh.write("group,wave_height,q1,q2,q3,iqr,lo_whisker,hi_whisker,n_outliers\n")
        for h in heights:
            vals = rmsa[result.wave_heights() == h]
            if vals.size == 0:
                continue
            b = boxplot_stats(vals)
            fh.write(f"all,{h!r},{b.q1!r},{b.q2!r},{b.q3!r},{b.iqr!r},"
                     f"{b.lo_whisker!r},{b.hi_whisker!r},{b.outliers.size}\n")
    print(f"uq: {len(result.rows)} rows ({len(result.failures)} failed), "
          f"RMSA envelope mean = {rmsa.mean():.4f} m/s^2")
    return EXIT_OK


def _run_distribution_study(args, specs, library, out: Path, geom, jobs) -> int:
    heights = sorted(library) if args.height is None else [args.height]
    lines = ["distribution,wave_height,q1,q2,q3,iqr,lo_whisker,hi_whisker,"
             "n_outliers,max_rmsa"]
    for h in heights:
        study = distribution_study(specs, args.samples, args.seed, library, h,
                                   geom=geom, jobs=jobs)
        for kind in LOAD_FACTOR_KINDS:
            rmsa = study[kind].rmsa_envelope()
            b = boxplot_stats(rmsa)
            lines.append(f"{kind},{h!r},{b.q1!r},{b.q2!r},{b.q3!r},{b.iqr!r},"
                         f"{b.lo_whisker!r},{b.hi_whisker!r},{b.outliers.size},"
                         f"{rmsa.max()!r}")
    (out / "boxplot.csv").write_text("\n".join(lines) + "\n")
    print(f"uq: distribution study over {len(heights)} heights x "
          f"{len(LOAD_FACTOR_KINDS)} distributions -> {out / 'boxplot.csv'}")
    return EXIT_OK


def _write_samples_csv(samples, result, path) -> None:
    header = ["sample_id"] + list(samples.names) + ["assigned_height"]
    assigned = {r.sample_id: r.wave_height for r in result.rows}
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(samples.q):
            vals = [repr(float(v)) for v in samples.values[i]]
            fh.write(f"{i}," + ",".join(vals) + f",{assigned.get(i, float('nan'))!r}\n")


def _write_edp_csv(result, path) -> None:
    if not result.rows:
        raise PropagationError("no successful rows to write")
    n_st = result.rows[0].rmsa.size
    header = ["sample_id", "wave_height", "load_factor"] \
        + [f"rmsa_{j + 1}" for j in range(n_st)] + ["rmsa_envelope"] \
        + [f"peak_disp_{j + 1}" for j in range(n_st)] + ["peak_disp_envelope"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in result.rows:
            cells = [str(r.sample_id), repr(r.wave_height), repr(r.load_factor)]
            cells += [repr(float(v)) for v in r.rmsa] + [repr(r.rmsa_envelope)]
            cells += [repr(float(v)) for v in r.peak_displacement]
            cells += [repr(r.peak_displacement_envelope)]
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    man = RunManifest.load(run_dir)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)

    gauge_files = sorted(p for p in run_dir.glob("wg*.csv"))
    if gauge_files:
        traces = {p.stem.upper(): fio.read_gauge_trace_csv(p, p.stem.upper())
                  for p in gauge_files}
        first = next(iter(traces.values()))
        header = ["t", "t_over_T0"]
        cols = [first.times, first.t_normalized]
        for gid in sorted(traces):
            header += [f"eta_{gid}", f"eta_over_eta0_{gid}"]
            cols += [traces[gid].eta, traces[gid].eta_normalized]
        fio.write_timeseries_csv(out / "report_gauges.csv", header, cols)
    force_path = run_dir / "force_sph.csv"
    if force_path.exists():
        rec = fio.read_force_csv(force_path)
        fio.write_timeseries_csv(out / "report_forces.csv",
                                 ["t", "t_over_T0", "F", "F_over_F0"],
                                 [rec.times, rec.t_normalized, rec.force,
                                  rec.force_normalized])
    edp_path = run_dir / "edp.csv"
    if edp_path.exists():
        _, cols = fio.read_timeseries_csv(edp_path)
        heights = np.unique(cols["wave_height"])
        rows_h, rows_mean, rows_max = [], [], []
        for h in heights:
            sel = cols["wave_height"] == h
            rows_h.append(h)
            rows_mean.append(cols["rmsa_envelope"][sel].mean())
            rows_max.append(cols["rmsa_envelope"][sel].max())
        fio.write_timeseries_csv(out / "report_rmsa_vs_height.csv",
                                 ["wave_height", "rmsa_mean", "rmsa_max"],
                                 [rows_h, rows_mean, rows_max])
    if not gauge_files and not force_path.exists() and not edp_path.exists():
        raise MissingInput(f"nothing to report in {run_dir}")
    print(f"report: tables written to {out} (manifest hash {man.config_hash[:12]})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flumeuq",
                                 description="SPH wave flume + structural UQ pipeline")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the SPH flume")
    sim.add_argument("--scenario", help="scenario file (key = value blocks)")
    sim.add_argument("--wave-height", type=float, dest="wave_height")
    sim.add_argument("--dp", type=float)
    sim.add_argument("--duration", type=float)
    sim.add_argument("--output-dt", type=float, default=0.02)
    sim.add_argument("--snapshot-dt", type=float, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    frc = sub.add_parser("forces", help="force estimators on a finished run")
    frc.add_argument("--run-dir", required=True)
    frc.add_argument("--estimators", default="sph,asce,semi")
    frc.add_argument("--cp", type=float, default=3.5)
    frc.add_argument("--cd", type=float, default=2.0)
    frc.add_argument("--ds", type=float, default=None)
    frc.add_argument("--gauge", default="WG8")
    frc.add_argument("--out", default=None)
    frc.set_defaults(func=cmd_forces)

    uqp = sub.add_parser("uq", help="forward UQ sweep over cached force libraries")
    uqp.add_argument("--rv-spec", default=None)
    uqp.add_argument("--force-library", required=True)
    uqp.add_argument("--samples", type=int, default=600)
    uqp.add_argument("--seed", type=int, default=0)
    uqp.add_argument("--jobs", type=int, default=1)
    uqp.add_argument("--load-factor", default="constant", choices=LOAD_FACTOR_KINDS)
    uqp.add_argument("--distribution-study", action="store_true")
    uqp.add_argument("--height", type=float, default=None)
    uqp.add_argument("--out", required=True)
    uqp.set_defaults(func=cmd_uq)

    rep = sub.add_parser("report", help="plot-ready normalised tables")
    rep.add_argument("--run-dir", required=True)
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PropagationError as exc:
        print(f"uq error: {exc}", file=sys.stderr)
        return EXIT_UQ_PARTIAL
    except FlumeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
