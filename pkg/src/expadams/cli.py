"""Command-line entry point: ``expadams <subcommand> [--config FILE] ...``.

Exit status 0 on success, 2 on configuration errors, 3 when a bracketing
search or a nonlinear solve fails.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import stability as st
from .config import ConfigError, ExperimentConfig, load_config
from .core import BracketError, Family, SchemeSpec, SolverFailure, StepOverflow
from .harness import (convergence_study, critical_time_step, integrate, reference_solution,
                      score_run)
from .models import beeler_reuter, beeler_reuter_system, gate_time_constants, make_dahlquist

log = logging.getLogger("expadams")

EXIT_OK, EXIT_CONFIG, EXIT_SEARCH = 0, 2, 3

TABLE_DT0 = ("AB2", "BDF2", "AB3", "BDF3", "AB4", "RK4", "BDF4",
             "I-EAB2", "EAB2", "I-EAB3", "EAB3", "I-EAB4", "EAB4")
TABLE_ACC = ("AB2", "AB3", "AB4", "I-EAB2", "I-EAB3", "I-EAB4", "EAB2", "EAB3", "EAB4")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.15g}"
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    log.info("wrote %s", path)
    return path


def build_system(cfg: ExperimentConfig):
    m = cfg.model
    if m.name == "dahlquist":
        return make_dahlquist(m.lam, m.theta), np.array([m.y0])
    try:
        model = beeler_reuter(m.parameter_file, **m.overrides)
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"[model] {exc}") from None
    return beeler_reuter_system(model), model.y0


def _dt0_one(cfg, system, y0, scheme: SchemeSpec) -> float:
    r = cfg.run
    implicit = scheme.family is Family.BDF
    return critical_time_step(
        scheme, system, y0, r.T,
        r.dt0_implicit_h_lo if implicit else r.dt0_h_lo, r.dt0_h_hi, 0.0,
        rtol=r.dt0_rtol, scan_ratio=None if implicit else r.dt0_scan_ratio,
        newton=cfg.scheme.newton,
    )


def _dt0_rows(cfg, schemes):
    system, y0 = build_system(cfg)

    def one(s):
        d = _dt0_one(cfg, system, y0, s)
        log.info("%s dt0 = %.6g", s.label, d)
        return s, d

    if cfg.run.workers > 1:
        with ThreadPoolExecutor(cfg.run.workers) as pool:
            res = list(pool.map(one, schemes))
    else:
        res = [one(s) for s in schemes]
    return [(s.label, s.order, d) for s, d in res]


def cmd_converge(cfg, args):
    system, y0 = build_system(cfg)
    h_ref = cfg.run.h_ref or min(cfg.run.h) / 8
    reports = convergence_study(cfg.scheme.schemes, system, y0, cfg.run.h, cfg.run.T, h_ref,
                                workers=cfg.run.workers)
    rows = [(r.scheme.label, r.scheme.order, r.h, r.e_h, r.order) for r in reports]
    for row in rows:
        print(",".join(fmt(x) for x in row))
    write_csv(args.out / "convergence.csv", ("scheme", "k", "h", "e_h", "order"), rows)


def cmd_dt0(cfg, args):
    rows = _dt0_rows(cfg, cfg.scheme.schemes)
    for label, _, d in rows:
        print(f"{label}: dt0 = {d:.6g}")
    write_csv(args.out / "dt0.csv", ("scheme", "k", "dt0"), rows)


def cmd_stability_grid(cfg, args):
    g = cfg.grid
    k = args.k or g.k
    theta = args.theta or g.theta
    grid = st.GridSpec(g.x0, g.x1, g.dx, g.y0, g.y1)
    re, im, R = st.stability_grid(k, theta, grid, workers=cfg.run.workers)
    path = args.out / f"stability_grid_k{k}_theta{theta:g}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    st.write_grid_csv(path, re, im, R)
    print(f"k={k} theta={theta:g}: {R.size} nodes, stable fraction {np.mean(R < 1):.4f}, "
          f"wedge angle ~{st.estimate_alpha(re, im, R):.1f} deg -> {path}")


def cmd_a0_threshold(cfg, args):
    g = cfg.grid
    ks = [args.k] if args.k else [2, 3, 4]
    grid = st.GridSpec.real_axis(g.line_min, g.line_dx)
    rows = []
    for k in ks:
        res = st.find_theta_thresholds(k, (g.theta_lo, g.theta_hi), g.theta_tol, grid)
        print(f"k={k} lower: theta* in ({res.lower[0]:.6f}, {res.lower[1]:.6f}]")
        rows.append((k, "lower", res.lower[0], res.lower[1]))
        if res.upper is not None:
            print(f"k={k} upper: theta* in [{res.upper[0]:.6f}, {res.upper[1]:.6f})")
            rows.append((k, "upper", res.upper[1], res.upper[0]))
        else:
            print(f"k={k} upper: none below theta={g.theta_hi:g}")
    write_csv(args.out / "a0_thresholds.csv", ("k", "bound", "theta_unstable", "theta_stable"), rows)


def cmd_positivity(cfg, args):
    g = cfg.grid
    b3 = st.compute_beta3()
    print(f"beta3 = {b3:.6f}")
    taus = gate_time_constants(np.linspace(-90.0, 40.0, 27))
    rows = []
    for factor in (None, 1.5):
        rep = st.positivity_trials(taus, factor, g.positivity_trials, seed=g.positivity_seed)
        label = "random<=1" if factor is None else f"{factor:g}"
        print(f"h/tau={label}: trials={rep.trials} admitted={rep.admitted} "
              f"admitted_violations={rep.admitted_violations} violations={rep.violations} "
              f"range=[{rep.y_min:.4g}, {rep.y_max:.4g}]")
        rows.append((label, rep.trials, rep.admitted, rep.admitted_violations, rep.violations,
                     rep.y_min, rep.y_max))
    write_csv(args.out / "positivity.csv",
              ("h_over_tau", "trials", "admitted", "admitted_violations", "violations", "y_min", "y_max"),
              rows)
    write_csv(args.out / "beta3.csv", ("beta3",), [(b3,)])


def cmd_tables(cfg, args):
    dt0_schemes = [SchemeSpec.parse(s) for s in TABLE_DT0]
    rows = _dt0_rows(cfg, dt0_schemes)
    for label, _, d in rows:
        print(f"dt0 {label}: {d:.4g}")
    write_csv(args.out / "table_dt0.csv", ("scheme", "k", "dt0"), rows)

    system, y0 = build_system(cfg)
    h = cfg.run.table_h
    ref = reference_solution(system, y0, h / 16, cfg.run.T)
    acc = []
    for label in TABLE_ACC:
        s = SchemeSpec.parse(label)
        e = score_run(integrate(s, system, y0, h, cfg.run.T, components=[system.dim - 1]), ref)
        print(f"e(h={h:g}) {label}: {e:.3g}")
        acc.append((label, s.order, h, e))
    write_csv(args.out / "table_accuracy.csv", ("scheme", "k", "h", "e_h"), acc)


COMMANDS = {
    "converge": cmd_converge,
    "dt0": cmd_dt0,
    "stability-grid": cmd_stability_grid,
    "a0-threshold": cmd_a0_threshold,
    "positivity": cmd_positivity,
    "tables": cmd_tables,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expadams", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="INI file; defaults apply when omitted")
        sp.add_argument("--output-dir", type=Path, help="overrides [run] output_dir")
        sp.add_argument("--workers", type=int, help="overrides [run] workers")
        if name in ("stability-grid", "a0-threshold"):
            sp.add_argument("--k", type=int, choices=(2, 3, 4))
        if name == "stability-grid":
            sp.add_argument("--theta", type=float)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg = replace(cfg, run=replace(cfg.run, workers=args.workers))
        if getattr(args, "theta", None) is not None and not args.theta > 0:
            raise ConfigError("--theta must be positive")
        args.out = args.output_dir or Path(cfg.run.output_dir)
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketError, SolverFailure, StepOverflow) as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
