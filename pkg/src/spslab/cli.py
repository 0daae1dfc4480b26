"""Command-line driver: ``spslab {minimize,sweep,verify}``.

Exit codes: 0 success, 1 usage/config/IO error, 2 non-convergence (or a
failed assertion for ``verify``).
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import (FloorReport, SweepResult, builtin_family, detect_breaking, empirical_constant,
                       equal_split_triples, floor_report, running_minimum, subadditivity_check,
                       sweep)
from .config import RunConfig, format_config, load_config
from .errors import ConfigError, SPSError
from .fields import (AnyField, Field3, Grid3, RadialField, RadialGrid, annulus_family, annulus_scaling,
                     gaussian, load_snapshot, multi_bump, save_snapshot)
from .optimize import MinimizeResult, minimize

log = logging.getLogger("spslab")

BACKENDS = ("full3d", "radial")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output directory (overrides io.out_dir)")
    common.add_argument("--jobs", type=int, default=1, help="parallel tasks (default 1)")
    common.add_argument("--seed", type=int, help="seed (overrides solver.seed)")

    parser = _Parser(prog="spslab", description="Schrodinger-Poisson-Slater energy laboratory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_min = sub.add_parser("minimize", parents=[common], help="minimize E at one mass")
    p_min.add_argument("--rho", type=float, required=True, help="L2 norm of the state")
    p_min.add_argument("--backend", choices=BACKENDS, default="radial")
    p_min.add_argument("--init", default="gaussian",
                       help="gaussian | twobump | annulus | snapshot:<path>")
    sub.add_parser("sweep", parents=[common], help="radial vs full-space sweep over rho")
    p_ver = sub.add_parser("verify", parents=[common], help="run a property suite")
    p_ver.add_argument("--suite", required=True, help="scaling | ineq | gradcheck | gstudy | rearrange")
    return parser


def _configure(args) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, solver_seed=args.seed)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    out = Path(args.out or cfg.io_out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out}: {exc}") from exc
    return cfg, out


def _log_to(out: Path) -> logging.Handler:
    # timestamps live only in run.log so the data files stay byte-reproducible
    handler = logging.FileHandler(out / "run.log", mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("spslab")
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    return handler


def _kv(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- minimize -----------------------------------------------------------------

def initial_field(cfg: RunConfig, backend: str, init: str, rho: float) -> AnyField:
    if init.startswith("snapshot:"):
        field = load_snapshot(init[len("snapshot:"):])
        want = Field3 if backend == "full3d" else RadialField
        if not isinstance(field, want):
            raise ConfigError(f"snapshot holds a {type(field).__name__}, backend {backend} needs {want.__name__}")
        return field
    if backend == "radial":
        grid = cfg.radial_grid()
        if init == "gaussian":
            return gaussian(grid, cfg.init_sigma or max(grid.rmax / 20, 2.5 * grid.dr), rho=rho)
        if init == "annulus":
            R, w = annulus_scaling(rho, cfg.init_annulus_R1, cfg.init_annulus_w1)
            return annulus_family(grid, rho, R, w)
        if init == "twobump":
            raise ConfigError("init twobump needs the full3d backend")
    else:
        grid = cfg.grid()
        sigma = cfg.init_sigma or max(grid.L / 12, 2.05 * grid.h)
        if init == "gaussian":
            return gaussian(grid, sigma, rho=rho)
        if init == "twobump":
            # default separation 4 sigma, shortened to keep both bumps inside the box
            d = cfg.init_separation or min(4 * sigma, 1.9 * (grid.L - 2 * sigma))
            return multi_bump(grid, 2, d, sigma, rho)
        if init == "annulus":
            R, w = annulus_scaling(rho, cfg.init_annulus_R1, cfg.init_annulus_w1)
            shell = annulus_family(RadialGrid(4096, 2 * grid.L), rho, R, w)
            vals = np.interp(grid.radius(), shell.grid.r, shell.values, right=0.0)
            return Field3(grid, vals)
    raise ConfigError(f"unknown init {init!r}")


def cmd_minimize(cfg: RunConfig, out: Path, backend: str, init: str, rho: float) -> int:
    if not rho > 0:
        raise ConfigError("--rho must be positive")
    field = initial_field(cfg, backend, init, rho)
    p = cfg.physics_p
    res: MinimizeResult = minimize(field, rho, p, cfg.options(), name=backend)
    b = res.breakdown
    grid = res.field.grid
    geom = ([("grid.n", grid.n), ("grid.L", grid.L)] if isinstance(grid, Grid3)
            else [("radial.nr", grid.nr), ("radial.rmax", grid.rmax)])
    summary = [("backend", backend), ("init", init), ("rho", rho), ("p", p), *geom,
               ("E", b.E), ("A", b.A), ("B", b.B), ("S", b.S), ("G", b.G), ("lambda", res.lam),
               ("residual", res.residual), ("iters", res.iters), ("converged", res.converged),
               ("status", res.status), ("tol", cfg.solver_tol)]
    (out / "summary.txt").write_text(_kv((k, _fmt(v)) for k, v in summary), encoding="utf-8")
    save_snapshot(res.field, out / "field.spsf")
    trace = "iter,E\n" + "".join(f"{i},{e!r}\n" for i, e in enumerate(res.energy_trace.tolist()))
    (out / "trace.csv").write_text(trace, encoding="utf-8")
    log.info("minimize %s rho=%g: E=%.10g lambda=%.6g residual=%.3e iters=%d (%s)",
             backend, rho, b.E, res.lam, res.residual, res.iters, res.status)
    return 0 if res.converged else 2


# -- sweep --------------------------------------------------------------------

def sweep_report(result: SweepResult, floor_family, floor_all) -> tuple[str, bool]:
    recs = result.records
    tol = result.tol
    rep = detect_breaking(recs, tol=tol)
    sub = subadditivity_check(recs, equal_split_triples(recs), tol=tol)
    lines = [f"breaking: {rep.describe()}", f"margin: {rep.margin!r}"]
    lines += [f"warning: {w}" for w in rep.warnings]
    small = recs[:3]
    lines.append("small_rows_max_abs_gap: " + repr(max(abs(r.gap) for r in small)))
    lines.append(f"floor(C_family={floor_family.C!r}): {floor_family.floor!r} band(2C): {floor_family.floor_band!r}")
    lines.append(f"floor(C_all={floor_all.C!r}): {floor_all.floor!r} band(2C): {floor_all.floor_band!r}")
    conv = [r for r in recs if r.conv_rad]
    below = [r.rho for r in conv if r.I_rad < floor_all.floor]
    lines.append("radial_above_floor: " + ("true" if not below else "false " + ",".join(f"{x:.6g}" for x in below)))
    runmin = running_minimum([r.I_rad for r in recs])
    lines.append("radial_running_min: " + repr(float(runmin[-1])))
    mono = all(b.I_full <= a.I_full + 2 * tol for a, b in zip(recs, recs[1:]) if a.conv_full and b.conv_full)
    lines.append(f"full_nonincreasing: {str(mono).lower()}")
    lines.append(f"subadditivity: {'ok' if sub.ok else 'violated'} ({len(sub.rows)} equal splits)")
    for r in sub.violations:
        lines.append(f"  violation rho={r.rho:.6g}: {r.lhs!r} > {r.rhs!r} + {sub.slack!r}")
    lines.append("rows:")
    for r in recs:
        lines.append(f"  rho_sq={r.rho_sq:.6g} gap={r.gap!r} full<-{r.source_full} rad<-{r.source_rad}")
    # converged 3D grid minimizers alone, without the separated-cluster limits
    lines.append("grid_runs (best converged start per row, gap against I_rad):")
    for r in recs:
        runs = [t for t in result.starts if t["rho"] == r.rho and t["status"] == "converged"]
        if runs:
            best = min(runs, key=lambda t: t["E"])
            lines.append(f"  rho_sq={r.rho_sq:.6g} start={best['start']} E={best['E']!r} "
                         f"gap={r.I_rad - best['E']!r}")
    return "\n".join(lines) + "\n", all(r.converged for r in recs)


@dataclass(frozen=True)
class SweepOutcome:
    result: SweepResult
    floor_family: FloorReport
    floor_all: FloorReport
    report: str
    all_converged: bool


def run_sweep(cfg: RunConfig, jobs: int = 1) -> SweepOutcome:
    """Run the configured sweep and assemble its floors and text report."""
    result = sweep(cfg.rho_values(), cfg.physics_p, cfg.options(), cfg.sweep_starts,
                   settings=cfg.sweep_settings(), jobs=jobs)
    fam = floor_report(empirical_constant(builtin_family(), cfg.physics_p), cfg.physics_p)
    allc = floor_report(empirical_constant(list(builtin_family()) + result.samples, cfg.physics_p),
                        cfg.physics_p)
    text, all_conv = sweep_report(result, fam, allc)
    return SweepOutcome(result, fam, allc, text, all_conv)


def write_sweep(outcome: SweepOutcome, out: Path) -> None:
    (out / "sweep.csv").write_text(outcome.result.csv_text(), encoding="utf-8")
    (out / "report.txt").write_text(outcome.report, encoding="utf-8")


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    t0 = time.time()
    outcome = run_sweep(cfg, jobs)
    write_sweep(outcome, out)
    log.info("sweep: %d rows in %.1f s", len(outcome.result.records), time.time() - t0)
    return 0 if outcome.all_converged else 2


# -- verify -------------------------------------------------------------------

def cmd_verify(cfg: RunConfig, out: Path, suite: str) -> int:
    from .checks import SUITES
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    checks = SUITES[suite](cfg)
    text = "".join(c.line() + "\n" for c in checks)
    (out / f"verify_{suite}.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0 if all(c.passed for c in checks) else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg, out = _configure(args)
        handler = _log_to(out)
        try:
            (out / "config.txt").write_text(format_config(cfg), encoding="utf-8")
            if args.command == "minimize":
                return cmd_minimize(cfg, out, args.backend, args.init, args.rho)
            if args.command == "sweep":
                return cmd_sweep(cfg, out, args.jobs)
            return cmd_verify(cfg, out, args.suite)
        finally:
            logging.getLogger("spslab").removeHandler(handler)
            handler.close()
    except UsageError as exc:
        print(f"spslab: usage error: {exc}", file=sys.stderr)
        return 1
    except (SPSError, ValueError, OSError) as exc:
        print(f"spslab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
