"""Command-line front end: ``gfch solve|validate|converge``.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 blow-up.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .experiments import (
    SUPPORT_RTOL,
    ConvergenceStudy,
    PeriodViolationError,
    config_hash,
    edge_fraction,
    fmt,
    run_unidirectional_comparison,
)
from .hierarchy import MUTATIONS
from .models import BoussinesqFlow, ModelId, ModelParams, make_flow
from .spectral import derivative, make_grid, periodic_gaussian, random_bandlimited, shift
from .stepping import BlowUpError, StepperConfig, integrate, validate as validate_stepper
from .validation import run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

log = logging.getLogger("gfch")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, conf: dict, files: list, **extra) -> Path:
    """``manifest.json`` with the resolved config, its hash and a hash per output file.

    The config hash leaves out ``output.dir`` so it identifies the computation,
    not where its results were written.
    """
    manifest = {
        "command": command,
        "config": conf,
        "config_hash": config_hash({k: v for k, v in conf.items() if k != "output.dir"}),
        "files": {str(f.relative_to(out)): sha256_file(f) for f in sorted(files)},
        **extra,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=fmt) + "\n")
    return path


def write_timing(out: Path, seconds: float) -> None:
    # kept apart from the manifest so reruns stay byte-identical
    (out / "timing.json").write_text(json.dumps({"wall_s": seconds}) + "\n")


def _params(conf: dict) -> ModelParams:
    try:
        return ModelParams(conf["p"], conf["nu"], conf["eps"], conf["delta"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc


def _model(name: str) -> ModelId:
    try:
        return ModelId.parse(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_profile(conf: dict, grid):
    profile = conf["initial.profile"]
    center = conf["initial.center"]
    center = grid.length / 2 if center is None else float(center)
    amp = conf["initial.amplitude"]
    if profile == "gaussian":
        return periodic_gaussian(grid, center, conf["initial.sigma"], amp)
    if profile == "random":
        rng = np.random.default_rng(conf["seed"])
        return random_bandlimited(grid, rng, conf["initial.kmax"], amp)
    if profile == "sech":
        # sech^2 centred at 0, then moved spectrally so it stays periodic
        x = (grid.nodes + grid.length / 2) % grid.length - grid.length / 2
        return shift(grid, amp / np.cosh(x / conf["initial.sigma"]) ** 2, -center)
    raise ConfigError(f"initial.profile must be gaussian, random or sech, got {profile!r}")


def _stepper(conf: dict, grid) -> StepperConfig:
    dt = conf["stepper.dt"]
    dt = conf["stepper.dt_factor"] * grid.dx if dt is None else float(dt)
    try:
        return StepperConfig(
            dt=dt,
            t_end=conf["stepper.t_end"],
            scheme=conf["stepper.scheme"],
            cfl_guard=conf["stepper.cfl_guard"],
            snapshot_every=conf["stepper.snapshot_every"],
        )
    except ValueError as exc:
        raise ConfigError(f"invalid stepper settings: {exc}") from exc


def _write_xy(path: Path, x, values) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("x", "value"))
        for xi, vi in zip(x, values):
            writer.writerow((fmt(xi), fmt(vi)))


def cmd_solve(conf: dict, out: Path, **_) -> int:
    model = _model(conf["model"])
    params = _params(conf)
    try:
        grid = make_grid(conf["grid.n"], conf["grid.length"])
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc
    q0 = _initial_profile(conf, grid)
    if model is ModelId.BOUSSINESQ:
        velocity = conf["initial.velocity"]
        if velocity == "zero":
            q0 = (q0, np.zeros_like(q0))
        elif velocity == "right-going":
            q0 = (q0, -derivative(grid, q0))
        else:
            raise ConfigError(f"initial.velocity must be zero or right-going, got {velocity!r}")
    flow = BoussinesqFlow(grid, params.p, params.nu) if model is ModelId.BOUSSINESQ else make_flow(model, grid, params)
    stepper = _stepper(conf, grid)
    try:
        validate_stepper(flow, stepper)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    snapdir = out / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    files, snapshots, warnings = [], [], []
    edge = {"worst": 0.0, "first": None}

    def record(t, qh):
        q = flow.to_physical(qh)
        values = q.u if model is ModelId.BOUSSINESQ else q
        path = snapdir / f"snap_{len(snapshots):05d}.csv"
        _write_xy(path, grid.nodes, values)
        files.append(path)
        snapshots.append({"file": str(path.relative_to(out)), "t": t})
        frac = edge_fraction(values)
        if frac > SUPPORT_RTOL:
            edge["worst"] = max(edge["worst"], frac)
            if edge["first"] is None:
                edge["first"] = t

    integrate(flow, q0, stepper, record)
    if edge["first"] is not None:
        warnings.append(
            f"support reaches the box edge from t = {fmt(edge['first'])} "
            f"(max edge amplitude {fmt(edge['worst'])} of peak, threshold {fmt(SUPPORT_RTOL)})"
        )
    for w in warnings:
        log.warning(w)
    write_manifest(out, "solve", conf, files, snapshots=snapshots, warnings=warnings)
    print(f"solve: {len(snapshots)} snapshots written to {snapdir}")
    return EXIT_OK


def cmd_validate(conf: dict, out: Path, mutate=None, **_) -> int:
    if mutate is not None and mutate not in MUTATIONS:
        raise ConfigError(f"unknown mutation {mutate!r}; known: {', '.join(sorted(MUTATIONS))}")
    rows = run_suite(
        seed=conf["seed"],
        mutate=mutate,
        n_fields=conf["validate.n_fields"],
        horizon=conf["validate.horizon"],
        hierarchy_kw={
            "n": conf["validate.hierarchy_n"],
            "length": conf["validate.hierarchy_length"],
            "sigma": conf["validate.sigma"],
        },
    )
    out.mkdir(parents=True, exist_ok=True)
    path = out / "validate.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("group", "name", "p", "nu", "value", "tol", "passed"))
        for r in rows:
            writer.writerow((r.group, r.name, r.p, fmt(r.nu), fmt(r.value), fmt(r.tol), int(r.passed)))
    failed = [r for r in rows if not r.passed]
    groups = sorted({r.group for r in rows})
    for g in groups:
        sub = [r for r in rows if r.group == g]
        bad = sum(not r.passed for r in sub)
        worst = max(r.value for r in sub)
        print(f"{g:>13}: {len(sub) - bad}/{len(sub)} passed, worst {worst:.3e}")
    for r in failed:
        print(f"FAILED {r.group} {r.name} (p={r.p}, nu={r.nu}): {r.value:.3e} >= {r.tol:.1e}")
    write_manifest(out, "validate", conf, [path], mutate=mutate, passed=not failed)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_converge(conf: dict, out: Path, threads: int = 1, **_) -> int:
    try:
        study = ConvergenceStudy(
            reduced=conf["converge.reduced"],
            epsilons=tuple(conf["converge.epsilons"]),
            deltas=tuple(conf["converge.deltas"]),
            eps_fixed=conf["converge.eps_fixed"],
            delta_fixed=conf["converge.delta_fixed"],
            p=conf["p"],
            nu=conf["nu"],
            sigma=conf["converge.sigma"],
            S_end=conf["converge.S_end"],
            n=conf["grid.n"],
            length=conf["grid.length"],
            dt_factor=conf["stepper.dt_factor"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid convergence study: {exc}") from exc
    report = run_unidirectional_comparison(study, threads=threads)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, dat_path, slopes_path = out / "errors.csv", out / "errors.dat", out / "slopes.json"
    csv_path.write_text(report.to_csv())
    dat_path.write_text(report.to_gnuplot())
    slopes_path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True, default=fmt) + "\n")
    summary = report.summary()
    print(
        f"converge: slope_eps = {report.slope_eps:.3f} +- {report.slope_eps_stderr:.3f}, "
        f"slope_delta = {report.slope_delta:.3f} +- {report.slope_delta_stderr:.3f}"
    )
    for flag in report.flags:
        print(f"flag: {flag}")
    status = EXIT_OK
    for key, slope in (("converge.min_slope_eps", report.slope_eps), ("converge.min_slope_delta", report.slope_delta)):
        if conf[key] is not None and not slope >= conf[key]:
            print(f"FAILED {key}: fitted {slope:.3f} < {conf[key]}")
            status = EXIT_FAIL
    write_manifest(out, "converge", conf, [csv_path, dat_path, slopes_path], summary=summary)
    return status


COMMAND_FUNCS = {"solve": cmd_solve, "validate": cmd_validate, "converge": cmd_converge}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "integrate one model and write snapshot CSVs"),
        ("validate", "run the hierarchy, reduction, frame and conservation checks"),
        ("converge", "Boussinesq vs reduced-model convergence study"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON file with dotted keys")
        p.add_argument("--preset", help=f"bundled config ({', '.join(cfgmod.PRESETS)})")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="random seed (overrides seed)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for parameter sweeps")
        p.add_argument("--mutate", help="test mode: corrupt a hierarchy coefficient")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    start = time.perf_counter()
    try:
        if args.config and args.preset:
            raise ConfigError("give either --config or --preset, not both")
        raw = {}
        if args.preset:
            if cfgmod.preset_command(args.preset) != args.command:
                raise ConfigError(f"preset {args.preset!r} belongs to the {cfgmod.preset_command(args.preset)!r} command")
            raw = cfgmod.load_preset(args.preset)
        elif args.config:
            raw = cfgmod.load_file(args.config)
        overrides = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["output.dir"] = args.out
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.mutate is not None and args.command != "validate":
            raise ConfigError("--mutate is only meaningful for validate")
        conf = cfgmod.resolve(args.command, raw, overrides)
        out = Path(conf["output.dir"])
        out.mkdir(parents=True, exist_ok=True)
        status = COMMAND_FUNCS[args.command](conf, out, threads=args.threads, mutate=args.mutate)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except PeriodViolationError as exc:
        print(f"period violation: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    write_timing(out, time.perf_counter() - start)
    return status


if __name__ == "__main__":
    sys.exit(main())
