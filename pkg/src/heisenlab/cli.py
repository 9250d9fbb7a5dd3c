"""Command-line entry point ``lab``.

Data go to ``--out`` (or stdout) and depend only on the configuration and
seed.  Timing and verdicts go to a separate ``<out>.manifest.json`` so the
data files stay byte-identical across runs and thread counts.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .estimates import CHECKS, CheckReport, run_check
from .experiments import RUNNERS, ConfigError, ExperimentConfig, ExperimentTable, config_from_mapping, load_config
from .nc_lp import SolverError
from .special import ParameterError

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("heisenlab")


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("LAB_THREADS")
    if env is None:
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"LAB_THREADS must be a positive integer, got {env!r}") from None
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML configuration file")
    common.add_argument("--out", type=Path, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default: config value or csv)")
    common.add_argument("--seed", type=_seed, help="unsigned 64-bit seed, overrides the config")
    common.add_argument("--threads", type=int, help="worker threads (fallback: LAB_THREADS, then 1)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="lab", description="Spherical-means numerical laboratory")
    parser.add_argument("--version", action="version", version=f"heisenlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sub.add_parser(name, parents=[common], help=f"run the {name} study")
    est = sub.add_parser("estimates", parents=[common], help="run a quantitative estimate check")
    est.add_argument("check", choices=sorted(CHECKS) + ["all"])
    sub.add_parser("selftest", parents=[common], help="fast battery of sanity checks")
    return parser


def _experiment_config(args, name: str) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else config_from_mapping({"experiment": name})
    if cfg.experiment != name:
        raise ConfigError(f"{args.config}:1: config is for '{cfg.experiment}', not '{name}'")
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.format is not None:
        cfg = replace(cfg, format=args.format)
    return cfg


def _write(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_manifest(args, config: dict, verdicts: list[dict], started: float) -> None:
    if args.out is None:
        return
    manifest = {
        "library": "heisenlab",
        "version": __version__,
        "command": args.command,
        "config": config,
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "verdicts": verdicts,
    }
    path = args.out.with_name(args.out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


def _run_experiment(args, started: float) -> int:
    cfg = _experiment_config(args, args.command)
    threads = _threads(args.threads)
    if threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")
    log.info("running %s with %d trial(s) on %d thread(s)", cfg.experiment, cfg.trials, threads)
    table: ExperimentTable = RUNNERS[cfg.experiment](cfg, threads=threads)
    _write(args, table.render(cfg.format))
    status = "PASS" if table.passed else "FAIL"
    if table.failures:
        status = "SOLVER-FAILURE"
    verdict = {"check": cfg.experiment, "status": status, "solver_failures": table.failures, **table.summary}
    _write_manifest(args, cfg.to_dict(), [verdict], started)
    log.info("%s: %s", cfg.experiment, status)
    if table.failures:
        return EXIT_SOLVER
    return EXIT_OK if table.passed else EXIT_CHECK


def _check_params(args, name: str) -> dict:
    if not args.config:
        return {}
    cfg = load_config(args.config)
    if cfg.experiment != "estimates-suite":
        raise ConfigError(f"{args.config}:1: estimates need experiment: estimates-suite, got '{cfg.experiment}'")
    if cfg.check is not None and cfg.check != name and name != "all":
        raise ConfigError(f"{args.config}:1: config targets check '{cfg.check}', command line asks for '{name}'")
    return dict(cfg.check_params) if name != "all" else {}


def _render_reports(reports: list[CheckReport], fmt: str) -> str:
    if fmt == "json":
        payload = [{"verdict": r.verdict(), "columns": r.columns, "rows": r.rows} for r in reports]
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if len(reports) == 1:
        return reports[0].to_csv()
    # several checks with different columns: one long table of summary values
    rows = []
    for rep in reports:
        for key, value in sorted(_flatten(rep.verdict()).items()):
            rows.append([rep.name, key, value])
    return CheckReport("summary", True, ["check", "key", "value"], rows).to_csv()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _run_estimates(args, started: float, names: list[str]) -> int:
    params = _check_params(args, args.command == "estimates" and args.check or "all")
    fmt = args.format or "csv"
    reports = []
    for name in names:
        log.info("check %s", name)
        try:
            reports.append(run_check(name, **params))
        except TypeError as exc:
            raise ConfigError(f"{args.config}: bad check_params for '{name}': {exc}") from exc
        log.info("%s: %s", name, "PASS" if reports[-1].passed else "FAIL")
    _write(args, _render_reports(reports, fmt))
    _write_manifest(args, {"checks": names, "params": params}, [r.verdict() for r in reports], started)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


SELFTEST = {
    "contraction-scan": {"k_max": 40, "r_max": 20.0, "r_count": 400},
    "psi-subordination": {},
    "spectral-integral": {},
    "pointwise-control": {"paths": 50},
}


def _run_selftest(args, started: float) -> int:
    fmt = args.format or "csv"
    reports = [run_check(name, **params) for name, params in SELFTEST.items()]
    for rep in reports:
        log.info("%s: %s", rep.name, "PASS" if rep.passed else "FAIL")
    _write(args, _render_reports(reports, fmt))
    _write_manifest(args, {"selftest": SELFTEST}, [r.verdict() for r in reports], started)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    started = time.perf_counter()
    try:
        if args.command in RUNNERS:
            return _run_experiment(args, started)
        if args.command == "estimates":
            names = sorted(CHECKS) if args.check == "all" else [args.check]
            return _run_estimates(args, started, names)
        return _run_selftest(args, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
