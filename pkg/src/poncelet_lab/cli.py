"""``poncelet-lab`` command line.

Exit status: 0 success, 1 input error (nothing written), 2 the experiment
ran but a mathematical check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, emit_config, load_config
from .dynamics import validate_config
from .errors import (
    BracketFailure,
    ConfigError,
    DegenerateInput,
    EmptyDataset,
    IdenticalConics,
    NotRealNested,
    PonceletError,
    SingularConic,
)
from .experiments import build_family, run_experiment
from .plotting import render_svg

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2

# errors that mean the config does not describe a usable family
INPUT_ERRORS = (ConfigError, DegenerateInput, IdenticalConics, NotRealNested, BracketFailure, SingularConic)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(float(obj.real)), "im": _jsonable(float(obj.imag))}
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no NaN/inf
        return v if math.isfinite(v) else repr(v)
    return obj


def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue().encode()


def _tolerances(exp: ExperimentConfig) -> dict:
    return {"tol": exp.tol, "check_tol": exp.check_tol, "homogeneous_equality": 1e-9, "zero_area_relative": 1e-12}


def _input_failure(message: dict) -> int:
    print(json.dumps({"status": "input-error", "error": message}, indent=2), file=sys.stderr)
    return EXIT_INPUT


def cmd_run(args) -> int:
    try:
        exp = load_config(args.config)
        exp = exp.with_overrides(samples=args.samples, seed=args.seed, out_dir=args.out)
        if args.svg:
            exp = exp.with_overrides(svg=True)
        cfg = build_family(exp)
    except INPUT_ERRORS as exc:
        return _input_failure(exc.to_dict())
    except (ValueError, ZeroDivisionError) as exc:
        return _input_failure({"type": type(exc).__name__, "message": str(exc)})

    try:
        outcome = run_experiment(exp, cfg)
    except INPUT_ERRORS as exc:
        return _input_failure(exc.to_dict())
    report = {
        "tool": "poncelet-lab",
        "version": __version__,
        "experiment": exp.experiment,
        "config_sha256": exp.digest(),
        "config": emit_config(exp),
        "tolerances": _tolerances(exp),
        "seed": exp.seed,
        "samples": exp.sample_count,
        "family": {"n": cfg.n, "k": cfg.k, "scale": cfg.scale},
        "result": outcome.result,
        "checks": {c.name: c.to_dict() for c in outcome.checks},
        "errors": list(outcome.errors),
        "status": "ok" if outcome.passed else "check-failed",
    }

    # render everything in memory first so a failure leaves no partial output
    files: dict[str, bytes] = {}
    if outcome.rows or outcome.header:
        files["samples.csv"] = _csv_bytes(outcome.header, outcome.rows)
        report["outputs"] = ["report.json", "samples.csv"]
    else:
        report["outputs"] = ["report.json"]
    if exp.svg and outcome.figure is not None:
        try:
            files["figure.svg"] = render_svg(outcome.figure)
            report["outputs"].append("figure.svg")
        except EmptyDataset as exc:
            report["errors"].append(exc.to_dict())
    files["report.json"] = (json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n").encode()

    out = Path(exp.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (out / name).write_bytes(data)
    except OSError as exc:
        return _input_failure({"type": "OSError", "message": str(exc)})

    status = EXIT_OK if outcome.passed else EXIT_CHECK
    print(json.dumps({"status": report["status"], "out": str(out), "checks": report["checks"]}, indent=2, default=str))
    return status


def cmd_validate(args) -> int:
    try:
        exp = load_config(args.config)
        cfg = build_family(exp)
    except INPUT_ERRORS as exc:
        return _input_failure(exc.to_dict())
    except (ValueError, ZeroDivisionError) as exc:
        return _input_failure({"type": type(exc).__name__, "message": str(exc)})
    try:
        residual = validate_config(cfg, probes=5, seed=exp.seed)
    except PonceletError as exc:
        print(json.dumps({"status": "check-failed", "error": exc.to_dict()}, indent=2))
        return EXIT_CHECK
    ok = residual <= exp.tol
    summary = {
        "status": "ok" if ok else "check-failed",
        "experiment": exp.experiment,
        "config_sha256": exp.digest(),
        "n": cfg.n,
        "k": cfg.k,
        "scale": cfg.scale,
        "closure_residual": residual,
        "tol": exp.tol,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poncelet-lab", description="Poncelet family experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output.dir)")
    r.add_argument("--svg", action="store_true", help="also write figure.svg")
    r.add_argument("--samples", type=int, help="number of family samples")
    r.add_argument("--seed", type=int, help="seed for randomized probes")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="parse a config and check closure of its family")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are input errors
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "samples", None) is not None and args.samples < 0:
        return _input_failure({"type": "ConfigError", "message": "--samples must be non-negative"})
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
