"""Command line front end: ``cifs fixed-points | attractor | chaos | verify``.

Knob values are resolved as flag > ``"run"`` section of the ``--config``
file > built-in default.  Every precondition failure exits nonzero after
printing a single ``<CODE>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetError, IFSError, PreconditionError
from .family import builtin, family_from_dict, fixed_point_set, sup_ratio
from .measure import ProbabilitySequence, chaos_game, markov_residual, support_estimate
from .setops import (
    attractor_approx,
    check_invariance,
    directed_hausdorff,
    enumerate_P,
    write_csv,
)
from .setops.invariance import DEFAULT_WORD_BUDGET, RATIO_REFUSAL_MARGIN
from .verify import CLAIMS, VerifyOptions, run_claim

DEFAULTS = {
    "N": 100,
    "k": 6,
    "tol": 1e-3,
    "samples": 10**6,
    "burn_in": 1000,
    "cell": 1 / 128,
    "seed": 42,
    "eps": 0.1,
    "max_iters": 100,
    "budget": DEFAULT_WORD_BUDGET,
}

EXIT_FAIL, EXIT_USAGE, EXIT_ERROR, EXIT_IO = 1, 2, 3, 4


class UsageError(Exception):
    code = "E_USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("family and knobs")
    g.add_argument("--family", help="builtin family: EX1, EX2, DYADIC or GEO(q)")
    g.add_argument("--config", type=Path, help="JSON family config (optional \"run\" section for knobs)")
    g.add_argument("--N", type=_positive_int, help="maps per branch (truncation)")
    g.add_argument("--k", type=_positive_int, help="maximal composition word length")
    g.add_argument("--tol", type=_positive_float, help="Hausdorff tolerance for attractor iteration")
    g.add_argument("--max-iters", type=_positive_int, help="attractor iteration cap")
    g.add_argument("--samples", type=_positive_int, help="chaos game samples kept")
    g.add_argument("--burn-in", type=_nonneg_int, help="chaos game steps discarded")
    g.add_argument("--seed", type=_nonneg_int, help="random seed")
    g.add_argument("--cell", type=_positive_float, help="cell size h for support estimates")
    g.add_argument("--eps", type=_positive_float, help="enlargement radius")
    g.add_argument("--rho", help="probabilities: geometric:q, uniform:n or w1,w2,...")
    g.add_argument("--budget", type=_positive_int, help="maximal number of composition words")
    g.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    g.add_argument("--force-truncate", action="store_true",
                   help="run the attractor on the truncated family even if the declared sup ratio is 1")
    g.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from JSON reports")
    g.add_argument("--show-defaults", action="store_true", help="print the default knobs and exit")

    parser = _Parser(prog="cifs", description="Countable iterated function systems of similarities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--show-defaults", action="store_true", help="print the default knobs and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("fixed-points", parents=[common], help="fixed points D and composition fixed points P")
    sub.add_parser("attractor", parents=[common], help="Hutchinson iteration of the truncated family")
    p = sub.add_parser("chaos", parents=[common], help="chaos game, Markov residual and support")
    p.add_argument("--compare-P", type=_positive_int, metavar="K",
                   help="also report the Hausdorff distance from the support to P with words up to K")
    p = sub.add_parser("verify", parents=[common], help="run the claims suite")
    p.add_argument("--claim", action="append", choices=sorted(CLAIMS), help="claim to run (repeatable)")
    p.add_argument("--all", action="store_true", help="run every claim")
    p.add_argument("--imax", type=_positive_int, help="horizon for the unboundedness witness")
    return parser


# plumbing


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_points(path: Path, points: np.ndarray) -> None:
    buf = io.StringIO()
    write_csv(points, buf)
    _atomic_write(path, buf.getvalue())


def _write_report(path: Path, report: dict, args) -> None:
    if not args.no_timestamp:
        report = {**report, "timestamp": datetime.now(timezone.utc).isoformat()}
    _atomic_write(path, json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _load(args):
    """Resolve the family and knobs for a subcommand."""
    if args.family and args.config:
        raise UsageError("give either --family or --config, not both")
    run = {}
    if args.config:
        try:
            config = json.loads(args.config.read_text())
        except OSError as exc:
            raise IFSError(f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise IFSError(f"{args.config}: invalid JSON ({exc})") from None
        run = config.pop("run", {}) or {}
        unknown = set(run) - set(DEFAULTS) - {"rho"}
        if unknown:
            raise UsageError(f"unknown keys in run section: {sorted(unknown)}")
        family = family_from_dict(config, name=config.get("name", args.config.stem))
    else:
        family = None
    knobs = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        knobs[key] = flag if flag is not None else run.get(key, default)
    knobs["rho"] = args.rho if args.rho is not None else run.get("rho")
    given_N = args.N is not None or "N" in run
    if family is None:
        name = args.family or ("DYADIC" if args.command != "verify" else None)
        if name is None:
            return None, knobs
        family = builtin(name, truncation=knobs["N"])
    elif given_N and knobs["N"] > family.truncation:
        family = family.with_truncation(knobs["N"])
    # a config's own truncation is its N unless overridden; finite families cap N
    knobs["N"] = min(knobs["N"], family.truncation) if given_N or args.config is None else family.truncation
    return family, knobs


def _sequence(family, knobs) -> ProbabilitySequence:
    if knobs["rho"]:
        try:
            return ProbabilitySequence.parse(str(knobs["rho"]))
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, IFSError):
                raise
            raise UsageError(f"cannot parse --rho {knobs['rho']!r}: {exc}") from None
    if family.finite:
        return ProbabilitySequence.uniform(family.alphabet_size(knobs["N"]))
    return ProbabilitySequence.geometric(Fraction(1, 2))


def _bbox(points: np.ndarray):
    return [points.min(axis=0).tolist(), points.max(axis=0).tolist()]


# subcommands


def cmd_fixed_points(args) -> int:
    family, knobs = _load(args)
    N, k = knobs["N"], knobs["k"]
    D = fixed_point_set(family, N)
    P = enumerate_P(family, N, k, budget=knobs["budget"], details=True)
    out = args.out
    _write_points(out / "D.csv", D.points)
    _write_points(out / "P.csv", P.cloud.points)
    sr = sup_ratio(family, N)
    report = {
        "command": "fixed-points",
        "family": family.to_dict(),
        "N": N,
        "k": k,
        "D": {"points": len(D), "maps": family.alphabet_size(N), "bounding_box": _bbox(D.points)},
        "P": {
            "points": len(P.cloud),
            "words": P.words,
            "duplicates_removed": P.raw_points - len(P.cloud),
            "bounding_box": _bbox(P.cloud.points),
            "resolution": P.resolution,
        },
        "sup_ratio": {"empirical": float(sr.empirical), "declared": sr.declared,
                      "truncation_warning": sr.truncation_warning},
    }
    _write_report(out / "fixed_points.json", report, args)
    print(f"D: {len(D)} points, P: {len(P.cloud)} points (k={k}) -> {out}")
    return 0


def cmd_attractor(args) -> int:
    family, knobs = _load(args)
    N = knobs["N"]
    declared = family.declared_sup_ratio
    if declared is not None and declared >= 1 - RATIO_REFUSAL_MARGIN and not args.force_truncate:
        raise PreconditionError(
            f"declared sup ratio of {family.name} is {declared}; no convergence guarantee "
            "(use --force-truncate to iterate the truncated family)"
        )
    res = attractor_approx(family, N, tol=knobs["tol"], max_iters=knobs["max_iters"])
    try:
        inv = check_invariance(res.cloud, family, N).as_dict()
    except BudgetError as exc:
        inv = {"skipped": str(exc)}
    _write_points(args.out / "attractor.csv", res.cloud.points)
    report = {
        "command": "attractor",
        "family": family.to_dict(),
        "N": N,
        "tol": knobs["tol"],
        "forced_truncation": bool(args.force_truncate),
        **res.summary(),
        "invariance": inv,
    }
    _write_report(args.out / "attractor.json", report, args)
    state = "converged" if res.converged else f"not converged ({res.reason})"
    print(f"{state} after {res.iterations} iterations, delta={res.last_delta:.3g}, {len(res.cloud)} points")
    return 0


def cmd_chaos(args) -> int:
    family, knobs = _load(args)
    N, h = knobs["N"], knobs["cell"]
    seq = _sequence(family, knobs)
    measure = chaos_game(family, N, seq, knobs["samples"], burn_in=knobs["burn_in"], rng_seed=knobs["seed"])
    resid = markov_residual(measure, family, N, seq, h=h)
    support = support_estimate(measure, h)
    _write_points(args.out / "samples.csv", measure.samples)
    report = {
        "command": "chaos",
        "family": family.to_dict(),
        "N": N,
        "rho": seq.describe(),
        "seed": knobs["seed"],
        "burn_in": knobs["burn_in"],
        **resid.as_dict(),
        "truncation_resamples": measure.meta["truncation_resamples"],
        "empirical_sup_ratio": measure.meta["empirical_sup_ratio"],
        "support": {"h": h, "cells": len(support), "bounding_box": _bbox(support.points)},
    }
    if args.compare_P:
        P = enumerate_P(family, N, args.compare_P, budget=knobs["budget"])
        to_P = directed_hausdorff(support, P)
        from_P = directed_hausdorff(P, support)
        report["compare_P"] = {
            "k": args.compare_P,
            "P_points": len(P),
            "hausdorff": max(to_P, from_P),
            "support_to_P": to_P,
            "P_to_support": from_P,
            "resolution": P.resolution,
            "bound": 2 * h + P.resolution,
        }
    _write_report(args.out / "chaos.json", report, args)
    print(f"n={measure.n} residual={resid.residual:.3g} ({resid.method}), support cells={len(support)}")
    return 0


def cmd_verify(args) -> int:
    if args.all and args.claim:
        raise UsageError("give either --all or --claim, not both")
    if not args.all and not args.claim:
        raise UsageError("choose claims with --claim NAME or run them all with --all")
    family, knobs = _load(args)
    opts = VerifyOptions(
        family=family,
        imax=args.imax,
        samples=knobs["samples"],
        burn_in=knobs["burn_in"],
        seed=knobs["seed"],
        cell=knobs["cell"],
    )
    names = list(CLAIMS) if args.all else args.claim
    t0 = time.perf_counter()
    results = []
    for name in names:
        r = run_claim(name, opts)
        results.append(r)
        print(f"{r.status.upper():15s} {name} ({r.seconds:.2f}s)", flush=True)
    ok = all(r.ok for r in results)
    report = {
        "command": "verify",
        "all_passed": ok,
        "claims": [r.as_dict() for r in results],
        "seconds": round(time.perf_counter() - t0, 3),
    }
    _write_report(args.out / "verify.json", report, args)
    return 0 if ok else EXIT_FAIL


COMMANDS = {
    "fixed-points": cmd_fixed_points,
    "attractor": cmd_attractor,
    "chaos": cmd_chaos,
    "verify": cmd_verify,
}


def _fail(code: str, message: str, status: int) -> int:
    print(f"{code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.show_defaults:
            print(json.dumps(DEFAULTS, indent=2, sort_keys=True))
            return 0
        if args.command is None:
            raise UsageError("a subcommand is required: " + " | ".join(COMMANDS))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(UsageError.code, exc, EXIT_USAGE)
    except IFSError as exc:
        return _fail(exc.code, exc, EXIT_ERROR)
    except OSError as exc:
        return _fail("E_IO", f"{exc.filename or ''} {exc.strerror or exc}", EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
