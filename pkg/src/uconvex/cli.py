"""Command-line front end: grid runs, deterministic seeding, file emission.

Subcommands map one-to-one onto the library: ``modulus`` (curves),
``construct`` (theorem-3 traces), ``extract`` (theorem-1 / baseline
clusters), ``verify`` (adversarial statement checks).  Identical flags and
seed produce byte-identical output files; nothing time- or host-dependent
is ever written.

Exit codes: 0 success, 1 verification/certificate failure, 2 configuration
error, 3 data-dependent non-failure (insufficient cluster, exhausted
construction).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import modulus, sequences, verify
from .errors import (CapacityError, CertificateError, InsufficientClusterError,
                     PreconditionError, UconvexError)
from .spaces import SpaceSpec

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3

DEFAULT_GRID_P = "1.5,2,3"
DEFAULT_GRID_D = "2,8"
DEFAULT_GRID_EPS = "0.5,1,1.9"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        return ns.func(ns)
    except (ValueError, CapacityError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientClusterError as exc:
        print(f"insufficient cluster: {exc}", file=sys.stderr)
        print(f"  best window: {exc.best_window}  members: {exc.best_count}",
              file=sys.stderr)
        print(f"  value range: {exc.value_range}  windows: {exc.window_count}"
              f"  minimum N for guaranteed success: {exc.min_n}",
              file=sys.stderr)
        return EXIT_DATA
    except CertificateError as exc:
        print(f"certificate failure (release-blocking): {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except UconvexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def parse_values(text: str) -> list[float]:
    """`start:stop:count` (inclusive) or comma-separated values."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"grid count must be >= 1, got {count}")
        if count == 1:
            return [start]
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _resolve_seed(ns) -> int:
    if ns.seed is not None:
        return ns.seed
    env = os.environ.get("UCONVEX_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"UCONVEX_SEED must be an integer, got {env!r}")
    return 0


def _check_parallelism(ns) -> None:
    if getattr(ns, "parallelism", 1) < 1:
        raise ValueError("--parallelism must be >= 1")


# ----------------------------- modulus -----------------------------

def _cmd_modulus(ns) -> int:
    _check_parallelism(ns)
    eps_values = parse_values(ns.eps)
    for e in eps_values:
        if not 0.0 < e <= 2.0:
            raise ValueError(f"eps values must lie in (0, 2], got {e}")
    if ns.method == "empirical" and ns.d is None:
        raise ValueError("empirical method needs --d")
    curve = modulus.build_curve(
        ns.p, eps_values, ns.method, d=ns.d,
        budget=ns.budget, rng_seed=_resolve_seed(ns))
    if ns.out:
        if ns.format == "csv":
            curve.to_csv(ns.out)
        else:
            curve.to_json(ns.out)
        print(f"wrote {len(curve.points)} points to {ns.out}")
    else:
        if ns.format == "csv":
            for pt in curve.points:
                print(f"{pt.eps:.17g},{pt.delta:.17g},{pt.method}")
        else:
            print(json.dumps(curve.to_json_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# ----------------------------- construct -----------------------------

def _make_seed(ns, space: SpaceSpec, rng_seed: int):
    if ns.seed_kind == "basis":
        n = ns.n if ns.n is not None else space.d
        return sequences.unit_basis_seed(space, n), f"basis n={n} in {space}"
    if ns.seed_kind == "shifted-basis":
        n = ns.n if ns.n is not None else space.d - 1
        return (sequences.shifted_basis_seed(space, n),
                f"shifted-basis n={n} in {space}")
    n = ns.n if ns.n is not None else space.d
    vectors, cert = sequences.riesz_seed(space, n, ns.eta, ns.budget, rng_seed)
    if not cert.passed:
        raise PreconditionError(
            f"riesz seed reached only {len(vectors)} vectors at separation "
            f"{cert.min_pairwise:.17g}")
    return vectors, f"riesz n={len(vectors)} eta={ns.eta:g} in {space}"


def _cmd_construct(ns) -> int:
    _check_parallelism(ns)
    space = SpaceSpec(p=ns.p, d=ns.d)
    seed_vectors, description = _make_seed(ns, space, _resolve_seed(ns))
    max_len = ns.max_len if ns.max_len is not None else len(seed_vectors)
    trace = sequences.theorem3_construct(space, seed_vectors, max_len,
                                         seed_description=description)
    target = 1.0 + 0.5 * trace.delta1
    cert = trace.final_certificate
    print(f"branch={trace.branch} status={trace.status} "
          f"output={len(trace.output)}")
    print(f"separation constant: {cert.min_pairwise:.17g}")
    print(f"target 1 + delta(2/3)/2: {target:.17g}")
    if ns.out:
        trace.to_json(ns.out)
        print(f"wrote trace to {ns.out}")
    if ns.vectors_out:
        sequences.vectors_to_csv(ns.vectors_out, trace.output)
        print(f"wrote vectors to {ns.vectors_out}")
    if not cert.passed:
        print("certificate FAILED", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_DATA if trace.status == "exhausted" else EXIT_OK


# ----------------------------- extract -----------------------------

def _make_sequence(ns, space: SpaceSpec):
    if ns.seq_kind == "csv":
        if not ns.seq_file:
            raise ValueError("--seq-kind csv needs --seq-file")
        rows = [line for line in
                Path(ns.seq_file).read_text().splitlines() if line.strip()]
        return [np.array([float(t) for t in row.split(",")]) for row in rows]
    n = ns.n if ns.n is not None else space.d
    if ns.seq_kind == "basis":
        return sequences.unit_basis_seed(space, n)
    if ns.seq_kind == "shifted-basis":
        return sequences.shifted_basis_seed(space, n)
    # constant: n copies of the first basis vector
    e0 = sequences.unit_basis_seed(space, 1)[0]
    return [e0.copy() for _ in range(n)]


def _cmd_extract(ns) -> int:
    _check_parallelism(ns)
    space = SpaceSpec(p=ns.p, d=ns.d)
    seq = _make_sequence(ns, space)
    x = sequences.unit_basis_seed(space, 1)[0]
    if ns.mode == "baseline":
        result = sequences.baseline_extract(space, seq, x, ns.tau)
        print(f"selected {len(result.selected)} indices, "
              f"pair_min={result.pair_min:.17g} >= {result.guaranteed:.17g}")
    else:
        eps = ns.eps if ns.eps is not None else sequences.separation(space, seq)
        result = sequences.theorem1_extract(space, seq, x, eps, kappa=ns.kappa)
        print(f"selected {len(result.selected)} indices, "
              f"pair_min={result.pair_min:.17g} >= {result.guaranteed:.17g}")
    if ns.out:
        Path(ns.out).write_text(
            json.dumps(result.to_json_dict(), indent=2, sort_keys=True) + "\n")
        print(f"wrote result to {ns.out}")
    return EXIT_OK


# ----------------------------- verify -----------------------------

def _cmd_verify(ns) -> int:
    _check_parallelism(ns)
    if ns.statement == "modulus-props":
        if not ns.curve_file:
            raise ValueError("--statement modulus-props needs --curve-file")
        path = Path(ns.curve_file)
        curve = (modulus.ModulusCurve.from_json(path)
                 if path.suffix == ".json" else
                 modulus.ModulusCurve.from_csv(path))
        reports = [verify.check_modulus_properties(curve)]
    else:
        if ns.trials < 1:
            raise ValueError(f"--trials must be >= 1, got {ns.trials}")
        ps = parse_values(ns.p)
        ds = [int(v) for v in parse_values(ns.d)]
        eps_values = parse_values(ns.eps)
        statements = (["lemma23", "thm2_condition3", "remark45"]
                      if ns.statement == "all"
                      else [ns.statement.replace("-", "_")])
        cells = len(ps) * len(ds) * len(eps_values)
        reports = []
        for statement in statements:
            reports.extend(verify.run_grid(
                statement, ps, ds, eps_values, ns.trials * cells,
                _resolve_seed(ns), k=ns.k))
    for rep in reports:
        print(verify.summary_line(rep))
    if ns.out:
        verify.reports_to_json(ns.out, reports)
        print(f"wrote reports to {ns.out}")
    if any(rep.violations for rep in reports):
        return EXIT_FAILURE
    return EXIT_OK


# ----------------------------- parser -----------------------------

def _add_common(sub, *, seed=True):
    sub.add_argument("--parallelism", type=int, default=1,
                     help="execution hint; results never depend on it")
    if seed:
        sub.add_argument("--seed", type=int, default=None,
                         help="rng seed (fallback: UCONVEX_SEED, then 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uconvex",
        description="Moduli of convexity, separated sequences and "
                    "uniform Kadec-Klee checks in finite-dimensional "
                    "l^p spaces.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    m = sub.add_parser("modulus", help="emit a modulus-of-convexity curve")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--d", type=int, default=None,
                   help="dimension (empirical method only)")
    m.add_argument("--method", choices=modulus.METHODS, required=True)
    m.add_argument("--eps", required=True,
                   help="grid start:stop:count or comma-separated values")
    m.add_argument("--budget", type=int, default=100000)
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--out", default=None)
    _add_common(m)
    m.set_defaults(func=_cmd_modulus)

    c = sub.add_parser("construct", help="run the greedy separated-sequence "
                                         "construction")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--seed-kind", choices=("basis", "shifted-basis", "riesz"),
                   default="shifted-basis")
    c.add_argument("--n", type=int, default=None, help="seed length")
    c.add_argument("--eta", type=float, default=0.01,
                   help="riesz seed separation slack")
    c.add_argument("--budget", type=int, default=20000)
    c.add_argument("--max-len", type=int, default=None)
    c.add_argument("--out", default=None, help="trace JSON path")
    c.add_argument("--vectors-out", default=None, help="output vectors CSV")
    _add_common(c)
    c.set_defaults(func=_cmd_construct)

    e = sub.add_parser("extract", help="extract a certified cluster from a "
                                       "separated sequence")
    e.add_argument("--mode", choices=("theorem1", "baseline"),
                   default="theorem1")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--seq-kind",
                   choices=("basis", "shifted-basis", "constant", "csv"),
                   default="basis")
    e.add_argument("--n", type=int, default=None, help="sequence length")
    e.add_argument("--seq-file", default=None, help="CSV, one vector per row")
    e.add_argument("--eps", type=float, default=None,
                   help="claimed separation (default: measured)")
    e.add_argument("--kappa", type=float, default=0.5,
                   help="window width as a fraction of delta")
    e.add_argument("--tau", type=float, default=0.01,
                   help="baseline window width")
    e.add_argument("--out", default=None)
    _add_common(e, seed=False)
    e.set_defaults(func=_cmd_extract)

    v = sub.add_parser("verify", help="adversarial verification of the "
                                      "eps-delta statements")
    v.add_argument("--statement",
                   choices=("lemma23", "thm2-condition3", "remark45",
                            "modulus-props", "all"),
                   default="all")
    v.add_argument("--p", default=DEFAULT_GRID_P,
                   help="comma-separated exponents")
    v.add_argument("--d", default=DEFAULT_GRID_D,
                   help="comma-separated dimensions")
    v.add_argument("--eps", default=DEFAULT_GRID_EPS,
                   help="comma-separated eps values")
    v.add_argument("--trials", type=int, default=2000,
                   help="kept-trial quota per grid cell")
    v.add_argument("--k", type=int, default=4, help="contraction rank")
    v.add_argument("--curve-file", default=None,
                   help="curve to check (modulus-props)")
    v.add_argument("--out", default=None, help="reports JSON path")
    _add_common(v)
    v.set_defaults(func=_cmd_verify)

    return parser


if __name__ == "__main__":
    raise SystemExit(main())
