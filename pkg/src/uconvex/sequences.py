"""Separated sequences: seeds, certificates, extraction and construction.

The two theorem-backed procedures both turn an abstract compactness proof
into a finite certified computation:

* ``theorem1_extract`` clusters functional values of a separated sequence
  and certifies ``||x - (v_i - v_j)|| >= 1 + delta(2*eps/3)`` for every
  pair in the cluster;
* ``theorem3_construct`` runs the Ramsey dichotomy on a 1-separated seed
  and, in the low branch, greedily normalizes differences to produce a
  ``(1 + delta(2/3)/2)``-separated sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import isqrt
from pathlib import Path

import numpy as np

from .errors import (CapacityError, CertificateError, InsufficientClusterError,
                     PreconditionError)
from .modulus import lp_delta
from .search import EvalBudget, maximize_min_distance
from .spaces import (Functional, SpaceSpec, as_vector, batch_norm, norm,
                     norming_functional, unit_batch)

# Arithmetic slack on exact theorem inequalities.
SLACK = 1e-9


@dataclass(frozen=True)
class SeparationCertificate:
    """Minimum pairwise distance of a vector family versus a threshold.

    ``min_pairwise`` is recomputed from scratch at certification time; for
    fewer than two vectors it is +inf and the certificate is vacuous.
    """

    indices: tuple[int, ...]
    min_pairwise: float
    threshold: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "min_pairwise": None if math.isinf(self.min_pairwise)
            else self.min_pairwise,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass(frozen=True, eq=False)
class BaselineResult:
    """Baseline window clustering: indices plus the certified pair value."""

    selected: tuple[int, ...]
    window: tuple[float, float]
    pair_min: float
    guaranteed: float  # 1 - tau

    def to_json_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "window": list(self.window),
            "pair_min": self.pair_min,
            "guaranteed": self.guaranteed,
        }


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Certified output of the theorem-1 extraction."""

    functional: Functional
    window: tuple[float, float]
    selected: tuple[int, ...]
    pair_min: float
    guaranteed: float  # 1 + delta(2*eps/3)
    delta_eps: float

    def to_json_dict(self) -> dict:
        return {
            "functional": [float(c) for c in self.functional.coords],
            "window": list(self.window),
            "selected": list(self.selected),
            "pair_min": self.pair_min,
            "guaranteed": self.guaranteed,
            "delta_eps": self.delta_eps,
        }


@dataclass(frozen=True)
class TraceStep:
    """One evaluated candidate pair in the greedy construction."""

    candidate_index: int          # position in the pair enumeration
    pair: tuple[int, int]
    y_norm: float
    min_dist_to_prior: float | None
    accepted: bool


@dataclass(frozen=True, eq=False)
class ConstructionTrace:
    """Full record of a theorem-3 run."""

    seed_description: str
    delta1: float
    branch: str                   # "low" | "high"
    steps: tuple[TraceStep, ...]
    output: tuple[np.ndarray, ...]
    final_certificate: SeparationCertificate
    status: str                   # "completed" | "exhausted"

    def to_json_dict(self) -> dict:
        return {
            "seed_description": self.seed_description,
            "delta1": self.delta1,
            "branch": self.branch,
            "status": self.status,
            "steps": [{
                "candidate_index": s.candidate_index,
                "pair": list(s.pair),
                "y_norm": s.y_norm,
                "min_dist_to_prior": s.min_dist_to_prior,
                "accepted": s.accepted,
            } for s in self.steps],
            "output": [[float(c) for c in v] for v in self.output],
            "final_certificate": self.final_certificate.to_json_dict(),
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2,
                                         sort_keys=True) + "\n")


def separation(space: SpaceSpec, seq) -> float:
    """Exact minimum pairwise distance over the sequence, full O(n^2) scan."""
    arr = np.asarray([as_vector(space, v) for v in seq], dtype=float)
    if len(arr) < 2:
        raise PreconditionError("separation needs at least 2 vectors")
    best = math.inf
    for i in range(len(arr) - 1):
        best = min(best, float(batch_norm(space, arr[i + 1:] - arr[i]).min()))
    return best


def certify(space: SpaceSpec, seq, threshold: float,
            indices=None) -> SeparationCertificate:
    """Recompute a separation certificate from scratch."""
    if indices is None:
        indices = tuple(range(len(seq)))
    vecs = [seq[i] for i in indices]
    min_pairwise = separation(space, vecs) if len(vecs) >= 2 else math.inf
    return SeparationCertificate(
        indices=tuple(int(i) for i in indices),
        min_pairwise=min_pairwise,
        threshold=float(threshold),
        passed=min_pairwise >= threshold,
    )


def unit_basis_seed(space: SpaceSpec, n: int) -> list[np.ndarray]:
    """First ``n`` standard basis vectors; pairwise distances 2^(1/p)."""
    if not 1 <= n <= space.d:
        raise CapacityError(f"basis seed needs 1 <= n <= d={space.d}, got {n}")
    return [np.eye(space.d)[i].copy() for i in range(n)]


def shifted_basis_seed(space: SpaceSpec, n: int) -> list[np.ndarray]:
    """Unit vectors ``(e_0 + e_k) / 2^(1/p)``, k = 1..n.

    Pairwise distances are exactly ``||e_i - e_j|| / 2^(1/p) = 1`` for every
    exponent, which lands the whole seed in the low Ramsey branch.
    """
    if not 1 <= n <= space.d - 1:
        raise CapacityError(
            f"shifted seed needs 1 <= n <= d-1={space.d - 1}, got {n}")
    scale = 2.0 ** (1.0 / space.p)
    out = []
    for k in range(1, n + 1):
        v = np.zeros(space.d)
        v[0] = 1.0 / scale
        v[k] = 1.0 / scale
        out.append(v)
    return out


def riesz_seed(space: SpaceSpec, n: int, eta: float, budget: int,
               rng_seed) -> tuple[list[np.ndarray], SeparationCertificate]:
    """Greedy (1 - eta)-separated unit vectors by maximin distance search.

    Each new vector maximizes the minimum distance to all previous ones
    (random multistart plus the shared pattern refinement); construction
    stops early once the optimizer cannot reach ``1 - eta``.  Short output
    is signaled by the certificate length, never an error.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    rng = np.random.default_rng(rng_seed)
    vectors = [unit_batch(space, rng, 1)[0]]
    share = max(1, budget // max(1, n - 1))
    for _ in range(n - 1):
        cand, min_dist = maximize_min_distance(space, vectors, rng,
                                               EvalBudget(share))
        if min_dist < 1.0 - eta:
            break
        vectors.append(cand)
    return vectors, certify(space, vectors, threshold=1.0 - eta)


def baseline_extract(space: SpaceSpec, seq, x, tau: float) -> BaselineResult:
    """Window clustering under the norming functional of ``x``.

    Selects a maximal set of indices whose functional values fit in a
    window of width ``tau``; every selected ordered pair then satisfies
    ``||x - (v_i - v_j)|| >= 1 - tau`` because the pair value dominates its
    pairing with the unit functional.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    x = _require_unit(space, x)
    vecs = np.asarray([as_vector(space, v) for v in seq], dtype=float)
    f = norming_functional(space, x)
    values = vecs @ f.coords
    selected, window = _largest_cluster(values, tau)
    pair_min = _pair_min(space, vecs, selected, x)
    if pair_min < 1.0 - tau - SLACK:
        raise CertificateError(
            f"baseline certificate {pair_min:.17g} below 1 - tau")
    return BaselineResult(selected=selected, window=window,
                          pair_min=pair_min, guaranteed=1.0 - tau)


def theorem1_extract(space: SpaceSpec, seq, x, eps: float,
                     kappa: float = 0.5) -> ExtractionResult:
    """Certified extraction: all pair values at least ``1 + delta(2*eps/3)``.

    The input sequence must be eps-separated (verified).  Indices whose
    functional values lie in a window of width ``kappa * delta_eps`` are
    selected; for any two of them the vector ``xi = x - (v_i - v_j)`` pairs
    with the norming functional to more than ``1 - delta_eps``, and
    eps-separation then forces ``||xi|| >= 1 + delta_eps`` -- that bound is
    asserted pair by pair, not assumed.
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    x = _require_unit(space, x)
    vecs = np.asarray([as_vector(space, v) for v in seq], dtype=float)
    sep = separation(space, vecs)
    if sep < eps - SLACK:
        raise PreconditionError(
            f"sequence separation {sep:.17g} is below eps={eps:.17g}")

    delta_eps = lp_delta(space.p, 2.0 * eps / 3.0)
    width = kappa * delta_eps
    f = norming_functional(space, x)
    values = vecs @ f.coords
    selected, window = _largest_cluster(values, width)

    # intermediate invariant: every pair's xi pairs above 1 - width
    for i in selected:
        for j in selected:
            if i == j:
                continue
            pairing = 1.0 - (values[i] - values[j])
            if pairing <= 1.0 - width - SLACK:
                raise CertificateError(
                    f"window pairing {pairing:.17g} at ({i},{j}) "
                    f"below 1 - width")

    guaranteed = 1.0 + delta_eps
    pair_min = _pair_min(space, vecs, selected, x)
    if pair_min < guaranteed - SLACK:
        raise CertificateError(
            f"pair value {pair_min:.17g} violates the bound "
            f"{guaranteed:.17g}; release-blocking defect")
    return ExtractionResult(functional=f, window=window, selected=selected,
                            pair_min=pair_min, guaranteed=guaranteed,
                            delta_eps=delta_eps)


def ramsey_extract(values, split: float) -> tuple[list[int], str]:
    """Greedy-pivot monochromatic subset of a symmetric distance matrix.

    Entries at most ``split`` are colored low, the rest high (ties at the
    split go low, matching the closed interval).  Each pivot keeps its
    majority color class; the majority-color pivots plus the final
    unpaired pivot form the output, whose pairwise entries all lie on one
    side of the split.  Output size is at least ``ceil(log2 n) / 2``
    rounded down.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise PreconditionError("ramsey_extract needs at least 2 indices")
    if values.shape != (n, n) or not np.array_equal(values, values.T):
        raise PreconditionError("distance matrix must be square and symmetric")
    if np.any(np.diag(values) != 0.0):
        raise PreconditionError("distance matrix must have zero diagonal")

    remaining = list(range(n))
    colored: list[tuple[int, str]] = []
    last = None
    while remaining:
        pivot, rest = remaining[0], remaining[1:]
        if not rest:
            last = pivot
            break
        low = [i for i in rest if values[pivot, i] <= split]
        high = [i for i in rest if values[pivot, i] > split]
        if len(low) >= len(high):
            colored.append((pivot, "low"))
            remaining = low
        else:
            colored.append((pivot, "high"))
            remaining = high

    n_low = sum(1 for _, c in colored if c == "low")
    branch = "low" if n_low >= len(colored) - n_low else "high"
    selected = [i for i, c in colored if c == branch]
    if last is not None:
        selected.append(last)
    return sorted(selected), branch


def pair_enumeration(n: int) -> tuple[int, int]:
    """Diagonal-sweep bijection onto ordered off-diagonal pairs.

    Order: (0,1),(1,0),(0,2),(2,0),(1,2),(2,1),(0,3),...  Position ``n``
    lands in block ``s`` (all pairs whose larger index is ``s``), which
    starts at position ``s*(s-1)``.
    """
    if n < 0:
        raise ValueError(f"enumeration position must be >= 0, got {n}")
    s = (1 + isqrt(1 + 4 * n)) // 2
    while s * (s - 1) > n:
        s -= 1
    while s * (s + 1) <= n:
        s += 1
    r = n - s * (s - 1)
    t = r // 2
    return (t, s) if r % 2 == 0 else (s, t)


def theorem3_construct(space: SpaceSpec, seed, max_len: int,
                       seed_description: str = "") -> ConstructionTrace:
    """Ramsey dichotomy plus greedy normalized differences.

    The seed must be 1-separated.  If the extracted monochromatic class
    sits in the high branch the seed subsequence itself is the output.  In
    the low branch, candidate differences ``y = xi_a - xi_b`` are
    enumerated by :func:`pair_enumeration`, skipping pairs touching indices
    already consumed by an accepted candidate; a candidate is accepted when
    it keeps distance ``1 + delta1`` to all prior outputs, and its
    normalization is certified to stay ``1 + delta1/2``-separated.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    seed = [as_vector(space, v) for v in seed]
    sep = separation(space, seed)
    if sep < 1.0 - SLACK:
        raise PreconditionError(
            f"seed separation {sep:.17g} is below 1")
    if not seed_description:
        seed_description = f"{len(seed)} seed vectors in {space}"

    delta1 = lp_delta(space.p, 2.0 / 3.0)
    split = 1.0 + 0.5 * delta1

    arr = np.asarray(seed)
    dist = np.zeros((len(seed), len(seed)))
    for i in range(len(seed)):
        dist[i] = batch_norm(space, arr - arr[i])
        dist[i, i] = 0.0
    dist = 0.5 * (dist + dist.T)  # symmetrize roundoff

    extracted, branch = ramsey_extract(dist, split)
    xi = [seed[i] for i in extracted]

    if branch == "high":
        output = tuple(xi[:max_len])
        cert = certify(space, output, threshold=split)
        if not cert.passed:
            raise CertificateError(
                "high-branch subsequence failed its own certificate")
        return ConstructionTrace(
            seed_description=seed_description, delta1=delta1, branch="high",
            steps=(), output=output, final_certificate=cert,
            status="completed")

    k = len(xi)
    consumed: set[int] = set()
    outputs: list[np.ndarray] = []
    steps: list[TraceStep] = []
    status = "exhausted"
    for pos in range(k * (k - 1)):
        a, b = pair_enumeration(pos)
        if a in consumed or b in consumed:
            continue
        y = xi[a] - xi[b]
        y_norm = norm(space, y)
        if outputs:
            dists = batch_norm(space, np.asarray(outputs) - y)
            min_dist = float(dists.min())
            accepted = bool(min_dist >= 1.0 + delta1)
        else:
            min_dist = None
            accepted = True
        steps.append(TraceStep(candidate_index=pos, pair=(a, b),
                               y_norm=y_norm, min_dist_to_prior=min_dist,
                               accepted=accepted))
        if not accepted:
            continue
        if not (1.0 - SLACK <= y_norm <= split + SLACK):
            raise CertificateError(
                f"accepted candidate norm {y_norm:.17g} outside the "
                f"low-branch window [1, {split:.17g}]")
        x_m = y / y_norm
        for xj in outputs:
            if norm(space, xj - x_m) < split - SLACK:
                raise CertificateError(
                    "normalization estimate violated: distance "
                    f"{norm(space, xj - x_m):.17g} below {split:.17g}")
        consumed.update((a, b))
        outputs.append(x_m)
        if len(outputs) >= max_len:
            status = "completed"
            break

    cert = certify(space, outputs, threshold=split)
    if len(outputs) >= 2 and not cert.passed:
        raise CertificateError("final certificate failed after construction")
    return ConstructionTrace(
        seed_description=seed_description, delta1=delta1, branch="low",
        steps=tuple(steps), output=tuple(outputs), final_certificate=cert,
        status=status)


def vectors_to_csv(path, vectors) -> None:
    """One vector per row, coordinates at 17 significant digits."""
    lines = [",".join(f"{float(c):.17g}" for c in v) for v in vectors]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def _require_unit(space: SpaceSpec, x) -> np.ndarray:
    x = as_vector(space, x)
    if abs(norm(space, x) - 1.0) > SLACK:
        raise PreconditionError(f"x must be a unit vector, norm {norm(space, x)!r}")
    return x


def _largest_cluster(values: np.ndarray,
                     width: float) -> tuple[tuple[int, ...], tuple[float, float]]:
    """Largest index set whose values fit in a closed window of ``width``.

    Ties break to the leftmost window in sorted order, then to smallest
    indices (stable sort).  Raises ``InsufficientClusterError`` with
    pigeonhole diagnostics when no window holds two points.
    """
    order = np.argsort(values, kind="stable")
    svals = values[order]
    n = len(svals)
    best_size, best_lo = 0, 0
    j = 0
    for i in range(n):
        j = max(j, i)
        while j < n and svals[j] - svals[i] <= width:
            j += 1
        if j - i > best_size:
            best_size, best_lo = j - i, i
    if best_size < 2:
        value_range = float(svals[-1] - svals[0]) if n else 0.0
        window_count = int(math.ceil(2.0 * value_range / width)) if width > 0 else 0
        raise InsufficientClusterError(
            f"no window of width {width:.17g} holds 2 of {n} values",
            best_window=(float(svals[best_lo]), float(svals[best_lo]) + width)
            if n else None,
            best_count=best_size,
            value_range=value_range,
            window_count=window_count,
            min_n=window_count + 1,
        )
    lo = float(svals[best_lo])
    members = order[best_lo:best_lo + best_size]
    return tuple(sorted(int(i) for i in members)), (lo, lo + width)


def _pair_min(space: SpaceSpec, vecs: np.ndarray, selected, x) -> float:
    """min over ordered pairs i != j of ``||x - (v_i - v_j)||``."""
    sel = list(selected)
    best = math.inf
    sub = vecs[sel]
    for i in range(len(sel)):
        xi = x - (sub[i] - sub)          # rows: x - (v_i - v_j)
        norms = batch_norm(space, xi)
        norms[i] = math.inf
        best = min(best, float(norms.min()))
    return best
