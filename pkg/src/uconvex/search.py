"""Constrained random search on unit spheres.

Shared machinery for the empirical modulus estimator and the greedy seed
builder: batch sampling of feasible pairs and a feasibility-preserving
pattern refinement (coordinate-wise perturbation with shrinking step,
re-projection to the sphere, infeasible moves discarded).
"""

from __future__ import annotations

import numpy as np

from .spaces import SpaceSpec, batch_norm, normalize, unit_batch

REFINE_ROUNDS = 30
SHRINK = 0.5
INIT_STEP = 0.25


class EvalBudget:
    """Counts candidate evaluations against a cap."""

    def __init__(self, cap: int):
        self.cap = int(cap)
        self.used = 0

    def take(self, n: int = 1) -> bool:
        """Consume ``n`` evaluations; False once the cap is exhausted."""
        if self.used >= self.cap:
            return False
        self.used += n
        return True

    @property
    def exhausted(self) -> bool:
        return self.used >= self.cap


def refine(x0: np.ndarray, objective, project, feasible, budget: EvalBudget,
           *, rounds: int = REFINE_ROUNDS, step0: float = INIT_STEP,
           shrink: float = SHRINK, max_sweeps: int = 200):
    """Pattern-search minimization over a projected parameter vector.

    Perturbs one coordinate at a time by +-step, re-projects via
    ``project``, discards moves that fail ``feasible`` or do not strictly
    decrease ``objective``; the step shrinks by ``shrink`` once a sweep
    makes no progress, for ``rounds`` step levels.

    Returns ``(best_params, best_value)``.
    """
    x = project(np.asarray(x0, dtype=float))
    best = objective(x)
    n = x.size
    step = step0
    for _ in range(rounds):
        for _ in range(max_sweeps):
            improved = False
            for i in range(n):
                for sign in (1.0, -1.0):
                    if not budget.take():
                        return x, best
                    cand = x.copy()
                    cand[i] += sign * step
                    cand = project(cand)
                    if not feasible(cand):
                        continue
                    val = objective(cand)
                    if val < best:
                        x, best = cand, val
                        improved = True
            if not improved:
                break
        step *= shrink
        if budget.exhausted:
            break
    return x, best


def sample_feasible_pairs(space: SpaceSpec, eps: float,
                          rng: np.random.Generator, count: int,
                          *, max_resample_rounds: int = 8):
    """Sample ``count`` unit-vector pairs with ``||x - y|| >= eps``.

    Pairs are drawn independently on the sphere; infeasible ``y`` rows are
    re-sampled.  If rejection leaves more than 99% of rows infeasible the
    remaining rows fall back to interpolating ``y`` toward ``-x`` until the
    separation constraint holds (a boundary pair).

    Returns ``(X, Y)`` arrays of shape (count, d).
    """
    X = unit_batch(space, rng, count)
    Y = unit_batch(space, rng, count)
    bad = batch_norm(space, X - Y) < eps
    rounds = 0
    while np.any(bad) and rounds < max_resample_rounds:
        if bad.mean() > 0.99:
            break
        Y[bad] = unit_batch(space, rng, int(bad.sum()))
        bad = batch_norm(space, X - Y) < eps
        rounds += 1
    if np.any(bad):
        Y[bad] = _interpolate_to_boundary(space, eps, X[bad], Y[bad])
    return X, Y


def _interpolate_to_boundary(space: SpaceSpec, eps: float,
                             X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Move each y along the sphere toward -x until ``||x - y|| >= eps``.

    Bisection on the interpolation parameter; t = 1 (the antipode) is
    always feasible since ``||x - (-x)|| = 2 >= eps``.
    """
    lo = np.zeros(len(X))
    hi = np.ones(len(X))
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        cand = (1.0 - mid)[:, None] * Y - mid[:, None] * X
        norms = batch_norm(space, cand)
        # exact antipode can make the interpolant vanish; nudge past it
        degenerate = norms == 0.0
        if np.any(degenerate):
            mid[degenerate] = np.nextafter(mid[degenerate], 2.0)
            cand = (1.0 - mid)[:, None] * Y - mid[:, None] * X
            norms = batch_norm(space, cand)
        cand /= norms[:, None]
        feas = batch_norm(space, X - cand) >= eps
        hi[feas] = mid[feas]
        lo[~feas] = mid[~feas]
    final = (1.0 - hi)[:, None] * Y - hi[:, None] * X
    return final / batch_norm(space, final)[:, None]


def maximize_min_distance(space: SpaceSpec, anchors: list[np.ndarray],
                          rng: np.random.Generator, budget: EvalBudget,
                          *, starts: int = 16):
    """Find a unit vector far from all anchors: maximize min_j ||c - v_j||.

    Random multistart plus the shared pattern refinement (on the negated
    objective).  Returns ``(vector, min_distance)``.
    """
    if not anchors:
        c = unit_batch(space, rng, 1)[0]
        return c, float("inf")
    A = np.asarray(anchors)

    def neg_min_dist(c):
        return -float(np.min(batch_norm(space, A - c)))

    n_probe = max(starts * 8, 32)
    probes = unit_batch(space, rng, n_probe)
    budget.take(n_probe)
    scores = np.array([neg_min_dist(c) for c in probes])
    order = np.argsort(scores)[:starts]

    best_c, best_v = None, np.inf
    for idx in order:
        c, v = refine(
            probes[idx],
            neg_min_dist,
            lambda z: normalize(space, z),
            lambda z: True,
            budget,
        )
        if v < best_v:
            best_c, best_v = c, v
        if budget.exhausted:
            break
    return best_c, -best_v
