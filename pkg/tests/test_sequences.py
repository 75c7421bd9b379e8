import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uconvex.errors import (CapacityError, InsufficientClusterError,
                            PreconditionError)
from uconvex.modulus import lp_delta
from uconvex.sequences import (baseline_extract, certify, pair_enumeration,
                               ramsey_extract, riesz_seed, separation,
                               shifted_basis_seed, theorem1_extract,
                               theorem3_construct, unit_basis_seed,
                               vectors_to_csv)
from uconvex.spaces import SpaceSpec, normalize

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT5 = math.sqrt(5.0)


# ----------------------------- separation and seeds -----------------------------

def test_separation_basis_is_two_pow_inv_p():
    for p in (1.5, 2.0, 3.0):
        space = SpaceSpec(p=p, d=4)
        assert separation(space, unit_basis_seed(space, 4)) == pytest.approx(
            2.0 ** (1.0 / p), abs=1e-12)


def test_separation_duplicate_and_antipodal():
    space = SpaceSpec(p=2, d=2)
    e = unit_basis_seed(space, 2)
    assert separation(space, [e[0], e[1], e[0]]) == 0.0
    assert separation(space, [e[0], -e[0]]) == pytest.approx(2.0, abs=1e-12)


def test_separation_needs_two():
    space = SpaceSpec(p=2, d=2)
    with pytest.raises(PreconditionError):
        separation(space, [np.ones(2)])


def test_unit_basis_seed():
    space = SpaceSpec(p=2, d=3)
    seed = unit_basis_seed(space, 3)
    assert separation(space, seed) == pytest.approx(SQRT2, abs=1e-12)
    assert len(unit_basis_seed(space, 1)) == 1
    with pytest.raises(CapacityError):
        unit_basis_seed(space, 4)


def test_shifted_basis_seed_unit_and_one_separated():
    for p in (1.3, 2.0, 4.0):
        space = SpaceSpec(p=p, d=6)
        seed = shifted_basis_seed(space, 5)
        for v in seed:
            assert abs(np.sum(np.abs(v) ** p) ** (1 / p) - 1.0) <= 1e-12
        dists = [np.sum(np.abs(a - b) ** p) ** (1 / p)
                 for i, a in enumerate(seed) for b in seed[i + 1:]]
        assert all(abs(dv - 1.0) <= 1e-12 for dv in dists)
    with pytest.raises(CapacityError):
        shifted_basis_seed(SpaceSpec(p=2, d=4), 4)
    assert len(shifted_basis_seed(SpaceSpec(p=2, d=4), 1)) == 1


def test_certify_vacuous_for_singleton():
    space = SpaceSpec(p=2, d=2)
    cert = certify(space, unit_basis_seed(space, 1), threshold=1.5)
    assert cert.passed and math.isinf(cert.min_pairwise)


def test_riesz_seed_l2_8():
    space = SpaceSpec(p=2, d=8)
    vectors, cert = riesz_seed(space, 8, eta=0.01, budget=20_000, rng_seed=5)
    assert len(vectors) == 8
    assert cert.passed
    assert cert.min_pairwise >= 0.99


def test_riesz_seed_dimension_one():
    space = SpaceSpec(p=2, d=1)
    vectors, cert = riesz_seed(space, 2, eta=0.01, budget=200, rng_seed=1)
    assert sorted(float(v[0]) for v in vectors) == [-1.0, 1.0]
    assert cert.min_pairwise == pytest.approx(2.0, abs=1e-12)
    # a third unit vector cannot exist; output is short, not an error
    vectors, cert = riesz_seed(space, 3, eta=0.01, budget=200, rng_seed=1)
    assert len(vectors) == 2


def test_riesz_seed_single_vector():
    vectors, cert = riesz_seed(SpaceSpec(p=2, d=3), 1, eta=0.5, budget=10,
                               rng_seed=0)
    assert len(vectors) == 1 and cert.passed


# ----------------------------- baseline extraction -----------------------------

def test_baseline_basis_l2_50():
    space = SpaceSpec(p=2, d=50)
    seq = unit_basis_seed(space, 50)
    res = baseline_extract(space, seq, seq[0], tau=0.01)
    assert res.selected == tuple(range(1, 50))
    assert res.pair_min == pytest.approx(SQRT3, abs=1e-12)
    assert res.pair_min >= 0.99


def test_baseline_constant_sequence():
    space = SpaceSpec(p=2, d=4)
    v = normalize(space, np.array([1.0, 2.0, 0.0, -1.0]))
    x = unit_basis_seed(space, 1)[0]
    res = baseline_extract(space, [v.copy() for _ in range(6)], x, tau=0.05)
    assert len(res.selected) == 6
    assert res.pair_min == pytest.approx(1.0, abs=1e-12)


def test_baseline_spread_values_error():
    # functional values 0, 0.3, 0.6, 0.9 with tau = 0.01: singleton windows
    space = SpaceSpec(p=2, d=2)
    seq = [np.array([t, math.sqrt(1 - t * t)]) for t in (0.0, 0.3, 0.6, 0.9)]
    x = unit_basis_seed(space, 1)[0]
    with pytest.raises(InsufficientClusterError) as err:
        baseline_extract(space, seq, x, tau=0.01)
    assert err.value.best_count == 1
    assert err.value.value_range == pytest.approx(0.9, abs=1e-12)
    assert err.value.min_n == err.value.window_count + 1


# ----------------------------- theorem-1 extraction -----------------------------

def test_theorem1_basis_l2_200():
    space = SpaceSpec(p=2, d=200)
    seq = unit_basis_seed(space, 200)
    res = theorem1_extract(space, seq, seq[0], eps=SQRT2)
    assert res.selected == tuple(range(1, 200))
    assert res.pair_min == pytest.approx(SQRT3, abs=1e-9)
    assert res.guaranteed == pytest.approx(1.1180828963118032, abs=1e-12)
    assert res.pair_min >= res.guaranteed
    lo, hi = res.window
    assert hi - lo < res.delta_eps


def test_theorem1_two_antipodal_vectors():
    # seq = {v, -v} is 2-separated; x orthogonal to v has functional values
    # 0 on both, so the cluster is everything and the pair value is
    # ||x - 2v|| = sqrt(5)
    space = SpaceSpec(p=2, d=2)
    v = unit_basis_seed(space, 2)[1]
    x = unit_basis_seed(space, 1)[0]
    res = theorem1_extract(space, [v, -v], x, eps=2.0)
    assert res.selected == (0, 1)
    assert res.pair_min == pytest.approx(SQRT5, abs=1e-12)
    assert res.pair_min >= 1.0 + lp_delta(2.0, 4.0 / 3.0) - 1e-9


def test_theorem1_rejects_underseparated():
    space = SpaceSpec(p=2, d=8)
    seq = unit_basis_seed(space, 8)
    with pytest.raises(PreconditionError):
        theorem1_extract(space, seq, seq[0], eps=1.9)


def test_theorem1_rejects_non_unit_x():
    space = SpaceSpec(p=2, d=8)
    seq = unit_basis_seed(space, 8)
    with pytest.raises(PreconditionError):
        theorem1_extract(space, seq, seq[0] * 1.1, eps=SQRT2)


def test_theorem1_insufficient_cluster_diagnostics():
    # spread functional values: no window of width kappa*delta holds 2
    space = SpaceSpec(p=2, d=3)
    seq = [np.array([t, math.sqrt(1 - t * t), 0.0])
           for t in (0.0, 0.5, 0.95)]
    x = unit_basis_seed(space, 1)[0]
    eps = separation(space, seq)
    with pytest.raises(InsufficientClusterError) as err:
        theorem1_extract(space, seq, x, eps=eps)
    assert err.value.window_count >= 2
    assert err.value.min_n > 3


def test_theorem1_window_members_inside_window():
    space = SpaceSpec(p=2, d=40)
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    seq = [q[:, i] for i in range(40)]
    x = normalize(space, rng.standard_normal(40))
    res = theorem1_extract(space, seq, x, eps=SQRT2 * (1 - 1e-12))
    f = np.asarray(res.functional.coords)
    lo, hi = res.window
    for i in res.selected:
        assert lo - 1e-12 <= float(seq[i] @ f) <= hi + 1e-12


# ----------------------------- ramsey extraction -----------------------------

def test_ramsey_monochromatic_high_returns_everything():
    n = 9
    m = np.full((n, n), SQRT2)
    np.fill_diagonal(m, 0.0)
    idx, branch = ramsey_extract(m, split=1.0285954792089682)
    assert idx == list(range(n))
    assert branch == "high"


def test_ramsey_monochromatic_low_returns_everything():
    n = 7
    m = np.ones((n, n))
    np.fill_diagonal(m, 0.0)
    idx, branch = ramsey_extract(m, split=1.0285954792089682)
    assert idx == list(range(n))
    assert branch == "low"


def test_ramsey_split_boundary_goes_low():
    m = np.array([[0.0, 1.5], [1.5, 0.0]])
    _, branch = ramsey_extract(m, split=1.5)
    assert branch == "low"


def test_ramsey_preconditions():
    with pytest.raises(PreconditionError):
        ramsey_extract(np.zeros((1, 1)), split=1.0)
    with pytest.raises(PreconditionError):
        ramsey_extract(np.array([[0.0, 1.0], [2.0, 0.0]]), split=1.0)
    with pytest.raises(PreconditionError):
        ramsey_extract(np.array([[1.0, 1.0], [1.0, 0.0]]), split=2.0)


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_ramsey_random_two_valued(seed):
    rng = np.random.default_rng(seed)
    n = 64
    m = np.where(rng.random((n, n)) < 0.5, 0.0, 2.0)
    m = np.triu(m, 1)
    m = m + m.T
    idx, branch = ramsey_extract(m, split=1.0)
    floor = math.ceil(math.log2(n)) // 2
    assert len(idx) >= max(floor, 1)
    sub = m[np.ix_(idx, idx)].copy()
    np.fill_diagonal(sub, 0.0 if branch == "low" else 2.0)
    assert np.all(sub <= 1.0) if branch == "low" else np.all(sub > 1.0)


# ----------------------------- pair enumeration -----------------------------

def test_pair_enumeration_prefix():
    expect = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1), (0, 3)]
    assert [pair_enumeration(i) for i in range(7)] == expect


@pytest.mark.parametrize("n", [2, 3, 7, 20, 50])
def test_pair_enumeration_covers_all_pairs(n):
    # first n(n-1) positions biject onto the off-diagonal pairs below n
    seen = [pair_enumeration(i) for i in range(n * (n - 1))]
    assert len(set(seen)) == len(seen)
    assert set(seen) == {(a, b) for a in range(n) for b in range(n) if a != b}


def test_pair_enumeration_rejects_negative():
    with pytest.raises(ValueError):
        pair_enumeration(-1)


# ----------------------------- theorem-3 construction -----------------------------

def test_theorem3_basis_seed_short_circuits_high():
    space = SpaceSpec(p=2, d=16)
    trace = theorem3_construct(space, unit_basis_seed(space, 16), max_len=16)
    assert trace.branch == "high"
    assert trace.status == "completed"
    assert trace.steps == ()
    assert len(trace.output) == 16
    assert trace.final_certificate.passed
    assert trace.final_certificate.min_pairwise == pytest.approx(SQRT2,
                                                                 abs=1e-12)


def test_theorem3_shifted_seed_runs_greedy_low_branch():
    space = SpaceSpec(p=2, d=64)
    seed = shifted_basis_seed(space, 63)
    trace = theorem3_construct(space, seed, max_len=64)
    assert trace.branch == "low"
    assert trace.status == "exhausted"
    assert len(trace.output) == 31  # floor(63 / 2) disjoint pairs
    cert = trace.final_certificate
    assert cert.passed
    assert cert.min_pairwise == pytest.approx(SQRT2, abs=1e-9)
    assert cert.threshold == pytest.approx(1.0285954792089682, abs=1e-12)
    accepted = [s for s in trace.steps if s.accepted]
    assert len(accepted) == 31
    assert all(abs(s.y_norm - 1.0) <= 1e-9 for s in accepted)
    used = [i for s in accepted for i in s.pair]
    assert len(used) == len(set(used))  # disjoint index pairs


def test_theorem3_max_len_one():
    space = SpaceSpec(p=2, d=8)
    trace = theorem3_construct(space, shifted_basis_seed(space, 7), max_len=1)
    assert trace.status == "completed"
    assert len(trace.output) == 1
    assert trace.final_certificate.passed  # vacuous


def test_theorem3_rejects_underseparated_seed():
    space = SpaceSpec(p=2, d=4)
    seed = [normalize(space, np.ones(4) + 0.01 * v)
            for v in unit_basis_seed(space, 4)]
    with pytest.raises(PreconditionError):
        theorem3_construct(space, seed, max_len=4)


def test_theorem3_trace_step_records():
    space = SpaceSpec(p=2, d=10)
    trace = theorem3_construct(space, shifted_basis_seed(space, 9), max_len=2)
    first = trace.steps[0]
    assert first.candidate_index == 0
    assert first.pair == (0, 1)
    assert first.min_dist_to_prior is None
    assert first.accepted


def test_vectors_csv_roundtrip(tmp_path):
    space = SpaceSpec(p=2, d=3)
    vecs = unit_basis_seed(space, 3)
    path = tmp_path / "vecs.csv"
    vectors_to_csv(path, vecs)
    rows = [[float(t) for t in line.split(",")]
            for line in path.read_text().splitlines()]
    assert np.array_equal(np.asarray(rows), np.asarray(vecs))
