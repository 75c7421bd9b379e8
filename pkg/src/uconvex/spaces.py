"""Finite-dimensional l^p spaces: norms, duality mapping, sphere sampling.

Vectors are plain numpy arrays of length ``d``; a :class:`SpaceSpec` fixes
the exponent and dimension and every operation takes the space explicitly.
All operations are pure; randomness always enters through an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ZeroVectorError

# Default absolute tolerance for algebraic identities (norming, normalizing).
ATOL = 1e-12

Vec = np.ndarray


@dataclass(frozen=True)
class SpaceSpec:
    """A finite-dimensional l^p space with exponent ``p`` and dimension ``d``.

    Only ``1 < p < inf`` is accepted: outside that range the space is not
    uniformly convex and every downstream guarantee would silently break.
    """

    p: float
    d: int

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise ValueError(f"exponent p must satisfy 1 < p < inf, got {self.p!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "d", int(self.d))

    @property
    def q(self) -> float:
        """Dual exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)

    def __str__(self) -> str:
        return f"l^{self.p:g}_{self.d}"


@dataclass(frozen=True, eq=False)
class Functional:
    """A dual vector acting by ``<v, f> = sum_i f_i v_i``.

    Instances produced by :func:`norming_functional` have dual q-norm 1.
    """

    coords: np.ndarray

    def __call__(self, v: Vec) -> float:
        return float(np.dot(self.coords, v))


@dataclass(frozen=True, eq=False)
class ContractionMap:
    """Linear map into l^inf_k given by ``k`` rows of dual norm <= 1.

    With a sup-norm codomain and unit-dual rows the operator norm is <= 1
    by construction (Hoelder), so the map is a genuine contraction.
    """

    rows: np.ndarray  # shape (k, d)

    @property
    def k(self) -> int:
        return self.rows.shape[0]


def as_vector(space: SpaceSpec, coords) -> Vec:
    """Coerce ``coords`` to a float vector of the space's dimension."""
    v = np.asarray(coords, dtype=float)
    if v.shape != (space.d,):
        raise DimensionMismatchError(
            f"expected {space.d} coordinates, got shape {v.shape}"
        )
    return v


def norm(space: SpaceSpec, v: Vec) -> float:
    """p-norm ``(sum |v_i|^p)^(1/p)``; zero iff ``v`` is the zero vector."""
    v = as_vector(space, v)
    return float(np.sum(np.abs(v) ** space.p) ** (1.0 / space.p))


def normalize(space: SpaceSpec, v: Vec) -> Vec:
    """Return ``v / ||v||``, a unit vector parallel to ``v``."""
    v = as_vector(space, v)
    n = norm(space, v)
    if n == 0.0:
        raise ZeroVectorError("cannot normalize the zero vector")
    return v / n


def norming_functional(space: SpaceSpec, x: Vec) -> Functional:
    """Duality map: the unit dual functional with ``<x, f> = ||x||``.

    Closed form in l^p: ``f_i = sign(x_i) |x_i|^(p-1) / ||x||^(p-1)`` with
    the convention sign(0) = 0.  The result has dual q-norm exactly 1 and
    pairs with ``x`` to ``||x||``, both within :data:`ATOL`.
    """
    x = as_vector(space, x)
    n = norm(space, x)
    if n == 0.0:
        raise ZeroVectorError("the zero vector has no norming functional")
    coords = np.sign(x) * np.abs(x) ** (space.p - 1.0) / n ** (space.p - 1.0)
    return Functional(coords)


def dual_norm(space: SpaceSpec, f: Functional) -> float:
    """q-norm of a functional's coordinates (norm in the dual space)."""
    coords = as_vector(space, f.coords)
    return float(np.sum(np.abs(coords) ** space.q) ** (1.0 / space.q))


def random_unit(space: SpaceSpec, rng_seed) -> Vec:
    """A random vector on the unit sphere, deterministic given the seed.

    Coordinates are sampled from a standard normal and normalized in the
    p-norm.  This has full support on the sphere; it is uniform only for
    p = 2, which nothing downstream requires.
    """
    rng = _as_generator(rng_seed)
    while True:
        g = rng.standard_normal(space.d)
        if np.any(g != 0.0):
            return normalize(space, g)


def unit_batch(space: SpaceSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """n unit vectors as rows of an (n, d) array; see :func:`random_unit`."""
    g = rng.standard_normal((n, space.d))
    norms = batch_norm(space, g)
    bad = norms == 0.0
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), space.d))
        norms = batch_norm(space, g)
        bad = norms == 0.0
    return g / norms[:, None]


def batch_norm(space: SpaceSpec, rows: np.ndarray) -> np.ndarray:
    """p-norms of the rows of an (n, d) array."""
    return np.sum(np.abs(rows) ** space.p, axis=-1) ** (1.0 / space.p)


def make_contraction(space: SpaceSpec, rows) -> ContractionMap:
    """Build a :class:`ContractionMap`, validating every row's dual norm."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != space.d:
        raise DimensionMismatchError(
            f"rows must have {space.d} coordinates, got {rows.shape[1]}"
        )
    q = space.q
    row_norms = np.sum(np.abs(rows) ** q, axis=1) ** (1.0 / q)
    if np.any(row_norms > 1.0 + ATOL):
        raise ValueError(
            f"row dual norm exceeds 1: max {row_norms.max():.17g}"
        )
    return ContractionMap(rows)


def apply(cmap: ContractionMap, v: Vec) -> tuple[np.ndarray, float]:
    """Apply the contraction to ``v``; returns (values, sup-norm of values)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (cmap.rows.shape[1],):
        raise DimensionMismatchError(
            f"expected {cmap.rows.shape[1]} coordinates, got shape {v.shape}"
        )
    values = cmap.rows @ v
    return values, float(np.max(np.abs(values))) if values.size else 0.0


def _as_generator(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)
