"""Orthonormal univariate families, multi-index sets and tensor bases."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from . import kernels
from .errors import DimensionMismatch, DomainError, QuadratureFailure

MAX_DEGREE = 30


class BasisKind(str, Enum):
    LEGENDRE_SHIFTED01 = "legendre_shifted01"
    LEGENDRE_SYMMETRIC = "legendre_symmetric"
    HERMITE_PROBABILIST = "hermite_probabilist"
    LAGUERRE_STANDARD = "laguerre_standard"
    NUMERIC_STIELTJES = "numeric_stieltjes"


@dataclass(frozen=True, eq=False)
class UnivariateBasis:
    """Orthonormal polynomials given by monic recurrence coefficients.

    ``pi_{k+1}(x) = (x - a[k]) pi_k(x) - b[k] pi_{k-1}(x)``, normalized so
    that ``P_k = pi_k / sqrt(b[1] ... b[k])`` has unit norm under a
    probability density (``b[0]`` is the total mass, always 1).
    """

    kind: BasisKind
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def max_degree(self) -> int:
        return len(self.a) - 1

    def table(self, x, max_deg: int) -> np.ndarray:
        if max_deg > self.max_degree:
            raise DomainError(f"degree {max_deg} exceeds basis capacity {self.max_degree}")
        return kernels.orthonormal_table(x, self.a, self.b, max_deg)

    def __call__(self, degree: int, x):
        x = np.asarray(x, dtype=float)
        vals = self.table(x.ravel(), degree)[:, degree].reshape(x.shape)
        return vals[()] if vals.ndim == 0 else vals


def _freeze(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


@functools.lru_cache(maxsize=None)
def hermite() -> UnivariateBasis:
    """Probabilists' Hermite, orthonormal under the standard normal law."""
    k = np.arange(MAX_DEGREE + 1, dtype=float)
    return UnivariateBasis(BasisKind.HERMITE_PROBABILIST, *_freeze(np.zeros_like(k), np.where(k == 0, 1.0, k)))


@functools.lru_cache(maxsize=None)
def legendre() -> UnivariateBasis:
    """Legendre, orthonormal under the uniform density 1/2 on [-1, 1]."""
    k = np.arange(MAX_DEGREE + 1, dtype=float)
    b = np.where(k == 0, 1.0, k * k / (4.0 * k * k - 1.0))
    return UnivariateBasis(BasisKind.LEGENDRE_SYMMETRIC, *_freeze(np.zeros_like(k), b))


@functools.lru_cache(maxsize=None)
def legendre01() -> UnivariateBasis:
    """Shifted Legendre, orthonormal under U(0, 1)."""
    k = np.arange(MAX_DEGREE + 1, dtype=float)
    b = np.where(k == 0, 1.0, k * k / (4.0 * (4.0 * k * k - 1.0)))
    return UnivariateBasis(BasisKind.LEGENDRE_SHIFTED01, *_freeze(np.full_like(k, 0.5), b))


@functools.lru_cache(maxsize=None)
def laguerre() -> UnivariateBasis:
    """Laguerre, orthonormal under the standard exponential law."""
    k = np.arange(MAX_DEGREE + 1, dtype=float)
    return UnivariateBasis(BasisKind.LAGUERRE_STANDARD, *_freeze(2 * k + 1, np.where(k == 0, 1.0, k * k)))


def _mapped_rule(support: tuple[float, float], center: float, scale: float, n: int):
    """Gauss-Legendre rule pulled back onto a (possibly infinite) interval."""
    t, w = special.roots_legendre(n)
    lo, hi = support
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (hi - lo) * t + 0.5 * (hi + lo), 0.5 * (hi - lo) * w
    if math.isinf(lo) and math.isinf(hi):
        x = center + scale * t / (1.0 - t * t)
        jac = scale * (1.0 + t * t) / (1.0 - t * t) ** 2
        return x, w * jac
    if math.isfinite(lo):
        x = lo + scale * (1.0 + t) / (1.0 - t)
        return x, w * 2.0 * scale / (1.0 - t) ** 2
    x = hi - scale * (1.0 - t) / (1.0 + t)
    return x, w * 2.0 * scale / (1.0 + t) ** 2


def stieltjes_basis(
    density: Callable[[np.ndarray], np.ndarray],
    support: tuple[float, float],
    max_degree: int = MAX_DEGREE,
    n_nodes: int = 4000,
) -> UnivariateBasis:
    """Orthonormal basis for an arbitrary density by discretized Stieltjes.

    The density is discretized with a mapped Gauss-Legendre rule and the
    recurrence coefficients are generated from the normalized polynomial
    vectors, which avoids the moment problem's ill-conditioning.
    """
    lo, hi = float(support[0]), float(support[1])
    with np.errstate(all="ignore"):
        mass, _ = integrate.quad(density, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)
        if not math.isfinite(mass) or abs(mass - 1.0) > 1e-8:
            raise QuadratureFailure(f"density integrates to {mass!r}, expected 1 within 1e-8")
        mean, _ = integrate.quad(lambda s: s * density(s), lo, hi, epsabs=1e-13, limit=500)
        var, _ = integrate.quad(lambda s: (s - mean) ** 2 * density(s), lo, hi, epsabs=1e-13, limit=500)
    if not (math.isfinite(mean) and math.isfinite(var) and var > 0):
        raise QuadratureFailure("first moments of the density did not converge")
    scale = 2.0 * math.sqrt(var)
    x, w = _mapped_rule((lo, hi), mean, scale, n_nodes)
    with np.errstate(all="ignore"):
        w = w * np.asarray(density(x), dtype=float)
    w = np.where(np.isfinite(w), w, 0.0)
    total = w.sum()
    if not abs(total - 1.0) < 1e-8:
        raise QuadratureFailure(f"discretized mass {total!r} differs from 1")
    w = w / total

    a = np.zeros(max_degree + 1)
    b = np.ones(max_degree + 1)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(max_degree + 1):
        a[k] = np.sum(w * x * p * p)
        if k == max_degree:
            break
        q = (x - a[k]) * p - math.sqrt(b[k]) * p_prev if k else (x - a[k]) * p
        # one reorthogonalization pass against the two previous vectors
        q -= np.sum(w * q * p) * p
        if k:
            q -= np.sum(w * q * p_prev) * p_prev
        b[k + 1] = np.sum(w * q * q)
        if not (b[k + 1] > 0 and math.isfinite(b[k + 1])):
            raise QuadratureFailure(f"recurrence broke down at degree {k + 1}")
        p_prev, p = p, q / math.sqrt(b[k + 1])
    return UnivariateBasis(BasisKind.NUMERIC_STIELTJES, *_freeze(a, b))


def gumbel_density(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-x - np.exp(-x))


@functools.lru_cache(maxsize=None)
def gumbel() -> UnivariateBasis:
    """Numerically constructed basis for the standard Gumbel law."""
    return stieltjes_basis(gumbel_density, (-math.inf, math.inf), MAX_DEGREE)


def eval_univariate(basis: UnivariateBasis, degree: int, x):
    if degree < 0:
        raise DomainError("degree must be non-negative")
    return basis(degree, x)


# --------------------------------------------------------------------------
# multi-indices
# --------------------------------------------------------------------------


def _graded_lex_order(alphas: np.ndarray) -> np.ndarray:
    # total degree ascending, then lexicographically descending
    keys = [-alphas[:, d] for d in range(alphas.shape[1] - 1, -1, -1)]
    keys.append(alphas.sum(axis=1))
    return np.lexsort(keys)


@dataclass(frozen=True, eq=False)
class MultiIndexSet:
    """Deduplicated multi-indices in graded-lexicographic order."""

    alphas: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.alphas, dtype=np.int64)
        if arr.ndim != 2:
            raise DimensionMismatch("multi-index array must be two-dimensional")
        if np.any(arr < 0):
            raise DomainError("multi-index entries must be non-negative")
        arr = np.unique(arr, axis=0) if len(arr) else arr
        arr = arr[_graded_lex_order(arr)] if len(arr) else arr
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "alphas", arr)

    @property
    def dim(self) -> int:
        return self.alphas.shape[1]

    def __len__(self) -> int:
        return self.alphas.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.alphas)

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndexSet) and np.array_equal(self.alphas, other.alphas)

    def __hash__(self):
        return hash(self.alphas.tobytes())

    def as_set(self) -> set[tuple[int, ...]]:
        return set(iter(self))

    def total_degree(self) -> np.ndarray:
        return self.alphas.sum(axis=1)

    def q_norm(self, q: float) -> np.ndarray:
        return np.sum(self.alphas.astype(float) ** q, axis=1) ** (1.0 / q)

    def zero_position(self) -> int | None:
        hits = np.flatnonzero(~self.alphas.any(axis=1))
        return int(hits[0]) if hits.size else None

    def subset(self, rows) -> "MultiIndexSet":
        return MultiIndexSet(self.alphas[np.asarray(rows)])


def hyperbolic_index_set(M: int, p: int, q: float = 1.0) -> MultiIndexSet:
    """All ``alpha`` in ``N^M`` with ``(sum alpha_i^q)^(1/q) <= p``."""
    if not (0.0 < q <= 1.0):
        raise DomainError(f"q must lie in (0, 1], got {q}")
    if M < 1 or p < 0:
        raise DomainError("need M >= 1 and p >= 0")
    cap = (p + 1e-12) ** q
    pows = np.arange(p + 1, dtype=float) ** q
    rows = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1)
    for _ in range(M):
        new_rows, new_used = [], []
        for deg in range(p + 1):
            keep = used + pows[deg] <= cap
            if not keep.any():
                continue
            block = rows[keep]
            new_rows.append(np.hstack([block, np.full((block.shape[0], 1), deg, dtype=np.int64)]))
            new_used.append(used[keep] + pows[deg])
        rows = np.vstack(new_rows)
        used = np.concatenate(new_used)
    return MultiIndexSet(rows)


def eval_multivariate(alpha: Sequence[int], bases: Sequence[UnivariateBasis], v) -> float | np.ndarray:
    alpha = np.asarray(alpha, dtype=np.int64)
    v = np.asarray(v, dtype=float)
    if alpha.shape[0] != len(bases) or v.shape[-1] != len(bases):
        raise DimensionMismatch("multi-index, point and basis list must share one dimension")
    out = np.ones(v.shape[:-1])
    for d, deg in enumerate(alpha):
        if deg:
            out = out * bases[d](int(deg), v[..., d])
    return out[()] if out.ndim == 0 else out


def basis_tables(bases: Sequence[UnivariateBasis], points: np.ndarray, max_deg: int) -> np.ndarray:
    """``(M, n, max_deg + 1)`` univariate tables for every dimension."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != len(bases):
        raise DimensionMismatch(f"points have {points.shape[1]} columns, basis list has {len(bases)}")
    return np.stack([b.table(points[:, d], max_deg) for d, b in enumerate(bases)])


def evaluate_basis(index_set: MultiIndexSet, bases: Sequence[UnivariateBasis], points) -> np.ndarray:
    """Information matrix ``F[i, j] = psi_j(points[i])``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if index_set.dim != len(bases):
        raise DimensionMismatch("index set and basis list dimensions differ")
    max_deg = int(index_set.alphas.max()) if len(index_set) else 0
    return kernels.design_matrix(basis_tables(bases, points, max_deg), index_set.alphas)
