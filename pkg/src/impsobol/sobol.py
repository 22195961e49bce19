"""Sobol' indices read off a PCE coefficient table.

Partial variances are sums of squared coefficients over index classes; no
sampling is involved. With ``active_dims`` the decomposition is that of the
projection ``E[Y | X_active]``, i.e. only terms supported on the active
dimensions are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, ZeroVariance
from .pce import PceModel
from .polynomials import MultiIndexSet


def index_class(index_set: MultiIndexSet, subset: Iterable[int]) -> np.ndarray:
    """Row positions whose support is exactly ``subset``."""
    u = sorted(set(int(i) for i in subset))
    if not u:
        raise DomainError("subset must be non-empty")
    if any(i < 0 or i >= index_set.dim for i in u):
        raise DomainError(f"subset {u} is outside 0..{index_set.dim - 1}")
    nz = index_set.alphas != 0
    want = np.zeros(index_set.dim, dtype=bool)
    want[u] = True
    return np.flatnonzero(np.all(nz == want, axis=1))


@dataclass(frozen=True)
class SobolSpectrum:
    """Normalized partial variances keyed by sorted dimension tuples."""

    total_variance: float
    partial: dict[tuple[int, ...], float]
    active_dims: tuple[int, ...]

    def first(self, i: int) -> float:
        return self.partial.get((i,), 0.0)

    def total(self, i: int) -> float:
        return sum(v for u, v in self.partial.items() if i in u)

    def closed(self, subset: Sequence[int]) -> float:
        s = set(subset)
        return sum(v for u, v in self.partial.items() if set(u) <= s)


def _restricted(model: PceModel, active_dims):
    dims = tuple(range(model.dim)) if active_dims is None else tuple(sorted(set(active_dims)))
    if any(d < 0 or d >= model.dim for d in dims):
        raise DimensionMismatch(f"active dimensions {dims} outside 0..{model.dim - 1}")
    alphas = model.index_set.alphas
    inactive = np.setdiff1d(np.arange(model.dim), dims)
    keep = ~np.any(alphas[:, inactive] != 0, axis=1) & np.any(alphas != 0, axis=1)
    return dims, alphas[keep], model.coefficients[keep]


def sobol_indices(model: PceModel, active_dims: Sequence[int] | None = None) -> SobolSpectrum:
    dims, alphas, coef = _restricted(model, active_dims)
    var = float(np.sum(coef**2))
    if not var > 0:
        raise ZeroVariance("model variance over the active dimensions is zero")
    partial: dict[tuple[int, ...], float] = {}
    for a, c in zip(alphas, coef):
        key = tuple(int(d) for d in np.flatnonzero(a))
        partial[key] = partial.get(key, 0.0) + c * c
    return SobolSpectrum(var, {k: v / var for k, v in sorted(partial.items())}, dims)


def sobol_first(model: PceModel, i: int, active_dims=None) -> float:
    return sobol_indices(model, active_dims).first(i)


def sobol_total(model: PceModel, i: int, active_dims=None) -> float:
    return sobol_indices(model, active_dims).total(i)
