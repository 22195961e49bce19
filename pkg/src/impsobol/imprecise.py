"""Imprecise (interval-valued) Sobol' indices from an augmented PCE.

Each multi-index splits into an aleatory part ``alpha_C`` and an epistemic
part ``alpha_T``. Fixing the standardized hyper-parameters ``theta`` and
collecting terms with equal ``alpha_C`` gives a conditional PCE in the
aleatory variables whose coefficients are polynomials in ``theta``:

    a_g(theta) = sum_{alpha in group g} a_alpha * psi_{alpha_T}(theta)

Conditional Sobol' indices are ratios of sums of ``a_g(theta)**2``; their
extremes over the box give the index intervals.

Subsets are given as positions among the aleatory dimensions, which
coincide with input indices in the augmented layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, DomainError, ZeroVariance
from .optimizer import OptimizerConfig, maximize, minimize
from .pce import PceModel
from .polynomials import MultiIndexSet, UnivariateBasis, basis_tables

_BOX_TOL = 1e-12


class Order(str, Enum):
    FIRST = "first"
    GROUP = "group"
    TOTAL = "total"


@dataclass(frozen=True, eq=False)
class SplitIndexSet:
    """Aleatory/epistemic split of an augmented index set.

    ``group_of[k]`` is the row of ``unique_aleatory`` that term ``k`` of the
    original set belongs to.
    """

    alpha_c: np.ndarray  # (P, n_C)
    alpha_t: np.ndarray  # (P, n_T)
    unique_aleatory: MultiIndexSet
    group_of: np.ndarray  # (P,)
    aleatory: tuple[int, ...]
    epistemic: tuple[int, ...]
    theta_bases: tuple[UnivariateBasis, ...]

    @property
    def n_terms(self) -> int:
        return self.alpha_c.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.unique_aleatory)

    @property
    def n_theta(self) -> int:
        return len(self.epistemic)

    @property
    def n_aleatory(self) -> int:
        return len(self.aleatory)

    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.group_of, minlength=self.n_groups)

    def reconstruct(self) -> np.ndarray:
        dim = self.n_aleatory + self.n_theta
        out = np.zeros((self.n_terms, dim), dtype=np.int64)
        out[:, list(self.aleatory)] = self.alpha_c
        out[:, list(self.epistemic)] = self.alpha_t
        return out


def split_indices(model: PceModel) -> SplitIndexSet:
    al = tuple(model.aleatory)
    ep = tuple(model.epistemic)
    if sorted(al + ep) != list(range(model.dim)):
        raise DimensionMismatch("aleatory and epistemic dimensions must partition the model dimensions")
    A = model.index_set.alphas
    ac = A[:, list(al)]
    at = A[:, list(ep)]
    uniq = MultiIndexSet(ac) if len(al) else MultiIndexSet(np.zeros((1, 0), dtype=np.int64))
    lookup = {row: g for g, row in enumerate(uniq)}
    group_of = np.array([lookup[tuple(int(v) for v in r)] for r in ac], dtype=np.int64)
    return SplitIndexSet(ac, at, uniq, group_of, al, ep, tuple(model.bases[d] for d in ep))


def _theta_tables(split: SplitIndexSet, theta: np.ndarray) -> np.ndarray:
    """``(B, n_T, deg + 1)`` univariate tables at a batch of theta rows."""
    deg = int(split.alpha_t.max(initial=0))
    B = theta.shape[0]
    if split.n_theta == 0:
        return np.ones((B, 0, deg + 1))
    first = split.theta_bases[0]
    if all(b is first for b in split.theta_bases):
        # one recurrence for every column: a single kernel call on the flat batch
        flat = first.table(theta.ravel(), deg)
        return np.ascontiguousarray(flat.reshape(B, split.n_theta, deg + 1))
    tab = basis_tables(split.theta_bases, theta, deg)  # (n_T, B, deg + 1)
    return np.ascontiguousarray(np.transpose(tab, (1, 0, 2)))


def _check_theta(split: SplitIndexSet, theta) -> np.ndarray:
    t = np.atleast_2d(np.asarray(theta, dtype=float))
    if split.n_theta == 0 and t.size == 0:
        return np.zeros((max(t.shape[0], 1), 0))
    if t.shape[1] != split.n_theta:
        raise DimensionMismatch(f"theta needs {split.n_theta} entries, got {t.shape[1]}")
    if np.any(np.abs(t) > 1.0 + _BOX_TOL) or not np.all(np.isfinite(t)):
        raise DomainError("theta lies outside the standardized box [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def conditional_coefficients(split: SplitIndexSet, coefficients, theta) -> np.ndarray:
    """Coefficients ``a_g(theta)`` of the conditional PCE, one per group."""
    t = _check_theta(split, theta)
    coef = np.asarray(coefficients, dtype=float)
    tabs = _theta_tables(split, t)
    psi = np.ones((t.shape[0], split.n_terms))
    for k in range(split.n_theta):
        psi *= tabs[:, k, split.alpha_t[:, k]]
    out = np.zeros((t.shape[0], split.n_groups))
    np.add.at(out.T, split.group_of, (psi * coef).T)
    return out[0] if np.ndim(theta) <= 1 else out


def conditional_model(split: SplitIndexSet, coefficients, theta, bases: Sequence[UnivariateBasis]) -> PceModel:
    """The conditional PCE in the aleatory variables at fixed ``theta``."""
    a = conditional_coefficients(split, coefficients, theta)
    al_bases = tuple(bases[d] for d in split.aleatory)
    return PceModel(split.unique_aleatory, a, al_bases, aleatory=tuple(range(split.n_aleatory)), epistemic=())


def _masks(split: SplitIndexSet, subset: Iterable[int], order: Order):
    order = Order(order)
    u = sorted(set(int(i) for i in subset))
    if not u:
        raise DomainError("subset must be non-empty")
    if any(i < 0 or i >= split.n_aleatory for i in u):
        raise DomainError(f"subset {u} is outside 0..{split.n_aleatory - 1}")
    if order is Order.FIRST and len(u) != 1:
        raise DomainError("first-order index needs a single dimension")
    nz = split.unique_aleatory.alphas != 0
    den = nz.any(axis=1)
    if order is Order.TOTAL:
        num = nz[:, u].any(axis=1)
    else:
        want = np.zeros(split.n_aleatory, dtype=bool)
        want[u] = True
        num = np.all(nz == want, axis=1)
    return num, den


class ConditionalSobol:
    """Vectorized ``theta -> S(theta)``; NaN where the variance vanishes."""

    def __init__(self, split: SplitIndexSet, coefficients, subset: Iterable[int], order: Order | str):
        self.split = split
        self.coefficients = np.ascontiguousarray(coefficients, dtype=float)
        if self.coefficients.shape != (split.n_terms,):
            raise DimensionMismatch("one coefficient per split term is required")
        self.subset = tuple(sorted(set(int(i) for i in subset)))
        self.order = Order(order)
        self.num_mask, self.den_mask = _masks(split, self.subset, self.order)

    def __call__(self, theta) -> np.ndarray:
        t = _check_theta(self.split, theta)
        return kernels.conditional_ratio(
            _theta_tables(self.split, t),
            self.coefficients,
            self.split.alpha_t,
            self.split.group_of,
            self.split.n_groups,
            self.num_mask,
            self.den_mask,
        )


def conditional_sobol(split: SplitIndexSet, coefficients, subset, theta, order: Order | str = Order.FIRST) -> float:
    val = float(ConditionalSobol(split, coefficients, subset, order)(np.atleast_2d(theta))[0])
    if np.isnan(val):
        raise ZeroVariance("conditional variance vanishes at this theta")
    return val


def conditional_spectrum(split: SplitIndexSet, coefficients, theta) -> dict[tuple[int, ...], float]:
    """All conditional partial indices at ``theta`` keyed by dimension subsets."""
    a = conditional_coefficients(split, coefficients, theta)
    nz = split.unique_aleatory.alphas != 0
    var = float(np.sum(a[nz.any(axis=1)] ** 2))
    if not var > 0:
        raise ZeroVariance("conditional variance vanishes at this theta")
    out: dict[tuple[int, ...], float] = {}
    for g in range(split.n_groups):
        key = tuple(int(i) for i in np.flatnonzero(nz[g]))
        if key:
            out[key] = out.get(key, 0.0) + a[g] ** 2 / var
    return out


@dataclass(frozen=True)
class SobolInterval:
    subset: tuple[int, ...]
    order: Order
    lower: float
    upper: float
    argmin_theta: np.ndarray
    argmax_theta: np.ndarray

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def sobol_bounds(split: SplitIndexSet, coefficients, subset, order: Order | str = Order.FIRST,
                 optimizer_cfg: OptimizerConfig | None = None) -> SobolInterval:
    """Minimum and maximum of the conditional index over the theta box."""
    f = ConditionalSobol(split, coefficients, subset, order)
    box = [(-1.0, 1.0)] * split.n_theta
    lo = minimize(f, box, optimizer_cfg, vectorized=True, stream=0)
    hi = maximize(f, box, optimizer_cfg, vectorized=True, stream=1)
    lower, upper = lo.fun, hi.fun
    if lower > upper:  # only possible through round-off on flat objectives
        lower = upper = 0.5 * (lower + upper)
    return SobolInterval(f.subset, f.order, lower, upper, lo.x, hi.x)


@dataclass(frozen=True)
class SobolSample:
    values: np.ndarray
    n_excluded: int


def uniform_sampler(n_theta: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    def draw(rng, n):
        return rng.uniform(-1.0, 1.0, (n, n_theta))

    return draw


def point_sampler(theta) -> Callable[[np.random.Generator, int], np.ndarray]:
    t = np.asarray(theta, dtype=float)

    def draw(rng, n):
        return np.tile(t, (n, 1))

    return draw


def sobol_distribution(split: SplitIndexSet, coefficients, subset, order: Order | str, theta_sampler, n: int,
                       seed: int) -> SobolSample:
    """Conditional index at ``n`` sampled theta; NaN draws are excluded."""
    if n < 1:
        raise DomainError("n must be positive")
    rng = np.random.default_rng(seed)
    theta = np.asarray(theta_sampler(rng, n), dtype=float).reshape(n, split.n_theta)
    vals = ConditionalSobol(split, coefficients, subset, order)(theta)
    ok = ~np.isnan(vals)
    return SobolSample(vals[ok], int(np.sum(~ok)))
