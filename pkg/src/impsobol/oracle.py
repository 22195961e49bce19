"""Brute-force Monte Carlo references.

Sample matrices: ``A`` and ``B`` are independent ``(n, M)`` draws and
``AB_i`` is ``A`` with column ``i`` taken from ``B``. ``B`` and ``AB_i``
share only ``x_i`` (first order, Janon's estimator); ``A`` and ``AB_i``
differ only in ``x_i`` (total order, Jansen's estimator). Standard errors
come from the delta method on the per-sample statistics.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import distributions as dist
from .distributions import Family, ParametricPBox
from .errors import DomainError

log = logging.getLogger(__name__)

COST_WARNING = 1e7


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n: int


def _unit(rng: np.random.Generator, shape) -> np.ndarray:
    # open interval (0, 1) so inverse CDFs stay finite
    return (rng.integers(0, 2**53, size=shape) + 0.5) / 2.0**53


def _sample(marginals, rng, n) -> np.ndarray:
    U = _unit(rng, (n, len(marginals)))
    cols = [dist.inv_cdf(Family(fam), U[:, k], theta) for k, (fam, theta) in enumerate(marginals)]
    return np.column_stack(cols)


def _delta(stats: np.ndarray, grad: np.ndarray) -> float:
    n = stats.shape[0]
    cov = np.atleast_2d(np.cov(stats, rowvar=False))
    return float(np.sqrt(max(grad @ cov @ grad, 0.0) / n))


def _janon(yb, yab) -> McEstimate:
    n = yb.size
    z = np.column_stack([yb * yab, 0.5 * (yb + yab), 0.5 * (yb**2 + yab**2)])
    a, b, c = z.mean(axis=0)
    den = c - b * b
    if den <= 0:
        return McEstimate(float("nan"), float("nan"), n)
    val = (a - b * b) / den
    grad = np.array([1.0 / den, -2.0 * b * (1.0 - val) / den, -val / den])
    return McEstimate(float(val), _delta(z, grad), n)


def _jansen(ya, yab) -> McEstimate:
    n = ya.size
    z = np.column_stack([0.5 * (ya - yab) ** 2, ya, ya**2])
    a, b, c = z.mean(axis=0)
    den = c - b * b
    if den <= 0:
        return McEstimate(float("nan"), float("nan"), n)
    val = a / den
    grad = np.array([1.0 / den, 2.0 * b * val / den, -val / den])
    return McEstimate(float(val), _delta(z, grad), n)


def sobol_mc_all(model: Callable, marginals: Sequence, n: int, seed: int) -> list[tuple[McEstimate, McEstimate]]:
    """First and total indices of every input at ``n * (M + 2)`` model calls.

    ``marginals`` lists ``(family, native_params)`` per input.
    """
    if n < 1000:
        raise DomainError("Monte Carlo sample size must be at least 1000")
    rng = np.random.default_rng(seed)
    M = len(marginals)
    A = _sample(marginals, rng, n)
    B = _sample(marginals, rng, n)
    ya = np.asarray(model(A), dtype=float)
    yb = np.asarray(model(B), dtype=float)
    out = []
    for i in range(M):
        ABi = A.copy()
        ABi[:, i] = B[:, i]
        yab = np.asarray(model(ABi), dtype=float)
        out.append((_janon(yb, yab), _jansen(ya, yab)))
    return out


def sobol_mc(model: Callable, marginals: Sequence, i: int, n: int, seed: int) -> tuple[McEstimate, McEstimate]:
    """First and total index of input ``i``."""
    if not 0 <= i < len(marginals):
        raise DomainError(f"input {i} is outside 0..{len(marginals) - 1}")
    return sobol_mc_all(model, marginals, n, seed)[i]


def marginals_at(pboxes: Sequence[ParametricPBox], thetas: Sequence) -> list:
    """Native-parameter marginals for full hyper-parameter vectors."""
    out = []
    for pb, th in zip(pboxes, thetas):
        p1, p2 = pb.native(np.asarray(th, dtype=float))
        out.append((pb.family, (float(p1), float(p2))))
    return out


@dataclass(frozen=True)
class DoubleLoopInterval:
    lower: float
    upper: float
    std_error: float


@dataclass(frozen=True)
class DoubleLoopResult:
    first: list[DoubleLoopInterval]
    total: list[DoubleLoopInterval]
    n_cells: int
    model_calls: int


def _axes(pboxes: Sequence[ParametricPBox], grid) -> list[list[np.ndarray]]:
    """Per input, per parameter grid values (degenerate parameters fixed)."""
    out = []
    flat = None if isinstance(grid, (int, np.integer)) else list(grid)
    pos = 0
    for pb in pboxes:
        axes = []
        for k, (lo, hi) in enumerate(zip(pb.box.lower, pb.box.upper)):
            if hi <= lo:
                axes.append(np.array([lo]))
                continue
            if flat is None:
                pts = int(grid)
                if pts < 3:
                    raise DomainError("grid resolution must be at least 3 per parameter")
                axes.append(np.linspace(lo, hi, pts))
            else:
                ax = np.sort(np.asarray(flat[pos], dtype=float))
                pos += 1
                if ax.size < 3 or ax[0] > lo or ax[-1] < hi:
                    raise DomainError("explicit grids need at least 3 points including both interval ends")
                axes.append(ax)
        out.append(axes)
    return out


def imprecise_sobol_doubleloop(model: Callable, pboxes: Sequence[ParametricPBox], theta_grid=5,
                               n_inner: int = 10_000, seed: int = 0) -> DoubleLoopResult:
    """Min/max of Monte Carlo Sobol' indices over a full-factorial theta grid.

    ``theta_grid`` is a point count per epistemic parameter or an explicit
    list of grids, one per epistemic parameter in input order. Every cell
    reuses the same seed (common random numbers).
    """
    axes = _axes(pboxes, theta_grid)
    per_input = [list(itertools.product(*a)) for a in axes]
    cells = list(itertools.product(*per_input))
    M = len(pboxes)
    calls = len(cells) * n_inner * (M + 2)
    if calls > COST_WARNING:
        log.warning("double loop needs %.3g model calls", calls)
    lo_f = np.full(M, np.inf)
    hi_f = np.full(M, -np.inf)
    lo_t = np.full(M, np.inf)
    hi_t = np.full(M, -np.inf)
    se_f = np.zeros(M)
    se_t = np.zeros(M)
    for cell in cells:
        est = sobol_mc_all(model, marginals_at(pboxes, cell), n_inner, seed)
        for i, (f, t) in enumerate(est):
            lo_f[i], hi_f[i] = min(lo_f[i], f.value), max(hi_f[i], f.value)
            lo_t[i], hi_t[i] = min(lo_t[i], t.value), max(hi_t[i], t.value)
            se_f[i] = max(se_f[i], f.std_error)
            se_t[i] = max(se_t[i], t.std_error)
    first = [DoubleLoopInterval(float(lo_f[i]), float(hi_f[i]), float(se_f[i])) for i in range(M)]
    total = [DoubleLoopInterval(float(lo_t[i]), float(hi_t[i]), float(se_t[i])) for i in range(M)]
    return DoubleLoopResult(first, total, len(cells), calls)
