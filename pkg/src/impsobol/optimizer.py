"""Seedable box-constrained global optimizer.

Differential evolution (rand/1/bin) with reflection at the box faces,
several independent restarts and a coordinate-wise golden-section polish.
Objectives may return NaN to mark excluded points; those rank worse than
any finite value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, OptimizationFailed

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 40
    generations: int = 200
    restarts: int = 4
    seed: int = 0
    tol: float = 1e-9
    stagnation: int = 30
    polish: bool = True
    mutation: float = 0.7
    crossover: float = 0.9

    def __post_init__(self):
        if self.population < 4:
            raise DomainError("population must be at least 4")
        if self.generations < 1 or self.restarts < 1 or self.stagnation < 1:
            raise DomainError("generations, restarts and stagnation must be positive")
        if self.tol <= 0:
            raise DomainError("tol must be positive")


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    trace: list[float] = field(default_factory=list)


def _as_batch(objective, vectorized: bool):
    if vectorized:
        def batch(X):
            return np.asarray(objective(X), dtype=float).reshape(X.shape[0])
    else:
        def batch(X):
            out = np.empty(X.shape[0])
            for i, row in enumerate(X):
                v = objective(row)
                out[i] = np.nan if v is None else float(v)
            return out
    return batch


def _rank_value(f: np.ndarray) -> np.ndarray:
    return np.where(np.isnan(f), np.inf, f)


def _reflect(v, lo, hi):
    v = np.where(v < lo, 2 * lo - v, v)
    v = np.where(v > hi, 2 * hi - v, v)
    return np.clip(v, lo, hi)


def _golden(fun, a, b, fa_best, iters=60):
    """Golden-section search on [a, b]; returns (x, f) of the best point seen."""
    best_x, best_f = None, fa_best
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for x_, f_ in ((c, fc), (d, fd)):
        if f_ < best_f:
            best_x, best_f = x_, f_
    for _ in range(iters):
        if b - a <= 1e-10 * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
            x_, f_ = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
            x_, f_ = d, fd
        if f_ < best_f:
            best_x, best_f = x_, f_
    return best_x, best_f


class _Counter:
    def __init__(self, batch):
        self.batch = batch
        self.nfev = 0

    def __call__(self, X):
        self.nfev += X.shape[0]
        return _rank_value(self.batch(X))


def _polish(f, x, fx, lo, hi, sweeps=3):
    x = x.copy()
    for _ in range(sweeps):
        improved = False
        for k in range(x.size):
            if hi[k] <= lo[k]:
                continue

            def along(t, k=k):
                y = x.copy()
                y[k] = t
                return float(f(y[None, :])[0])

            # faces first: extrema of ratio objectives often sit on them
            for t in (lo[k], hi[k]):
                ft = along(t)
                if ft < fx:
                    x[k], fx, improved = t, ft, True
            t, ft = _golden(along, lo[k], hi[k], fx)
            if t is not None and ft < fx:
                x[k], fx, improved = t, ft, True
        if not improved:
            break
    return x, fx


def _de_run(f, lo, hi, cfg: OptimizerConfig, rng: np.random.Generator, trace: list):
    d = lo.size
    n = cfg.population
    # stratified initial population
    strata = (np.argsort(rng.random((n, d)), axis=0) + rng.random((n, d))) / n
    pop = lo + strata * (hi - lo)
    fit = f(pop)
    best_hist = []
    for _ in range(cfg.generations):
        idx = np.arange(n)
        keys = rng.random((n, n))
        keys[idx, idx] = np.inf
        r = np.argsort(keys, axis=1)[:, :3]
        mutant = pop[r[:, 0]] + cfg.mutation * (pop[r[:, 1]] - pop[r[:, 2]])
        mutant = _reflect(mutant, lo, hi)
        cross = rng.random((n, d)) < cfg.crossover
        cross[idx, rng.integers(0, d, n)] = True
        trial = np.where(cross, mutant, pop)
        ft = f(trial)
        better = ft <= fit
        pop[better] = trial[better]
        fit[better] = ft[better]
        b = float(fit.min())
        best_hist.append(b)
        trace.append(min(trace[-1], b) if trace else b)
        w = cfg.stagnation
        if len(best_hist) > w and np.isfinite(b):
            if best_hist[-w - 1] - b <= cfg.tol * (1.0 + abs(b)):
                break
    i = int(np.argmin(fit))
    return pop[i].copy(), float(fit[i])


def minimize(objective: Callable, bounds, cfg: OptimizerConfig | None = None, *, vectorized: bool = False,
             stream: int = 0) -> OptimizeResult:
    """Global minimum of ``objective`` over the box ``bounds``.

    ``bounds`` is ``(lower, upper)`` or a sequence of ``(lo, hi)`` pairs.
    Each restart draws from its own seed stream ``(seed, stream, restart)``
    so a run with more restarts extends, never reshuffles, a shorter run.
    """
    cfg = cfg or OptimizerConfig()
    lo, hi = _parse_bounds(bounds)
    batch = _as_batch(objective, vectorized)
    f = _Counter(batch)
    trace: list[float] = []
    if lo.size == 0:
        v = f(np.zeros((1, 0)))[0]
        if not np.isfinite(v):
            raise OptimizationFailed("objective is excluded at the only admissible point")
        return OptimizeResult(np.zeros(0), float(v), f.nfev, [float(v)])
    best_x, best_f = None, math.inf
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(stream, r)))
        x, fx = _de_run(f, lo, hi, cfg, rng, trace)
        # polishing every restart keeps results monotone in the restart count
        if cfg.polish and np.isfinite(fx):
            x, fx = _polish(f, x, fx, lo, hi)
            trace.append(min(trace[-1], fx))
        if fx < best_f:
            best_x, best_f = x, fx
    if best_x is None or not np.isfinite(best_f):
        raise OptimizationFailed("every evaluated point was excluded")
    # re-evaluate so the reported value is exactly the objective at x
    fun = float(batch(best_x[None, :])[0])
    return OptimizeResult(best_x, fun, f.nfev, trace)


def maximize(objective: Callable, bounds, cfg: OptimizerConfig | None = None, *, vectorized: bool = False,
             stream: int = 1) -> OptimizeResult:
    """Global maximum; the negated problem on an independent seed stream."""
    batch = _as_batch(objective, vectorized)

    def neg(X):
        return -batch(X)

    res = minimize(neg, bounds, cfg, vectorized=True, stream=stream)
    return OptimizeResult(res.x, -res.fun, res.nfev, [-t for t in res.trace])


def _parse_bounds(bounds):
    arr = np.asarray(bounds, dtype=float)
    if arr.size == 0:
        return np.zeros(0), np.zeros(0)
    if arr.ndim == 2 and arr.shape[0] == 2 and arr.shape[1] != 2:
        lo, hi = arr[0], arr[1]
    elif arr.ndim == 2 and arr.shape[1] == 2:
        lo, hi = arr[:, 0], arr[:, 1]
    else:
        raise DomainError("bounds must be (lower, upper) arrays or (lo, hi) pairs")
    if np.any(lo > hi):
        raise DomainError("box has lower > upper")
    return lo.copy(), hi.copy()
