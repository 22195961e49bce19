"""Sparse polynomial chaos regression.

Coefficients are fitted by least squares through orthogonal factorizations
(never the normal equations). Sparse bases come from a hybrid LARS: the
least-angle path only decides the order in which regressors enter, every
path point is re-fitted by OLS and scored by the corrected leave-one-out
error, and the best path point wins.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateDesign, DegenerateValidation, DimensionMismatch, DomainError, RankDeficient
from .polynomials import MultiIndexSet, UnivariateBasis, evaluate_basis, hyperbolic_index_set

log = logging.getLogger(__name__)

LOO_FLOOR = 1e-14
PRUNE_RTOL = 1e-10
_PREDICT_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class ExperimentalDesign:
    """Regression rows in standardized coordinates.

    Rows sharing a ``run_id`` come from the same model evaluation.
    """

    points: np.ndarray
    responses: np.ndarray
    run_ids: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        y = np.asarray(self.responses, dtype=float).ravel()
        ids = np.arange(len(y)) if self.run_ids is None else np.asarray(self.run_ids, dtype=np.int64).ravel()
        if pts.shape[0] != y.shape[0] or ids.shape[0] != y.shape[0]:
            raise DimensionMismatch("points, responses and run_ids must have the same length")
        if pts.shape[0] == 0:
            raise DimensionMismatch("experimental design is empty")
        for arr in (pts, y, ids):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "run_ids", ids)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_runs(self) -> int:
        return int(np.unique(self.run_ids).size)


@dataclass(frozen=True)
class PceConfig:
    p_max: int = 10
    q: float = 1.0
    selection: str = "lars"
    loo_target: float = 0.0
    candidate_factor: int = 5
    patience: int = 10

    def __post_init__(self):
        if self.p_max < 1:
            raise DomainError("p_max must be >= 1")
        if not (0 < self.q <= 1):
            raise DomainError("q must lie in (0, 1]")
        if self.selection not in ("lars", "ols"):
            raise DomainError(f"unknown selection {self.selection!r}")


@dataclass(frozen=True, eq=False)
class PceModel:
    index_set: MultiIndexSet
    coefficients: np.ndarray
    bases: tuple[UnivariateBasis, ...]
    aleatory: tuple[int, ...] = None  # type: ignore[assignment]
    epistemic: tuple[int, ...] = ()
    loo: float = float("nan")
    loo_corrected: float = float("nan")
    degree: int | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float).ravel()
        if coef.shape[0] != len(self.index_set):
            raise DimensionMismatch("one coefficient per multi-index is required")
        if len(self.bases) != self.index_set.dim:
            raise DimensionMismatch("one basis per dimension is required")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "bases", tuple(self.bases))
        if self.aleatory is None:
            object.__setattr__(self, "aleatory", tuple(d for d in range(self.index_set.dim) if d not in self.epistemic))

    @property
    def dim(self) -> int:
        return self.index_set.dim

    @property
    def mean(self) -> float:
        z = self.index_set.zero_position()
        return 0.0 if z is None else float(self.coefficients[z])

    @property
    def variance(self) -> float:
        nz = self.index_set.alphas.any(axis=1)
        return float(np.sum(self.coefficients[nz] ** 2))

    def predict(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(points.shape[0])
        for s in range(0, points.shape[0], _PREDICT_CHUNK):
            chunk = points[s : s + _PREDICT_CHUNK]
            out[s : s + _PREDICT_CHUNK] = evaluate_basis(self.index_set, self.bases, chunk) @ self.coefficients
        return out


def information_matrix(design: ExperimentalDesign, index_set: MultiIndexSet, bases) -> np.ndarray:
    if len(index_set) == 0:
        raise DimensionMismatch("index set is empty")
    if design.dim != index_set.dim:
        raise DimensionMismatch(f"design has {design.dim} columns, index set {index_set.dim}")
    return evaluate_basis(index_set, bases, design.points)


def _rank_tol(R: np.ndarray, shape) -> float:
    return max(shape) * np.finfo(float).eps * (abs(R[0, 0]) if R.size else 0.0) * 10


def ols_fit(F, Y) -> np.ndarray:
    """Least-squares coefficients by column-pivoted QR.

    Raises :class:`RankDeficient` when ``F`` lacks full column rank.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    Y = np.asarray(Y, dtype=float).ravel()
    n, p = F.shape
    if n != Y.shape[0]:
        raise DimensionMismatch("F and Y row counts differ")
    if n < p:
        raise RankDeficient(f"{n} rows cannot determine {p} coefficients")
    Q, R, piv = sla.qr(F, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if p and (diag[0] == 0 or np.any(diag < _rank_tol(R, F.shape))):
        raise RankDeficient(f"information matrix is rank deficient ({int(np.sum(diag >= _rank_tol(R, F.shape)))} < {p})")
    sol = sla.solve_triangular(R, Q.T @ Y)
    coef = np.empty(p)
    coef[piv] = sol
    return coef


def _hat_diagonal(F: np.ndarray) -> np.ndarray:
    Q, _ = np.linalg.qr(F)
    return np.einsum("ij,ij->i", Q, Q)


def _loo_from(F, Y, coef, corrected: bool) -> float:
    n, p = F.shape
    h = _hat_diagonal(F)
    if np.any(h >= 1.0 - 1e-12):
        raise DegenerateDesign("a hat-matrix diagonal entry reaches 1; leave-one-out is undefined")
    res = Y - F @ coef
    var = np.var(Y, ddof=1) if n > 1 else 0.0
    if var <= 0:
        return 0.0 if np.allclose(res, 0) else math.inf
    err = float(np.mean((res / (1.0 - h)) ** 2) / var)
    if corrected:
        if n <= p:
            return math.inf
        Rinv = sla.solve_triangular(np.linalg.qr(F, mode="r"), np.eye(p))
        err *= n / (n - p) * (1.0 + float(np.sum(Rinv**2)))
    return err


def loo_error(model: PceModel, design: ExperimentalDesign, corrected: bool = False) -> float:
    """Leave-one-out error relative to the response variance.

    Uses the hat-matrix shortcut ``e_i = r_i / (1 - h_i)``. With
    ``corrected=True`` the result is inflated by the small-sample factor
    ``N / (N - P) * (1 + tr((F'F)^-1))``.
    """
    F = information_matrix(design, model.index_set, model.bases)
    return _loo_from(F, design.responses, model.coefficients, corrected)


def rel_gen_error(model: PceModel, validation_points, validation_responses) -> float:
    w = np.asarray(validation_responses, dtype=float).ravel()
    if w.size < 2:
        raise DegenerateValidation("need at least two validation points")
    denom = float(np.sum((w - w.mean()) ** 2))
    if denom <= 0:
        raise DegenerateValidation("validation responses have zero variance")
    pred = model.predict(validation_points)
    return float(np.sum((w - pred) ** 2) / denom)


def _cap_candidates(cand: MultiIndexSet, limit: int, q: float) -> MultiIndexSet:
    if len(cand) <= limit:
        return cand
    qn = np.round(cand.q_norm(q), 12)
    order = np.lexsort((np.arange(len(cand)), cand.total_degree(), qn))
    keep = np.sort(order[:limit])
    log.info("candidate set truncated from %d to %d terms", len(cand), limit)
    return cand.subset(keep)


def _lars_path(F: np.ndarray, y: np.ndarray, zero: int, patience: int):
    """Run LAR over the non-constant columns of ``F``.

    Returns the list of active column sets along the path (each including
    ``zero``) together with corrected and plain LOO errors of the OLS
    re-fit at each point.
    """
    n, p = F.shape
    var_y = np.var(y, ddof=1) if n > 1 else 0.0
    cols = np.array([j for j in range(p) if j != zero], dtype=np.int64)

    # Gram-Schmidt basis of the selected raw columns, starting with the constant
    f0 = F[:, zero]
    n0 = np.linalg.norm(f0)
    Q = np.empty((n, min(n, p)), order="F")
    Q[:, 0] = f0 / n0
    R = np.zeros((min(n, p), min(n, p)))
    R[0, 0] = n0
    Rinv_fro = 1.0 / n0**2
    qty = Q[:, 0] @ y
    resid = y - Q[:, 0] * qty
    hat = Q[:, 0] ** 2
    k = 1

    Xc = F[:, cols] - F[:, cols].mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    eligible = norms > 1e-12 * max(1.0, norms.max(initial=0.0))
    Xn = np.divide(Xc, np.where(eligible, norms, 1.0))
    corr = Xn.T @ (y - y.mean())
    c0 = np.max(np.abs(corr[eligible]), initial=0.0)

    active: list[int] = []  # positions in cols
    XA = np.empty((n, min(n, p)), order="F")  # normalized active columns
    inactive = eligible.copy()
    L = np.zeros((0, 0))

    def score():
        if np.any(hat >= 1.0 - 1e-12) or n <= k or var_y <= 0:
            return math.inf, math.inf
        plain = float(np.mean((resid / (1.0 - hat)) ** 2) / var_y)
        return plain * n / (n - k) * (1.0 + Rinv_fro), plain

    steps = [([zero], *score())]
    best = steps[0][1]
    since_best = 0
    max_steps = min(int(eligible.sum()), n - 2)
    while len(active) < max_steps and inactive.any():
        C = np.max(np.abs(corr[inactive]))
        if C <= 1e-12 * c0:
            break
        j = int(np.flatnonzero(inactive & (np.abs(corr) >= C - 1e-14 * max(C, 1.0)))[0])
        inactive[j] = False

        # orthogonalize the raw column against the current selection
        f = F[:, cols[j]]
        Qk = Q[:, :k]
        r1 = Qk.T @ f
        v = f - Qk @ r1
        r2 = Qk.T @ v
        v -= Qk @ r2
        rcol = r1 + r2
        rho = np.linalg.norm(v)
        if rho <= 1e-10 * np.linalg.norm(f):
            continue  # numerically dependent on the active set

        # Cholesky update of the normalized Gram matrix
        x = Xn[:, j]
        if active:
            g = XA[:, : len(active)].T @ x
            lvec = sla.solve_triangular(L, g, lower=True)
            d2 = 1.0 - lvec @ lvec
        else:
            lvec = np.zeros(0)
            d2 = 1.0
        if d2 <= 1e-14:
            continue
        Lnew = np.zeros((len(active) + 1, len(active) + 1))
        Lnew[:-1, :-1] = L
        Lnew[-1, :-1] = lvec
        Lnew[-1, -1] = math.sqrt(d2)
        L = Lnew
        XA[:, len(active)] = x
        active.append(j)

        q = v / rho
        Q[:, k] = q
        R[:k, k] = rcol
        R[k, k] = rho
        Rinv_col = -sla.solve_triangular(R[:k, :k], rcol) / rho
        Rinv_fro += float(Rinv_col @ Rinv_col) + 1.0 / rho**2
        qy = q @ y
        resid = resid - q * qy
        hat = hat + q * q
        k += 1

        loo_c, loo_p = score()
        steps.append(([zero] + [int(cols[a]) for a in active], loo_c, loo_p))
        if loo_c < best:
            best, since_best = loo_c, 0
        else:
            since_best += 1
        if best <= LOO_FLOOR or since_best >= max(patience, int(math.ceil(0.1 * max_steps))):
            break

        # equiangular step
        s = np.sign(corr[active])
        Ginv_s = sla.cho_solve((L, True), s)
        A = 1.0 / math.sqrt(float(s @ Ginv_s))
        w = A * Ginv_s
        u = XA[:, : len(active)] @ w
        a = Xn.T @ u
        if inactive.any():
            ci, ai = corr[inactive], a[inactive]
            with np.errstate(divide="ignore", invalid="ignore"):
                g1 = (C - ci) / (A - ai)
                g2 = (C + ci) / (A + ai)
            cand = np.concatenate([g1[g1 > 1e-15], g2[g2 > 1e-15]])
            gamma = min(cand.min(initial=math.inf), C / A)
        else:
            gamma = C / A
        corr = corr - gamma * a
    return steps


def lars_select(design: ExperimentalDesign, candidate_set: MultiIndexSet, bases, config: PceConfig | None = None,
                **layout) -> PceModel:
    """Hybrid LARS over ``candidate_set`` scored by corrected LOO."""
    config = config or PceConfig()
    cand = candidate_set
    if cand.zero_position() is None:
        cand = MultiIndexSet(np.vstack([np.zeros((1, cand.dim), dtype=np.int64), cand.alphas]))
    cand = _cap_candidates(cand, config.candidate_factor * len(design), config.q)
    F = information_matrix(design, cand, bases)
    y = design.responses
    zero = cand.zero_position()
    steps = _lars_path(F, y, zero, config.patience)
    scores = np.array([max(s[1], LOO_FLOOR) for s in steps])
    best = int(np.argmin(scores))
    # cand is graded-lex sorted, so sorted column positions keep that order
    sel = sorted(steps[best][0])
    subset = cand.subset(sel)
    Fs = F[:, sel]
    coef = ols_fit(Fs, y)
    loo_c = _loo_from(Fs, y, coef, corrected=True)
    # path points carry along terms whose OLS coefficient is round-off;
    # drop them when doing so does not hurt the corrected LOO
    tiny = np.abs(coef) <= PRUNE_RTOL * np.max(np.abs(coef))
    tiny[sel.index(zero)] = False
    if tiny.any():
        keep = [c for c, t in zip(sel, tiny) if not t]
        coef_k = ols_fit(F[:, keep], y)
        loo_k = _loo_from(F[:, keep], y, coef_k, corrected=True)
        if max(loo_k, LOO_FLOOR) <= max(loo_c, LOO_FLOOR):
            sel, coef, loo_c = keep, coef_k, loo_k
            subset = cand.subset(sel)
            Fs = F[:, sel]
    loo = _loo_from(Fs, y, coef, corrected=False)
    return PceModel(
        subset,
        coef,
        tuple(bases),
        loo=loo,
        loo_corrected=loo_c,
        diagnostics={"path_length": len(steps), "n_candidates": len(cand)},
        **layout,
    )


def ols_model(design: ExperimentalDesign, index_set: MultiIndexSet, bases, **layout) -> PceModel:
    F = information_matrix(design, index_set, bases)
    coef = ols_fit(F, design.responses)
    return PceModel(
        index_set,
        coef,
        tuple(bases),
        loo=_loo_from(F, design.responses, coef, False),
        loo_corrected=_loo_from(F, design.responses, coef, True),
        **layout,
    )


def degree_adaptive_fit(design: ExperimentalDesign, bases: Sequence[UnivariateBasis], p_max: int | None = None,
                        q: float | None = None, config: PceConfig | None = None, **layout) -> PceModel:
    """Fit for ``p = 1 .. p_max`` and keep the lowest corrected LOO.

    Stops after two consecutive degradations or once the LOO target is met.
    """
    config = config or PceConfig()
    p_max = config.p_max if p_max is None else p_max
    q = config.q if q is None else q
    if p_max < 1:
        raise DomainError("p_max must be >= 1")
    M = design.dim
    best = None
    prev = math.inf
    worse = 0
    history = []
    for p in range(1, p_max + 1):
        cand = hyperbolic_index_set(M, p, q)
        try:
            if config.selection == "ols":
                model = ols_model(design, cand, bases, **layout)
            else:
                model = lars_select(design, cand, bases, config, **layout)
        except (RankDeficient, DegenerateDesign) as exc:
            log.info("degree %d skipped: %s", p, exc)
            history.append((p, math.inf))
            worse += 1
            if worse >= 2 and best is not None:
                break
            continue
        score = max(model.loo_corrected, LOO_FLOOR)
        history.append((p, model.loo_corrected))
        log.debug("degree %d: %d terms, corrected LOO %.3e", p, len(model.index_set), model.loo_corrected)
        if best is None or score < max(best.loo_corrected, LOO_FLOOR):
            best = PceModel(model.index_set, model.coefficients, model.bases, model.aleatory, model.epistemic,
                            model.loo, model.loo_corrected, p, dict(model.diagnostics))
        worse = worse + 1 if score > prev else 0
        prev = score
        if worse >= 2 or score <= max(config.loo_target, LOO_FLOOR):
            break
    if best is None:
        raise RankDeficient("no polynomial degree could be fitted on this design")
    best.diagnostics["degree_history"] = history
    return best
