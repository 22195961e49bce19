"""Augmented input space and phantom-point designs.

Each imprecise input ``X_i ~ F(. | theta_i)`` is written as
``X_i = T_i(theta_i, aux_i)`` with ``aux_i`` free of ``theta_i``. The
augmented vector stacks, per input, the standardized non-degenerate
hyper-parameters (uniform on [-1, 1]) followed by the auxiliary variable.

Phantom points reuse a model evaluation ``(chi, y)`` several times: for a
new hyper-parameter draw the auxiliary coordinate is solved so that the
transform returns exactly ``chi``. All replicates share ``y``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import special
from scipy.stats import qmc

from . import distributions as dist
from .distributions import Family, ParametricPBox
from .errors import DimensionMismatch, DomainError, InfeasibleBase
from .pce import ExperimentalDesign
from .polynomials import UnivariateBasis, gumbel, hermite, laguerre, legendre

log = logging.getLogger(__name__)

MAX_RETRIES = 1000


class AuxKind(str, Enum):
    STD_NORMAL = "std_normal"
    STD_GUMBEL = "std_gumbel"
    STD_EXPONENTIAL = "std_exponential"
    UNIT_UNIFORM = "unit_uniform"  # stored as v = 2c - 1 on [-1, 1]


DEFAULT_AUX = {
    Family.GAUSSIAN: AuxKind.STD_NORMAL,
    Family.LOGNORMAL: AuxKind.STD_NORMAL,
    Family.GUMBEL: AuxKind.STD_GUMBEL,
    Family.WEIBULL: AuxKind.STD_EXPONENTIAL,
    Family.UNIFORM: AuxKind.UNIT_UNIFORM,
}


def aux_basis(kind: AuxKind) -> UnivariateBasis:
    return {
        AuxKind.STD_NORMAL: hermite,
        AuxKind.STD_GUMBEL: gumbel,
        AuxKind.STD_EXPONENTIAL: laguerre,
        AuxKind.UNIT_UNIFORM: legendre,
    }[AuxKind(kind)]()


@dataclass(frozen=True)
class AugmentedInput:
    """One imprecise input with its auxiliary-variable choice.

    ``aux="unit_uniform"`` selects the CDF transform ``X = F^-1(c | theta)``
    for any family; otherwise the family's own standard variable is used.
    """

    name: str
    pbox: ParametricPBox
    aux: AuxKind = None  # type: ignore[assignment]

    def __post_init__(self):
        aux = DEFAULT_AUX[self.pbox.family] if self.aux is None else AuxKind(self.aux)
        if aux is not AuxKind.UNIT_UNIFORM and aux is not DEFAULT_AUX[self.pbox.family]:
            raise DomainError(f"{aux.value} is not an auxiliary variable for {self.pbox.family.value}")
        object.__setattr__(self, "aux", aux)

    @property
    def theta_params(self) -> tuple[int, ...]:
        return self.pbox.box.epistemic

    @property
    def bounded(self) -> bool:
        return self.pbox.family is Family.UNIFORM


@dataclass(frozen=True)
class DimInfo:
    input: int
    role: str  # "theta" or "aux"
    param: int | None = None

    def label(self, inputs: Sequence[AugmentedInput]) -> str:
        inp = inputs[self.input]
        if self.role == "aux":
            return f"{inp.name}.aux"
        return f"{inp.name}.{inp.pbox.box.names[self.param]}"


class AugmentedSpace:
    """Layout, bases and transforms of the augmented vector ``V``."""

    def __init__(self, inputs: Sequence[AugmentedInput]):
        if not inputs:
            raise DimensionMismatch("at least one input is required")
        self.inputs = tuple(inputs)
        dims = []
        for i, inp in enumerate(self.inputs):
            dims += [DimInfo(i, "theta", k) for k in inp.theta_params]
            dims.append(DimInfo(i, "aux"))
        self.dims = tuple(dims)
        self.aleatory = tuple(d for d, info in enumerate(dims) if info.role == "aux")
        self.epistemic = tuple(d for d, info in enumerate(dims) if info.role == "theta")
        self.bases = tuple(aux_basis(self.inputs[info.input].aux) if info.role == "aux" else legendre() for info in dims)
        self.labels = tuple(info.label(self.inputs) for info in dims)

    @classmethod
    def from_pboxes(cls, pboxes: Sequence[ParametricPBox], names=None, aux=None) -> "AugmentedSpace":
        names = names or [f"x{i + 1}" for i in range(len(pboxes))]
        aux = aux or [None] * len(pboxes)
        return cls([AugmentedInput(n, p, a) for n, p, a in zip(names, pboxes, aux)])

    @property
    def n_aug(self) -> int:
        return len(self.dims)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def n_theta(self) -> int:
        return len(self.epistemic)

    @property
    def bounded(self) -> bool:
        return any(inp.bounded for inp in self.inputs)

    def theta_columns(self, i: int) -> list[int]:
        return [d for d in self.epistemic if self.dims[d].input == i]

    # -- hyper-parameters ----------------------------------------------------

    def theta_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical bounds of the epistemic coordinates, in layout order."""
        lo, hi = [], []
        for d in self.epistemic:
            box = self.inputs[self.dims[d].input].pbox.box
            k = self.dims[d].param
            lo.append(box.lower[k])
            hi.append(box.upper[k])
        return np.array(lo), np.array(hi)

    def theta_to_physical(self, theta_std) -> np.ndarray:
        lo, hi = self.theta_box()
        t = np.asarray(theta_std, dtype=float)
        return lo + 0.5 * (t + 1.0) * (hi - lo)

    def theta_to_standard(self, theta_phys) -> np.ndarray:
        lo, hi = self.theta_box()
        t = np.asarray(theta_phys, dtype=float)
        return 2.0 * (t - lo) / (hi - lo) - 1.0

    def hyperparameters(self, V: np.ndarray, i: int) -> np.ndarray:
        """Full ``(n, 2)`` hyper-parameter matrix of input ``i``."""
        inp = self.inputs[i]
        box = inp.pbox.box
        out = np.tile(np.array(box.lower, dtype=float), (V.shape[0], 1))
        for d in self.theta_columns(i):
            k = self.dims[d].param
            out[:, k] = box.lower[k] + 0.5 * (V[:, d] + 1.0) * (box.upper[k] - box.lower[k])
        return out

    def _native(self, V, i):
        th = self.hyperparameters(V, i)
        return self.inputs[i].pbox.native(th)

    # -- transforms ----------------------------------------------------------

    def forward(self, V) -> np.ndarray:
        """Physical inputs ``x = T(V)``, shape ``(n, n_inputs)``."""
        V = self._check(V)
        X = np.empty((V.shape[0], self.n_inputs))
        for i, inp in enumerate(self.inputs):
            p1, p2 = self._native(V, i)
            z = V[:, self.aleatory[i]]
            fam = inp.pbox.family
            if inp.aux is AuxKind.UNIT_UNIFORM:
                c = 0.5 * (z + 1.0)
                if fam is Family.UNIFORM:
                    X[:, i] = p1 + c * (p2 - p1)
                else:
                    X[:, i] = dist.inv_cdf(fam, c, (p1, p2))
            elif fam is Family.GAUSSIAN:
                X[:, i] = p1 + p2 * z
            elif fam is Family.LOGNORMAL:
                X[:, i] = np.exp(p1 + p2 * z)
            elif fam is Family.GUMBEL:
                X[:, i] = p1 + p2 * z
            else:  # weibull from a unit exponential
                X[:, i] = p1 * np.maximum(z, 0.0) ** (1.0 / p2)
        return X

    def solve_aux(self, V, X) -> np.ndarray:
        """Return ``V`` with aux coordinates set so that ``forward(V) == X``.

        Points outside the conditional support get NaN aux coordinates.
        """
        V = self._check(V).copy()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape != (V.shape[0], self.n_inputs):
            raise DimensionMismatch(f"expected physical points of shape ({V.shape[0]}, {self.n_inputs})")
        for i, inp in enumerate(self.inputs):
            p1, p2 = self._native(V, i)
            x = X[:, i]
            fam = inp.pbox.family
            with np.errstate(divide="ignore", invalid="ignore"):
                if inp.aux is AuxKind.UNIT_UNIFORM:
                    if fam is Family.UNIFORM:
                        c = (x - p1) / (p2 - p1)
                    else:
                        c = dist.cdf(fam, x, (p1, p2))
                    z = 2.0 * c - 1.0
                    z = np.where((z >= -1.0) & (z <= 1.0), z, np.nan)
                elif fam is Family.GAUSSIAN:
                    z = (x - p1) / p2
                elif fam is Family.LOGNORMAL:
                    z = np.where(x > 0, (np.log(x) - p1) / p2, np.nan)
                elif fam is Family.GUMBEL:
                    z = (x - p1) / p2
                else:
                    z = np.where(x >= 0, (x / p1) ** p2, np.nan)
            V[:, self.aleatory[i]] = z
        return V

    def from_unit(self, U) -> np.ndarray:
        """Map points of the unit hypercube onto ``V`` by inverse CDFs."""
        U = self._check(U)
        V = np.empty_like(U)
        for d, info in enumerate(self.dims):
            u = U[:, d]
            if info.role == "theta":
                V[:, d] = 2.0 * u - 1.0
                continue
            kind = self.inputs[info.input].aux
            if kind is AuxKind.STD_NORMAL:
                V[:, d] = special.ndtri(u)
            elif kind is AuxKind.STD_GUMBEL:
                V[:, d] = -np.log(-np.log(u))
            elif kind is AuxKind.STD_EXPONENTIAL:
                V[:, d] = -np.log1p(-u)
            else:
                V[:, d] = 2.0 * u - 1.0
        return V

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Monte Carlo sample of ``V`` (theta uniform, aux from its law)."""
        V = np.empty((n, self.n_aug))
        for d, info in enumerate(self.dims):
            kind = None if info.role == "theta" else self.inputs[info.input].aux
            if kind is AuxKind.STD_NORMAL:
                V[:, d] = rng.standard_normal(n)
            elif kind is AuxKind.STD_GUMBEL:
                V[:, d] = rng.gumbel(size=n)
            elif kind is AuxKind.STD_EXPONENTIAL:
                V[:, d] = rng.standard_exponential(n)
            else:
                V[:, d] = rng.uniform(-1.0, 1.0, n)
        return V

    def feasible(self, V, X) -> np.ndarray:
        """Rows whose physical point lies in the support at their theta."""
        V = self._check(V)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.ones(V.shape[0], dtype=bool)
        for i, inp in enumerate(self.inputs):
            if not inp.bounded:
                continue
            p1, p2 = self._native(V, i)
            ok &= (X[:, i] >= p1) & (X[:, i] <= p2)
        return ok

    def feasible_somewhere(self, x, grid: int = 17) -> bool:
        """Whether some theta in the box admits ``x`` (checked on a grid)."""
        for i, inp in enumerate(self.inputs):
            if not inp.bounded:
                continue
            pts = inp.pbox.box.grid(grid)
            p1, p2 = inp.pbox.native(pts)
            if not np.any((x[i] >= p1) & (x[i] <= p2)):
                return False
        return True

    def _check(self, V) -> np.ndarray:
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != self.n_aug:
            raise DimensionMismatch(f"augmented points need {self.n_aug} columns, got {V.shape[1]}")
        return V


def sample_design(space: AugmentedSpace, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Latin hypercube base design: returns ``(V, X)`` with ``X = T(V)``."""
    if n < 1:
        raise DomainError("design size must be positive")
    U = qmc.LatinHypercube(d=space.n_aug, seed=np.random.default_rng(seed)).random(n)
    V = space.from_unit(U)
    return V, space.forward(V)


@dataclass(frozen=True, eq=False)
class AugmentedDesign:
    """Phantom-augmented regression design.

    ``physical[r]`` is the model input behind row ``r`` and ``replicates[j]``
    counts the rows generated from base run ``j``.
    """

    design: ExperimentalDesign
    physical: np.ndarray
    replicates: np.ndarray
    n_skipped: int = 0

    @property
    def points(self) -> np.ndarray:
        return self.design.points

    @property
    def responses(self) -> np.ndarray:
        return self.design.responses

    @property
    def run_ids(self) -> np.ndarray:
        return self.design.run_ids

    def __len__(self) -> int:
        return len(self.design)


def _theta_draws(space: AugmentedSpace, count: int, seed: int, j: int, combine: str) -> np.ndarray:
    out = np.empty((count, space.n_theta))
    if count == 0 or space.n_theta == 0:
        return out
    if combine == "joint":
        sampler = qmc.LatinHypercube(d=space.n_theta, seed=np.random.default_rng([seed, j]))
        return 2.0 * sampler.random(count) - 1.0
    # independent Latin hypercubes per input block
    col = 0
    for i in range(space.n_inputs):
        w = len(space.theta_columns(i))
        if w:
            sampler = qmc.LatinHypercube(d=w, seed=np.random.default_rng([seed, j, i]))
            out[:, col : col + w] = 2.0 * sampler.random(count) - 1.0
            col += w
    return out


def generate_phantoms(
    space: AugmentedSpace,
    base_x,
    responses,
    n_ph: int,
    seed: int,
    base_v=None,
    combine: str = "joint",
    max_retries: int = MAX_RETRIES,
) -> AugmentedDesign:
    """Expand ``N`` evaluated points into up to ``N * n_ph`` regression rows.

    Replicate 1 of run ``j`` is ``base_v[j]`` when given. The remaining
    theta draws come from a Latin hypercube over the standardized box seeded
    by ``(seed, j)``; ``combine="independent"`` draws each input block
    separately. For bounded families an infeasible draw is resampled up to
    ``max_retries`` times and then dropped.
    """
    if n_ph < 1:
        raise DomainError("n_ph must be at least 1")
    if combine not in ("joint", "independent"):
        raise DomainError(f"unknown combination mode {combine!r}")
    X = np.atleast_2d(np.asarray(base_x, dtype=float))
    y = np.asarray(responses, dtype=float).ravel()
    if X.shape[0] != y.shape[0] or X.shape[1] != space.n_inputs:
        raise DimensionMismatch("base points and responses do not match the space")
    if base_v is not None:
        base_v = space._check(base_v)
        if base_v.shape[0] != X.shape[0]:
            raise DimensionMismatch("base_v and base_x differ in length")
    if space.n_theta == 0 and n_ph > 1:
        log.info("no epistemic dimensions; phantom replicates would duplicate rows")
        n_ph = 1

    rows, phys, ids, counts = [], [], [], np.zeros(X.shape[0], dtype=np.int64)
    skipped = 0
    lo_hi = np.array([-1.0, 1.0])
    for j in range(X.shape[0]):
        xj = X[j]
        if space.bounded and not space.feasible_somewhere(xj):
            raise InfeasibleBase(f"base point {j} lies outside every admissible support")
        n_draw = n_ph - 1 if base_v is not None else n_ph
        theta = _theta_draws(space, n_draw, seed, j, combine)
        V = np.zeros((n_draw, space.n_aug))
        V[:, list(space.epistemic)] = theta
        if base_v is not None:
            V = np.vstack([base_v[j : j + 1], V])
        Xrep = np.tile(xj, (V.shape[0], 1))
        V = space.solve_aux(V, Xrep)
        if base_v is not None:
            V[0] = base_v[j]  # the original point, bit for bit
        if space.bounded:
            ok = space.feasible(V, Xrep)
            if base_v is not None and not ok[0]:
                raise InfeasibleBase(f"base point {j} is outside the support at its own theta")
            rng = np.random.default_rng([seed, j, 7919])
            for r in np.flatnonzero(~ok):
                for _ in range(max_retries):
                    trial = V[r : r + 1].copy()
                    trial[0, list(space.epistemic)] = rng.uniform(*lo_hi, space.n_theta)
                    trial = space.solve_aux(trial, Xrep[:1])
                    if space.feasible(trial, Xrep[:1])[0]:
                        V[r], ok[r] = trial[0], True
                        break
            skipped += int(np.sum(~ok))
            V = V[ok]
        if V.shape[0] == 0:
            raise InfeasibleBase(f"no feasible replicate for base point {j}")
        rows.append(V)
        phys.append(np.tile(xj, (V.shape[0], 1)))
        ids.append(np.full(V.shape[0], j))
        counts[j] = V.shape[0]
    if skipped:
        log.warning("%d phantom replicates dropped after %d retries", skipped, max_retries)
    P = np.vstack(rows)
    design = ExperimentalDesign(P, np.repeat(y, counts), np.concatenate(ids))
    return AugmentedDesign(design, np.vstack(phys), counts, skipped)


def generate_phantoms_bounded(space: AugmentedSpace, base_x, responses, n_ph: int, seed: int, **kw) -> AugmentedDesign:
    """Phantom generation for spaces with at least one bounded family."""
    if not space.bounded:
        raise DomainError("no input has bounded support")
    return generate_phantoms(space, base_x, responses, n_ph, seed, **kw)
