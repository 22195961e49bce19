"""Marginal distribution families and parametric probability-boxes.

Low-level functions (:func:`cdf`, :func:`inv_cdf`, :func:`pdf`) take the
*native* parameters of a family:

========== =================== ==================
family     native parameters   support
========== =================== ==================
gaussian   (mu, sigma)         (-inf, inf)
lognormal  (lambda, zeta)      (0, inf)
gumbel     (loc, scale)        (-inf, inf)
weibull    (scale, shape)      (0, inf)
uniform    (a, b)              [a, b]
========== =================== ==================

A :class:`ParametricPBox` attaches interval-valued hyper-parameters to a
family, possibly expressed in another parameterization (mean/std), and
converts to native parameters on demand.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import DomainError, InvalidParams

EULER_GAMMA = 0.5772156649015329


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LOGNORMAL = "lognormal"
    GUMBEL = "gumbel"
    WEIBULL = "weibull"
    UNIFORM = "uniform"


class Parameterization(str, Enum):
    MEAN_STD = "mean_std"
    NATIVE = "native"
    SUPPORT_BOUNDS = "support_bounds"


NATIVE_NAMES = {
    Family.GAUSSIAN: ("mu", "sigma"),
    Family.LOGNORMAL: ("lambda", "zeta"),
    Family.GUMBEL: ("loc", "scale"),
    Family.WEIBULL: ("scale", "shape"),
    Family.UNIFORM: ("a", "b"),
}

DEFAULT_PARAMETERIZATION = {
    Family.GAUSSIAN: Parameterization.MEAN_STD,
    Family.LOGNORMAL: Parameterization.MEAN_STD,
    Family.GUMBEL: Parameterization.MEAN_STD,
    Family.WEIBULL: Parameterization.NATIVE,
    Family.UNIFORM: Parameterization.SUPPORT_BOUNDS,
}


def param_names(family: Family, parameterization: Parameterization) -> tuple[str, str]:
    if parameterization is Parameterization.MEAN_STD:
        return ("mean", "std")
    if parameterization is Parameterization.SUPPORT_BOUNDS:
        if family is not Family.UNIFORM:
            raise InvalidParams(f"support_bounds parameterization is only defined for uniform, not {family.value}")
        return ("a", "b")
    return NATIVE_NAMES[family]


def _check_native(family: Family, p1, p2) -> None:
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise InvalidParams(f"{family.value}: non-finite parameters")
    if family is Family.UNIFORM:
        if np.any(p1 >= p2):
            raise InvalidParams("uniform requires a < b")
    elif family is Family.WEIBULL:
        if np.any(p1 <= 0) or np.any(p2 <= 0):
            raise InvalidParams("weibull requires scale > 0 and shape > 0")
    elif np.any(p2 <= 0):
        raise InvalidParams(f"{family.value} requires a positive scale parameter")


def support(family: Family, theta: Sequence[float]) -> tuple[float, float]:
    """Support interval of ``family`` at native parameters ``theta``."""
    family = Family(family)
    p1, p2 = float(theta[0]), float(theta[1])
    _check_native(family, p1, p2)
    if family is Family.UNIFORM:
        return (p1, p2)
    if family in (Family.LOGNORMAL, Family.WEIBULL):
        return (0.0, math.inf)
    return (-math.inf, math.inf)


def cdf(family: Family, x, theta):
    """Conditional CDF ``F(x | theta)``; ``theta`` holds native parameters.

    Broadcasts over ``x`` and over array-valued parameters.
    """
    family = Family(family)
    p1 = np.asarray(theta[0], dtype=float)
    p2 = np.asarray(theta[1], dtype=float)
    _check_native(family, p1, p2)
    x = np.asarray(x, dtype=float)
    if family is Family.GAUSSIAN:
        out = special.ndtr((x - p1) / p2)
    elif family is Family.LOGNORMAL:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.where(x > 0, x, 1.0)) - p1) / p2
        out = np.where(x > 0, special.ndtr(z), 0.0)
    elif family is Family.GUMBEL:
        with np.errstate(over="ignore"):
            out = np.exp(-np.exp(-(x - p1) / p2))
    elif family is Family.WEIBULL:
        xs = np.where(x > 0, x, 0.0)
        out = np.where(x > 0, -np.expm1(-((xs / p1) ** p2)), 0.0)
    else:
        out = np.clip((x - p1) / (p2 - p1), 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def inv_cdf(family: Family, p, theta):
    """Quantile function, inverse of :func:`cdf` on ``p`` in (0, 1)."""
    family = Family(family)
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0) | ~(p < 1.0)):
        raise DomainError("probabilities must lie strictly inside (0, 1)")
    p1 = np.asarray(theta[0], dtype=float)
    p2 = np.asarray(theta[1], dtype=float)
    _check_native(family, p1, p2)
    if family is Family.GAUSSIAN:
        out = p1 + p2 * special.ndtri(p)
    elif family is Family.LOGNORMAL:
        out = np.exp(p1 + p2 * special.ndtri(p))
    elif family is Family.GUMBEL:
        out = p1 - p2 * np.log(-np.log(p))
    elif family is Family.WEIBULL:
        out = p1 * (-np.log1p(-p)) ** (1.0 / p2)
    else:
        out = p1 + p * (p2 - p1)
    return out[()] if out.ndim == 0 else out


def pdf(family: Family, x, theta):
    family = Family(family)
    p1 = np.asarray(theta[0], dtype=float)
    p2 = np.asarray(theta[1], dtype=float)
    _check_native(family, p1, p2)
    x = np.asarray(x, dtype=float)
    if family is Family.GAUSSIAN:
        z = (x - p1) / p2
        out = np.exp(-0.5 * z * z) / (p2 * math.sqrt(2 * math.pi))
    elif family is Family.LOGNORMAL:
        xs = np.where(x > 0, x, 1.0)
        z = (np.log(xs) - p1) / p2
        out = np.where(x > 0, np.exp(-0.5 * z * z) / (xs * p2 * math.sqrt(2 * math.pi)), 0.0)
    elif family is Family.GUMBEL:
        z = (x - p1) / p2
        out = np.exp(-z - np.exp(-z)) / p2
    elif family is Family.WEIBULL:
        xs = np.where(x > 0, x, 1.0)
        r = xs / p1
        out = np.where(x > 0, (p2 / p1) * r ** (p2 - 1) * np.exp(-(r**p2)), 0.0)
    else:
        out = np.where((x >= p1) & (x <= p2), 1.0 / (p2 - p1), 0.0)
    return out[()] if out.ndim == 0 else out


def _weibull_shape_from_cv(cv: float) -> float:
    def gap(k):
        g1 = special.gammaln(1 + 1 / k)
        g2 = special.gammaln(1 + 2 / k)
        return math.sqrt(math.expm1(g2 - 2 * g1)) - cv

    return brentq(gap, 0.05, 500.0, xtol=1e-14)


def to_native(family: Family, parameterization: Parameterization, p1, p2):
    """Convert a parameter pair (scalars or arrays) to native parameters."""
    family = Family(family)
    parameterization = Parameterization(parameterization)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if parameterization is not Parameterization.MEAN_STD:
        param_names(family, parameterization)
        return p1, p2
    mean, std = p1, p2
    if np.any(std <= 0):
        raise InvalidParams("standard deviation must be positive")
    if family is Family.GAUSSIAN:
        return mean, std
    if family is Family.LOGNORMAL:
        if np.any(mean <= 0):
            raise InvalidParams("lognormal mean must be positive")
        zeta2 = np.log1p((std / mean) ** 2)
        return np.log(mean) - 0.5 * zeta2, np.sqrt(zeta2)
    if family is Family.GUMBEL:
        scale = std * math.sqrt(6.0) / math.pi
        return mean - EULER_GAMMA * scale, scale
    if family is Family.UNIFORM:
        half = math.sqrt(3.0) * std
        return mean - half, mean + half
    # weibull: shape from the coefficient of variation, then scale from the mean
    if np.any(mean <= 0):
        raise InvalidParams("weibull mean must be positive")
    cv = np.broadcast_to(std / mean, np.broadcast(mean, std).shape)
    shape = np.vectorize(_weibull_shape_from_cv, otypes=[float])(cv)
    scale = mean / np.exp(special.gammaln(1 + 1 / shape))
    return scale, shape


@dataclass(frozen=True)
class HyperParamBox:
    """Independent intervals ``[lower_k, upper_k]`` for named parameters."""

    names: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.names) == len(self.lower) == len(self.upper)):
            raise InvalidParams("box names and bounds differ in length")
        for n, lo, hi in zip(self.names, self.lower, self.upper):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InvalidParams(f"interval for {n} must be finite")
            if lo > hi:
                raise InvalidParams(f"interval for {n} has lower > upper ({lo} > {hi})")

    @property
    def epistemic(self) -> tuple[int, ...]:
        """Positions of the non-degenerate intervals."""
        return tuple(k for k, (lo, hi) in enumerate(zip(self.lower, self.upper)) if hi > lo)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lower) + np.array(self.upper))

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lower, self.upper))), dtype=float)

    def grid(self, n: int) -> np.ndarray:
        axes = [np.linspace(lo, hi, n) if hi > lo else np.array([lo]) for lo, hi in zip(self.lower, self.upper)]
        return np.array(list(itertools.product(*axes)), dtype=float)


@dataclass(frozen=True)
class ParametricPBox:
    """A distribution family whose two parameters range over a box."""

    family: Family
    box: HyperParamBox
    parameterization: Parameterization = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        par = self.parameterization
        par = DEFAULT_PARAMETERIZATION[self.family] if par is None else Parameterization(par)
        object.__setattr__(self, "parameterization", par)
        expected = param_names(self.family, par)
        if tuple(self.box.names) != expected:
            raise InvalidParams(f"{self.family.value}/{par.value} expects parameters {expected}, got {self.box.names}")
        # validity must hold over the whole box; corners cover the location-scale
        # constraints and the uniform a < b requirement
        pts = self.box.corners()
        p1, p2 = to_native(self.family, par, pts[:, 0], pts[:, 1])
        _check_native(self.family, p1, p2)

    @classmethod
    def from_params(
        cls,
        family: Family | str,
        params: Mapping[str, float | Sequence[float]],
        parameterization: Parameterization | str | None = None,
    ) -> "ParametricPBox":
        """Build from ``{name: value | [lower, upper]}``."""
        family = Family(family)
        par = DEFAULT_PARAMETERIZATION[family] if parameterization is None else Parameterization(parameterization)
        names = param_names(family, par)
        if set(params) != set(names):
            raise InvalidParams(f"{family.value}/{par.value} expects parameters {names}, got {sorted(params)}")
        lo, hi = [], []
        for n in names:
            v = params[n]
            if np.ndim(v) == 0:
                lo.append(float(v))
                hi.append(float(v))
            else:
                if len(v) != 2:
                    raise InvalidParams(f"interval for {n} must have two entries")
                lo.append(float(v[0]))
                hi.append(float(v[1]))
        return cls(family, HyperParamBox(names, tuple(lo), tuple(hi)), par)

    @classmethod
    def precise(cls, family: Family | str, p1: float, p2: float, parameterization=None) -> "ParametricPBox":
        family = Family(family)
        par = DEFAULT_PARAMETERIZATION[family] if parameterization is None else Parameterization(parameterization)
        names = param_names(family, par)
        return cls.from_params(family, {names[0]: p1, names[1]: p2}, par)

    @property
    def n_theta(self) -> int:
        return len(self.box.epistemic)

    def native(self, theta):
        """Native parameters for a full (two-entry) hyper-parameter vector."""
        theta = np.asarray(theta, dtype=float)
        return to_native(self.family, self.parameterization, theta[..., 0], theta[..., 1])

    def cdf(self, x, theta):
        return cdf(self.family, x, self.native(theta))

    def inv_cdf(self, p, theta):
        return inv_cdf(self.family, p, self.native(theta))

    def pdf(self, x, theta):
        return pdf(self.family, x, self.native(theta))

    def support(self, theta) -> tuple[float, float]:
        p1, p2 = self.native(theta)
        return support(self.family, (float(p1), float(p2)))

    def pinched(self) -> np.ndarray:
        """Interval midpoints."""
        return self.box.center

    def bounds(self, x, grid_points: int = 33):
        """Lower and upper CDF envelope at ``x``.

        Location-scale families (and Weibull in native parameters) are
        monotone in each parameter, so the extrema lie on box corners.
        Other cases add a dense grid to the corner set.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        corner_exact = self.parameterization is not Parameterization.MEAN_STD or self.family in (
            Family.GAUSSIAN,
            Family.GUMBEL,
            Family.UNIFORM,
        )
        pts = self.box.corners() if corner_exact else np.vstack([self.box.corners(), self.box.grid(grid_points)])
        p1, p2 = to_native(self.family, self.parameterization, pts[:, 0], pts[:, 1])
        vals = cdf(self.family, x[:, None], (p1[None, :], p2[None, :]))
        lo, hi = vals.min(axis=1), vals.max(axis=1)
        if lo.size == 1:
            return float(lo[0]), float(hi[0])
        return lo, hi


def pbox_bounds(pbox: ParametricPBox, x, grid_points: int = 33):
    return pbox.bounds(x, grid_points)
