"""Test models: product function, SDOF oscillator and a bar-truss solver.

Every model is wrapped in :class:`TestModel`, which evaluates row-wise on
``(n, M)`` arrays and counts the number of evaluations.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from .distributions import ParametricPBox
from .errors import ConfigError, DimensionMismatch, InvalidParams, SingularStiffness, UnknownModel


@dataclass(frozen=True)
class InputSpec:
    """Default imprecise input for a bundled model."""

    name: str
    family: str
    params: Mapping[str, float | tuple[float, float]]
    parameterization: str | None = None

    def pbox(self) -> ParametricPBox:
        return ParametricPBox.from_params(self.family, dict(self.params), self.parameterization)


class TestModel:
    """Vectorized model ``f: R^M -> R`` with an evaluation counter."""

    __test__ = False  # keep pytest from collecting it

    def __init__(self, name: str, fn: Callable[[np.ndarray], np.ndarray], input_names: Sequence[str],
                 default_inputs: Sequence[InputSpec] = (), metadata: Mapping | None = None):
        self.name = name
        self._fn = fn
        self.input_names = tuple(input_names)
        self.default_inputs = tuple(default_inputs)
        self.metadata = dict(metadata or {})
        self._count = 0
        self._lock = threading.Lock()

    @property
    def input_dim(self) -> int:
        return len(self.input_names)

    @property
    def count(self) -> int:
        return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.input_dim:
            raise DimensionMismatch(f"{self.name} takes {self.input_dim} inputs, got {X.shape[1]}")
        with self._lock:
            self._count += X.shape[0]
        return np.asarray(self._fn(X), dtype=float).reshape(X.shape[0])


# -- analytic models ----------------------------------------------------------


def f1(x):
    """Product of the two inputs."""
    x = np.asarray(x, dtype=float)
    return x[..., 0] * x[..., 1]


def sdof(r, F1, t1, c1, c2, m):
    """Peak-displacement margin of an undamped nonlinear oscillator."""
    c = np.asarray(c1, dtype=float) + c2
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0) or np.any(c <= 0):
        raise InvalidParams("mass and total stiffness must be positive")
    w0 = np.sqrt(c / m)
    return 3.0 * np.asarray(r) - np.abs(2.0 * np.asarray(F1) / (m * w0**2) * np.sin(w0 * np.asarray(t1) / 2.0))


def _sdof_rows(X):
    return sdof(*(X[:, k] for k in range(6)))


F1_INPUTS = (
    InputSpec("x1", "gaussian", {"mean": (-1.0, 1.0), "std": (0.5, 1.0)}),
    InputSpec("x2", "gaussian", {"mean": (-1.0, 1.0), "std": (0.5, 1.0)}),
)

SDOF_INPUTS = (
    InputSpec("r", "gaussian", {"mean": (0.49, 0.51), "std": 0.05}),
    InputSpec("F1", "gaussian", {"mean": (0.8, 1.2), "std": 0.2}),
    InputSpec("t1", "gaussian", {"mean": (0.95, 1.05), "std": 0.2}),
    InputSpec("c1", "gaussian", {"mean": 1.0, "std": 0.1}),
    InputSpec("c2", "gaussian", {"mean": 0.1, "std": 0.01}),
    InputSpec("m", "gaussian", {"mean": 1.0, "std": 0.05}),
)


# -- truss ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrussDefinition:
    """Linear-elastic plane truss.

    ``load_nodes``/``load_directions`` place the model inputs; each input is
    multiplied by ``load_scale`` (e.g. kN -> N). The output is
    ``output_sign * u[output_node, output_axis]``.
    """

    nodes: np.ndarray  # (n, 2)
    elements: np.ndarray  # (b, 2) node indices
    areas: np.ndarray  # (b,)
    modulus: np.ndarray  # (b,)
    fixed: np.ndarray  # (n, 2) bool
    load_nodes: np.ndarray
    load_directions: np.ndarray  # (k, 2)
    output_node: int
    output_axis: int
    output_sign: float = 1.0
    load_scale: float = 1.0
    node_ids: tuple[str, ...] = ()
    _factor: list = field(default_factory=list, repr=False)

    @property
    def n_loads(self) -> int:
        return len(self.load_nodes)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrussDefinition":
        try:
            ids = [str(n["id"]) for n in d["nodes"]]
            index = {k: i for i, k in enumerate(ids)}
            nodes = np.array([[float(n["x"]), float(n["y"])] for n in d["nodes"]])
            groups = d.get("groups", {})
            el, area, mod = [], [], []
            for e in d["elements"]:
                el.append([index[str(e["nodes"][0])], index[str(e["nodes"][1])]])
                area.append(float(e["area"]) if "area" in e else float(groups[e["group"]]))
                mod.append(float(e.get("modulus", d.get("modulus"))))
            fixed = np.zeros((len(ids), 2), dtype=bool)
            for s in d["supports"]:
                fixed[index[str(s["node"])]] = [bool(v) for v in s["fix"]]
            ln = [index[str(ld["node"])] for ld in d["loads"]]
            ldir = np.array([[float(v) for v in ld["direction"]] for ld in d["loads"]])
            out = d["output_dof"]
            axis = {"x": 0, "y": 1}[out["direction"]]
            return cls(
                nodes, np.array(el, dtype=np.int64), np.array(area), np.array(mod), fixed,
                np.array(ln, dtype=np.int64), ldir, index[str(out["node"])], axis,
                float(out.get("sign", 1.0)), float(d.get("load_scale", 1.0)), tuple(ids),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"invalid truss definition: {exc!r}") from exc

    @classmethod
    def from_json(cls, path) -> "TrussDefinition":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def stiffness(self) -> np.ndarray:
        n = self.nodes.shape[0]
        K = np.zeros((2 * n, 2 * n))
        for (i, j), A, E in zip(self.elements, self.areas, self.modulus):
            d = self.nodes[j] - self.nodes[i]
            L = math.hypot(*d)
            if L == 0:
                raise SingularStiffness("zero-length bar")
            c = d / L
            k = E * A / L * np.outer(c, c)
            dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
            K[np.ix_(dofs, dofs)] += np.block([[k, -k], [-k, k]])
        return K

    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.fixed.ravel())

    def force_vectors(self, loads) -> np.ndarray:
        """Global nodal forces ``(2n, k)`` for load rows ``(k, n_loads)``."""
        loads = np.atleast_2d(np.asarray(loads, dtype=float))
        if loads.shape[1] != self.n_loads:
            raise DimensionMismatch(f"truss expects {self.n_loads} loads, got {loads.shape[1]}")
        f = np.zeros((2 * self.nodes.shape[0], loads.shape[0]))
        for q, (node, direc) in enumerate(zip(self.load_nodes, self.load_directions)):
            f[2 * node] += direc[0] * loads[:, q] * self.load_scale
            f[2 * node + 1] += direc[1] * loads[:, q] * self.load_scale
        return f

    def _cholesky(self):
        if not self._factor:
            K = self.stiffness()
            free = self.free_dofs()
            Kff = K[np.ix_(free, free)]
            try:
                cf = sla.cho_factor(Kff)
            except np.linalg.LinAlgError as exc:
                raise SingularStiffness("stiffness matrix is singular (mechanism or missing supports)") from exc
            # cholesky diagonals are root pivots: 1e-6 here is a 1e-12 pivot ratio
            d = np.abs(np.diag(cf[0]))
            if d.min() <= 1e-6 * d.max():
                raise SingularStiffness("stiffness matrix is numerically singular")
            self._factor.extend([K, free, cf])
        return self._factor

    def solve(self, loads) -> np.ndarray:
        """Nodal displacements ``(k, 2n)`` for each load row."""
        K, free, cf = self._cholesky()
        f = self.force_vectors(loads)
        u = np.zeros_like(f)
        u[free] = sla.cho_solve(cf, f[free])
        return u.T

    def reactions(self, loads) -> np.ndarray:
        """Support reactions ``(k, 2n)``, zero at free dofs."""
        K, free, _ = self._cholesky()
        u = self.solve(loads)
        r = (K @ u.T - self.force_vectors(loads)).T
        r[:, free] = 0.0
        return r


def truss_deflection(definition: TrussDefinition, loads) -> np.ndarray | float:
    """Output displacement (metres) for one load vector or a batch of rows."""
    arr = np.asarray(loads, dtype=float)
    u = definition.solve(np.atleast_2d(arr))
    out = definition.output_sign * u[:, 2 * definition.output_node + definition.output_axis]
    return float(out[0]) if arr.ndim == 1 else out


def _truss_inputs(n: int) -> tuple[InputSpec, ...]:
    return tuple(
        InputSpec(f"P{k + 1}", "lognormal", {"mean": (95.0, 105.0), "std": (13.0, 17.0)}) for k in range(n)
    )


BUNDLED_TRUSS = "pratt_truss.json"


def bundled_truss_path() -> Path:
    return Path(str(resources.files("impsobol") / "data" / BUNDLED_TRUSS))


def registry_lookup(name: str, base_dir=None) -> TestModel:
    """Resolve ``"f1"``, ``"sdof"`` or ``"truss:<file>"`` to a fresh model.

    Relative truss files are looked up next to ``base_dir`` first and then
    among the bundled data files.
    """
    if name == "f1":
        return TestModel("f1", f1, ("x1", "x2"), F1_INPUTS, {"description": "product x1 * x2"})
    if name == "sdof":
        return TestModel("sdof", _sdof_rows, ("r", "F1", "t1", "c1", "c2", "m"), SDOF_INPUTS,
                         {"description": "nonlinear oscillator displacement margin"})
    if isinstance(name, str) and name.startswith("truss:"):
        ref = name.split(":", 1)[1] or BUNDLED_TRUSS
        path = Path(ref)
        if not path.is_absolute():
            local = Path(base_dir or ".") / path
            path = local if local.exists() else Path(str(resources.files("impsobol") / "data" / ref))
        if not path.exists():
            raise UnknownModel(f"truss definition {ref!r} not found")
        d = TrussDefinition.from_json(path)
        names = tuple(f"P{k + 1}" for k in range(d.n_loads))
        return TestModel(name, lambda X: truss_deflection(d, X), names, _truss_inputs(d.n_loads),
                         {"description": f"truss deflection from {path.name}", "units": {"input": "kN", "output": "m"}})
    raise UnknownModel(f"unknown model {name!r}; expected 'f1', 'sdof' or 'truss:<file>'")
