"""End-to-end analysis: design, phantom expansion, PCE fit, index bounds."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augmented import AugmentedDesign, AugmentedInput, AugmentedSpace, AuxKind, generate_phantoms, sample_design
from .config import AnalysisConfig
from .errors import ConfigError, InvalidParams
from .imprecise import ConditionalSobol, Order, SobolInterval, sobol_bounds, split_indices
from .models import TestModel, registry_lookup
from .oracle import marginals_at, sobol_mc_all
from .pce import PceModel, degree_adaptive_fit, rel_gen_error

log = logging.getLogger(__name__)

LOO_WARNING = 1e-2


@dataclass
class FitResult:
    config: AnalysisConfig
    model: TestModel
    space: AugmentedSpace
    base_v: np.ndarray
    base_x: np.ndarray
    responses: np.ndarray
    design: AugmentedDesign
    pce: PceModel
    n_evaluations: int
    err_gen: float | None = None
    n_validation_evaluations: int = 0


@dataclass
class BoundsResult:
    fit: FitResult
    intervals: dict[str, dict[str, SobolInterval]]
    pinched: dict[str, dict[str, float]]
    warnings: list[str] = field(default_factory=list)


def build_space(cfg: AnalysisConfig, model: TestModel) -> AugmentedSpace:
    try:
        if cfg.inputs is None:
            decls = [(s, "default") for s in model.default_inputs]
        else:
            decls = [(d.spec, d.aux) for d in cfg.inputs]
        if len(decls) != model.input_dim:
            raise ConfigError(f"model {model.name} takes {model.input_dim} inputs, config declares {len(decls)}")
        inputs = [
            AugmentedInput(s.name, s.pbox(), AuxKind.UNIT_UNIFORM if aux == "cdf" else None) for s, aux in decls
        ]
    except InvalidParams as exc:
        raise ConfigError(f"invalid input declaration: {exc}") from exc
    return AugmentedSpace(inputs)


def load_model(cfg: AnalysisConfig) -> TestModel:
    return registry_lookup(cfg.model, base_dir=cfg.base_dir)


def run_fit(cfg: AnalysisConfig, model: TestModel | None = None) -> FitResult:
    model = model or load_model(cfg)
    space = build_space(cfg, model)
    model.reset_count()
    V, X = sample_design(space, cfg.N, cfg.seed)
    y = model(X)
    n_eval = model.count
    design = generate_phantoms(space, X, y, cfg.n_ph, cfg.seed, base_v=V, combine=cfg.combine)
    pce = degree_adaptive_fit(design.design, space.bases, config=cfg.pce, aleatory=space.aleatory,
                              epistemic=space.epistemic)
    res = FitResult(cfg, model, space, V, X, y, design, pce, n_eval)
    if cfg.validation_n > 0:
        rng = np.random.default_rng(cfg.validation_seed)
        Vv = space.sample(cfg.validation_n, rng)
        before = model.count
        w = model(space.forward(Vv))
        res.n_validation_evaluations = model.count - before
        res.err_gen = rel_gen_error(pce, Vv, w)
    if pce.loo_corrected > LOO_WARNING:
        log.warning("corrected LOO %.3g exceeds %.0e; index bounds may be unreliable", pce.loo_corrected, LOO_WARNING)
    return res


def run_bounds(cfg: AnalysisConfig, fit: FitResult | None = None) -> BoundsResult:
    fit = fit or run_fit(cfg)
    split = split_indices(fit.pce)
    coef = fit.pce.coefficients
    center = np.zeros((1, split.n_theta))
    intervals: dict[str, dict[str, SobolInterval]] = {}
    pinched: dict[str, dict[str, float]] = {}
    for i, inp in enumerate(fit.space.inputs):
        intervals[inp.name] = {}
        pinched[inp.name] = {}
        for order in cfg.orders:
            intervals[inp.name][order] = sobol_bounds(split, coef, [i], Order(order), cfg.optimizer)
            pinched[inp.name][order] = float(ConditionalSobol(split, coef, [i], Order(order))(center)[0])
    warn = []
    if fit.pce.loo_corrected > LOO_WARNING:
        warn.append(f"corrected LOO {fit.pce.loo_corrected:.3g} exceeds {LOO_WARNING:g}")
    return BoundsResult(fit, intervals, pinched, warn)


def validation_rows(cfg: AnalysisConfig, fit: FitResult | None = None) -> list[dict]:
    """Surrogate vs Monte Carlo indices at the pinched center and a theta grid."""
    fit = fit or run_fit(cfg)
    space = fit.space
    split = split_indices(fit.pce)
    n_t = split.n_theta
    axes = [np.linspace(-1.0, 1.0, cfg.oracle_grid)] * n_t
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n_t, -1).T if n_t else np.zeros((1, 0))
    points = np.vstack([np.zeros((1, n_t)), grid])
    pboxes = [inp.pbox for inp in space.inputs]
    rows = []
    for k, t in enumerate(points):
        full = np.zeros((1, space.n_aug))
        full[0, list(space.epistemic)] = t
        thetas = [space.hyperparameters(full, i)[0] for i in range(space.n_inputs)]
        mc = sobol_mc_all(fit.model, marginals_at(pboxes, thetas), cfg.oracle_n, cfg.oracle_seed)
        phys = space.theta_to_physical(t) if n_t else np.zeros(0)
        for i, inp in enumerate(space.inputs):
            for order, est in (("first", mc[i][0]), ("total", mc[i][1])):
                s = float(ConditionalSobol(split, fit.pce.coefficients, [i], order)(t[None, :])[0])
                z = (s - est.value) / est.std_error if est.std_error > 0 else math.inf * (s != est.value)
                rows.append({
                    "point": "pinched" if k == 0 else f"grid{k - 1}",
                    **{lab: float(v) for lab, v in zip((space.labels[d] for d in space.epistemic), phys)},
                    "input": inp.name,
                    "order": order,
                    "pce": s,
                    "mc": est.value,
                    "se": est.std_error,
                    "z": z,
                    "within_3se": bool(abs(z) <= 3.0),
                })
    return rows


# -- serialization ---------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _theta_dict(space: AugmentedSpace, theta_std) -> dict[str, float]:
    phys = space.theta_to_physical(theta_std) if space.n_theta else []
    return {space.labels[d]: _num(v) for d, v in zip(space.epistemic, phys)}


def fit_summary(fit: FitResult) -> dict:
    pce = fit.pce
    return {
        "model": fit.model.name,
        "inputs": [inp.name for inp in fit.space.inputs],
        "augmented_dimensions": list(fit.space.labels),
        "n_evaluations": fit.n_evaluations,
        "n_validation_evaluations": fit.n_validation_evaluations,
        "design_rows": len(fit.design),
        "phantom_skipped": fit.design.n_skipped,
        "pce": {
            "degree": pce.degree,
            "n_terms": len(pce.index_set),
            "loo": _num(pce.loo),
            "loo_corrected": _num(pce.loo_corrected),
            "mean": _num(pce.mean),
            "variance": _num(pce.variance),
            "index_set": pce.index_set.alphas.tolist(),
            "coefficients": [_num(c) for c in pce.coefficients],
            "degree_history": [[p, _num(v)] for p, v in pce.diagnostics.get("degree_history", [])],
        },
        "err_gen": _num(fit.err_gen),
    }


def bounds_summary(res: BoundsResult) -> dict:
    space = res.fit.space
    out = fit_summary(res.fit)
    per_input = {}
    for name, orders in res.intervals.items():
        entry = {}
        for order, iv in orders.items():
            entry[order] = [_num(iv.lower), _num(iv.upper)]
            entry[f"{order}_argmin"] = _theta_dict(space, iv.argmin_theta)
            entry[f"{order}_argmax"] = _theta_dict(space, iv.argmax_theta)
            entry[f"{order}_pinched"] = _num(res.pinched[name][order])
            entry[f"{order}_impact"] = _num(iv.center)
            entry[f"{order}_epistemic"] = _num(iv.width)
        per_input[name] = entry
    out["indices"] = per_input
    out["warnings"] = list(res.warnings)
    return out


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (f"{v:.12g}" if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def design_csv(fit: FitResult) -> str:
    space, d = fit.space, fit.design
    header = ["run_id"] + list(space.labels) + [f"x.{inp.name}" for inp in space.inputs] + ["y"]
    rows = [
        [int(d.run_ids[r])] + [float(v) for v in d.points[r]] + [float(v) for v in d.physical[r]] + [float(d.responses[r])]
        for r in range(len(d))
    ]
    return csv_text(header, rows)


def barplot_csv(res: BoundsResult, order: str = "first") -> str:
    rows = []
    for name, orders in res.intervals.items():
        if order in orders:
            iv = orders[order]
            rows.append([name, float(iv.lower), float(iv.upper), float(res.pinched[name][order])])
    return csv_text(["input", "lower", "upper", "pinched"], rows)


def impact_csv(res: BoundsResult, order: str = "first") -> str:
    rows = []
    for name, orders in res.intervals.items():
        if order in orders:
            iv = orders[order]
            rows.append([name, float(iv.center), float(iv.width)])
    return csv_text(["input", "impact", "epistemic"], rows)


def validation_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    header = list(rows[0].keys())
    return csv_text(header, [[r[h] for h in header] for r in rows])


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
