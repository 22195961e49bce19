"""Analysis configuration: JSON schema, validation and typed view."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import jsonschema

from .distributions import Family, Parameterization
from .errors import ConfigError
from .models import InputSpec
from .optimizer import OptimizerConfig
from .pce import PceConfig

_NUM = {"type": "number"}
_INTERVAL = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_SEED = {"type": "integer", "minimum": 0}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["model", "design"],
    "additionalProperties": False,
    "properties": {
        "model": {"type": "string", "minLength": 1},
        "inputs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "family", "params"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "family": {"enum": [f.value for f in Family]},
                    "parameterization": {"enum": [p.value for p in Parameterization]},
                    "params": {"type": "object", "additionalProperties": {"oneOf": [_NUM, _INTERVAL]}},
                    "aux": {"enum": ["default", "cdf"]},
                },
            },
        },
        "design": {
            "type": "object",
            "required": ["N"],
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 2},
                "n_ph": {"type": "integer", "minimum": 1},
                "seed": _SEED,
                "combine": {"enum": ["joint", "independent"]},
            },
        },
        "pce": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p_max": {"type": "integer", "minimum": 1, "maximum": 30},
                "q": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "selection": {"enum": ["lars", "ols"]},
                "loo_target": {"type": "number", "minimum": 0},
            },
        },
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "population": {"type": "integer", "minimum": 4},
                "generations": {"type": "integer", "minimum": 1},
                "restarts": {"type": "integer", "minimum": 1},
                "seed": _SEED,
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "stagnation": {"type": "integer", "minimum": 1},
                "polish": {"type": "boolean"},
            },
        },
        "validation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 0}, "seed": _SEED},
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1000},
                "grid": {"type": "integer", "minimum": 3},
                "seed": _SEED,
            },
        },
        "orders": {"type": "array", "items": {"enum": ["first", "total"]}, "minItems": 1, "uniqueItems": True},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["json", "csv"]}, "uniqueItems": True},
            },
        },
    },
}


@dataclass(frozen=True)
class InputDecl:
    spec: InputSpec
    aux: str = "default"


@dataclass(frozen=True)
class AnalysisConfig:
    model: str
    inputs: tuple[InputDecl, ...] | None
    N: int
    n_ph: int = 10
    seed: int = 0
    combine: str = "joint"
    pce: PceConfig = field(default_factory=PceConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    validation_n: int = 0
    validation_seed: int = 12345
    oracle_n: int = 20_000
    oracle_grid: int = 3
    oracle_seed: int = 2024
    orders: tuple[str, ...] = ("first", "total")
    output_dir: str = "results"
    formats: tuple[str, ...] = ("json", "csv")
    base_dir: str = "."

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | Path = ".") -> "AnalysisConfig":
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
        inputs = None
        if "inputs" in raw:
            decls = []
            for d in raw["inputs"]:
                params = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d["params"].items()}
                decls.append(InputDecl(InputSpec(d["name"], d["family"], params, d.get("parameterization")),
                                       d.get("aux", "default")))
            names = [d.spec.name for d in decls]
            if len(set(names)) != len(names):
                raise ConfigError("input names must be unique")
            inputs = tuple(decls)
        des = raw["design"]
        pce = raw.get("pce", {})
        opt = raw.get("optimizer", {})
        val = raw.get("validation", {})
        ora = raw.get("oracle", {})
        out = raw.get("outputs", {})
        try:
            pce_cfg = PceConfig(**pce)
            opt_cfg = OptimizerConfig(**opt)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(
            model=raw["model"],
            inputs=inputs,
            N=des["N"],
            n_ph=des.get("n_ph", 10),
            seed=des.get("seed", 0),
            combine=des.get("combine", "joint"),
            pce=pce_cfg,
            optimizer=opt_cfg,
            validation_n=val.get("n", 0),
            validation_seed=val.get("seed", 12345),
            oracle_n=ora.get("n", 20_000),
            oracle_grid=ora.get("grid", 3),
            oracle_seed=ora.get("seed", 2024),
            orders=tuple(raw.get("orders", ["first", "total"])),
            output_dir=out.get("dir", "results"),
            formats=tuple(out.get("formats", ["json", "csv"])),
            base_dir=str(base_dir),
        )

    @classmethod
    def from_file(cls, path) -> "AnalysisConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found") from exc
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw, base_dir=path.parent)

    def with_seed(self, seed: int | None) -> "AnalysisConfig":
        if seed is None:
            return self
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        return replace(self, seed=seed)
