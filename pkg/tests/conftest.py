import json
import time
from pathlib import Path

import pytest

from impsobol.config import AnalysisConfig
from impsobol.pipeline import run_bounds, run_fit

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def load_config(name: str, **overrides) -> AnalysisConfig:
    path = CONFIGS / f"{name}.json"
    raw = json.loads(path.read_text())
    for key, value in overrides.items():
        section, _, field = key.partition("__")
        if field:
            raw.setdefault(section, {})[field] = value
        else:
            raw[section] = value
    return AnalysisConfig.from_dict(raw, base_dir=path.parent)


TIMINGS: dict[str, float] = {}


def _timed(key, fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    TIMINGS[key] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def f1_config():
    return load_config("f1")


@pytest.fixture(scope="session")
def f1_fit(f1_config):
    return _timed("f1_fit", run_fit, f1_config)


@pytest.fixture(scope="session")
def f1_bounds(f1_config, f1_fit):
    return _timed("f1_bounds", run_bounds, f1_config, f1_fit)


@pytest.fixture(scope="session")
def sdof_config():
    return load_config("sdof")


@pytest.fixture(scope="session")
def sdof_fit(sdof_config):
    return _timed("sdof_fit", run_fit, sdof_config)


@pytest.fixture(scope="session")
def sdof_bounds(sdof_config, sdof_fit):
    return _timed("sdof_bounds", run_bounds, sdof_config, sdof_fit)


@pytest.fixture(scope="session")
def truss_config():
    return load_config("truss")


@pytest.fixture(scope="session")
def truss_bounds(truss_config):
    return run_bounds(truss_config)
