import numpy as np
import pytest

from impsobol.errors import OptimizationFailed
from impsobol.optimizer import OptimizerConfig, maximize, minimize


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def rastrigin(x):
    x = np.asarray(x)
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


BOX2 = [(-1.0, 1.0)] * 2


def test_sphere():
    r = minimize(sphere, BOX2, OptimizerConfig(seed=0))
    assert r.fun == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_allclose(r.x, 0.0, atol=1e-3)


def test_rastrigin():
    r = minimize(rastrigin, BOX2, OptimizerConfig(seed=3, restarts=4))
    assert r.fun == pytest.approx(0.0, abs=1e-4)


def test_linear_maximum_on_face():
    r = maximize(lambda x: float(x[0]), [(-1.0, 1.0)], OptimizerConfig(seed=1))
    assert r.x[0] == 1.0 and r.fun == 1.0


def test_result_is_reproducible_and_inside_box():
    f = lambda x: float(np.sin(3 * x[0]) * np.cos(2 * x[1]) + 0.1 * x[2])
    box = [(-1.0, 1.0), (0.0, 2.0), (-3.0, -1.0)]
    a = minimize(f, box, OptimizerConfig(seed=11))
    b = minimize(f, box, OptimizerConfig(seed=11))
    assert np.array_equal(a.x, b.x) and a.fun == b.fun
    assert f(a.x) == a.fun
    lo, hi = np.array(box).T
    assert np.all(a.x >= lo) and np.all(a.x <= hi)
    assert all(t1 >= t2 for t1, t2 in zip(a.trace, a.trace[1:]))


def test_maximize_identity():
    f = lambda x: float(np.cos(4 * x[0]) + x[1] ** 3)
    cfg = OptimizerConfig(seed=5)
    hi = maximize(f, BOX2, cfg)
    lo = minimize(lambda x: -f(x), BOX2, cfg, stream=1)
    assert hi.fun == -lo.fun and np.array_equal(hi.x, lo.x)


def test_restart_dominance():
    values = [minimize(rastrigin, [(-5.12, 5.12)] * 3,
                       OptimizerConfig(seed=2, restarts=r, generations=30, population=10)).fun for r in (1, 2, 3, 4)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_excluded_points():
    def f(x):
        return np.nan if x[0] < 0 else float((x[0] - 0.5) ** 2)
    r = minimize(f, [(-1.0, 1.0)], OptimizerConfig(seed=0))
    assert r.x[0] == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(OptimizationFailed):
        minimize(lambda x: np.nan, [(-1.0, 1.0)], OptimizerConfig(seed=0, generations=5))


def test_f1_conditional_extrema(f1_bounds):
    iv = f1_bounds.intervals["x1"]["first"]
    assert iv.lower == pytest.approx(0.0, abs=1e-3)
    assert iv.upper == pytest.approx(0.8, abs=1e-3)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(population=3)
