import numpy as np
import pytest

from impsobol.distributions import ParametricPBox
from impsobol.errors import DomainError, ZeroVariance
from impsobol.imprecise import (
    ConditionalSobol,
    Order,
    conditional_coefficients,
    conditional_model,
    conditional_sobol,
    conditional_spectrum,
    point_sampler,
    sobol_bounds,
    sobol_distribution,
    split_indices,
    uniform_sampler,
)
from impsobol.optimizer import OptimizerConfig
from impsobol.pce import PceModel
from impsobol.polynomials import MultiIndexSet, evaluate_basis, hermite, hyperbolic_index_set
from impsobol.sobol import sobol_indices

# theta column order: x1.mean, x1.std, x2.mean, x2.std; box mean [-1,1], std [0.5,1]


def f1_closed(theta):
    mu1, mu2 = theta[0], theta[2]
    s1, s2 = 0.75 + 0.25 * theta[1], 0.75 + 0.25 * theta[3]
    a, b, c = (mu2 * s1) ** 2, (mu1 * s2) ** 2, (s1 * s2) ** 2
    return a / (a + b + c), (a + c) / (a + b + c)


def test_split_f1(f1_fit):
    split = split_indices(f1_fit.pce)
    assert split.n_terms == 10 and split.n_groups == 4
    groups = {tuple(g): int(n) for g, n in zip(split.unique_aleatory.alphas, split.group_sizes())}
    assert groups == {(0, 0): 2, (1, 1): 4, (1, 0): 2, (0, 1): 2}
    assert np.array_equal(split.reconstruct(), f1_fit.pce.index_set.alphas)


def test_split_purely_aleatory_and_constant():
    A = hyperbolic_index_set(2, 2)
    m = PceModel(A, np.arange(len(A), dtype=float), (hermite(),) * 2)
    s = split_indices(m)
    assert np.array_equal(s.unique_aleatory.alphas, A.alphas) and s.alpha_t.shape == (len(A), 0)
    c = PceModel(MultiIndexSet(np.zeros((1, 2), dtype=int)), [1.0], (hermite(),) * 2)
    assert split_indices(c).n_groups == 1


def test_closed_form_values(f1_fit):
    split = split_indices(f1_fit.pce)
    coef = f1_fit.pce.coefficients
    t = np.array([1.0, 1.0, 1.0, 1.0])
    assert conditional_sobol(split, coef, [0], t) == pytest.approx(1 / 3, abs=1e-9)
    assert conditional_sobol(split, coef, [0], t, Order.TOTAL) == pytest.approx(2 / 3, abs=1e-9)
    assert conditional_sobol(split, coef, [0], [0.3, -0.2, 0.0, 0.5]) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(0)
    T = rng.uniform(-1, 1, (200, 4))
    first = ConditionalSobol(split, coef, [0], "first")(T)
    total = ConditionalSobol(split, coef, [0], "total")(T)
    ref = np.array([f1_closed(t) for t in T])
    np.testing.assert_allclose(first, ref[:, 0], atol=1e-9)
    np.testing.assert_allclose(total, ref[:, 1], atol=1e-9)
    assert np.all(total >= first - 1e-15)


def test_conditional_prediction_identity(f1_fit):
    pce = f1_fit.pce
    split = split_indices(pce)
    rng = np.random.default_rng(1)
    for _ in range(100):
        v = np.empty(6)
        v[list(split.epistemic)] = rng.uniform(-1, 1, 4)
        v[list(split.aleatory)] = rng.normal(size=2)
        cm = conditional_model(split, pce.coefficients, v[list(split.epistemic)], pce.bases)
        full = pce.predict(v[None, :])[0]
        cond = cm.predict(v[None, list(split.aleatory)])[0]
        assert cond == pytest.approx(full, abs=1e-12)


def test_single_member_group_is_constant():
    # y = 2 xi1 + theta * xi2 in layout (theta, xi1, xi2)
    A = MultiIndexSet(np.array([[0, 1, 0], [1, 0, 1]]))
    m = PceModel(A, [2.0, 1.0], (hermite(),) * 3, aleatory=(1, 2), epistemic=(0,))
    split = split_indices(m)
    a1 = conditional_coefficients(split, m.coefficients, [0.3])
    a2 = conditional_coefficients(split, m.coefficients, [-0.9])
    g = [tuple(r) for r in split.unique_aleatory.alphas].index((1, 0))
    assert a1[g] == a2[g] == 2.0


def test_outside_box(f1_fit):
    split = split_indices(f1_fit.pce)
    with pytest.raises(DomainError):
        conditional_coefficients(split, f1_fit.pce.coefficients, [1.5, 0, 0, 0])


def test_zero_variance_point():
    A = MultiIndexSet(np.array([[1, 1]]))
    m = PceModel(A, [1.0], (hermite(),) * 2, aleatory=(1,), epistemic=(0,))
    split = split_indices(m)
    with pytest.raises(ZeroVariance):
        conditional_sobol(split, m.coefficients, [0], [0.0])
    assert np.isnan(ConditionalSobol(split, m.coefficients, [0], "first")([[0.0]])[0])


def test_f1_bounds(f1_bounds):
    for name in ("x1", "x2"):
        first, total = f1_bounds.intervals[name]["first"], f1_bounds.intervals[name]["total"]
        assert first.lower == pytest.approx(0.0, abs=1e-3) and first.upper == pytest.approx(0.8, abs=1e-3)
        assert total.lower == pytest.approx(0.2, abs=1e-3) and total.upper == pytest.approx(1.0, abs=1e-3)
        assert total.lower >= first.lower - 1e-9 and total.upper >= first.upper - 1e-9


def test_certificates_and_envelope(f1_fit, f1_bounds):
    split = split_indices(f1_fit.pce)
    coef = f1_fit.pce.coefficients
    T = np.random.default_rng(2).uniform(-1, 1, (100, 4))
    for i, name in enumerate(("x1", "x2")):
        for order, iv in f1_bounds.intervals[name].items():
            f = ConditionalSobol(split, coef, [i], order)
            assert f(iv.argmin_theta[None])[0] == pytest.approx(iv.lower, abs=1e-9)
            assert f(iv.argmax_theta[None])[0] == pytest.approx(iv.upper, abs=1e-9)
            vals = f(T)
            assert np.all(vals >= iv.lower - 1e-6) and np.all(vals <= iv.upper + 1e-6)
    # the lower first-order bound sits at mu2 = 0
    assert f1_bounds.intervals["x1"]["first"].argmin_theta[2] == pytest.approx(0.0, abs=1e-3)


def test_conditional_closure(sdof_fit):
    split = split_indices(sdof_fit.pce)
    for t in np.random.default_rng(3).uniform(-1, 1, (20, split.n_theta)):
        spec = conditional_spectrum(split, sdof_fit.pce.coefficients, t)
        assert sum(spec.values()) == pytest.approx(1.0, abs=1e-12)


def test_pinched_consistent_with_sobol(sdof_fit):
    pce = sdof_fit.pce
    split = split_indices(pce)
    t = np.zeros(split.n_theta)
    spec = sobol_indices(conditional_model(split, pce.coefficients, t, pce.bases))
    for i in range(6):
        assert conditional_sobol(split, pce.coefficients, [i], t) == pytest.approx(spec.first(i), abs=1e-12)
        assert conditional_sobol(split, pce.coefficients, [i], t, "total") == pytest.approx(spec.total(i), abs=1e-12)
    g = conditional_sobol(split, pce.coefficients, [0, 1], t, Order.GROUP)
    assert g == pytest.approx(spec.partial.get((0, 1), 0.0), abs=1e-12)


def test_degenerate_box_bounds():
    A = MultiIndexSet(np.array([[0, 0], [1, 0], [0, 1]]))
    m = PceModel(A, [1.0, 2.0, 1.0], (hermite(),) * 2)
    split = split_indices(m)
    iv = sobol_bounds(split, m.coefficients, [0], "first", OptimizerConfig(seed=1))
    assert iv.lower == iv.upper == pytest.approx(0.8)


def test_distribution(f1_fit):
    split = split_indices(f1_fit.pce)
    coef = f1_fit.pce.coefficients
    s = sobol_distribution(split, coef, [0], "first", uniform_sampler(4), 10_000, seed=4)
    assert s.n_excluded == 0
    assert s.values.min() >= -1e-3 and s.values.max() <= 0.801
    again = sobol_distribution(split, coef, [0], "first", uniform_sampler(4), 10_000, seed=4)
    assert s.values.mean() == again.values.mean()
    t = [1.0, 1.0, 1.0, 1.0]
    p = sobol_distribution(split, coef, [0], "first", point_sampler(t), 50, seed=0)
    np.testing.assert_allclose(p.values, 1 / 3, atol=1e-9)
