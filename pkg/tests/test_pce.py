import numpy as np
import pytest
from scipy.stats import qmc, norm

from impsobol.errors import DegenerateDesign, DegenerateValidation, DomainError, RankDeficient
from impsobol.pce import (
    ExperimentalDesign,
    PceConfig,
    PceModel,
    degree_adaptive_fit,
    information_matrix,
    lars_select,
    loo_error,
    ols_fit,
    ols_model,
    rel_gen_error,
)
from impsobol.polynomials import MultiIndexSet, hermite, hyperbolic_index_set, legendre


def _normal_lhs(n, d, seed):
    return norm.ppf(qmc.LatinHypercube(d, seed=seed).random(n))


def test_information_matrix_columns():
    d = ExperimentalDesign(np.array([[-1.0], [0.0], [1.0]]), np.zeros(3))
    F = information_matrix(d, MultiIndexSet(np.array([[0], [1], [2]])), [hermite()])
    np.testing.assert_allclose(F[:, 0], 1.0)
    np.testing.assert_allclose(F[:, 1], [-1, 0, 1])
    assert F[1, 2] == pytest.approx(-1 / np.sqrt(2))


def test_ols_identity_and_interpolation():
    y = np.array([1.0, -2.0, 3.5])
    np.testing.assert_allclose(ols_fit(np.eye(3), y), y)
    rng = np.random.default_rng(0)
    F = rng.normal(size=(30, 4))
    Y = F @ np.array([1.0, 2.0, -1.0, 0.5])
    assert np.linalg.norm(F @ ols_fit(F, Y) - Y) < 1e-10 * np.linalg.norm(Y)


def test_ols_rank_deficient():
    F = np.ones((10, 2))
    with pytest.raises(RankDeficient):
        ols_fit(F, np.arange(10.0))


def test_ols_recovers_product():
    X = _normal_lhs(50, 2, 4)
    d = ExperimentalDesign(X, X[:, 0] * X[:, 1])
    m = ols_model(d, hyperbolic_index_set(2, 2), [hermite()] * 2)
    for a, c in zip(m.index_set.alphas, m.coefficients):
        assert c == pytest.approx(1.0 if tuple(a) == (1, 1) else 0.0, abs=1e-8)


def test_lars_linear_target():
    X = np.random.default_rng(1).uniform(-1, 1, (40, 3))
    d = ExperimentalDesign(X, X[:, 0])
    m = lars_select(d, hyperbolic_index_set(3, 3), [legendre()] * 3)
    assert m.index_set.as_set() == {(0, 0, 0), (1, 0, 0)}
    assert m.loo < 1e-10


def test_loo_matches_brute_force():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(20, 2))
    y = np.sin(X[:, 0]) + 0.3 * X[:, 1] ** 2
    idx = hyperbolic_index_set(2, 2)
    bases = [hermite()] * 2
    m = ols_model(ExperimentalDesign(X, y), idx, bases)
    errs = []
    for i in range(20):
        keep = np.arange(20) != i
        mi = ols_model(ExperimentalDesign(X[keep], y[keep]), idx, bases)
        errs.append((y[i] - mi.predict(X[i : i + 1])[0]) ** 2)
    brute = np.mean(errs) / np.var(y, ddof=1)
    assert loo_error(m, ExperimentalDesign(X, y)) == pytest.approx(brute, rel=1e-8)


def test_loo_constant_model_near_one():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 1))
    y = X[:, 0] + 0.1 * rng.normal(size=200)
    m = ols_model(ExperimentalDesign(X, y), MultiIndexSet(np.zeros((1, 1), dtype=int)), [hermite()])
    assert loo_error(m, ExperimentalDesign(X, y)) == pytest.approx(1.0, abs=0.02)


def test_loo_degenerate_design():
    X = np.array([[0.1], [0.2], [0.3]])
    with pytest.raises(DegenerateDesign):
        ols_model(ExperimentalDesign(X, X[:, 0]), hyperbolic_index_set(1, 2), [hermite()])


def test_rel_gen_error():
    X = np.random.default_rng(3).normal(size=(60, 2))
    y = X[:, 0] * X[:, 1]
    m = ols_model(ExperimentalDesign(X, y), hyperbolic_index_set(2, 2), [hermite()] * 2)
    assert rel_gen_error(m, X, y) < 1e-20
    const = PceModel(MultiIndexSet(np.zeros((1, 2), dtype=int)), [np.mean(y)], (hermite(), hermite()))
    assert rel_gen_error(const, X, y) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DegenerateValidation):
        rel_gen_error(m, X, np.ones(60))


def test_variance_identity():
    rng = np.random.default_rng(4)
    idx = hyperbolic_index_set(2, 3)
    coef = rng.normal(size=len(idx))
    m = PceModel(idx, coef, (hermite(), legendre()))
    pts = np.column_stack([rng.normal(size=400_000), rng.uniform(-1, 1, 400_000)])
    y = m.predict(pts)
    assert m.mean == pytest.approx(coef[0])
    assert np.var(y) == pytest.approx(m.variance, rel=0.02)


def test_degree_adaptive_quadratic():
    X = _normal_lhs(60, 2, 9)
    y = 1 + X[:, 0] ** 2 - X[:, 0] * X[:, 1]
    m = degree_adaptive_fit(ExperimentalDesign(X, y), [hermite()] * 2, p_max=6)
    assert m.degree >= 2 and m.loo < 1e-10
    hist = dict(m.diagnostics["degree_history"])
    assert m.loo_corrected <= hist[1]


def test_degree_adaptive_bad_p():
    d = ExperimentalDesign(np.zeros((3, 1)), np.zeros(3))
    with pytest.raises(DomainError):
        degree_adaptive_fit(d, [hermite()], p_max=0)
    with pytest.raises(DomainError):
        PceConfig(q=0.0)


def test_f1_set_stable_in_p_max(f1_fit):
    d = f1_fit.design.design
    m10 = degree_adaptive_fit(d, f1_fit.space.bases, config=PceConfig(p_max=10, q=1.0))
    assert m10.index_set.as_set() == f1_fit.pce.index_set.as_set()
    assert len(m10.index_set) == 10 and m10.degree == 4
