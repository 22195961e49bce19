import math

import numpy as np
import pytest
from scipy import stats

from impsobol.errors import DimensionMismatch, QuadratureFailure
from impsobol.polynomials import (
    MultiIndexSet,
    eval_multivariate,
    eval_univariate,
    gumbel,
    gumbel_density,
    hermite,
    hyperbolic_index_set,
    laguerre,
    legendre,
    legendre01,
    stieltjes_basis,
)


def test_univariate_anchors():
    assert eval_univariate(hermite(), 2, 0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    assert eval_univariate(legendre(), 1, 0.5) == pytest.approx(math.sqrt(3) * 0.5, abs=1e-12)
    for basis in (hermite(), legendre(), legendre01(), laguerre(), gumbel()):
        assert eval_univariate(basis, 0, 0.37) == 1.0


def test_multivariate_anchors():
    H = [hermite(), hermite()]
    assert eval_multivariate((0, 0), H, (3.0, -2.0)) == 1.0
    assert eval_multivariate((1, 0), H, (2.0, 7.0)) == pytest.approx(2.0)
    assert eval_multivariate((1, 1), H, (1.0, -1.0)) == pytest.approx(-1.0)
    with pytest.raises(DimensionMismatch):
        eval_multivariate((1, 0, 0), H, (1.0, 2.0))


def _gram(basis, x, w, deg=10):
    T = basis.table(x, deg)
    return (T * w[:, None]).T @ T


def _rules():
    n = 128
    xh, wh = np.polynomial.hermite_e.hermegauss(n)
    xl, wl = np.polynomial.legendre.leggauss(n)
    xg, wg = np.polynomial.laguerre.laggauss(n)
    return {
        "hermite": (hermite(), xh, wh / wh.sum()),
        "legendre": (legendre(), xl, wl / 2),
        "legendre01": (legendre01(), 0.5 * (xl + 1), wl / 2),
        "laguerre": (laguerre(), xg, wg),
    }


@pytest.mark.parametrize("name", ["hermite", "legendre", "legendre01", "laguerre"])
def test_orthonormality(name):
    basis, x, w = _rules()[name]
    assert np.max(np.abs(_gram(basis, x, w) - np.eye(11))) < 1e-9


def test_gumbel_orthonormality():
    # Gauss rule built from the recurrence itself would be circular; use a fine
    # independent trapezoid grid over the effective support instead
    x = np.linspace(-8.0, 200.0, 2_000_001)
    w = gumbel_density(x) * (x[1] - x[0])
    assert np.max(np.abs(_gram(gumbel(), x, w) - np.eye(11))) < 1e-9


@pytest.mark.parametrize("density,support,ref", [
    (stats.norm.pdf, (-math.inf, math.inf), hermite()),
    (lambda x: np.where(np.abs(x) <= 1, 0.5, 0.0), (-1.0, 1.0), legendre()),
    (stats.expon.pdf, (0.0, math.inf), laguerre()),
])
def test_stieltjes_matches_classical(density, support, ref):
    b = stieltjes_basis(density, support, 10)
    assert np.max(np.abs(b.a[:11] - ref.a[:11])) < 1e-8
    assert np.max(np.abs(b.b[1:11] - ref.b[1:11])) < 1e-8


def test_stieltjes_rejects_unnormalized():
    with pytest.raises(QuadratureFailure):
        stieltjes_basis(lambda x: 2 * stats.norm.pdf(x), (-math.inf, math.inf), 5)


def test_index_set_counts():
    s = hyperbolic_index_set(2, 2, 1.0)
    assert s.as_set() == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    s = hyperbolic_index_set(2, 2, 0.5)
    assert len(s) == 5 and (1, 1) not in s.as_set()
    assert hyperbolic_index_set(1, 0, 0.3).as_set() == {(0,)}
    assert len(hyperbolic_index_set(6, 4, 1.0)) == math.comb(10, 4)


def test_graded_lex_and_determinism():
    a = hyperbolic_index_set(3, 4, 0.75)
    b = hyperbolic_index_set(3, 4, 0.75)
    assert np.array_equal(a.alphas, b.alphas)
    deg = a.total_degree()
    assert np.all(np.diff(deg) >= 0)
    assert tuple(a.alphas[0]) == (0, 0, 0)


@pytest.mark.parametrize("M,p", [(2, 5), (4, 6), (6, 10)])
def test_nesting(M, p):
    qs = [0.4, 0.6, 0.75, 1.0]
    sets = [hyperbolic_index_set(M, p, q).as_set() for q in qs]
    for small, big in zip(sets, sets[1:]):
        assert small <= big


def test_multi_index_set_dedup():
    s = MultiIndexSet(np.array([[1, 0], [0, 0], [1, 0], [0, 1]]))
    assert s.alphas.tolist() == [[0, 0], [1, 0], [0, 1]]
