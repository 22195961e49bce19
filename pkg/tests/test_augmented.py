import numpy as np
import pytest
from scipy.special import ndtr

from impsobol.augmented import (
    AugmentedInput,
    AugmentedSpace,
    AuxKind,
    generate_phantoms,
    generate_phantoms_bounded,
    sample_design,
)
from impsobol.distributions import ParametricPBox
from impsobol.errors import DomainError, InfeasibleBase

GAUSS = ParametricPBox.from_params("gaussian", {"mean": (-1.0, 1.0), "std": (0.5, 1.0)})
UNIF = ParametricPBox.from_params("uniform", {"a": (1.0, 2.0), "b": (3.0, 4.0)})


def _gauss_space():
    return AugmentedSpace([AugmentedInput("x1", GAUSS), AugmentedInput("x2", GAUSS)])


def test_layout_matches_theta_then_aux():
    s = _gauss_space()
    assert s.labels == ("x1.mean", "x1.std", "x1.aux", "x2.mean", "x2.std", "x2.aux")
    assert s.n_aug == 2 + 4
    assert s.epistemic == (0, 1, 3, 4) and s.aleatory == (2, 5)


def test_incompatible_aux_rejected():
    with pytest.raises(DomainError):
        AugmentedInput("x", GAUSS, AuxKind.STD_GUMBEL)


def test_forward_examples():
    g = AugmentedSpace([AugmentedInput("x", ParametricPBox.precise("gaussian", 0.5, 0.5))])
    assert g.forward([[-1.0]])[0, 0] == pytest.approx(0.0)
    ln = AugmentedSpace([AugmentedInput("x", ParametricPBox.precise("lognormal", 0.0, 1.0, "native"))])
    assert ln.forward([[0.0]])[0, 0] == pytest.approx(1.0)
    wb = AugmentedSpace([AugmentedInput("x", ParametricPBox.precise("weibull", 2.0, 1.0))])
    assert wb.forward([[3.0]])[0, 0] == pytest.approx(6.0)


def _std_theta(space, mean, std):
    t = np.zeros((1, space.n_aug))
    t[0, :2] = space.theta_to_standard([mean, std])
    return t


def test_gaussian_phantom_anchors():
    s = AugmentedSpace([AugmentedInput("x1", GAUSS)])
    for (mu, sig), xi, c in (((-0.5, 1.0), 0.5, 0.6915), ((0.5, 0.5), -1.0, 0.1587)):
        v = s.solve_aux(_std_theta(s, mu, sig), [[0.0]])
        assert v[0, 2] == pytest.approx(xi, abs=1e-14)
        assert ndtr(v[0, 2]) == pytest.approx(c, abs=5e-5)
        assert s.forward(v)[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_uniform_phantom_anchors():
    s = AugmentedSpace([AugmentedInput("x", UNIF)])
    v = s.solve_aux(_std_theta(s, 1.2, 3.8), [[3.5]])
    c = 0.5 * (v[0, 2] + 1.0)
    assert round(c, 3) == 0.885
    assert s.feasible(v, [[3.5]])[0]
    v = s.solve_aux(_std_theta(s, 1.0, 3.25), [[3.5]])
    assert not s.feasible(v, [[3.5]])[0]
    assert s.feasible_somewhere(np.array([3.5]))
    assert not s.feasible_somewhere(np.array([4.5]))


def test_bounded_design_respects_support():
    s = AugmentedSpace([AugmentedInput("x", UNIF)])
    X = np.array([[3.5], [1.5], [2.5]])
    d = generate_phantoms_bounded(s, X, np.arange(3.0), 20, seed=3)
    th = s.hyperparameters(d.points, 0)
    assert np.all((d.physical[:, 0] >= th[:, 0]) & (d.physical[:, 0] <= th[:, 1]))
    # chi = 3.5 needs b >= 3.5
    assert np.all(th[d.run_ids == 0, 1] >= 3.5)
    with pytest.raises(InfeasibleBase):
        generate_phantoms(s, np.array([[4.5]]), [0.0], 5, seed=0)


def test_bounded_requires_bounded_family():
    with pytest.raises(DomainError):
        generate_phantoms_bounded(_gauss_space(), np.zeros((1, 2)), [0.0], 3, 0)


def test_n_ph_one_is_base_design():
    s = _gauss_space()
    V, X = sample_design(s, 15, 2)
    d = generate_phantoms(s, X, np.arange(15.0), 1, 2, base_v=V)
    np.testing.assert_array_equal(d.points, V)
    assert d.n_skipped == 0 and list(d.replicates) == [1] * 15


@pytest.mark.parametrize("combine", ["joint", "independent"])
def test_round_trip_and_sharing(combine):
    s = _gauss_space()
    V, X = sample_design(s, 20, 4)
    y = np.random.default_rng(0).normal(size=20)
    d = generate_phantoms(s, X, y, 10, 4, base_v=V, combine=combine)
    assert len(d) == 200 and np.unique(d.run_ids).size == 20
    assert np.max(np.abs(s.forward(d.points) - X[d.run_ids])) < 1e-10
    assert np.array_equal(d.responses, y[d.run_ids])
    th = d.points[:, list(s.epistemic)]
    assert th.min() >= -1 and th.max() <= 1


def test_lhs_design():
    s = _gauss_space()
    V1, X1 = sample_design(s, 1, 0)
    assert V1.shape == (1, 6)
    V, X = sample_design(s, 40, 9)
    V2, X2 = sample_design(s, 40, 9)
    np.testing.assert_array_equal(V, V2)
    np.testing.assert_array_equal(X, X2)
    U = np.column_stack([0.5 * (V[:, d] + 1) if d in s.epistemic else ndtr(V[:, d]) for d in range(6)])
    for col in U.T:
        assert np.unique(np.floor(col * 40)).size == 40


def test_other_families_round_trip():
    pbs = [
        ParametricPBox.from_params("lognormal", {"mean": (95.0, 105.0), "std": (13.0, 17.0)}),
        ParametricPBox.from_params("gumbel", {"mean": (0.0, 1.0), "std": 1.0}),
        ParametricPBox.from_params("weibull", {"scale": (1.0, 2.0), "shape": (1.5, 2.5)}),
    ]
    s = AugmentedSpace.from_pboxes(pbs)
    V, X = sample_design(s, 10, 1)
    d = generate_phantoms(s, X, np.zeros(10), 8, 1, base_v=V)
    assert np.max(np.abs(s.forward(d.points) - X[d.run_ids]) / np.abs(X[d.run_ids])) < 1e-10
