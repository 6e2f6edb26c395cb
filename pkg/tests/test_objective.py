import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import minimize_scalar

from busemann_lab.linalg import IDENTITY, ZERO, cof2, diag, frob, lift, mat2
from busemann_lab.objective import (
    COUNTEREXAMPLE, NORM_OF_MINORS, Kind, ObjectiveSpec, ZeroDenominator, alignment_gap,
    eval_w, grad_w, residual_vec, rho_of, taylor_excess, touching_residual, unit_residual,
)
from conftest import mats


def central_difference(spec, m, step=1e-5):
    g = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = step
            g[i, j] = (eval_w(spec, m + e) - eval_w(spec, m - e)) / (2 * step)
    return g


def test_spec_validation_and_round_trip():
    with pytest.raises(ValueError):
        ObjectiveSpec(Kind.COUNTEREXAMPLE, 0.0)
    ObjectiveSpec(Kind.NORM_OF_MINORS, 0.0)
    spec = ObjectiveSpec.from_dict({"kind": "counterexample", "y": 2.5})
    assert spec.y == 2.5 and ObjectiveSpec.from_dict(spec.to_dict()) == spec


def test_values_at_reference_points():
    assert eval_w(COUNTEREXAMPLE, ZERO) == 1.0
    assert eval_w(COUNTEREXAMPLE, diag(10.0, 0.1)) == pytest.approx(0.1, abs=1e-15)
    assert eval_w(NORM_OF_MINORS, IDENTITY) == pytest.approx(np.sqrt(3))


def test_gradients_at_reference_points():
    np.testing.assert_array_equal(grad_w(COUNTEREXAMPLE, ZERO), ZERO)
    np.testing.assert_allclose(grad_w(NORM_OF_MINORS, IDENTITY), 2 * IDENTITY / np.sqrt(3))
    m = diag(10.0, 0.1)
    np.testing.assert_allclose(grad_w(COUNTEREXAMPLE, m), central_difference(COUNTEREXAMPLE, m),
                               atol=1e-6)


def test_rho_at_reference_points():
    assert rho_of(COUNTEREXAMPLE, ZERO) == -1.0
    assert rho_of(COUNTEREXAMPLE, diag(10.0, 0.1)) == pytest.approx(0.0, abs=1e-15)
    assert rho_of(NORM_OF_MINORS, IDENTITY) == pytest.approx(1 / np.sqrt(3))


def test_zero_denominator_for_norm_of_minors_at_origin():
    assert eval_w(NORM_OF_MINORS, ZERO) == 0.0
    with pytest.raises(ZeroDenominator):
        grad_w(NORM_OF_MINORS, ZERO)
    with pytest.raises(ZeroDenominator):
        rho_of(NORM_OF_MINORS, ZERO)


@pytest.mark.parametrize("spec", [COUNTEREXAMPLE, NORM_OF_MINORS], ids=["counterexample", "norm"])
def test_gradient_matches_finite_differences(spec, rng):
    ms = rng.standard_normal((200, 2, 2))
    ms *= (10 * rng.uniform(size=200) / frob(ms))[:, None, None]
    g = grad_w(spec, ms)
    for m, gm in zip(ms, g):
        np.testing.assert_allclose(gm, central_difference(spec, m), atol=1e-6)


@given(mats)
def test_counterexample_is_positive_and_rho_bounded(m):
    assert eval_w(COUNTEREXAMPLE, m) > 0
    assert abs(rho_of(COUNTEREXAMPLE, m)) <= 1.0
    np.testing.assert_allclose(np.linalg.norm(unit_residual(COUNTEREXAMPLE, m)), 1.0, atol=1e-12)


def test_positive_along_diagonal_family():
    ts = np.concatenate([np.logspace(0, 4, 41), -np.logspace(0, 4, 41)])
    fam = np.zeros((ts.size, 2, 2))
    fam[:, 0, 0], fam[:, 1, 1] = ts, 1.0 / ts
    w = eval_w(COUNTEREXAMPLE, fam)
    assert np.all(w > 0)
    np.testing.assert_allclose(w, 1.0 / np.abs(ts), rtol=1e-12)


def test_value_is_distance_from_lift_to_axis_line(rng):
    # |lift(m) - (s e11, y)| minimised over s
    for m in rng.standard_normal((20, 2, 2)) * 3:
        p = lift(m).vec
        res = minimize_scalar(lambda s: np.linalg.norm(p - np.array([s, 0, 0, 0, 1.0])))
        assert eval_w(COUNTEREXAMPLE, m) == pytest.approx(res.fun, abs=1e-7)


def test_touching_residual_examples():
    assert touching_residual(COUNTEREXAMPLE, ZERO, ZERO) == 0.0
    assert touching_residual(COUNTEREXAMPLE, ZERO, IDENTITY) == pytest.approx(1.0)


@pytest.mark.parametrize("spec", [COUNTEREXAMPLE, NORM_OF_MINORS], ids=["counterexample", "norm"])
@given(m=mats, h=mats)
def test_touching_residual_nonnegative(spec, m, h):
    if eval_w(spec, m) == 0:
        return
    tol = 1e-9 * (1 + frob(h) ** 2) * (1 + frob(m) ** 2)
    assert touching_residual(spec, m, h) >= -tol
    assert taylor_excess(spec, m, h) - rho_of(spec, m) * np.linalg.det(h) >= -tol


def test_taylor_excess_agrees_with_naive_formula(rng):
    m = rng.standard_normal((2, 2))
    hs = rng.standard_normal((500, 2, 2))
    naive = (eval_w(COUNTEREXAMPLE, m + hs) - eval_w(COUNTEREXAMPLE, m)
             - np.sum(grad_w(COUNTEREXAMPLE, m) * hs, axis=(1, 2)))
    np.testing.assert_allclose(taylor_excess(COUNTEREXAMPLE, m, hs), naive, atol=1e-12)


def test_taylor_excess_is_quadratic_for_tiny_steps():
    m = mat2(0.3, -1.2, 0.7, 2.0)
    h = mat2(1.0, 0.5, -0.25, 2.0) * 1e-7
    # second-order term survives where the naive difference is pure rounding
    excess = taylor_excess(COUNTEREXAMPLE, m, h)
    assert 0 <= excess - rho_of(COUNTEREXAMPLE, m) * np.linalg.det(h) < 1e-12


def test_alignment_gap_is_nonnegative_and_exact_when_parallel():
    u = np.array([0.6, 0.8, 0, 0, 0])
    assert alignment_gap(u, 3 * u) == pytest.approx(0.0, abs=1e-15)
    assert alignment_gap(u, -u) == pytest.approx(2.0)
    v = np.array([1.0, 0, 0, 0, 1.0])
    assert alignment_gap(u, v) == pytest.approx(np.sqrt(2) - 0.6)


def test_residual_vector_layout():
    v = residual_vec(COUNTEREXAMPLE, mat2(1, 2, 3, 4))
    np.testing.assert_array_equal(v, [0, 2, 3, 4, -3])
    np.testing.assert_array_equal(residual_vec(NORM_OF_MINORS, mat2(1, 2, 3, 4)), [1, 2, 3, 4, -2])
    assert cof2(ZERO).sum() == 0
