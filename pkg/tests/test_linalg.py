import numpy as np
import pytest
from hypothesis import given

from busemann_lab.linalg import (
    E11, IDENTITY, MinorsPoint, bracket, cof2, det2, diag, frob, inner5, inner_mat, lift,
    lift_vec, mat2, mats_from_flat, outer, rotation,
)
from conftest import mats


def test_mat2_layout_and_validation():
    m = mat2(1, 2, 3, 4)
    assert m[0, 1] == 2 and m[1, 0] == 3
    with pytest.raises(ValueError):
        mat2(1, np.nan, 0, 0)
    with pytest.raises(ValueError):
        mat2(np.inf, 0, 0, 0)


def test_det_and_cofactor_examples():
    assert det2(mat2(1, 2, 3, 4)) == -2.0
    np.testing.assert_array_equal(cof2(mat2(1, 2, 3, 4)), mat2(4, -3, -2, 1))
    assert det2(diag(3.0, 5.0)) == 15.0
    assert det2(rotation(0.3)) == pytest.approx(1.0, abs=1e-15)


@given(mats, mats)
def test_determinant_expansion(m, h):
    lhs = det2(m + h)
    rhs = det2(m) + inner_mat(cof2(m), h) + det2(h)
    assert abs(lhs - rhs) <= 1e-12 * (1 + frob(m) ** 2 + frob(h) ** 2)


@given(mats)
def test_cofactor_is_determinant_gradient(m):
    # det is quadratic, so central differences are exact up to rounding
    eps = 1e-3
    fd = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = eps
            fd[i, j] = (det2(m + e) - det2(m - e)) / (2 * eps)
    np.testing.assert_allclose(fd, cof2(m), atol=1e-8 * (1 + frob(m)))


@given(mats, mats)
def test_bracket_is_orthogonal_projection(a, b):
    np.testing.assert_array_equal(bracket(bracket(a)), bracket(a))
    assert inner_mat(bracket(a), b) == pytest.approx(inner_mat(a, bracket(b)), abs=1e-9)
    assert bracket(a)[0, 0] == 0.0
    assert inner_mat(bracket(a), E11) == 0.0


def test_lift_and_batched_lift_agree(rng):
    ms = rng.standard_normal((7, 2, 2))
    vecs = lift_vec(ms)
    for m, v in zip(ms, vecs):
        np.testing.assert_array_equal(lift(m).vec, v)
    assert lift(IDENTITY).last == 1.0


def test_minors_point_arithmetic():
    p = MinorsPoint(mat2(1, 2, 3, 4), 5.0)
    q = MinorsPoint.from_vec([1, 1, 1, 1, 1])
    assert (p + q).vec.tolist() == [2, 3, 4, 5, 6]
    assert (p - q).vec.tolist() == [0, 1, 2, 3, 4]
    assert (p * 2).last == 10.0
    assert (-p).hat[0, 0] == -1.0
    assert inner5(p, q) == 15.0
    assert p.norm() == pytest.approx(np.sqrt(55))
    assert p == MinorsPoint.from_vec(p.vec) and hash(p) == hash(MinorsPoint.from_vec(p.vec))


def test_minors_point_is_immutable():
    p = MinorsPoint(mat2(1, 2, 3, 4), 5.0)
    with pytest.raises(ValueError):
        p.hat[0, 0] = 7.0
    with pytest.raises(ValueError):
        MinorsPoint(mat2(0, 0, 0, 0), np.nan)


def test_outer_and_flat_helpers():
    np.testing.assert_array_equal(outer([1, 0], [0, 1]), mat2(0, 1, 0, 0))
    assert mats_from_flat(np.arange(8.0).reshape(2, 4)).shape == (2, 2, 2)
