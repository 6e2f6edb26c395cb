import numpy as np
import pytest
from hypothesis import given

from busemann_lab.linalg import E11, E22, MinorsPoint, ZERO, det2, diag, frob, lift, mat2
from busemann_lab.objective import COUNTEREXAMPLE, NORM_OF_MINORS, ObjectiveSpec, eval_w
from busemann_lab.sampling import make_rng, multiscale_mats
from busemann_lab.touching import (
    AffineFunctional5, Case, construct_touching_sequence, phi_tau_closed, phi_tau_sup_numeric,
    target_vector, touching_affine, touching_affine_from_gradient, unit_direction,
)
from conftest import mats


def point(hat, last):
    return MinorsPoint(np.asarray(hat, dtype=float), last)


def test_unit_direction_examples():
    np.testing.assert_array_equal(unit_direction(COUNTEREXAMPLE, ZERO).vec, [0, 0, 0, 0, -1])
    np.testing.assert_allclose(unit_direction(COUNTEREXAMPLE, diag(10, 0.1)).vec, [0, 0, 0, 1, 0],
                               atol=1e-14)
    u = unit_direction(COUNTEREXAMPLE, 1e3 * np.eye(2))
    assert np.linalg.norm(u.vec - [0, 0, 0, 0, 1]) < 0.05
    with pytest.raises(ValueError):
        unit_direction(NORM_OF_MINORS, ZERO)


@given(mats)
def test_unit_direction_is_unit_and_skips_corner(m):
    u = unit_direction(COUNTEREXAMPLE, m)
    assert abs(u.norm() - 1.0) <= 1e-12
    assert u.hat[0, 0] == 0.0


def test_touching_affine_examples():
    a = touching_affine(COUNTEREXAMPLE, ZERO)
    assert a(point(ZERO, 0.0)) == 1.0
    b = touching_affine(COUNTEREXAMPLE, diag(10, 0.1))
    assert b(point(E22, 1.0)) == pytest.approx(1.0, abs=1e-14)


@given(mats)
def test_touching_affine_touches_at_its_base(m):
    a = touching_affine(COUNTEREXAMPLE, m)
    w = eval_w(COUNTEREXAMPLE, m)
    assert a(lift(m)) == pytest.approx(w, rel=1e-12, abs=1e-12 * (1 + frob(m) ** 2))
    assert a.on_lift(m) == pytest.approx(a(lift(m)), rel=1e-12, abs=1e-12 * (1 + frob(m) ** 2))


def test_gradient_and_inner_product_forms_agree():
    rng = make_rng(11, "forms")
    bases = rng.standard_normal((1000, 2, 2)) * 3
    xs = rng.standard_normal((1000, 5)) * 3
    for base, x in zip(bases, xs):
        X = MinorsPoint.from_vec(x)
        a = touching_affine(COUNTEREXAMPLE, base)
        b = touching_affine_from_gradient(COUNTEREXAMPLE, base)
        assert abs(a(X) - b(X)) <= 1e-10 * (1 + frob(base) ** 2)


def test_touching_affines_are_minorants():
    rng = make_rng(12, "minorant")
    samples = np.concatenate([multiscale_mats(rng, 100_000, 1e-3, 1e3),
                              np.stack([diag(t, 1 / t) for t in np.logspace(-4, 4, 33)])])
    w = eval_w(COUNTEREXAMPLE, samples)
    for base in rng.standard_normal((50, 2, 2)) * 4:
        a = touching_affine(COUNTEREXAMPLE, base)
        assert np.all(a.on_lift(samples) <= w + 1e-9 * (1 + frob(samples) ** 2))


def test_affine_functional_serialisation():
    a = AffineFunctional5(MinorsPoint(mat2(1, 2, 3, 4), 5.0), -1.0)
    assert AffineFunctional5.from_vec(a.vec).vec.tolist() == a.vec.tolist()
    assert a.shifted(0.5).offset == -0.5
    assert a.to_dict() == {"grad": [1, 2, 3, 4, 5], "offset": -1.0}


def test_phi_tau_closed_examples(rng):
    for m in rng.standard_normal((50, 2, 2)) * 5:
        assert phi_tau_closed(lift(m), 1.0) == eval_w(COUNTEREXAMPLE, m)
    assert phi_tau_closed(point(3.0 * E11, 1.0), 1.0) == 0.0
    eta = mat2(0.0, 0.03, -0.04, 0.0)
    assert phi_tau_closed(point(7.0 * E11 + eta, 1.0), 1.0) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        phi_tau_closed(point(ZERO, 0.0), 0.0)


def test_case_ii_example():
    X = point(3 * E11 + 2 * E22, 7.0)
    c = construct_touching_sequence(X, 1.0)
    assert c.case_tag is Case.II
    np.testing.assert_array_equal(c.base, 2 * E22)
    assert c.params["mu"] == 3.5
    assert det2(c.members()[0]) == 7.0
    assert c.angles()[0] < 1e-7


def test_case_iii_example():
    X = point(mat2(0, 1, 1, 0), 2.0)
    c = construct_touching_sequence(X, 1.0)
    assert c.case_tag is Case.III
    np.testing.assert_allclose(c.params["mu"] * c.params["nu"], 3.0)
    assert c.angles()[-1] < 1e-4
    vals = c.values(X)
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[-1] == pytest.approx(phi_tau_closed(X, 1.0), abs=1e-8)


def test_case_i_variants():
    below = construct_touching_sequence(point(ZERO, 0.5), 1.0)
    assert below.case_tag is Case.I_BELOW
    assert below.values(point(ZERO, 0.5))[0] == pytest.approx(0.5)
    above = construct_touching_sequence(point(4 * E11, 3.0), 1.0)
    assert above.case_tag is Case.I_ABOVE
    assert above.angles()[-1] < 1e-4
    assert np.all(np.diff(above.values(point(4 * E11, 3.0))) >= -1e-12)
    # degenerate target: every touching affine vanishes there
    equal = construct_touching_sequence(point(5 * E11, 1.0), 1.0)
    assert equal.case_tag is Case.I_EQUAL
    np.testing.assert_array_equal(equal.base, ZERO)
    assert abs(equal.limit_direction.norm() - 1) < 1e-12


def test_limit_direction_is_normalised_target(rng):
    for x in rng.standard_normal((20, 5)):
        X = MinorsPoint.from_vec(x)
        c = construct_touching_sequence(X, 1.0)
        z = target_vector(X, 1.0)
        np.testing.assert_allclose(c.limit_direction.vec, z.vec / z.norm(), atol=1e-12)


def test_numeric_supremum_examples():
    assert phi_tau_sup_numeric(point(ZERO, 0.25), COUNTEREXAMPLE) == pytest.approx(0.75, abs=1e-9)
    assert abs(phi_tau_sup_numeric(point(ZERO, 1.0), COUNTEREXAMPLE)) <= 1e-6


def test_numeric_supremum_bounded_by_closed_form():
    rng = make_rng(3, "sup")
    spec = ObjectiveSpec(y=1.0)
    for x in rng.standard_normal((10, 5)) * 2:
        X = MinorsPoint.from_vec(x)
        closed = phi_tau_closed(X, 1.0)
        num = phi_tau_sup_numeric(X, spec)
        assert num <= closed + 1e-9
        assert num >= closed - 1e-3
