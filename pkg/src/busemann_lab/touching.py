"""Touching hyperplanes of the counterexample objective and the function they generate.

For ``W(m) = |([m], det m - y)|`` the affine minorant touching the lifted graph
at ``lift(m0)`` is ``X -> u(m0) . ([X_hat], X' - y)`` with the unit vector
``u(m0) = ([m0], det m0 - y) / W(m0)``. Its pointwise supremum over ``m0`` is
``|([X_hat], X' - y)|``; :func:`construct_touching_sequence` produces explicit
bases (or sequences of bases) along which that supremum is reached.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    E11, E22, MinorsPoint, ZERO, as_mat2, bracket, cof2, det2, inner5, inner_mat, lift, rotation,
)
from .objective import Kind, ObjectiveSpec, eval_w, grad_w, rho_of, unit_residual
from .sampling import make_rng, multiscale_mats

SCHEDULE_LENGTH = 41  # j = 0..40
ANGLE_TARGET = 1e-4


@dataclass(frozen=True, eq=False)
class AffineFunctional5:
    """``X -> grad . X + offset`` on the minors space."""

    grad: MinorsPoint
    offset: float

    def __call__(self, X: MinorsPoint) -> float:
        return inner5(self.grad, X) + self.offset

    def on_lift(self, m) -> np.ndarray | float:
        """Evaluate at ``lift(m)`` for one matrix or a stack."""
        m = as_mat2(m)
        g = self.grad.hat
        return (
            np.sum(m * g, axis=(-2, -1)) + self.grad.last * det2(m) + self.offset
        )

    @property
    def vec(self) -> np.ndarray:
        return np.append(self.grad.vec, self.offset)

    @classmethod
    def from_vec(cls, v) -> AffineFunctional5:
        v = np.asarray(v, dtype=float)
        return cls(MinorsPoint.from_vec(v[:5]), float(v[5]))

    def shifted(self, delta: float) -> AffineFunctional5:
        return AffineFunctional5(self.grad, self.offset + delta)

    def to_dict(self) -> dict:
        return {"grad": self.grad.vec.tolist(), "offset": self.offset}


def _require_counterexample(spec: ObjectiveSpec):
    if spec.kind is not Kind.COUNTEREXAMPLE:
        raise ValueError("touching constructions are specific to the counterexample objective")


def target_vector(X: MinorsPoint, y: float) -> MinorsPoint:
    """``([X_hat], X' - y)``."""
    return MinorsPoint(bracket(X.hat), X.last - y)


def unit_direction(spec: ObjectiveSpec, m) -> MinorsPoint:
    _require_counterexample(spec)
    return MinorsPoint.from_vec(unit_residual(spec, as_mat2(m)))


def touching_affine(spec: ObjectiveSpec, base) -> AffineFunctional5:
    """The affine minorant touching the lifted graph at ``lift(base)``.

    Built in inner-product form ``X -> u(base) . ([X_hat], X' - y)``; see
    :func:`touching_affine_from_gradient` for the equivalent subgradient form.
    """
    _require_counterexample(spec)
    u = unit_direction(spec, base)
    return AffineFunctional5(u, -spec.y * u.last)


def touching_affine_from_gradient(spec: ObjectiveSpec, base) -> AffineFunctional5:
    """Touching affine from the subgradient ``(DW - rho cof, rho)`` at ``lift(base)``.

    Works for any objective exposing ``grad_w`` and ``rho_of``.
    """
    base = as_mat2(base)
    rho = float(rho_of(spec, base))
    grad = MinorsPoint(grad_w(spec, base) - rho * cof2(base), rho)
    return AffineFunctional5(grad, float(eval_w(spec, base)) - inner5(grad, lift(base)))


def phi_tau_closed(X: MinorsPoint, y: float) -> float:
    if not y > 0:
        raise ValueError("y must be positive")
    # same arithmetic as eval_w, so the two agree bit for bit on lifted points
    b = bracket(X.hat)
    s = X.last - y
    return float(np.sqrt(inner_mat(b, b) + s * s))


class Case(str, enum.Enum):
    I_BELOW = "i_below"
    I_ABOVE = "i_above"
    I_EQUAL = "i_equal"
    II = "ii"
    III = "iii"


@dataclass(frozen=True, eq=False)
class TouchingConstruction:
    """A base matrix, or a one-parameter sequence of bases, whose unit directions
    tend to ``limit_direction``.

    ``params`` holds ``k`` (case i_above, with rotation angle 0), ``mu``
    (case ii) or the pair ``mu, nu`` (case iii) for each schedule index.
    """

    case_tag: Case
    base: np.ndarray
    y: float
    limit_direction: MinorsPoint
    params: dict = field(default_factory=dict)

    def members(self) -> np.ndarray:
        """Bases along the parameter schedule, shape ``(n, 2, 2)``."""
        if self.case_tag is Case.I_ABOVE:
            q = rotation(self.params["angle"])
            return np.asarray(self.params["k"])[:, None, None] * q
        if self.case_tag is Case.II:
            return (self.base + self.params["mu"] * E11)[None]
        if self.case_tag is Case.III:
            mu = np.asarray(self.params["mu"])[:, None, None]
            nu = np.asarray(self.params["nu"])[:, None, None]
            return self.base + mu * E11 + nu * E22
        return self.base[None].copy()

    def directions(self) -> np.ndarray:
        """Unit directions ``u`` of the members, as 5-vectors."""
        return unit_residual(ObjectiveSpec(Kind.COUNTEREXAMPLE, self.y), self.members())

    def angles(self) -> np.ndarray:
        """Angle in radians between each member's direction and the limit."""
        chord = np.linalg.norm(self.directions() - self.limit_direction.vec, axis=-1)
        return 2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))

    def values(self, X: MinorsPoint) -> np.ndarray:
        """Touching-affine values ``([X_hat], X'-y) . u`` along the schedule."""
        return self.directions() @ target_vector(X, self.y).vec


def construct_touching_sequence(X: MinorsPoint, y: float) -> TouchingConstruction:
    """Bases whose touching affines approach the supremum at ``X``.

    When ``([X_hat], X' - y)`` vanishes every touching affine is zero at ``X``;
    the ``i_equal`` construction with base 0 is returned.
    """
    if not y > 0:
        raise ValueError("y must be positive")
    spec = ObjectiveSpec(Kind.COUNTEREXAMPLE, y)
    b = bracket(X.hat)
    xp = X.last
    z = target_vector(X, y)
    zn = z.norm()
    limit = z * (1.0 / zn) if zn > 0 else None
    j = np.arange(SCHEDULE_LENGTH, dtype=float)

    if not np.any(b):
        if xp < y:
            return TouchingConstruction(Case.I_BELOW, ZERO.copy(), y, limit)
        if xp > y:
            k = 2.0 ** j
            return TouchingConstruction(Case.I_ABOVE, ZERO.copy(), y, limit,
                                        {"k": k, "angle": 0.0})
        return TouchingConstruction(Case.I_EQUAL, ZERO.copy(), y, unit_direction(spec, ZERO))
    if X.hat[1, 1] != 0.0:
        mu = (xp - det2(b)) / X.hat[1, 1]
        return TouchingConstruction(Case.II, b, y, limit, {"mu": float(mu)})
    nu = 2.0 ** -j
    mu = (xp + X.hat[0, 1] * X.hat[1, 0]) / nu
    return TouchingConstruction(Case.III, b, y, limit, {"mu": mu, "nu": nu})


def phi_tau_sup_numeric(X: MinorsPoint, spec: ObjectiveSpec, budget=None, seed: int = 0) -> float:
    """Supremum of the touching-affine values at ``X``, by sampling bases.

    Seeds are the members of :func:`construct_touching_sequence` plus random
    multi-scale matrices; the best few are polished with Nelder-Mead.
    """
    _require_counterexample(spec)
    n_samples = 4000 if budget is None else budget.direction_samples
    refine_starts = 5 if budget is None else budget.refine_starts
    refine_iters = 2000 if budget is None else budget.refine_iters
    z = target_vector(X, spec.y).vec
    rng = make_rng(seed, "phi_tau")
    seeds = np.concatenate([
        construct_touching_sequence(X, spec.y).members(),
        multiscale_mats(rng, n_samples, 1e-2, 1e3),
    ])
    vals = unit_residual(spec, seeds) @ z
    order = np.argsort(-vals, kind="stable")
    best = float(vals[order[0]])

    def neg(x):
        return -float(unit_residual(spec, x.reshape(2, 2)) @ z)

    for i in order[:refine_starts]:
        res = minimize(neg, seeds[i].ravel(), method="Nelder-Mead",
                       options={"maxiter": refine_iters, "xatol": 1e-12, "fatol": 1e-15})
        best = max(best, -float(res.fun))
    return best
