"""Polyconvex objectives on 2x2 matrices.

Both built-in objectives have the form ``W(m) = |v(m)|`` for a map
``v: R^{2x2} -> R^5`` that is affine in the minors ``(m, det m)``:

* ``counterexample``: ``v(m) = ([m], det m - y)`` where ``[m]`` zeroes the
  (1, 1) entry;
* ``norm_of_minors``: ``v(m) = (m, det m)``.

The rest of the package only talks to an objective through the triple
(:func:`eval_w`, :func:`grad_w`, :func:`rho_of`) plus the cancellation-free
:func:`taylor_excess`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import as_mat2, bracket, cof2, det2, inner_mat


class ZeroDenominator(ArithmeticError):
    """The objective vanishes, so its gradient and ``rho`` are undefined."""


class Kind(str, enum.Enum):
    COUNTEREXAMPLE = "counterexample"
    NORM_OF_MINORS = "norm_of_minors"


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: Kind = Kind.COUNTEREXAMPLE
    y: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "y", float(self.y))
        if self.kind is Kind.COUNTEREXAMPLE and not self.y > 0:
            raise ValueError(f"counterexample objective needs y > 0, got {self.y}")

    @classmethod
    def from_dict(cls, d: dict) -> ObjectiveSpec:
        return cls(kind=d.get("kind", "counterexample"), y=d.get("y", 1.0))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "y": self.y}


COUNTEREXAMPLE = ObjectiveSpec()
NORM_OF_MINORS = ObjectiveSpec(Kind.NORM_OF_MINORS)


def _shift(spec: ObjectiveSpec) -> float:
    return spec.y if spec.kind is Kind.COUNTEREXAMPLE else 0.0


def _project(spec: ObjectiveSpec, m: np.ndarray) -> np.ndarray:
    return bracket(m) if spec.kind is Kind.COUNTEREXAMPLE else m


def residual_parts(spec: ObjectiveSpec, m) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and scalar parts of ``v(m)``; batched over leading axes."""
    m = as_mat2(m)
    return _project(spec, m), det2(m) - _shift(spec)


def residual_vec(spec: ObjectiveSpec, m) -> np.ndarray:
    """``v(m)`` as 5-vectors, shape ``(..., 5)``."""
    mat, s = residual_parts(spec, m)
    return np.concatenate([mat.reshape(mat.shape[:-2] + (4,)), np.asarray(s)[..., None]], axis=-1)


def eval_w(spec: ObjectiveSpec, m):
    mat, s = residual_parts(spec, m)
    return np.sqrt(inner_mat(mat, mat) + s * s)


def _checked_w(spec: ObjectiveSpec, m):
    w = eval_w(spec, m)
    if np.any(w == 0):
        raise ZeroDenominator(f"{spec.kind.value} objective vanishes at {np.asarray(m).tolist()}")
    return w


def grad_w(spec: ObjectiveSpec, m) -> np.ndarray:
    m = as_mat2(m)
    mat, s = residual_parts(spec, m)
    w = _checked_w(spec, m)
    return (mat + np.asarray(s)[..., None, None] * cof2(m)) / np.asarray(w)[..., None, None]


def rho_of(spec: ObjectiveSpec, m):
    """Determinant-slot multiplier of the touching hyperplane at ``m``; always in [-1, 1]."""
    _, s = residual_parts(spec, m)
    return s / _checked_w(spec, m)


def unit_residual(spec: ObjectiveSpec, m) -> np.ndarray:
    """``v(m) / |v(m)|`` as 5-vectors."""
    v = residual_vec(spec, m)
    return v / np.asarray(_checked_w(spec, m))[..., None]


def alignment_gap(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``|v| - u.v`` for unit ``u``, computed without cancellation.

    Nonnegative by Cauchy-Schwarz; zero exactly when ``v`` is a nonnegative
    multiple of ``u``.
    """
    v = np.asarray(v, dtype=float)
    along = v @ u if v.ndim == 1 else np.einsum("...i,i->...", v, u)
    norm_v = np.linalg.norm(v, axis=-1)
    perp = v - np.asarray(along)[..., None] * u
    perp2 = np.sum(perp * perp, axis=-1)
    # second branch only when |v| + u.v would cancel
    safe = along > 0
    denom = np.where(safe, norm_v + along, 1.0)
    return np.where(safe, perp2 / denom, norm_v - along)


def taylor_excess(spec: ObjectiveSpec, m, h):
    """``W(m + h) - W(m) - DW(m) . h``, evaluated stably.

    Uses the identity ``W(m) + DW(m).h + rho(m) det h = u . v(m + h)`` with
    ``u = v(m)/|v(m)|``, so the excess equals ``rho(m) det h + (|v(m+h)| - u.v(m+h))``.
    ``m`` is a single matrix; ``h`` may be a stack.
    """
    m = as_mat2(m)
    h = as_mat2(h)
    u = unit_residual(spec, m)
    gap = alignment_gap(u, residual_vec(spec, m + h))
    return rho_of(spec, m) * det2(h) + gap


def touching_residual(spec: ObjectiveSpec, m, h):
    """``W(m+h) - W(m) - DW(m).h - rho(m) det h`` computed term by term.

    Nonnegative for every ``m``, ``h`` up to rounding: the touching hyperplane
    at ``lift(m)`` stays below the lifted graph of ``W``.
    """
    m = as_mat2(m)
    h = as_mat2(h)
    return (
        eval_w(spec, m + h)
        - eval_w(spec, m)
        - inner_mat(grad_w(spec, m), h)
        - rho_of(spec, m) * det2(h)
    )

