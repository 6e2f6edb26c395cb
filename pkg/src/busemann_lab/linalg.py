"""2x2 matrix algebra and the geometry of the minors space R^5 = R^{2x2} x R.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)``; every function here
also accepts stacks of shape ``(..., 2, 2)`` so that sampling code can stay
vectorised. Points of the minors space are :class:`MinorsPoint` instances, or
flat 5-vectors ordered ``(e11, e12, e21, e22, last)`` where batching matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
E22 = np.array([[0.0, 0.0], [0.0, 1.0]])
IDENTITY = np.eye(2)
ZERO = np.zeros((2, 2))


def mat2(e11: float, e12: float, e21: float, e22: float) -> np.ndarray:
    m = np.array([[e11, e12], [e21, e22]], dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"matrix entries must be finite, got {m.tolist()}")
    return m


def as_mat2(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (2, 2):
        raise ValueError(f"expected trailing shape (2, 2), got {m.shape}")
    return m


def diag(a: float, b: float) -> np.ndarray:
    return mat2(a, 0.0, 0.0, b)


def det2(m) -> np.ndarray | float:
    m = np.asarray(m, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def cof2(m) -> np.ndarray:
    """Cofactor matrix, the gradient of ``det2``.

    Satisfies ``det(m + h) = det(m) + cof(m) . h + det(h)`` exactly.
    """
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 1, 0]
    out[..., 1, 0] = -m[..., 0, 1]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def inner_mat(a, b) -> np.ndarray | float:
    """Trace inner product ``tr(a^T b)``."""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=(-2, -1))


def frob(m) -> np.ndarray | float:
    return np.sqrt(inner_mat(m, m))


def outer(a, b) -> np.ndarray:
    return np.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def bracket(m) -> np.ndarray:
    """Zero the (1, 1) entry: orthogonal projection off the line ``span{e1 (x) e1}``."""
    out = np.array(m, dtype=float, copy=True)
    out[..., 0, 0] = 0.0
    return out


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return mat2(c, -s, s, c)


@dataclass(frozen=True, eq=False)
class MinorsPoint:
    """A point ``(hat, last)`` of R^{2x2} x R."""

    hat: np.ndarray
    last: float

    def __post_init__(self):
        hat = as_mat2(self.hat).copy()
        if hat.shape != (2, 2):
            raise ValueError("MinorsPoint.hat must be a single 2x2 matrix")
        hat.setflags(write=False)
        object.__setattr__(self, "hat", hat)
        object.__setattr__(self, "last", float(self.last))
        if not (np.all(np.isfinite(hat)) and np.isfinite(self.last)):
            raise ValueError("MinorsPoint components must be finite")

    @classmethod
    def from_vec(cls, v) -> MinorsPoint:
        v = np.asarray(v, dtype=float)
        if v.shape != (5,):
            raise ValueError(f"expected a 5-vector, got shape {v.shape}")
        return cls(v[:4].reshape(2, 2), v[4])

    @property
    def vec(self) -> np.ndarray:
        return np.append(self.hat.ravel(), self.last)

    def __add__(self, other: MinorsPoint) -> MinorsPoint:
        return MinorsPoint(self.hat + other.hat, self.last + other.last)

    def __sub__(self, other: MinorsPoint) -> MinorsPoint:
        return MinorsPoint(self.hat - other.hat, self.last - other.last)

    def __mul__(self, s: float) -> MinorsPoint:
        return MinorsPoint(self.hat * s, self.last * s)

    __rmul__ = __mul__

    def __neg__(self) -> MinorsPoint:
        return MinorsPoint(-self.hat, -self.last)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MinorsPoint):
            return NotImplemented
        return bool(np.array_equal(self.hat, other.hat) and self.last == other.last)

    def __hash__(self):
        return hash((self.hat.tobytes(), self.last))

    def norm(self) -> float:
        return float(np.sqrt(inner5(self, self)))

    def __repr__(self):
        return f"MinorsPoint(hat={self.hat.tolist()}, last={self.last!r})"


def inner5(p: MinorsPoint, q: MinorsPoint) -> float:
    return float(inner_mat(p.hat, q.hat) + p.last * q.last)


def lift(m) -> MinorsPoint:
    """The minors map ``m -> (m, det m)``."""
    m = as_mat2(m)
    return MinorsPoint(m, det2(m))


def lift_vec(m) -> np.ndarray:
    """Batched minors map returning 5-vectors, shape ``(..., 5)``."""
    m = as_mat2(m)
    flat = m.reshape(m.shape[:-2] + (4,))
    return np.concatenate([flat, det2(m)[..., None]], axis=-1)


def mats_from_flat(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(x.shape[:-1] + (2, 2))
