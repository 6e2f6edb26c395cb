"""Deterministic random streams and matrix samplers.

Every random draw in the package comes from :func:`make_rng`, a counter-based
Philox generator keyed by the run seed plus a tuple of stream labels, so the
results of a task do not depend on the order in which tasks execute.
"""

from __future__ import annotations

import zlib

import numpy as np


def _label_to_int(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode())


def make_rng(seed: int, *stream) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_label_to_int(s) for s in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def unit_sphere(rng: np.random.Generator, n: int, dim: int = 4) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_mats(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * rng.standard_normal((n, 2, 2))


def multiscale_mats(
    rng: np.random.Generator, n: int, lo: float = 1e-2, hi: float = 1e3
) -> np.ndarray:
    """Random directions on the Frobenius sphere with log-uniform radii in ``[lo, hi]``."""
    d = unit_sphere(rng, n)
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    return (d * r[:, None]).reshape(n, 2, 2)


def ball_mats(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Uniform samples from the Frobenius ball of the given radius in R^{2x2}."""
    d = unit_sphere(rng, n)
    r = radius * rng.uniform(size=n) ** 0.25
    return (d * r[:, None]).reshape(n, 2, 2)


def diagonal_family(y: float, ts) -> np.ndarray:
    """Matrices ``diag(t, y/t)``; every member has determinant ``y``."""
    ts = np.asarray(ts, dtype=float)
    out = np.zeros((ts.size, 2, 2))
    out[:, 0, 0] = ts
    out[:, 1, 1] = y / ts
    return out


def log_grid(lo: float, hi: float, per_decade: int = 4) -> np.ndarray:
    """Log-spaced points on a fixed lattice ``10**(k/per_decade)`` within ``[lo, hi]``, plus ``hi``."""
    k_lo = int(np.ceil(np.log10(lo) * per_decade - 1e-9))
    k_hi = int(np.floor(np.log10(hi) * per_decade + 1e-9))
    pts = 10.0 ** (np.arange(k_lo, k_hi + 1) / per_decade)
    pts = pts[(pts >= lo) & (pts <= hi)]
    if pts.size == 0 or not np.isclose(pts[-1], hi, rtol=1e-12, atol=0.0):
        pts = np.append(pts, hi)
    else:
        pts[-1] = hi
    return pts
