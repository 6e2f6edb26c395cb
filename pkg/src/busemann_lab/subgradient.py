"""Sampled brackets for the determinant-slot subgradient interval at lifted points.

At ``lift(m)`` the subdifferential of the largest convex representative is
``{(DW(m) - rho cof m, rho) : rho_min <= rho <= rho_max}`` where

    rho_max = inf { q(eta) : det eta > 0 },   rho_min = sup { q(eta) : det eta < 0 },
    q(eta) = (W(m + eta) - W(m) - DW(m) . eta) / det eta.

Both extremes are generally approached only along unbounded, nearly rank-one
``eta``; the search below combines a radial scan with a family of rank-one
"needles" and polishes the best candidates with Nelder-Mead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .linalg import MinorsPoint, as_mat2, cof2, det2, inner_mat
from .objective import Kind, ObjectiveSpec, grad_w, rho_of, taylor_excess, unit_residual
from .sampling import make_rng, unit_sphere


class BudgetExhausted(RuntimeError):
    """No sampled direction passed the determinant guard."""


@dataclass(frozen=True)
class SearchBudget:
    direction_samples: int = 2000
    radius_grid: tuple = tuple(np.logspace(-3, 2, 13))
    det_floor: float = 1e-6
    refine_iters: int = 4000
    refine_starts: int = 10
    needle_scales: tuple = tuple(np.logspace(0, 4, 9))

    def __post_init__(self):
        grid = tuple(float(r) for r in self.radius_grid)
        object.__setattr__(self, "radius_grid", grid)
        object.__setattr__(self, "needle_scales", tuple(float(s) for s in self.needle_scales))
        if not self.det_floor > 0:
            raise ValueError("det_floor must be positive")
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
            raise ValueError("radius_grid must be nonempty, positive and ascending")
        if self.direction_samples < 1 or self.refine_starts < 0 or self.refine_iters < 0:
            raise ValueError("sample and iteration counts must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> SearchBudget:
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def to_dict(self) -> dict:
        return {
            "direction_samples": self.direction_samples,
            "radius_grid": list(self.radius_grid),
            "det_floor": self.det_floor,
            "refine_iters": self.refine_iters,
            "refine_starts": self.refine_starts,
            "needle_scales": list(self.needle_scales),
        }


@dataclass(frozen=True)
class RhoEstimate:
    value: float
    witness: np.ndarray
    samples_used: int
    min_abs_det_seen: float


@dataclass(frozen=True)
class SubgradientInterval:
    rho_min: float
    rho_max: float
    samples_used: int
    min_abs_det_seen: float
    witness_min: np.ndarray | None = field(default=None, compare=False)
    witness_max: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.rho_min <= self.rho_max + 1e-6:
            raise ValueError(f"inverted interval [{self.rho_min}, {self.rho_max}]")

    @property
    def width(self) -> float:
        return self.rho_max - self.rho_min


def rho_quotient(spec: ObjectiveSpec, m, eta):
    """``(W(m + eta) - W(m) - DW(m).eta) / det eta`` for one or many ``eta``."""
    return taylor_excess(spec, m, eta) / det2(eta)


def _scalar_quotient(spec: ObjectiveSpec, m: np.ndarray, sign: int, det_floor: float):
    # Same arithmetic as rho_quotient, unrolled for the Nelder-Mead inner loop.
    u0, u1, u2, u3, u4 = (float(c) for c in unit_residual(spec, m))
    rho = float(rho_of(spec, m))
    m11, m12, m21, m22 = (float(c) for c in m.ravel())
    bracketed = spec.kind is Kind.COUNTEREXAMPLE
    shift = spec.y if bracketed else 0.0

    def f(z):
        a, b, c, d = z
        dh = a * d - b * c
        if sign * dh <= det_floor * (a * a + b * b + c * c + d * d):
            return math.inf
        x11, x12, x21, x22 = m11 + a, m12 + b, m21 + c, m22 + d
        v0 = 0.0 if bracketed else x11
        v4 = x11 * x22 - x12 * x21 - shift
        al = u0 * v0 + u1 * x12 + u2 * x21 + u3 * x22 + u4 * v4
        nv = math.sqrt(v0 * v0 + x12 * x12 + x21 * x21 + x22 * x22 + v4 * v4)
        if al > 0:
            p0, p1, p2, p3, p4 = (v0 - al * u0, x12 - al * u1, x21 - al * u2,
                                  x22 - al * u3, v4 - al * u4)
            gap = (p0 * p0 + p1 * p1 + p2 * p2 + p3 * p3 + p4 * p4) / (nv + al)
        else:
            gap = nv - al
        return sign * (rho + gap / dh)

    return f


def _candidates(rng: np.random.Generator, budget: SearchBudget) -> np.ndarray:
    dirs = unit_sphere(rng, budget.direction_samples).reshape(-1, 2, 2)
    radii = np.asarray(budget.radius_grid)
    radial = (radii[:, None, None, None] * dirs[None]).reshape(-1, 2, 2)

    # needles: s * (rank one) + delta * q, s large, delta moderate
    basis = np.eye(4).reshape(4, 2, 2)
    a = unit_sphere(rng, 8, 2)
    b = unit_sphere(rng, 8, 2)
    rank_one = np.concatenate([basis, np.einsum("ni,nj->nij", a, b)])
    offsets = np.concatenate([basis, unit_sphere(rng, 8).reshape(-1, 2, 2)])
    s = np.asarray(budget.needle_scales)
    s = np.concatenate([s, -s])
    delta = np.logspace(-2, 1, 10)
    delta = np.concatenate([delta, -delta])
    needles = (
        rank_one[:, None, None, None] * s[None, None, :, None, None, None]
        + offsets[None, :, None, None] * delta[None, None, None, :, None, None]
    ).reshape(-1, 2, 2)
    return np.concatenate([radial, needles])


def _estimate(spec, m, budget, sign, seed) -> RhoEstimate:
    m = as_mat2(m)
    rng = make_rng(seed, "rho", sign)
    eta = _candidates(rng, budget)
    dh = det2(eta)
    ok = sign * dh > budget.det_floor * inner_mat(eta, eta)
    if not np.any(ok):
        raise BudgetExhausted("no sampled direction satisfies the determinant guard")
    eta = eta[ok]
    q = rho_quotient(spec, m, eta)
    order = np.argsort(sign * q, kind="stable")
    best_eta = eta[order[0]]
    best = sign * q[order[0]]

    f = _scalar_quotient(spec, m, sign, budget.det_floor)
    for i in order[: budget.refine_starts]:
        res = minimize(
            f, eta[i].ravel(), method="Nelder-Mead",
            options={"maxiter": budget.refine_iters, "xatol": 1e-12, "fatol": 1e-15, "adaptive": True},
        )
        if np.isfinite(res.fun) and res.fun < best:
            cand = res.x.reshape(2, 2)
            # re-check the guard on the public path before accepting
            if sign * det2(cand) > budget.det_floor * inner_mat(cand, cand):
                best, best_eta = res.fun, cand
    value = float(rho_quotient(spec, m, best_eta))
    return RhoEstimate(
        value=value,
        witness=np.array(best_eta),
        samples_used=int(eta.shape[0]),
        min_abs_det_seen=float(np.min(np.abs(dh[ok]))),
    )


def estimate_rho_max(spec: ObjectiveSpec, m, budget: SearchBudget = SearchBudget(),
                     seed: int = 0) -> RhoEstimate:
    """Sampled infimum of the quotient over ``det eta > 0``; an upper estimate of ``rho_max``."""
    return _estimate(spec, m, budget, +1, seed)


def estimate_rho_min(spec: ObjectiveSpec, m, budget: SearchBudget = SearchBudget(),
                     seed: int = 0) -> RhoEstimate:
    """Sampled supremum of the quotient over ``det eta < 0``; a lower estimate of ``rho_min``."""
    return _estimate(spec, m, budget, -1, seed)


def estimate_interval(spec: ObjectiveSpec, m, budget: SearchBudget = SearchBudget(),
                      seed: int = 0) -> SubgradientInterval:
    hi = estimate_rho_max(spec, m, budget, seed)
    lo = estimate_rho_min(spec, m, budget, seed)
    return SubgradientInterval(
        rho_min=lo.value,
        rho_max=hi.value,
        samples_used=lo.samples_used + hi.samples_used,
        min_abs_det_seen=min(lo.min_abs_det_seen, hi.min_abs_det_seen),
        witness_min=lo.witness,
        witness_max=hi.witness,
    )


def subgradient_set(spec: ObjectiveSpec, m, interval: SubgradientInterval):
    """The two extreme subgradients ``(DW(m) - rho cof m, rho)`` at ``rho_min`` and ``rho_max``."""
    m = as_mat2(m)
    dw = grad_w(spec, m)
    cof = cof2(m)
    return tuple(MinorsPoint(dw - r * cof, r) for r in (interval.rho_min, interval.rho_max))
