"""Executable probes of the tube construction around the line ``span{e1 (x) e1}``.

The tube is ``T_eps = {(s e11 + eta, y) : |eta| <= eps}``. The probes here
measure, with explicit witnesses, how close the lifted surface and the values
of ``W`` come to the tube, and compare two-sided envelope brackets against the
touching-hyperplane function on a grid of tube points.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .envelope import EnvelopeBracket, EnvelopeConfig, envelope_bracket
from .linalg import E11, MinorsPoint, as_mat2, bracket, det2, frob, lift
from .objective import Kind, ObjectiveSpec, eval_w
from .sampling import ball_mats, diagonal_family, log_grid, make_rng, multiscale_mats
from .touching import phi_tau_closed

GAP_MARGIN = 1e-6


class OutOfTube(ValueError):
    pass


@dataclass(frozen=True)
class TubeSpec:
    y: float = 1.0
    epsilon: float = 0.1
    t_range: float = 10.0

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("tube height y must be positive")
        if not 0 < self.epsilon < self.y:
            raise ValueError("need 0 < epsilon < y")
        if not self.t_range >= 0:
            raise ValueError("t_range must be nonnegative")

    @property
    def objective(self) -> ObjectiveSpec:
        return ObjectiveSpec(Kind.COUNTEREXAMPLE, self.y)

    def to_dict(self) -> dict:
        return {"y": self.y, "epsilon": self.epsilon, "t_range": self.t_range}


class Verdict(str, enum.Enum):
    GAP_CERTIFIED = "gap_certified"
    GAP_REFUTED_AT_CAP = "gap_refuted_at_cap"
    INCONCLUSIVE = "inconclusive"


def classify(phi_tau: float, lower: float, upper: float, epsilon: float,
             margin: float = GAP_MARGIN) -> Verdict:
    if lower > phi_tau + margin:
        return Verdict.GAP_CERTIFIED
    if upper < epsilon:
        return Verdict.GAP_REFUTED_AT_CAP
    return Verdict.INCONCLUSIVE


@dataclass(eq=False)
class GapRecord:
    t: float
    eta: np.ndarray
    X: MinorsPoint
    phi_tau: float
    phi_w_lower: float
    phi_w_upper: float
    cap: float
    epsilon: float
    verdict: Verdict
    flags: list = field(default_factory=list)

    def recomputed_verdict(self) -> Verdict:
        return classify(self.phi_tau, self.phi_w_lower, self.phi_w_upper, self.epsilon)


@dataclass(eq=False)
class ProbeReport:
    kind: str
    value: float
    witness: object
    budget_used: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(w):
            if isinstance(w, MinorsPoint):
                return w.vec.tolist()
            if isinstance(w, (tuple, list)):
                return [enc(v) for v in w]
            return np.asarray(w).tolist()
        return {"kind": self.kind, "value": self.value, "witness": enc(self.witness),
                "budget_used": self.budget_used, **self.extra}


def tube_point(tube: TubeSpec, t: float, eta) -> MinorsPoint:
    eta = as_mat2(eta)
    if frob(eta) > tube.epsilon * (1 + 1e-12):
        raise OutOfTube(f"|eta| = {frob(eta)} exceeds epsilon = {tube.epsilon}")
    return MinorsPoint(t * E11 + eta, tube.y)


def dist_lift_to_tube(tube: TubeSpec, xi):
    """Exact R^5 distance from ``lift(xi)`` to the tube (batched)."""
    xi = as_mat2(xi)
    off_axis = np.maximum(frob(bracket(xi)) - tube.epsilon, 0.0)
    return np.hypot(off_axis, det2(xi) - tube.y)


def probe_dist_tube_to_S(tube: TubeSpec, samples: int = 20_000, refine: int = 5,
                         seed: int = 0) -> ProbeReport:
    """Smallest distance from sampled lifted points to the tube; an upper bound on the true distance."""
    rng = make_rng(seed, "dist")
    ts = np.concatenate([[2 * tube.y / tube.epsilon], log_grid(1e-2, 1e4, 4)])
    cands = np.concatenate([
        diagonal_family(tube.y, ts),
        diagonal_family(tube.y, -ts),
        multiscale_mats(rng, samples, 1e-2, 1e3),
    ])
    vals = dist_lift_to_tube(tube, cands)
    order = np.argsort(vals, kind="stable")
    best_xi, best = cands[order[0]], float(vals[order[0]])
    for i in order[:refine]:
        if best == 0.0:
            break
        res = minimize(lambda z: float(dist_lift_to_tube(tube, z.reshape(2, 2))),
                       cands[i].ravel(), method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-14, "fatol": 1e-16})
        xi = res.x.reshape(2, 2)
        v = float(dist_lift_to_tube(tube, xi))
        if v < best:
            best_xi, best = xi, v
    return ProbeReport("dist_tube_to_S", best, np.array(best_xi),
                       {"samples": int(cands.shape[0]), "refine": refine},
                       {"epsilon": tube.epsilon, "y": tube.y, "t_range": tube.t_range})


def probe_min_W(spec: ObjectiveSpec, samples: int = 20_000, cap: float = 1e4,
                seed: int = 0) -> ProbeReport:
    """Smallest sampled value of ``W``; an upper bound on its infimum.

    The scan covers random matrices (independent of ``cap``), the zero matrix
    and ``diag(t, y/t)`` for ``t`` on a fixed log lattice up to ``cap``, so the
    reported value is nonincreasing in ``cap``.
    """
    if spec.kind is not Kind.COUNTEREXAMPLE:
        raise ValueError("probe_min_W targets the counterexample objective")
    rng = make_rng(seed, "min_w")
    ts = log_grid(1.0, cap, 4)
    cands = np.concatenate([
        np.zeros((1, 2, 2)),
        multiscale_mats(rng, samples, 1e-2, 1e2),
        diagonal_family(spec.y, ts),
        diagonal_family(spec.y, -ts),
    ])
    vals = eval_w(spec, cands)
    i = int(np.argmin(vals))
    return ProbeReport("min_W", float(vals[i]), cands[i],
                       {"samples": int(cands.shape[0]), "cap": cap}, {"y": spec.y})


@dataclass(frozen=True)
class GridConfig:
    n_t: int = 21
    n_eta: int = 16

    def __post_init__(self):
        if self.n_t < 1 or self.n_eta < 1:
            raise ValueError("grid sizes must be positive")


def grid_points(tube: TubeSpec, grid: GridConfig, seed: int):
    ts = np.linspace(-tube.t_range, tube.t_range, grid.n_t) if grid.n_t > 1 else np.zeros(1)
    etas = ball_mats(make_rng(seed, "tube_eta"), grid.n_eta, tube.epsilon)
    return ts, etas


def task_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, index]).generate_state(1)[0])


def _gap_task(args) -> GapRecord:
    tube, t, eta, cfg = args
    X = tube_point(tube, t, eta)
    tau = phi_tau_closed(X, tube.y)
    br: EnvelopeBracket = envelope_bracket(tube.objective, X, cfg)
    return GapRecord(float(t), eta, X, tau, br.lower, br.upper, cfg.cap, tube.epsilon,
                     classify(tau, br.lower, br.upper, tube.epsilon), br.flags)


def _workers() -> int:
    env = os.environ.get("BUSEMANN_LAB_THREADS")
    n = os.cpu_count() or 1
    if env:
        n = max(1, min(n, int(env)))
    return n


def gap_scan(tube: TubeSpec, grid: GridConfig = GridConfig(),
             config: EnvelopeConfig = EnvelopeConfig(), seed: int = 0) -> list:
    """Envelope brackets against the touching function on a tube grid.

    Records are ordered by (t index, eta index); each point gets its own
    derived seed so the output does not depend on scheduling.
    """
    ts, etas = grid_points(tube, grid, seed)
    tasks = []
    for i, t in enumerate(ts):
        for j, eta in enumerate(etas):
            cfg = replace(config, seed=task_seed(seed, i * grid.n_eta + j))
            tasks.append((tube, float(t), eta, cfg))
    workers = _workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_gap_task, tasks))
    return [_gap_task(a) for a in tasks]


def verdict_counts(records) -> dict:
    counts = {v.value: 0 for v in Verdict}
    for r in records:
        counts[r.verdict.value] += 1
    return counts


def _bracket_cached(cache: dict, spec, X: MinorsPoint, cfg) -> EnvelopeBracket:
    key = X.vec.tobytes()
    if key not in cache:
        cache[key] = envelope_bracket(spec, X, cfg)
    return cache[key]


def segment_affinity_probe(spec: ObjectiveSpec, X: MinorsPoint, Y_source, k: int = 5,
                           config: EnvelopeConfig = EnvelopeConfig()) -> ProbeReport:
    """Deviation of bracket midpoints from the chord along ``[lift(Y_source), X]``.

    A deviation no larger than the widest bracket is inconclusive.
    """
    if k < 3:
        raise ValueError("segment probe needs k >= 3")
    Y = lift(Y_source)
    ss = np.linspace(0.0, 1.0, k)
    cache: dict = {}
    brs = [_bracket_cached(cache, spec, Y + (X - Y) * s, config) for s in ss]
    mids = np.array([(b.lower + b.upper) / 2 for b in brs])
    widths = np.array([b.upper - b.lower for b in brs])
    chord = mids[0] + ss * (mids[-1] - mids[0])
    dev = float(np.max(np.abs(mids - chord)))
    width = float(np.max(widths))
    return ProbeReport(
        "segment_affinity", dev, (Y, X), {"k": k, "brackets": len(cache)},
        {"max_bracket_width": width, "inconclusive": bool(dev <= width),
         "lower": [b.lower for b in brs], "upper": [b.upper for b in brs]},
    )


def direction_constancy_probe(spec: ObjectiveSpec, Y: MinorsPoint, e: MinorsPoint,
                              trange: float = 10.0, k: int = 5,
                              config: EnvelopeConfig = EnvelopeConfig()) -> ProbeReport:
    """Bound on the variation of ``phi_W`` along ``Y + t e``: max upper minus min lower."""
    if not math.isclose(e.norm(), 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ValueError(f"direction must be a unit vector, |e| = {e.norm()}")
    if k < 1:
        raise ValueError("k must be positive")
    ts = np.linspace(-trange, trange, k) if k > 1 else np.zeros(1)
    cache: dict = {}
    brs = [_bracket_cached(cache, spec, Y + e * t, config) for t in ts]
    defect = max(b.upper for b in brs) - min(b.lower for b in brs)
    return ProbeReport(
        "direction_constancy", float(defect), (Y, e), {"k": k, "trange": trange},
        {"max_bracket_width": max(b.upper - b.lower for b in brs),
         "lower": [b.lower for b in brs], "upper": [b.upper for b in brs]},
    )
