"""Two-sided bounds on the largest convex representative ``phi_W`` on R^5.

Upper bounds are explicit convex combinations ``sum_j lambda_j lift(xi_j) = X``
with cost ``sum_j lambda_j W(xi_j)``. Lower bounds are affine functionals
``a`` with ``a(lift(xi)) <= W(xi)`` for all ``xi``, evaluated at ``X``.

Both come out of one column-generation / cutting-plane loop: the LP over a
finite cut set maximises ``a(X)`` subject to ``a(lift(xi_i)) <= W(xi_i)``, and
its dual multipliers are exactly the weights of a convex combination of the
cut points. A separation oracle searches for the most violated cut; the loop
stops when none is found. Every certificate is re-audited on fresh samples
before it is reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .linalg import MinorsPoint, as_mat2, bracket, cof2, det2, diag, frob, lift_vec, rotation
from .lp import LinearProgram, Status, lp_solve
from .objective import Kind, ObjectiveSpec, eval_w, residual_parts
from .sampling import diagonal_family, log_grid, make_rng, multiscale_mats
from .touching import (
    AffineFunctional5, construct_touching_sequence, touching_affine, touching_affine_from_gradient,
)

log = logging.getLogger(__name__)

MAX_ATOMS = 6
FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class EnvelopeConfig:
    cap: float = 1e3
    grad_box: float = 1e3
    offset_box: float = 1e8
    restarts: int = 32
    tol_cut: float = 1e-6
    max_cut_iters: int = 40
    initial_cuts: int = 200
    oracle_samples: int = 2000
    oracle_refine: int = 5
    audit_samples: int = 100_000
    audit_t_max: float = 1e4
    audit_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        for name in ("cap", "grad_box", "offset_box", "tol_cut", "audit_t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("restarts", "max_cut_iters", "initial_cuts", "oracle_samples",
                     "oracle_refine", "audit_samples"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> EnvelopeConfig:
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(eq=False)
class ConvexCombination:
    """At most six weighted matrices; ``lambdas`` sum to one."""

    lambdas: np.ndarray
    xis: np.ndarray

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float).reshape(-1)
        self.xis = as_mat2(self.xis).reshape(-1, 2, 2)
        if self.lambdas.size != self.xis.shape[0]:
            raise ValueError("one weight per matrix")
        if self.lambdas.size == 0 or self.lambdas.size > MAX_ATOMS:
            raise ValueError(f"a convex combination has 1..{MAX_ATOMS} entries")
        if np.any(self.lambdas < 0) or abs(self.lambdas.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to one")

    def point(self) -> MinorsPoint:
        return MinorsPoint.from_vec(self.lambdas @ lift_vec(self.xis))

    def residual(self, X: MinorsPoint) -> float:
        return float(np.linalg.norm(self.lambdas @ lift_vec(self.xis) - X.vec))

    def cost(self, spec: ObjectiveSpec) -> float:
        return float(self.lambdas @ eval_w(spec, self.xis))

    def max_norm(self) -> float:
        return float(frob(self.xis).max())

    def to_dict(self) -> dict:
        return {"lambdas": self.lambdas.tolist(), "xis": self.xis.reshape(-1, 4).tolist()}


@dataclass(eq=False)
class CutSet:
    """Sample points ``xi_i``, each imposing ``a(lift(xi_i)) <= W(xi_i)``."""

    cuts: np.ndarray = field(default_factory=lambda: np.zeros((0, 2, 2)))
    violation_tol: float = 1e-6

    def __len__(self):
        return self.cuts.shape[0]

    def add(self, xi) -> bool:
        xi = as_mat2(xi).reshape(-1, 2, 2)
        added = False
        for m in xi:
            if len(self) and np.min(frob(self.cuts - m)) <= 1e-12:
                continue
            self.cuts = np.concatenate([self.cuts, m[None]])
            added = True
        return added


@dataclass(eq=False)
class UpperBound:
    value: float
    combination: ConvexCombination | None
    residual: float
    flags: list = field(default_factory=list)


@dataclass(eq=False)
class LowerBound:
    value: float
    certificate: AffineFunctional5
    cuts: CutSet
    touching_value: float
    audit_slack: float
    iterations: int
    flags: list = field(default_factory=list)


@dataclass(eq=False)
class EnvelopeBracket:
    lower: float
    lower_certificate: AffineFunctional5
    cut_set: CutSet
    upper: float
    upper_certificate: ConvexCombination | None
    upper_residual: float
    touching_lower: float
    box_bound: float
    param_cap: float
    flags: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "touching_lower": self.touching_lower,
            "lower_certificate": self.lower_certificate.to_dict(),
            "upper_certificate": None if self.upper_certificate is None
            else self.upper_certificate.to_dict(),
            "upper_residual": self.upper_residual,
            "n_cuts": len(self.cut_set),
            "box_bound": self.box_bound,
            "param_cap": self.param_cap,
            "flags": list(self.flags),
        }


# --- separation and audit -------------------------------------------------


def _slack(spec: ObjectiveSpec, a: AffineFunctional5, xis) -> np.ndarray:
    return eval_w(spec, xis) - a.on_lift(xis)


def _slack_and_grad(z: np.ndarray, spec: ObjectiveSpec, a: AffineFunctional5):
    m = z.reshape(2, 2)
    mat, s = residual_parts(spec, m)
    w = float(np.sqrt(np.sum(mat * mat) + s * s))
    cof = cof2(m)
    dw = (mat + s * cof) / w if w > 0 else np.zeros((2, 2))
    val = w - float(np.sum(a.grad.hat * m) + a.grad.last * det2(m) + a.offset)
    return val, (dw - a.grad.hat - a.grad.last * cof).ravel()


def _edge_t(y: float, cap: float) -> float:
    """Largest ``t`` with ``|diag(t, y/t)| <= cap``."""
    y = abs(y)
    disc = cap ** 4 - 4 * y * y
    if disc < 0:
        return np.sqrt(y)
    t = np.sqrt((cap * cap + np.sqrt(disc)) / 2)
    return float(np.nextafter(t, 0.0))


def _family(y: float, t_max: float, per_decade: int = 4) -> np.ndarray:
    """``diag(+-t, +-y/t)`` for ``t`` on a log lattice in ``[1, t_max]``."""
    if y == 0:
        y = 1.0
    ts = log_grid(1.0, max(t_max, 1.0), per_decade)
    return np.concatenate([diagonal_family(y, ts), diagonal_family(y, -ts)])


def _needles(radius: float) -> np.ndarray:
    s = log_grid(1.0, max(radius / 2, 1.0), 2)
    s = np.concatenate([s, -s])
    d = np.array([1e-3, 1e-2, 1e-1, 1.0])
    d = np.concatenate([d, -d])
    basis = np.eye(4).reshape(4, 2, 2)
    out = []
    for i in range(4):
        for j in range(4):
            if i != j:
                out.append(s[:, None, None, None] * basis[i] + d[None, :, None, None] * basis[j])
    return np.concatenate(out).reshape(-1, 2, 2)


def _clip_ball(m: np.ndarray, radius: float) -> np.ndarray:
    n = frob(m)
    return m if n <= radius else m * (radius / n) * (1 - 1e-15)


def separation_oracle(spec: ObjectiveSpec, a: AffineFunctional5, radius: float = 1e3,
                      samples: int = 2000, refine: int = 5, seed: int = 0, stream=0):
    """Search for ``xi`` with ``|xi| <= radius`` minimising ``W(xi) - a(lift(xi))``.

    Returns ``(xi, value)``; a negative value certifies that ``a`` is not a
    minorant, with ``xi`` as the witness.
    """
    rng = make_rng(seed, "oracle", stream)
    y = spec.y if spec.kind is Kind.COUNTEREXAMPLE else 1.0
    cands = np.concatenate([
        multiscale_mats(rng, samples, 1e-2, radius),
        _family(y, _edge_t(y, radius)),
        _needles(radius),
        np.zeros((1, 2, 2)),
    ])
    cands = cands[frob(cands) <= radius]
    vals = _slack(spec, a, cands)
    order = np.argsort(vals, kind="stable")
    best_i = order[0]
    best_xi, best_val = cands[best_i], float(vals[best_i])
    bounds = [(-radius, radius)] * 4
    for i in order[:refine]:
        res = minimize(_slack_and_grad, cands[i].ravel(), args=(spec, a), jac=True,
                       method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 200, "ftol": 1e-15, "gtol": 1e-12})
        xi = _clip_ball(res.x.reshape(2, 2), radius)
        v = float(_slack(spec, a, xi))
        if v < best_val:
            best_xi, best_val = xi, v
    return np.array(best_xi), best_val


def audit_samples(spec: ObjectiveSpec, n: int, t_max: float, seed: int,
                  radius: float = 1e3) -> np.ndarray:
    rng = make_rng(seed, "audit")
    y = spec.y if spec.kind is Kind.COUNTEREXAMPLE else 1.0
    return np.concatenate([
        multiscale_mats(rng, n, 1e-3, radius),
        _family(y, t_max, per_decade=8),
    ])


def audit_affine(spec: ObjectiveSpec, a: AffineFunctional5, samples: np.ndarray):
    """Smallest slack ``W - a o lift`` over the given samples, with its witness."""
    s = _slack(spec, a, samples)
    i = int(np.argmin(s))
    return float(s[i]), samples[i]


# --- primal side ----------------------------------------------------------


def pair_seeds(X: MinorsPoint, cap: float) -> list:
    """Two-atom combinations ``X_hat +- s D`` whose lifts average exactly to ``X``.

    Averaging ``lift(X_hat + s D)`` and ``lift(X_hat - s D)`` gives
    ``(X_hat, det X_hat + s^2 det D)``, so ``det D = +-1`` and
    ``s = sqrt(|X' - det X_hat|)`` hit ``X``.
    """
    gap = X.last - det2(X.hat)
    if gap == 0:
        return []
    s = np.sqrt(abs(gap))
    ts = log_grid(1.0, max(cap, 1.0), 2)
    room = (cap - frob(X.hat)) / s
    if room > 1.0:
        # the member of diag(t, +-1/t) reaching the cap, slightly inside it
        ts = np.append(ts, _edge_t(1.0, room) * (1 - 1e-12))
    if gap > 0:
        ds = [rotation(th) for th in (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)]
        ds += [diag(t, 1 / t) for t in ts] + [diag(1 / t, t) for t in ts[1:]]
    else:
        ds = [diag(1.0, -1.0), np.array([[0.0, 1.0], [1.0, 0.0]])]
        ds += [diag(t, -1 / t) for t in ts[1:]] + [diag(1 / t, -t) for t in ts[1:]]
    out = []
    for d in ds:
        a, b = X.hat + s * d, X.hat - s * d
        if max(frob(a), frob(b)) <= cap:
            out.append((a, b))
    return out


def aligned_atoms(spec: ObjectiveSpec, X: MinorsPoint, cap: float) -> np.ndarray:
    """Counterexample atoms whose residual vectors are parallel to ``([X_hat], X' - y)``.

    Mixing such atoms costs exactly ``|([X_hat], X' - y)|`` per unit weight.
    """
    if spec.kind is not Kind.COUNTEREXAMPLE:
        return np.zeros((0, 2, 2))
    y = spec.y
    b = bracket(X.hat)
    if not np.any(b):
        return np.zeros((0, 2, 2))
    cs = np.concatenate([log_grid(1e-4, 1e2, 4), [1.0]])
    k = X.hat[0, 1] * X.hat[1, 0]
    target = y + cs * (X.last - y)
    out = []
    if X.hat[1, 1] != 0:
        a = (target + cs * cs * k) / (cs * X.hat[1, 1])
        out = [c * b + ai * np.array([[1.0, 0.0], [0.0, 0.0]]) for c, ai in zip(cs, a)]
    else:
        for nu in (1e-1, 1e-2, 1e-3):
            a = (target + cs * cs * k) / nu
            out += [c * b + np.array([[ai, 0.0], [0.0, nu]]) for c, ai in zip(cs, a)]
    out = np.array(out).reshape(-1, 2, 2)
    return out[np.isfinite(out).all(axis=(1, 2)) & (frob(out) <= cap)]


def project_feasible(combo: ConvexCombination, X: MinorsPoint, iters: int = 8) -> ConvexCombination:
    """Gauss-Newton (minimum-norm) correction of the matrices so the lifts average to ``X``."""
    lam, xis = combo.lambdas, combo.xis.copy()
    for _ in range(iters):
        r = lam @ lift_vec(xis) - X.vec
        if np.linalg.norm(r) <= 1e-15 * (1 + np.linalg.norm(X.vec)):
            break
        J = np.zeros((5, 4 * lam.size))
        for j in range(lam.size):
            J[:4, 4 * j:4 * j + 4] = lam[j] * np.eye(4)
            J[4, 4 * j:4 * j + 4] = lam[j] * cof2(xis[j]).ravel()
        step = np.linalg.lstsq(J, r, rcond=None)[0]
        xis = xis - step.reshape(-1, 2, 2)
    return ConvexCombination(lam, xis)


def _compress(lam: np.ndarray, xis: np.ndarray) -> ConvexCombination | None:
    keep = lam > 1e-14
    if not np.any(keep):
        return None
    lam, xis = lam[keep], xis[keep]
    if lam.size > MAX_ATOMS:
        order = np.argsort(-lam, kind="stable")[:MAX_ATOMS]
        lam, xis = lam[order], xis[order]
    return ConvexCombination(lam / lam.sum(), xis)


def _polish(spec: ObjectiveSpec, combo: ConvexCombination, X: MinorsPoint, cap: float):
    """Local SLSQP descent on weights and matrices jointly, feasibility enforced as constraints."""
    k = combo.lambdas.size
    z0 = np.concatenate([combo.lambdas, combo.xis.ravel()])

    def split(z):
        return z[:k], z[k:].reshape(k, 2, 2)

    def fun(z):
        lam, xis = split(z)
        mat, s = residual_parts(spec, xis)
        w = np.sqrt(np.sum(mat * mat, axis=(1, 2)) + s * s)
        safe = np.where(w > 0, w, 1.0)
        dw = (mat + s[:, None, None] * cof2(xis)) / safe[:, None, None]
        return float(lam @ w), np.concatenate([w, (lam[:, None, None] * dw).ravel()])

    def eq(z):
        lam, xis = split(z)
        return np.append(lam @ lift_vec(xis) - X.vec, lam.sum() - 1.0)

    def eq_jac(z):
        lam, xis = split(z)
        J = np.zeros((6, 5 * k))
        J[:5, :k] = lift_vec(xis).T
        J[5, :k] = 1.0
        for j in range(k):
            J[:4, k + 4 * j:k + 4 * j + 4] = lam[j] * np.eye(4)
            J[4, k + 4 * j:k + 4 * j + 4] = lam[j] * cof2(xis[j]).ravel()
        return J

    def ineq(z):
        return cap * cap - np.sum(split(z)[1] ** 2, axis=(1, 2))

    def ineq_jac(z):
        xis = split(z)[1]
        J = np.zeros((k, 5 * k))
        for j in range(k):
            J[j, k + 4 * j:k + 4 * j + 4] = -2 * xis[j].ravel()
        return J

    res = minimize(fun, z0, jac=True, method="SLSQP",
                   bounds=[(0.0, 1.0)] * k + [(None, None)] * (4 * k),
                   constraints=[{"type": "eq", "fun": eq, "jac": eq_jac},
                                {"type": "ineq", "fun": ineq, "jac": ineq_jac}],
                   options={"maxiter": 200, "ftol": 1e-14})
    lam, xis = split(res.x)
    lam = np.clip(lam, 0.0, None)
    if lam.sum() <= 0 or not np.all(np.isfinite(res.x)):
        return None
    c = _compress(lam, xis)
    if c is None:
        return None
    c = project_feasible(c, X)
    if c.max_norm() > cap * (1 + 1e-12):
        return None
    return c


def _accept(spec, combo, X, cap):
    """Cost of ``combo`` if it is a valid certificate, else ``inf``."""
    if combo is None:
        return np.inf
    if combo.residual(X) > FEASIBILITY_TOL or combo.max_norm() > cap * (1 + 1e-12):
        return np.inf
    return combo.cost(spec)


# --- the loop -------------------------------------------------------------


def initial_cut_set(spec: ObjectiveSpec, X: MinorsPoint, cfg: EnvelopeConfig) -> CutSet:
    """Quasi-random matrices in [-5, 5]^4, the diagonal family, and exact seeds for ``X``."""
    y = spec.y if spec.kind is Kind.COUNTEREXAMPLE else 1.0
    cuts = CutSet(violation_tol=cfg.tol_cut)
    pts = []
    if cfg.initial_cuts:
        sob = qmc.Sobol(d=4, scramble=True, seed=make_rng(cfg.seed, "sobol"))
        m = int(np.ceil(np.log2(cfg.initial_cuts)))
        pts.append((sob.random_base2(m)[:cfg.initial_cuts] * 10.0 - 5.0).reshape(-1, 2, 2))
    ts = np.array([1.0, 10.0, 100.0, 1000.0, _edge_t(y, cfg.cap)])
    pts.append(diagonal_family(y, ts))
    pts.append(diagonal_family(y, -ts))
    pts.append(X.hat[None])
    for a, b in pair_seeds(X, cfg.cap):
        pts.append(np.stack([a, b]))
    pts.append(aligned_atoms(spec, X, cfg.cap))
    allpts = np.concatenate(pts)
    cuts.add(allpts[frob(allpts) <= cfg.cap])
    return cuts


def _lp_for(spec, X, cuts: CutSet, cfg: EnvelopeConfig):
    rows = np.concatenate([lift_vec(cuts.cuts), np.ones((len(cuts), 1))], axis=1)
    rhs = eval_w(spec, cuts.cuts)
    lo = np.array([-cfg.grad_box] * 5 + [-cfg.offset_box])
    hi = -lo
    return lp_solve(LinearProgram(np.append(X.vec, 1.0), rows, rhs, lo, hi))


def _combination_from_lp(sol, cuts: CutSet, X: MinorsPoint):
    if sol.status is not Status.OPTIMAL or np.abs(sol.box_duals).max() > 1e-9:
        return None
    c = _compress(np.clip(sol.duals, 0.0, None), cuts.cuts)
    return None if c is None else project_feasible(c, X)


def touching_seeds(spec: ObjectiveSpec, X: MinorsPoint) -> list:
    """Affine minorants known to be valid: zero, and touching affines at natural bases."""
    seeds = [AffineFunctional5(MinorsPoint(np.zeros((2, 2)), 0.0), 0.0)]
    if spec.kind is Kind.COUNTEREXAMPLE:
        # inner-product form: exact offset even for huge bases
        bases = [X.hat] + list(construct_touching_sequence(X, spec.y).members())
        return seeds + [touching_affine(spec, b) for b in bases]
    bases = [X.hat]
    d = det2(X.hat)
    if d != 0:
        bases.append(X.hat * (X.last / d))
    for b in bases:
        if eval_w(spec, b) > 0:
            seeds.append(touching_affine_from_gradient(spec, b))
    return seeds


@dataclass(eq=False)
class _LoopResult:
    cuts: CutSet
    lp_certificate: AffineFunctional5 | None
    validated: bool
    iterations: int
    combination: ConvexCombination | None


def _cutting_planes(spec: ObjectiveSpec, X: MinorsPoint, cfg: EnvelopeConfig) -> _LoopResult:
    cuts = initial_cut_set(spec, X, cfg)
    a = None
    validated = False
    best_combo, best_cost = None, np.inf
    it = 0
    for it in range(1, cfg.max_cut_iters + 1):
        sol = _lp_for(spec, X, cuts, cfg)
        if sol.status is not Status.OPTIMAL:
            log.warning("cut LP returned %s", sol.status.value)
            break
        combo = _combination_from_lp(sol, cuts, X)
        cost = _accept(spec, combo, X, cfg.cap)
        if cost < best_cost:
            best_combo, best_cost = combo, cost
        a = AffineFunctional5.from_vec(sol.point)
        xi, viol = separation_oracle(spec, a, cfg.cap, cfg.oracle_samples, cfg.oracle_refine,
                                     seed=cfg.seed, stream=it)
        if viol >= -cfg.tol_cut:
            validated = True
            break
        if not cuts.add(xi):
            break
    return _LoopResult(cuts, a, validated, it, best_combo)


def _upper_from(spec, X, cfg, loop: _LoopResult) -> UpperBound:
    flags = []
    cands = []
    if loop.combination is not None:
        cands.append(loop.combination)
    if X.last == det2(X.hat) and frob(X.hat) <= cfg.cap:
        cands.append(ConvexCombination([1.0], X.hat[None]))
    for a, b in pair_seeds(X, cfg.cap):
        cands.append(ConvexCombination([0.5, 0.5], np.stack([a, b])))
    costs = [_accept(spec, c, X, cfg.cap) for c in cands]
    best_i = int(np.argmin(costs)) if costs else -1
    best = cands[best_i] if costs and np.isfinite(costs[best_i]) else None
    best_cost = costs[best_i] if best is not None else np.inf

    if best is not None and cfg.restarts > 0:
        rng = make_rng(cfg.seed, "restarts")
        for r in range(cfg.restarts):
            start = best
            if r > 0:
                # perturbed copy: jitter matrices, keep weights, re-project
                scale = 10.0 ** rng.uniform(-3, -1)
                jitter = rng.standard_normal(start.xis.shape) * scale * (1 + frob(start.xis))[:, None, None]
                start = project_feasible(ConvexCombination(start.lambdas, start.xis + jitter), X)
            if start.lambdas.size < MAX_ATOMS and r % 2 == 1:
                # split the heaviest atom to give the descent more freedom
                j = int(np.argmax(start.lambdas))
                lam = np.append(start.lambdas, start.lambdas[j] / 2)
                lam[j] /= 2
                start = ConvexCombination(lam, np.concatenate([start.xis, start.xis[j][None]]))
            try:
                cand = _polish(spec, start, X, cfg.cap)
            except (ValueError, np.linalg.LinAlgError):
                continue
            cost = _accept(spec, cand, X, cfg.cap)
            if cost < best_cost - 1e-15:
                best, best_cost = cand, cost
    if best is None:
        flags.append("no_feasible_point")
        return UpperBound(np.inf, None, np.inf, flags)
    return UpperBound(best.cost(spec), best, best.residual(X), flags)


def _lower_from(spec, X, cfg, loop: _LoopResult) -> LowerBound:
    flags = []
    samples = audit_samples(spec, cfg.audit_samples, cfg.audit_t_max, cfg.seed)
    best_a, best_val, best_slack = None, -np.inf, np.nan
    touching_val = -np.inf
    for s in touching_seeds(spec, X):
        slack, _ = audit_affine(spec, s, samples)
        if slack < -cfg.audit_tol:
            s = s.shifted(slack)
            slack = 0.0
        v = s(X)
        touching_val = max(touching_val, v)
        if v > best_val:
            best_a, best_val, best_slack = s, v, slack
    if not loop.validated:
        flags.append("iteration_cap_reached")
    if loop.lp_certificate is not None and loop.validated:
        a = loop.lp_certificate
        slack, _ = audit_affine(spec, a, samples)
        xi, v = separation_oracle(spec, a, max(cfg.audit_t_max, cfg.cap), cfg.oracle_samples,
                                  cfg.oracle_refine, seed=cfg.seed, stream="final")
        slack = min(slack, v)
        if slack < -cfg.audit_tol:
            flags.append("audit_downgraded")
            a = a.shifted(slack)
            slack = 0.0
        # prefer the analytically valid seed on ties
        if a(X) > best_val + 1e-12:
            best_a, best_val, best_slack = a, a(X), slack
    return LowerBound(best_val, best_a, loop.cuts, touching_val, best_slack, loop.iterations, flags)


def phi_w_upper(spec: ObjectiveSpec, X: MinorsPoint, cap: float = 1e3, restarts: int = 32,
                config: EnvelopeConfig = EnvelopeConfig()) -> UpperBound:
    """Best feasible ``sum lambda_j W(xi_j)`` found with ``|xi_j| <= cap``."""
    cfg = replace(config, cap=cap, restarts=restarts)
    return _upper_from(spec, X, cfg, _cutting_planes(spec, X, cfg))


def phi_w_lower(spec: ObjectiveSpec, X: MinorsPoint, grad_box: float = 1e3,
                config: EnvelopeConfig = EnvelopeConfig()) -> LowerBound:
    """Best audited affine minorant value at ``X``."""
    cfg = replace(config, grad_box=grad_box)
    return _lower_from(spec, X, cfg, _cutting_planes(spec, X, cfg))


def envelope_bracket(spec: ObjectiveSpec, X: MinorsPoint,
                     config: EnvelopeConfig = EnvelopeConfig()) -> EnvelopeBracket:
    loop = _cutting_planes(spec, X, config)
    up = _upper_from(spec, X, config, loop)
    lo = _lower_from(spec, X, config, loop)
    flags = sorted(set(up.flags) | set(lo.flags))
    if lo.value > up.value + 1e-6:
        flags.append("bracket_inverted")
    return EnvelopeBracket(
        lower=lo.value,
        lower_certificate=lo.certificate,
        cut_set=lo.cuts,
        upper=up.value,
        upper_certificate=up.combination,
        upper_residual=up.residual,
        touching_lower=lo.touching_value,
        box_bound=config.grad_box,
        param_cap=config.cap,
        flags=flags,
    )
