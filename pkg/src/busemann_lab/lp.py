"""Dense two-phase simplex for small boxed linear programs.

The programs solved here have a handful of variables (six in the envelope
code) and up to thousands of inequality rows. :func:`lp_solve` therefore runs
the simplex method on the dual standard form, whose tableau has one row per
primal variable; the primal vertex is read off from the optimal basis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """Maximise ``objective . v`` subject to ``A v <= b`` and ``lower <= v <= upper``."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if self.A.shape[0] != self.b.size:
            raise ValueError("A and b disagree on the number of constraints")
        if np.any(self.lower > self.upper):
            raise ValueError("box lower bound exceeds upper bound")
        arrays = (self.objective, self.A, self.b, self.lower, self.upper)
        if any(np.isnan(a).any() for a in arrays):
            raise FloatingPointError("NaN in linear program data")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.objective))):
            raise ValueError("constraint rows and objective must be finite")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @classmethod
    def from_constraints(cls, objective, constraints, lower, upper) -> LinearProgram:
        """Build from a list of ``(row, rhs)`` pairs."""
        n = len(objective)
        rows = [np.asarray(r, dtype=float) for r, _ in constraints]
        A = np.vstack(rows) if rows else np.zeros((0, n))
        b = np.array([rhs for _, rhs in constraints], dtype=float)
        return cls(objective, A, b, lower, upper)


@dataclass
class LpSolution:
    status: Status
    point: np.ndarray | None = None
    value: float = float("nan")
    active_set: list = field(default_factory=list)
    duals: np.ndarray | None = None
    box_duals: np.ndarray | None = None
    max_violation: float = float("nan")
    pivots: int = 0


class _Unbounded(Exception):
    pass


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: list, allowed: int, max_pivots: int) -> int:
    """Minimise the last row of tableau ``T`` with Bland's rule.

    Columns ``>= allowed`` (artificials in phase two) never enter. Returns the
    number of pivots made.
    """
    pivots = 0
    m = T.shape[0] - 1
    while True:
        reduced = T[-1, :allowed]
        candidates = np.nonzero(reduced < -PIVOT_TOL)[0]
        if candidates.size == 0:
            return pivots
        c = int(candidates[0])
        col = T[:m, c]
        pos = np.nonzero(col > PIVOT_TOL)[0]
        if pos.size == 0:
            raise _Unbounded
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, c)
        basis[r] = c
        # roundoff can leave basic values slightly negative, which makes the
        # ratio test (and hence Bland's rule) inconsistent; they are zero
        np.maximum(T[:m, -1], 0.0, out=T[:m, -1])
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")


def simplex_standard(A_eq: np.ndarray, b_eq: np.ndarray, cost: np.ndarray,
                     max_pivots: int = 100_000):
    """Minimise ``cost . x`` subject to ``A_eq x = b_eq``, ``x >= 0``.

    Two phases with artificial variables and Bland's anti-cycling rule.
    Returns ``(status, x, basis, pivots)``; ``basis`` lists the basic column
    for each row.
    """
    m, n = A_eq.shape
    A = A_eq.copy()
    b = b_eq.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase one: artificials n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    pivots = _run(T, basis, n + m, max_pivots)
    if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
        return Status.INFEASIBLE, None, basis, pivots

    # drive remaining artificials out of the basis
    for r in range(m):
        if basis[r] >= n:
            nz = np.nonzero(np.abs(T[r, :n]) > PIVOT_TOL)[0]
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
                pivots += 1

    # phase two
    T[-1, :] = 0.0
    T[-1, :n] = cost
    for r, j in enumerate(basis):
        if j < n:
            T[-1] -= cost[j] * T[r]
    try:
        pivots += _run(T, basis, n, max_pivots)
    except _Unbounded:
        return Status.UNBOUNDED, None, basis, pivots
    x = np.zeros(n)
    for r, j in enumerate(basis):
        if j < n:
            x[j] = T[r, -1]
    return Status.OPTIMAL, x, basis, pivots


def lp_solve(p: LinearProgram) -> LpSolution:
    """Solve a boxed program; infeasibility is reported through ``status``.

    Infinite box entries are allowed, in which case ``unbounded`` may be
    returned. On success ``duals`` holds the nonnegative multipliers of the
    rows of ``A`` and ``box_duals`` the net multiplier of each box, so that
    ``A.T @ duals + box_duals == objective``.
    """
    n = p.num_vars
    m = p.A.shape[0]
    eye = np.eye(n)
    fin_hi = np.isfinite(p.upper)
    fin_lo = np.isfinite(p.lower)
    rows = np.vstack([p.A, eye[fin_hi], -eye[fin_lo]])
    rhs = np.concatenate([p.b, p.upper[fin_hi], -p.lower[fin_lo]])
    # row equilibration leaves the feasible set unchanged
    scale = np.linalg.norm(rows, axis=1)
    scale[scale == 0] = 1.0
    rows_s = rows / scale[:, None]
    rhs_s = rhs / scale
    # zero rows: feasible iff rhs >= 0
    zero_rows = np.linalg.norm(rows, axis=1) == 0
    if np.any(rhs[zero_rows] < -FEAS_TOL):
        return LpSolution(Status.INFEASIBLE)

    status, dual, basis, pivots = simplex_standard(rows_s.T, p.objective, rhs_s)
    if status is Status.INFEASIBLE:
        # dual infeasible: primal is unbounded if feasible at all
        st2, _, _, piv2 = simplex_standard(rows_s.T, np.zeros(n), rhs_s)
        pivots += piv2
        if st2 is Status.UNBOUNDED:
            return LpSolution(Status.INFEASIBLE, pivots=pivots)
        return LpSolution(Status.UNBOUNDED, pivots=pivots)
    if status is Status.UNBOUNDED:
        return LpSolution(Status.INFEASIBLE, pivots=pivots)

    active = sorted(j for j in basis if j < rows_s.shape[0])
    point = np.linalg.solve(rows_s[basis], rhs_s[basis]) if len(active) == n else None
    if point is None:
        # degenerate basis containing a leftover artificial; fall back to least squares
        point = np.linalg.lstsq(rows_s[active], rhs_s[active], rcond=None)[0]
    slack = rows_s @ point - rhs_s
    weights = dual / scale
    box = np.zeros(n)
    box[fin_hi] += weights[m:m + fin_hi.sum()]
    box[fin_lo] -= weights[m + fin_hi.sum():]
    return LpSolution(
        status=Status.OPTIMAL,
        point=point,
        value=float(p.objective @ point),
        active_set=[j for j in active if j < m],
        duals=weights[:m],
        box_duals=box,
        max_violation=float(max(slack.max(initial=0.0), 0.0)),
        pivots=pivots,
    )
