"""Numerical probes of polyconvex representatives of 2x2 matrix functions.

Matrices are ``numpy`` arrays of shape ``(2, 2)`` (or stacks ``(..., 2, 2)``);
points of the minors space R^5 are :class:`MinorsPoint`.
"""

from .envelope import EnvelopeBracket, EnvelopeConfig, envelope_bracket, phi_w_lower, phi_w_upper
from .linalg import MinorsPoint, bracket, cof2, det2, lift, mat2
from .lp import LinearProgram, LpSolution, Status, lp_solve
from .objective import COUNTEREXAMPLE, NORM_OF_MINORS, Kind, ObjectiveSpec, eval_w, grad_w, rho_of
from .subgradient import SearchBudget, estimate_interval, estimate_rho_max, estimate_rho_min
from .touching import construct_touching_sequence, phi_tau_closed, phi_tau_sup_numeric, touching_affine

__version__ = "0.1.0"

__all__ = [
    "COUNTEREXAMPLE", "NORM_OF_MINORS", "EnvelopeBracket", "EnvelopeConfig", "Kind",
    "LinearProgram", "LpSolution", "MinorsPoint", "ObjectiveSpec", "SearchBudget", "Status",
    "bracket", "cof2", "construct_touching_sequence", "det2", "envelope_bracket",
    "estimate_interval", "estimate_rho_max", "estimate_rho_min", "eval_w", "grad_w", "lift",
    "lp_solve", "mat2", "phi_tau_closed", "phi_tau_sup_numeric", "phi_w_lower", "phi_w_upper",
    "rho_of", "touching_affine",
]
