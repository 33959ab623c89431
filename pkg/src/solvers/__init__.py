"""Power-control solvers: static, fading (dual), water-filling, low-complexity and baselines."""

from .static import (
    StaticDiagnostics,
    StaticSolution,
    asymptotic_static,
    eta_tilde,
    solve_static,
    solve_static_by_enumeration,
    static_grid_objective,
)
from .fading import DualEvaluation, DualState, FadingSolution, dual_eval, inner_gamma_solve, inner_power, outer_solve
from .waterfilling import WaterfillingSolution, p1_closed_form, solve_p3
from .low_complexity import TruncationPolicy, solve_lowcomplexity, xi_for_eta
from .baselines import best_traditional_cutoff, full_power_static, traditional_inversion, uniform_power_fading

__all__ = [
    "StaticDiagnostics",
    "StaticSolution",
    "asymptotic_static",
    "eta_tilde",
    "solve_static",
    "solve_static_by_enumeration",
    "static_grid_objective",
    "DualEvaluation",
    "DualState",
    "FadingSolution",
    "dual_eval",
    "inner_gamma_solve",
    "inner_power",
    "outer_solve",
    "WaterfillingSolution",
    "p1_closed_form",
    "solve_p3",
    "TruncationPolicy",
    "solve_lowcomplexity",
    "xi_for_eta",
    "best_traditional_cutoff",
    "full_power_static",
    "traditional_inversion",
    "uniform_power_fading",
]
