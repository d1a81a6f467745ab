from mistura.core.entropies.dual_solver import (
    DualSolverError,
    EntropyError,
    generic_dual,
    minimize_on_simplex,
    solve_rows,
)
from mistura.core.entropies.entropy import (
    BoundaryGradientError,
    bregman,
    bregman_array,
    closed_form_regret,
    dual_grad,
    entropic_dual,
    grad,
    grad_array,
    legendre_probe,
    printed_quadratic_regret,
    validate_dual_solver,
    value,
    value_array,
)

__all__ = [
    "BoundaryGradientError",
    "DualSolverError",
    "EntropyError",
    "bregman",
    "bregman_array",
    "closed_form_regret",
    "dual_grad",
    "entropic_dual",
    "generic_dual",
    "grad",
    "grad_array",
    "legendre_probe",
    "minimize_on_simplex",
    "printed_quadratic_regret",
    "solve_rows",
    "validate_dual_solver",
    "value",
    "value_array",
]
