from mistura.core.losses.loss import (
    InfiniteLossError,
    LossError,
    action_grid,
    bayes_risk,
    loss_matrix,
    loss_table,
    loss_vector,
    propriety_check,
    proper_loss_from_entropy,
    quasiconvexity_probe,
)

__all__ = [
    "InfiniteLossError",
    "LossError",
    "action_grid",
    "bayes_risk",
    "loss_matrix",
    "loss_table",
    "loss_vector",
    "propriety_check",
    "proper_loss_from_entropy",
    "quasiconvexity_probe",
]
