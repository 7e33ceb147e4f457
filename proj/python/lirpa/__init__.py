"""Linear relaxation bounds (IBP, forward and backward modes) for computational graphs."""

from ._lirpa import (
    Document,
    DomainError,
    ParseError,
    PreconditionError,
    bound_loss_fused,
    bound_loss_unfused,
    compare_loss_fusion,
    compute_bounds,
    cross_entropy,
    flatness,
    margin_transform,
)

METHODS = ("ibp", "forward", "backward", "ibp+backward", "forward+backward")

__all__ = [
    "Document",
    "DomainError",
    "ParseError",
    "PreconditionError",
    "METHODS",
    "bound_loss_fused",
    "bound_loss_unfused",
    "compare_loss_fusion",
    "compute_bounds",
    "cross_entropy",
    "flatness",
    "margin_transform",
]
