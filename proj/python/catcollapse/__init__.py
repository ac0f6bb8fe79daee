"""Paired category collapsing and hierarchical log-linear models."""

from ._catcollapse import (
    DegeneracyError,
    FeasibilityError,
    InputError,
    SparseTable,
    backward_select,
    collapse,
    fit,
    loss_matrix,
    read_counts,
    run_command,
    run_pcc,
)

__all__ = [
    "DegeneracyError",
    "FeasibilityError",
    "InputError",
    "SparseTable",
    "backward_select",
    "collapse",
    "fit",
    "loss_matrix",
    "read_counts",
    "run_command",
    "run_pcc",
]
