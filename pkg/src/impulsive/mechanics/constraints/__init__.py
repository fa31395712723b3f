"""Positional and kinetic constraints, their orthogonal splittings and the classification of velocities."""

from .classification import (
    DEFAULT_TOLERANCE,
    ActiveRowSet,
    Side,
    VelocityClass,
    classify,
    classify_multiple,
    exit_direction,
    on_constraint,
    row_margins,
)
from .frames import (
    anisotropy_direction,
    is_rest_frame,
    is_rest_frame_kinetic,
    sample_points,
    projection_residual,
)
from .kinetic import KineticConstraint, KineticKind, KineticRow, Relation, satisfies_kinetic
from .positional import ConstraintError, PositionalConstraint
from .projection import (
    Splitting,
    active_kinetic_rows,
    gram_solve,
    normal_basis,
    project_spacelike,
    project_spacelike_kinetic,
    project_spacelike_positional,
    split_joint,
    split_kinetic,
    split_positional,
    split_rows,
    stacked_rows,
)

__all__ = [
    "ActiveRowSet",
    "active_kinetic_rows",
    "anisotropy_direction",
    "classify",
    "classify_multiple",
    "ConstraintError",
    "DEFAULT_TOLERANCE",
    "exit_direction",
    "gram_solve",
    "is_rest_frame",
    "is_rest_frame_kinetic",
    "KineticConstraint",
    "KineticKind",
    "KineticRow",
    "normal_basis",
    "on_constraint",
    "PositionalConstraint",
    "project_spacelike",
    "project_spacelike_kinetic",
    "project_spacelike_positional",
    "Relation",
    "row_margins",
    "sample_points",
    "satisfies_kinetic",
    "Side",
    "split_joint",
    "split_kinetic",
    "split_positional",
    "split_rows",
    "Splitting",
    "stacked_rows",
    "projection_residual",
    "VelocityClass",
]
