"""Left / tangent / right classification of velocities at a positional constraint."""

from __future__ import annotations

import dataclasses
import enum
from typing import Sequence

import numpy as np

from impulsive.mechanics.geometry import MassMetric, SpacelikeVector, SpacetimePoint, TimelikeVelocity, metric_inner

from .positional import ConstraintError, PositionalConstraint
from .projection import normal_basis, split_positional

#: Default band for tangency and classification margins.
DEFAULT_TOLERANCE = 1e-9


class Side(enum.Enum):
    #: Entering velocities, before an impact.
    LEFT = "left"
    TANGENT = "tangent"
    #: Exiting velocities, after an impact.
    RIGHT = "right"


@dataclasses.dataclass(frozen=True)
class VelocityClass:
    side: Side

    #: One signed margin `Φ(velort_ρ(p), U⊥_ρ)` per row considered.
    margins: tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class ActiveRowSet:
    """Rows of a constraint that currently bind."""

    positional: frozenset[int] = frozenset()
    kinetic: frozenset[int] = frozenset()


def on_constraint(pt: SpacetimePoint, S: PositionalConstraint, tol: float) -> tuple[bool, ActiveRowSet]:
    """Return whether every `|f_ρ(pt)| ≤ tol`, together with the rows that are within *tol*."""

    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    values = S.values(pt)
    active = frozenset(int(i) for i in np.flatnonzero(np.abs(values) <= tol))
    return len(active) == S.codim, ActiveRowSet(positional=active)


def row_margins(p: TimelikeVelocity, S: PositionalConstraint, metric: MassMetric) -> tuple[float, ...]:
    """The per-row margins `Φ(velort_ρ(p), U⊥_ρ)` where `velort_ρ` is the orthogonal part for row ρ alone.

    Bilateral rows have no exit side; any orthogonal component violates them, so their margin is
    `-|Φ(velort_ρ(p), n_ρ)|`.
    """

    normals = normal_basis(p.base, S, metric)
    margins = []
    for i, (normal, orientation, unilateral) in enumerate(zip(normals, S.orientations, S.unilateral)):
        vperp = split_positional(p, S.restrict([i]), metric).vperp
        if not unilateral:
            margins.append(-abs(metric_inner(vperp, normal, metric)))
            continue
        if orientation is None:
            raise ConstraintError(f"unilateral row {i} of positional constraint {S.name!r} has no orientation")
        margins.append(metric_inner(vperp, normal * orientation, metric))
    return tuple(margins)


def _side(margins: Sequence[float], tol: float) -> Side:
    if any(m < -tol for m in margins):
        return Side.LEFT
    if any(m > tol for m in margins):
        return Side.RIGHT
    return Side.TANGENT


def classify(p: TimelikeVelocity, S: PositionalConstraint, metric: MassMetric, tol: float) -> VelocityClass:
    """Classify *p* by the sign of `Φ(velort(p), U⊥)`: LEFT below `-tol`, RIGHT above `tol`, TANGENT otherwise."""

    if S.codim > 1 and S.side_rule is not None:
        vperp = split_positional(p, S, metric).vperp
        margins = tuple(metric_inner(vperp, n, metric) for n in normal_basis(p.base, S, metric))
        decision = S.side_rule(margins)
        side = Side.LEFT if decision < 0 else Side.RIGHT if decision > 0 else Side.TANGENT
        return VelocityClass(side, margins)
    if S.codim > 1 and not S.oriented:
        raise ConstraintError(
            f"positional constraint {S.name!r} has codimension {S.codim} without orientations; "
            "it needs an explicit side rule"
        )
    if S.codim > 1:
        return classify_multiple(p, [S], metric, tol)
    margins = row_margins(p, S, metric)
    return VelocityClass(_side(margins, tol), margins)


def classify_multiple(
    p: TimelikeVelocity, S_list: Sequence[PositionalConstraint], metric: MassMetric, tol: float
) -> VelocityClass:
    """Classify *p* against several constraints active at the same point.

    LEFT if any margin is below `-tol`, RIGHT if none is and at least one is above `tol`, TANGENT otherwise.
    """

    combined = PositionalConstraint.combine(list(S_list))
    # Raises when the intersection is not regular.
    split_positional(p, combined, metric)
    margins: list[float] = []
    for S in S_list:
        margins.extend(row_margins(p, S, metric))
    return VelocityClass(_side(margins, tol), tuple(margins))


def exit_direction(pt: SpacetimePoint, S: PositionalConstraint, metric: MassMetric) -> SpacelikeVector:
    """The default `U⊥` of a codimension-one constraint: the raised gradient times the orientation."""

    (normal,) = normal_basis(pt, S, metric)
    return normal * (S.orientations[0] or 1)
