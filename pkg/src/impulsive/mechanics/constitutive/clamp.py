"""The inelastic clamp for kinetic constraints with inequality rows."""

from __future__ import annotations

import dataclasses
import logging
from typing import ClassVar

from impulsive.mechanics.constraints import (
    DEFAULT_TOLERANCE,
    ConstraintError,
    KineticConstraint,
    active_kinetic_rows,
    satisfies_kinetic,
    split_rows,
)
from impulsive.mechanics.geometry import MassMetric, TimelikeVelocity, metric_norm

from .base import ConstitutiveLaw, ImpactContext, ImpactResolution, LawError, resolve

logger = logging.getLogger(__name__)


def inelastic_clamp_kinetic(
    p_left: TimelikeVelocity, A: KineticConstraint, metric: MassMetric, tol: float = DEFAULT_TOLERANCE
) -> ImpactResolution:
    """Project *p_left* Φ-orthogonally onto the admissible set of *A*.

    The violated `≥` rows are treated as equalities together with the equality rows and the projection is
    repeated, adding every row the projection newly violates, until the result is admissible. The impulse is
    `p_R - p_L`. An admissible *p_left* is returned unchanged.

    :raise LawError: If the active set cannot be satisfied (its Gram system is singular).
    """

    ctx = ImpactContext(point=p_left.base, metric=metric, kinetic=None, tol=tol)
    ok, _ = satisfies_kinetic(p_left, A, tol)
    if ok:
        return resolve("inelastic_clamp", p_left, ctx, (p_left - p_left), clamped=0.0)

    active = set(active_kinetic_rows(p_left, A, tol))
    rows, offsets = A.covectors(p_left.base)
    for _ in range(len(A.rows)):
        index = sorted(active)
        try:
            split = split_rows(p_left, rows[index], offsets[index], metric, f"kinetic constraint {A.name!r}")
        except ConstraintError as exc:
            raise LawError(f"the active rows {index} of {A.name!r} cannot be satisfied together: {exc}")
        ok, margins = satisfies_kinetic(split.parallel, A, tol)
        if ok:
            logger.debug("clamped %r on rows %s", A.name, index)
            return resolve(
                "inelastic_clamp",
                p_left,
                ctx,
                split.parallel - p_left,
                clamped=float(len(index)),
                vperp=metric_norm(split.vperp, metric),
            )
        newly = {i for i, margin in enumerate(margins) if margin < -tol} - active
        if not newly:
            break
        active |= newly
    raise LawError(f"could not find an admissible velocity for {A.name!r} from {p_left.p.tolist()}")


@dataclasses.dataclass(frozen=True)
class InelasticClamp(ConstitutiveLaw):
    """Applies :func:`inelastic_clamp_kinetic` to the permanent kinetic constraint of the context."""

    tag: ClassVar[str] = "inelastic_clamp"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        if ctx.active_impulse is not None:
            raise LawError("the inelastic clamp does not take an active impulse")
        return inelastic_clamp_kinetic(p_left, ctx.require_kinetic(), ctx.metric, ctx.tol)
