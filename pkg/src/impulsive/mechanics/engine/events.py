"""Impact events and their resolution through a constitutive law."""

from __future__ import annotations

import dataclasses
import logging
from typing import Mapping, Optional, Sequence

from impulsive.mechanics.constitutive import (
    ConstitutiveLaw,
    ImpactContext,
    ImpactResolution,
    LawContractError,
    check_resolution,
)
from impulsive.mechanics.constraints import projection_residual
from impulsive.mechanics.geometry import FrameField, SpacelikeVector, SpacetimePoint, TimelikeVelocity, kinetic_energy

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class FrameEnergy:
    """Kinetic energies before and after an impact relative to one frame."""

    K_left: float
    K_right: float

    #: `K_right / K_left`, or `None` when the left energy vanishes.
    ratio: Optional[float]

    #: The non-commuting projection residual of the left velocity; `None` for impacts without a positional
    #: constraint.
    residual: Optional[float]


@dataclasses.dataclass(frozen=True)
class ImpactEvent:
    index: int
    time: float
    point: SpacetimePoint

    #: What triggered the event: `positional`, `kinetic` (a violated inequality row) or `active` (a scripted
    #: impulse).
    kind: str

    #: The constraints involved, in the order they were hit.
    constraints: tuple[str, ...]
    law: str
    p_left: TimelikeVelocity
    active: SpacelikeVector
    impulse: SpacelikeVector
    p_right: TimelikeVelocity
    broken: frozenset[str]
    energy: Mapping[str, FrameEnergy]
    diagnostics: Mapping[str, float]


def frame_energies(
    resolution: ImpactResolution, ctx: ImpactContext, frames: Mapping[str, FrameField]
) -> dict[str, FrameEnergy]:
    table = {}
    for name, h in frames.items():
        K_left = kinetic_energy(resolution.p_left, h, ctx.metric)
        K_right = kinetic_energy(resolution.p_right, h, ctx.metric)
        residual = None
        if ctx.surface is not None:
            residual = projection_residual(resolution.p_left, h, ctx.surface, ctx.metric)
        table[name] = FrameEnergy(K_left, K_right, None if K_left == 0.0 else K_right / K_left, residual)
    return table


def handle_event(
    p_left: TimelikeVelocity,
    ctx: ImpactContext,
    law: ConstitutiveLaw,
    *,
    index: int = 0,
    kind: str = "positional",
    constraints: Sequence[str] = (),
    frames: Optional[Mapping[str, FrameField]] = None,
) -> ImpactEvent:
    """Resolve the impact of *p_left* with *law*, validate the outcome and attach the per-frame energy
    diagnostics.

    :raise LawContractError: If the law leaves an unbroken constraint violated. The event is logged before the
        error propagates.
    """

    resolution = law.resolve(p_left, ctx)
    try:
        check_resolution(resolution, ctx)
    except LawContractError:
        logger.error(
            "law %r violated its contract at t = %r: p_L = %s, I_act = %s, I_react = %s, p_R = %s",
            resolution.law,
            ctx.point.t,
            resolution.p_left.p.tolist(),
            resolution.active.V.tolist(),
            resolution.impulse.V.tolist(),
            resolution.p_right.p.tolist(),
        )
        raise
    event = ImpactEvent(
        index=index,
        time=ctx.point.t,
        point=ctx.point,
        kind=kind,
        constraints=tuple(constraints),
        law=resolution.law,
        p_left=resolution.p_left,
        active=resolution.active,
        impulse=resolution.impulse,
        p_right=resolution.p_right,
        broken=resolution.broken,
        energy=frame_energies(resolution, ctx, frames or {}),
        diagnostics=dict(resolution.diagnostics),
    )
    logger.info(
        "event %d at t = %.12g on %s: law %s%s",
        index,
        event.time,
        "+".join(event.constraints) or "-",
        event.law,
        f", broken {sorted(event.broken)}" if event.broken else "",
    )
    return event
