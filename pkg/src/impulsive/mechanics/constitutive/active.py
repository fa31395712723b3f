"""Laws for impulses applied on purpose: an active impulse `I_act` is split against the constraint it acts on and
the constraint reacts to the orthogonal part."""

from __future__ import annotations

import dataclasses
from typing import ClassVar

from impulsive.mechanics.constraints import (
    Side,
    classify,
    project_spacelike_kinetic,
    project_spacelike_positional,
    satisfies_kinetic,
    split_positional,
)
from impulsive.mechanics.geometry import SpacelikeVector, TimelikeVelocity, metric_norm, shift

from .base import ConstitutiveLaw, ImpactContext, ImpactResolution, LawError, Parameter, resolve


def _require_active(ctx: ImpactContext) -> SpacelikeVector:
    if ctx.active_impulse is None:
        raise LawError("this law needs an active impulse")
    return ctx.active_impulse


def _orthogonal_split(p_left: TimelikeVelocity, ctx: ImpactContext) -> tuple[SpacelikeVector, SpacelikeVector]:
    """Split the active impulse into the parts tangent and orthogonal to the constraint it acts against: the
    permanent kinetic constraint if there is one, the bilateral positional constraint otherwise."""

    I_act = _require_active(ctx)
    if ctx.kinetic is not None:
        A = ctx.kinetic.equalities()
        ok, margins = satisfies_kinetic(p_left, A, ctx.tol)
        if not ok:
            raise LawError(f"left velocity does not satisfy {A.name!r} (residuals {list(margins)})")
        return project_spacelike_kinetic(I_act, A, ctx.metric)
    S = ctx.surface
    if S is not None and not any(S.unilateral):
        vperp = split_positional(p_left, S, ctx.metric).vperp
        if metric_norm(vperp, ctx.metric) > ctx.tol:
            raise LawError(f"left velocity is not tangent to the bilateral constraint {S.name!r}")
        return project_spacelike_positional(I_act, S, ctx.metric)
    raise LawError("an active impulse needs a permanent kinetic constraint or a bilateral positional constraint")


def kinetic_ideal_with_active(p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
    """`I_react = -P⊥(I_act)`: the constraint cancels exactly the orthogonal part of the active impulse."""

    _, normal = _orthogonal_split(p_left, ctx)
    return resolve("kinetic_ideal", p_left, ctx, -normal, normal=metric_norm(normal, ctx.metric))


def coulomb_with_active(p_left: TimelikeVelocity, ctx: ImpactContext, mu: float) -> ImpactResolution:
    """Like :func:`kinetic_ideal_with_active`, plus a tangential reaction opposing the tangential part `T` of the
    active impulse, bounded by the Coulomb cone: `-min(μ ‖N‖, ‖T‖) T / ‖T‖`."""

    if mu < 0.0:
        raise LawError(f"friction coefficient must not be negative, got {mu}")
    tangent, normal = _orthogonal_split(p_left, ctx)
    normal_norm = metric_norm(normal, ctx.metric)
    tangent_norm = metric_norm(tangent, ctx.metric)
    impulse = -normal
    sticking = tangent_norm <= mu * normal_norm
    if tangent_norm > 0.0:
        impulse = impulse - tangent * (min(mu * normal_norm, tangent_norm) / tangent_norm)
    return resolve(
        "coulomb_with_active",
        p_left,
        ctx,
        impulse,
        normal=normal_norm,
        tangent=tangent_norm,
        sticking=float(sticking),
    )


def free_impulse(p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
    """An active impulse on an unconstrained system: nothing reacts and `p_R = p_L + I_act`."""

    I_act = _require_active(ctx)
    if ctx.kinetic is not None:
        raise LawError(f"a free impulse cannot act against kinetic constraint {ctx.kinetic.name!r}")
    S = ctx.surface
    if S is not None and classify(shift(p_left, I_act), S, ctx.metric, ctx.tol).side is Side.LEFT:
        raise LawError(f"a free impulse would push the system into {S.name!r}")
    return resolve("free", p_left, ctx, SpacelikeVector.zero(p_left.base))


@dataclasses.dataclass(frozen=True)
class KineticIdeal(ConstitutiveLaw):
    tag: ClassVar[str] = "kinetic_ideal"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return kinetic_ideal_with_active(p_left, ctx)


@dataclasses.dataclass(frozen=True)
class CoulombWithActive(ConstitutiveLaw):
    tag: ClassVar[str] = "coulomb_with_active"

    mu: Parameter

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return coulomb_with_active(p_left, ctx, self.mu(ctx.quantities(p_left)))


@dataclasses.dataclass(frozen=True)
class FreeImpulse(ConstitutiveLaw):
    tag: ClassVar[str] = "free"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return free_impulse(p_left, ctx)
