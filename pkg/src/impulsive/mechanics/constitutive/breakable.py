"""Laws for constraints that can break: a threshold `Ξ` on the orthogonal velocity decides whether the impact is
absorbed by the constraint or tears it apart."""

from __future__ import annotations

import dataclasses
from typing import ClassVar

from impulsive.mechanics.constraints import split_joint, split_positional
from impulsive.mechanics.geometry import TimelikeVelocity, metric_norm

from .base import ConstitutiveLaw, ImpactContext, ImpactResolution, LawError, Parameter, require_entering, resolve


def _check_threshold(xi: float) -> None:
    if not xi > 0.0:
        raise LawError(f"breaking threshold must be positive, got {xi}")


def saturating_factor(n: float, xi: float) -> float:
    """`λ = 2 Ξ² / (Ξ² + n²)`: full reflection for slow impacts, vanishing reaction for fast ones."""

    _check_threshold(xi)
    return 2.0 * xi**2 / (xi**2 + n**2)


def lowspeed_factor(n: float, xi: float) -> float:
    """`λ = 2 n² / (Ξ² + n²)`: slow impacts pass through, fast ones are reflected."""

    _check_threshold(xi)
    return 2.0 * n**2 / (xi**2 + n**2)


def breakable_saturating(p_left: TimelikeVelocity, ctx: ImpactContext, xi: float) -> ImpactResolution:
    """`I = -λ velort(p_L)` with the saturating factor. The constraint breaks when `‖velort(p_L)‖ > Ξ`."""

    _check_threshold(xi)
    S = ctx.require_surface()
    require_entering(p_left, ctx)
    vperp = split_positional(p_left, S, ctx.metric).vperp
    n = metric_norm(vperp, ctx.metric)
    factor = saturating_factor(n, xi)
    broken = frozenset(S.members) if n > xi else frozenset()
    return resolve("breakable_saturating", p_left, ctx, vperp * -factor, broken, vperp=n, factor=factor)


def breakable_lowspeed(p_left: TimelikeVelocity, ctx: ImpactContext, xi: float) -> ImpactResolution:
    """`I = -λ velort(p_L)` with the low-speed factor. The constraint breaks when `‖velort(p_L)‖ < Ξ`.

    A zero orthogonal velocity is a grazing contact, not an impact: no impulse and nothing breaks.
    """

    _check_threshold(xi)
    S = ctx.require_surface()
    require_entering(p_left, ctx)
    vperp = split_positional(p_left, S, ctx.metric).vperp
    n = metric_norm(vperp, ctx.metric)
    factor = lowspeed_factor(n, xi)
    broken = frozenset(S.members) if 0.0 < n < xi else frozenset()
    return resolve("breakable_lowspeed", p_left, ctx, vperp * -factor, broken, vperp=n, factor=factor)


def disk_wall_breakable(
    p_left: TimelikeVelocity, ctx: ImpactContext, eps1: float, eps2: float, xi: float
) -> ImpactResolution:
    """A rolling disk hitting a wall. Below the threshold the rolling constraint `A` survives and the impact is a
    Newton restitution onto `J₁(S) ∩ A`; above it `A` breaks and the restitution is onto `J₁(S)` alone."""

    for name, epsilon in (("eps1", eps1), ("eps2", eps2)):
        if not 0.0 <= epsilon <= 1.0:
            raise LawError(f"restitution coefficient {name} must lie in [0, 1], got {epsilon}")
    if xi < 0.0:
        raise LawError(f"breaking threshold must not be negative, got {xi}")
    S = ctx.require_surface()
    A = ctx.require_kinetic().equalities()
    require_entering(p_left, ctx)
    vperp_S = split_positional(p_left, S, ctx.metric).vperp
    n = metric_norm(vperp_S, ctx.metric)
    if n <= xi:
        vperp_joint = split_joint(p_left, S, A, ctx.metric).vperp
        return resolve("disk_wall_breakable", p_left, ctx, vperp_joint * -(1.0 + eps1), vperp=n)
    return resolve("disk_wall_breakable", p_left, ctx, vperp_S * -(1.0 + eps2), frozenset({A.name}), vperp=n)


@dataclasses.dataclass(frozen=True)
class BreakableSaturating(ConstitutiveLaw):
    tag: ClassVar[str] = "breakable_saturating"

    xi: Parameter

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return breakable_saturating(p_left, ctx, self.xi(ctx.quantities(p_left)))


@dataclasses.dataclass(frozen=True)
class BreakableLowspeed(ConstitutiveLaw):
    tag: ClassVar[str] = "breakable_lowspeed"

    xi: Parameter

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return breakable_lowspeed(p_left, ctx, self.xi(ctx.quantities(p_left)))


@dataclasses.dataclass(frozen=True)
class DiskWallBreakable(ConstitutiveLaw):
    tag: ClassVar[str] = "disk_wall_breakable"

    eps1: Parameter
    eps2: Parameter
    xi: Parameter

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        quantities = ctx.quantities(p_left)
        return disk_wall_breakable(p_left, ctx, self.eps1(quantities), self.eps2(quantities), self.xi(quantities))
