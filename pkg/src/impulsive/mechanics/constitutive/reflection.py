"""Restitution laws: ideal reflection, Newton restitution and the totally inelastic impact."""

from __future__ import annotations

import dataclasses
from typing import ClassVar, Mapping, Optional

from impulsive.mechanics.constraints import Splitting, split_joint, split_positional
from impulsive.mechanics.geometry import FrameField, MassMetric, TimelikeVelocity, kinetic_energy, metric_norm

from .base import ConstitutiveLaw, ImpactContext, ImpactResolution, LawError, Parameter, require_entering, resolve

#: Accepted reflection targets: the surface alone, or its intersection with the permanent kinetic constraint `A`
#: or with the instantaneous kinetic constraint `B`.
TARGETS = ("S", "S+A", "S+B", "S+A+B")


def target_splitting(p_left: TimelikeVelocity, ctx: ImpactContext, target: str) -> Splitting:
    """Split *p_left* against the target of a reflection law."""

    if target not in TARGETS:
        raise LawError(f"unknown reflection target {target!r}, expected one of {', '.join(TARGETS)}")
    S = ctx.require_surface()
    kinetic = []
    if "A" in target:
        kinetic.append(ctx.require_kinetic().equalities())
    if "B" in target:
        if ctx.instantaneous is None:
            raise LawError(f"reflection target {target!r} needs an instantaneous kinetic constraint")
        kinetic.append(ctx.instantaneous.equalities())
    if not kinetic:
        return split_positional(p_left, S, ctx.metric)
    return split_joint(p_left, S, tuple(kinetic), ctx.metric)


def ideal_reflection(p_left: TimelikeVelocity, ctx: ImpactContext, target: str = "S") -> ImpactResolution:
    """`I = -2 velort_target(p_L)`. Kinetic energy is preserved for every rest frame of the target."""

    require_entering(p_left, ctx)
    split = target_splitting(p_left, ctx, target)
    return resolve("ideal_reflection", p_left, ctx, split.vperp * -2.0, vperp=metric_norm(split.vperp, ctx.metric))


def newton_restitution(
    p_left: TimelikeVelocity, ctx: ImpactContext, epsilon: float, target: str = "S"
) -> ImpactResolution:
    """`I = -(1 + ε) velort_target(p_L)` with `ε ∈ [0, 1]`."""

    if not 0.0 <= epsilon <= 1.0:
        raise LawError(f"restitution coefficient must lie in [0, 1], got {epsilon}")
    require_entering(p_left, ctx)
    split = target_splitting(p_left, ctx, target)
    return resolve(
        "newton",
        p_left,
        ctx,
        split.vperp * -(1.0 + epsilon),
        vperp=metric_norm(split.vperp, ctx.metric),
        epsilon=epsilon,
    )


def totally_inelastic(p_left: TimelikeVelocity, ctx: ImpactContext, target: str = "S") -> ImpactResolution:
    """`I = -velort_target(p_L)`, so `p_R` is the orthogonal projection of `p_L` onto the target."""

    require_entering(p_left, ctx)
    split = target_splitting(p_left, ctx, target)
    return resolve("totally_inelastic", p_left, ctx, -split.vperp, vperp=metric_norm(split.vperp, ctx.metric))


def energy_restitution_table(
    p_left: TimelikeVelocity,
    p_right: TimelikeVelocity,
    frames: Mapping[str, FrameField],
    metric: MassMetric,
) -> dict[str, Optional[float]]:
    """Return `K_h(p_R) / K_h(p_L)` for every frame. The ratio is undefined (`None`) when `K_h(p_L) = 0`."""

    table: dict[str, Optional[float]] = {}
    for name, h in frames.items():
        before = kinetic_energy(p_left, h, metric)
        after = kinetic_energy(p_right, h, metric)
        table[name] = None if before == 0.0 else after / before
    return table


@dataclasses.dataclass(frozen=True)
class IdealReflection(ConstitutiveLaw):
    tag: ClassVar[str] = "ideal_reflection"
    text_parameters: ClassVar[frozenset[str]] = frozenset({"target"})

    target: str = "S"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return ideal_reflection(p_left, ctx, self.target)


@dataclasses.dataclass(frozen=True)
class NewtonRestitution(ConstitutiveLaw):
    tag: ClassVar[str] = "newton"
    text_parameters: ClassVar[frozenset[str]] = frozenset({"target"})

    epsilon: Parameter
    target: str = "S"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return newton_restitution(p_left, ctx, self.epsilon(ctx.quantities(p_left)), self.target)


@dataclasses.dataclass(frozen=True)
class TotallyInelastic(ConstitutiveLaw):
    tag: ClassVar[str] = "totally_inelastic"
    text_parameters: ClassVar[frozenset[str]] = frozenset({"target"})

    target: str = "S"

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        return totally_inelastic(p_left, ctx, self.target)
