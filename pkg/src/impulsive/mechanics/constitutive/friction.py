"""Frame-dependent friction: the reactive impulse is built from the velocity relative to the rest frame of `S`."""

from __future__ import annotations

import dataclasses
from typing import ClassVar, Optional

from impulsive.mechanics.constraints import anisotropy_direction, is_rest_frame, project_spacelike_positional
from impulsive.mechanics.geometry import TimelikeVelocity, metric_inner, metric_norm, relativize

from .base import ConstitutiveLaw, ImpactContext, ImpactResolution, LawError, Parameter, require_entering, resolve


def rest_frame_friction(
    p_left: TimelikeVelocity,
    ctx: ImpactContext,
    alpha: float,
    beta: float,
    anisotropy_gain: Optional[float] = None,
) -> ImpactResolution:
    """`I = α P⊥(p_L - h_S) + β P∥(p_L - h_S)` where `h_S` is the rest frame of the surface in *ctx*.

    With an *anisotropy_gain* `γ`, the tangential component along the anisotropy direction `L` of the surface is
    scaled by `γ` on top of `β`, so `I∥ = β (vpar + (γ - 1) Φ(vpar, L) L)`.
    """

    S = ctx.require_surface()
    h = ctx.rest_frame
    if h is None:
        raise LawError("friction needs the rest frame of the surface")
    if not is_rest_frame(h, S, [p_left.base], ctx.tol):
        raise LawError(f"the frame given for {S.name!r} is not one of its rest frames")
    require_entering(p_left, ctx)

    vpar, vperp = project_spacelike_positional(relativize(p_left, h), S, ctx.metric)
    tangential = vpar
    if anisotropy_gain is not None:
        L = anisotropy_direction(p_left.base, S, ctx.metric)
        tangential = vpar + L * ((anisotropy_gain - 1.0) * metric_inner(vpar, L, ctx.metric))
    impulse = vperp * alpha + tangential * beta
    return resolve(
        "friction",
        p_left,
        ctx,
        impulse,
        vperp=metric_norm(vperp, ctx.metric),
        vpar=metric_norm(vpar, ctx.metric),
        alpha=alpha,
        beta=beta,
    )


@dataclasses.dataclass(frozen=True)
class RestFrameFriction(ConstitutiveLaw):
    """Either give `alpha` and `beta` directly, or the restitution `epsilon` and the tangential loss `mu`, which
    stand for `α = -(1 + ε)` and `β = -μ`."""

    tag: ClassVar[str] = "friction"

    alpha: Optional[Parameter] = None
    beta: Optional[Parameter] = None
    epsilon: Optional[Parameter] = None
    mu: Optional[Parameter] = None
    anisotropy_gain: Optional[Parameter] = None

    def __post_init__(self) -> None:
        if (self.alpha is None) == (self.epsilon is None):
            raise LawError("friction needs exactly one of 'alpha' or 'epsilon'")
        if (self.beta is None) == (self.mu is None):
            raise LawError("friction needs exactly one of 'beta' or 'mu'")

    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        quantities = ctx.quantities(p_left)
        if self.alpha is not None:
            alpha = self.alpha(quantities)
        else:
            assert self.epsilon is not None
            epsilon = self.epsilon(quantities)
            if not 0.0 <= epsilon <= 1.0:
                raise LawError(f"restitution coefficient must lie in [0, 1], got {epsilon}")
            alpha = -(1.0 + epsilon)
        if self.beta is not None:
            beta = self.beta(quantities)
        else:
            assert self.mu is not None
            beta = -self.mu(quantities)
        gain = None if self.anisotropy_gain is None else self.anisotropy_gain(quantities)
        return rest_frame_friction(p_left, ctx, alpha, beta, gain)

