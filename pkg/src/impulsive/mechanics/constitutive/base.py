"""Impact context, resolution records and the base class of constitutive characterizations."""

from __future__ import annotations

import abc
import dataclasses
import math
from typing import Callable, ClassVar, Dict, FrozenSet, Mapping, Optional

import numpy as np

from impulsive.mechanics.constraints import (
    DEFAULT_TOLERANCE,
    KineticConstraint,
    PositionalConstraint,
    Relation,
    Side,
    classify,
    on_constraint,
    project_spacelike_positional,
)
from impulsive.mechanics.geometry import (
    Array,
    FrameField,
    MassMetric,
    SpacelikeVector,
    SpacetimePoint,
    TimelikeVelocity,
    metric_norm,
    relativize,
    shift,
)

#: How far from the constraint (in `|f_ρ|`) an impact point may lie.
CONTACT_TOLERANCE = 1e-8

#: Relative tolerance of the kinetic-row check applied to right velocities.
KINETIC_CONTRACT_TOLERANCE = 1e-8


class LawError(ValueError):
    """Raised when a constitutive law is applied outside of its admissible domain."""


class LawContractError(RuntimeError):
    """Raised when a law produces a right velocity that violates the constraints it did not declare broken."""


@dataclasses.dataclass(frozen=True)
class Parameter:
    """A scalar law parameter, either constant or a function of the impact quantities `vperp`, `vpar` (the
    Φ-norms of the orthogonal and tangential relative velocity) and `force` (the norm of `Z(p_L)`)."""

    evaluate: Callable[[Mapping[str, float]], float]
    source: str

    @staticmethod
    def of(value: float | Parameter) -> Parameter:
        if isinstance(value, Parameter):
            return value
        constant = float(value)
        return Parameter(lambda quantities: constant, repr(constant))

    def __call__(self, quantities: Mapping[str, float]) -> float:
        value = float(self.evaluate(quantities))
        if not math.isfinite(value):
            raise LawError(f"law parameter {self.source!r} evaluated to {value}")
        return value


@dataclasses.dataclass(frozen=True)
class ImpactContext:
    """Everything a law may look at besides the left velocity."""

    point: SpacetimePoint
    metric: MassMetric

    #: The unilateral (or bilateral) positional constraint `S` the impact happens on.
    surface: Optional[PositionalConstraint] = None

    #: A permanent kinetic constraint `A` acting on the system.
    kinetic: Optional[KineticConstraint] = None

    #: An instantaneous kinetic constraint `B` owned by the surface.
    instantaneous: Optional[KineticConstraint] = None

    active_impulse: Optional[SpacelikeVector] = None

    #: The force section at the left velocity, `Z(p_L)`.
    force: Optional[Array] = None

    #: The rest frame `h_S` selected as "the" rest frame of the surface (friction needs it).
    rest_frame: Optional[FrameField] = None

    tol: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        if self.surface is not None:
            on, _ = on_constraint(self.point, self.surface, CONTACT_TOLERANCE)
            if not on:
                raise LawError(f"impact point {self.point} is not on {self.surface.name!r}")
        if self.active_impulse is not None and self.active_impulse.base != self.point:
            raise LawError("the active impulse is not based at the impact point")

    def require_surface(self) -> PositionalConstraint:
        if self.surface is None:
            raise LawError("this law needs a positional constraint in the impact context")
        return self.surface

    def require_kinetic(self) -> KineticConstraint:
        if self.kinetic is None:
            raise LawError("this law needs a permanent kinetic constraint in the impact context")
        return self.kinetic

    def force_norm(self) -> float:
        return 0.0 if self.force is None else float(np.linalg.norm(self.force))

    def quantities(self, p_left: TimelikeVelocity) -> Dict[str, float]:
        """The values law parameters may depend on. `vperp` and `vpar` are the Φ-norms of the parts of the
        velocity relative to the rest frame (the static frame if none is set) orthogonal and tangent to `S`."""

        h = self.rest_frame if self.rest_frame is not None else FrameField.static(p_left.base.dim)
        relative = relativize(p_left, h)
        if self.surface is None:
            return {"vperp": 0.0, "vpar": metric_norm(relative, self.metric), "force": self.force_norm()}
        tangent, normal = project_spacelike_positional(relative, self.surface, self.metric)
        return {
            "vperp": metric_norm(normal, self.metric),
            "vpar": metric_norm(tangent, self.metric),
            "force": self.force_norm(),
        }


@dataclasses.dataclass(frozen=True)
class ImpactResolution:
    """The outcome `p_R = p_L + I_act + I_react` of one impulsive law."""

    law: str
    p_left: TimelikeVelocity
    active: SpacelikeVector
    impulse: SpacelikeVector
    p_right: TimelikeVelocity

    #: Names of the constraints the impact broke.
    broken: FrozenSet[str] = frozenset()
    diagnostics: Mapping[str, float] = dataclasses.field(default_factory=dict)


def resolve(
    law: str,
    p_left: TimelikeVelocity,
    ctx: ImpactContext,
    impulse: SpacelikeVector,
    broken: FrozenSet[str] = frozenset(),
    **diagnostics: float,
) -> ImpactResolution:
    """Assemble a resolution. The right velocity is always computed as `p_L + (I_act + I_react)`."""

    active = ctx.active_impulse if ctx.active_impulse is not None else SpacelikeVector.zero(p_left.base)
    return ImpactResolution(
        law=law,
        p_left=p_left,
        active=active,
        impulse=impulse,
        p_right=shift(p_left, active + impulse),
        broken=broken,
        diagnostics=diagnostics,
    )


def require_entering(p_left: TimelikeVelocity, ctx: ImpactContext) -> Side:
    """Classify *p_left* on the context surface and reject exiting velocities."""

    side = classify(p_left, ctx.require_surface(), ctx.metric, ctx.tol).side
    if side is Side.RIGHT:
        raise LawError(f"left velocity {p_left.p.tolist()} is not entering {ctx.require_surface().name!r}")
    return side


def check_resolution(resolution: ImpactResolution, ctx: ImpactContext) -> None:
    """The determinism guard: an unbroken surface must not be left with an entering velocity, and an unbroken
    permanent kinetic constraint must hold after the impact.

    :raise LawContractError: If the resolution violates either condition.
    """

    S = ctx.surface
    if S is not None and not (resolution.broken & set(S.members)) and any(S.unilateral):
        side = classify(resolution.p_right, S, ctx.metric, ctx.tol).side
        if side is Side.LEFT:
            raise LawContractError(
                f"law {resolution.law!r} left {resolution.p_right.p.tolist()} entering {S.name!r} "
                "without declaring it broken"
            )
    A = ctx.kinetic
    if A is not None and A.name not in resolution.broken:
        residuals = np.array(
            [r for row, r in zip(A.rows, A.residuals(resolution.p_right)) if row.relation is Relation.EQ]
        )
        if residuals.size:
            scale = max(1.0, float(np.max(np.abs(resolution.p_right.p))))
            if np.any(np.abs(residuals) > KINETIC_CONTRACT_TOLERANCE * scale):
                raise LawContractError(
                    f"law {resolution.law!r} violates kinetic constraint {A.name!r} "
                    f"(residuals {residuals.tolist()}) without declaring it broken"
                )


class ConstitutiveLaw(abc.ABC):
    """A constitutive characterization: a single-valued map from admissible left velocities to reactive
    impulses."""

    #: The key of the law in the registry and in scenario files.
    tag: ClassVar[str]

    #: Parameters that are plain strings rather than scalar :class:`Parameter` values.
    text_parameters: ClassVar[FrozenSet[str]] = frozenset()

    @abc.abstractmethod
    def resolve(self, p_left: TimelikeVelocity, ctx: ImpactContext) -> ImpactResolution:
        """Resolve the impact of *p_left* in *ctx*."""
