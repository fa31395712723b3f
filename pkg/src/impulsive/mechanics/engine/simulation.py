"""The event-driven run: smooth steps, impact localization and impulsive resolution, one after another."""

from __future__ import annotations

import dataclasses
import logging
from typing import Mapping, Optional, Sequence

import numpy as np

from impulsive.mechanics.constitutive import (
    CONTACT_TOLERANCE,
    ConstitutiveLaw,
    FreeImpulse,
    IdealReflection,
    ImpactContext,
    InelasticClamp,
    KineticIdeal,
)
from impulsive.mechanics.constraints import (
    KineticConstraint,
    KineticKind,
    PositionalConstraint,
    Side,
    classify,
    satisfies_kinetic,
)
from impulsive.mechanics.geometry import (
    Array,
    ForceSection,
    FrameField,
    MassMetric,
    SpacelikeVector,
    TimelikeVelocity,
)

from .config import IntegratorConfig
from .detection import ImpactLocation, locate_impact, unilateral_gaps
from .events import ImpactEvent, handle_event
from .integrator import SimState, SimulationError, smooth_step

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class ScriptedImpulse:
    """An active impulse applied once at a given time."""

    time: float
    vector: Array

    #: The law resolving the reaction. Defaults to the kinetic ideal law when the system has permanent kinetic or
    #: bilateral positional constraints and to the free law otherwise.
    law: Optional[ConstitutiveLaw] = None


@dataclasses.dataclass(frozen=True)
class MechanicalSystem:
    """Everything the engine needs to know about a mechanical system, independent of its initial state."""

    coordinates: tuple[str, ...]
    metric: MassMetric
    forces: ForceSection
    positional: tuple[PositionalConstraint, ...] = ()
    kinetic: tuple[KineticConstraint, ...] = ()

    #: Laws keyed by the name of the constraint they resolve impacts on.
    laws: Mapping[str, ConstitutiveLaw] = dataclasses.field(default_factory=dict)

    #: The law for impacts with several constraints at once. Defaults to the joint ideal reflection.
    multiple_law: Optional[ConstitutiveLaw] = None
    frames: Mapping[str, FrameField] = dataclasses.field(default_factory=dict)

    #: The frames energy diagnostics are recorded in.
    diagnostic_frames: tuple[str, ...] = ()

    #: The rest frame (by frame name) of each positional constraint that has one declared.
    rest_frames: Mapping[str, str] = dataclasses.field(default_factory=dict)
    impulses: tuple[ScriptedImpulse, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def permanent(self, broken: frozenset[str] = frozenset()) -> tuple[KineticConstraint, ...]:
        return tuple(A for A in self.kinetic if A.kind is KineticKind.PERMANENT and A.name not in broken)

    def instantaneous_for(self, surface: str) -> Optional[KineticConstraint]:
        for B in self.kinetic:
            if B.kind is KineticKind.INSTANTANEOUS and B.owner == surface:
                return B
        return None

    def unilateral(self, broken: frozenset[str] = frozenset()) -> tuple[PositionalConstraint, ...]:
        return tuple(S for S in self.positional if any(S.unilateral) and S.name not in broken)

    def bilateral(self) -> tuple[PositionalConstraint, ...]:
        return tuple(S for S in self.positional if not any(S.unilateral))

    def law_for(self, location: ImpactLocation) -> ConstitutiveLaw:
        if len(location.constraints) > 1:
            return self.multiple_law or IdealReflection()
        name = location.surface.name
        try:
            return self.laws[name]
        except KeyError:
            raise SimulationError(f"no law is configured for positional constraint {name!r}")

    def diagnostic_frame_map(self) -> dict[str, FrameField]:
        return {name: self.frames[name] for name in self.diagnostic_frames}


@dataclasses.dataclass(frozen=True)
class SimulationResult:
    #: The sampled trajectory. At every event both the left and the right velocity are recorded.
    trajectory: tuple[TimelikeVelocity, ...]
    events: tuple[ImpactEvent, ...]
    final: SimState


def joint_kinetic(constraints: Sequence[KineticConstraint]) -> Optional[KineticConstraint]:
    """Stack several permanent kinetic constraints into one, named by joining their names with `+`."""

    if not constraints:
        return None
    if len(constraints) == 1:
        return constraints[0]
    return KineticConstraint(
        name="+".join(A.name for A in constraints),
        rows=tuple(row for A in constraints for row in A.rows),
    )


class Simulation:
    """One run of a :class:`MechanicalSystem` from an initial velocity. A run is strictly sequential and
    deterministic: the same inputs produce the same trajectory and events."""

    def __init__(self, system: MechanicalSystem, initial: TimelikeVelocity, cfg: IntegratorConfig) -> None:
        if initial.base.dim != system.dim:
            raise SimulationError(f"initial state has dimension {initial.base.dim}, the system {system.dim}")
        self.system = system
        self.initial = initial
        self.cfg = cfg
        self.events: list[ImpactEvent] = []
        self.trajectory: list[TimelikeVelocity] = []

    def _expand_broken(self, broken: frozenset[str]) -> frozenset[str]:
        names = set(broken)
        for name in broken:
            names.update(name.split("+"))
        return frozenset(names)

    def _record(self, event: ImpactEvent) -> None:
        self.events.append(event)
        if len(self.events) > self.cfg.max_events:
            raise SimulationError(f"more than {self.cfg.max_events} events by t = {event.time!r}")
        self.trajectory.append(event.p_left)
        self.trajectory.append(event.p_right)

    def _after(self, state: SimState, event: ImpactEvent) -> SimState:
        return dataclasses.replace(state, p=event.p_right, broken=state.broken | self._expand_broken(event.broken))

    def _context(self, state: SimState, **kwargs: object) -> ImpactContext:
        return ImpactContext(
            point=state.p.base,
            metric=self.system.metric,
            force=self.system.forces.at(state.p),
            tol=self.cfg.tol,
            **kwargs,  # type: ignore[arg-type]
        )

    def impact(self, location: ImpactLocation, state: SimState, active: Optional[Array] = None) -> SimState:
        system = self.system
        surface = location.surface
        instantaneous = system.instantaneous_for(surface.name) if len(location.constraints) == 1 else None
        frame_name = system.rest_frames.get(surface.name)
        ctx = self._context(
            location.state,
            surface=surface,
            kinetic=joint_kinetic(system.permanent(state.broken)),
            instantaneous=instantaneous,
            rest_frame=system.frames[frame_name] if frame_name else None,
            active_impulse=SpacelikeVector(location.point, active) if active is not None else None,
        )
        event = handle_event(
            location.p_left,
            ctx,
            system.law_for(location),
            index=len(self.events),
            constraints=[S.name for S in location.constraints],
            frames=system.diagnostic_frame_map(),
        )
        self._record(event)
        return self._after(location.state, event)

    def kinetic_violations(self, state: SimState) -> SimState:
        """Resolve every unbroken permanent kinetic constraint whose inequality rows *state* violates."""

        for A in self.system.permanent(state.broken):
            if not A.has_inequalities or A.name in state.broken:
                continue
            ok, margins = satisfies_kinetic(state.p, A, self.cfg.tol)
            if ok:
                continue
            logger.debug("kinetic constraint %r violated at t = %r (margins %s)", A.name, state.t, margins)
            event = handle_event(
                state.p,
                self._context(state, kinetic=A),
                self.system.laws.get(A.name, InelasticClamp()),
                index=len(self.events),
                kind="kinetic",
                constraints=[A.name],
                frames=self.system.diagnostic_frame_map(),
            )
            self._record(event)
            state = self._after(state, event)
        return state

    def scripted(self, state: SimState, impulse: ScriptedImpulse) -> SimState:
        kinetic = joint_kinetic(self.system.permanent(state.broken))
        bilateral = self.system.bilateral()
        surface = PositionalConstraint.combine(list(bilateral)) if bilateral else None
        law = impulse.law
        if law is None:
            law = KineticIdeal() if kinetic is not None or surface is not None else FreeImpulse()
        ctx = self._context(
            state,
            surface=surface,
            kinetic=kinetic,
            active_impulse=SpacelikeVector(state.p.base, impulse.vector),
        )
        event = handle_event(
            state.p,
            ctx,
            law,
            index=len(self.events),
            kind="active",
            constraints=[c.name for c in (surface, kinetic) if c is not None],
            frames=self.system.diagnostic_frame_map(),
        )
        self._record(event)
        return self._after(state, event)

    def contacts(self, p: TimelikeVelocity, names: Sequence[str] = ()) -> list[PositionalConstraint]:
        """The unilateral constraints *p* is in contact with, restricted to the rows in contact. With *names*, only
        the named constraints are considered and each must be in contact."""

        candidates = self.system.unilateral()
        if names:
            known = {S.name: S for S in self.system.positional}
            missing = [name for name in names if name not in known]
            if missing:
                raise SimulationError(f"no positional constraint named {', '.join(missing)}")
            candidates = tuple(known[name] for name in names)
        hits = []
        for S in candidates:
            touching = np.abs(S.values(p.base)) <= CONTACT_TOLERANCE
            rows = np.flatnonzero(np.array(S.unilateral, dtype=bool) & touching)
            if len(rows) == 0:
                if names:
                    raise SimulationError(f"{p.base} is not in contact with {S.name!r}")
                continue
            hits.append(S if len(rows) == S.codim else S.restrict([int(i) for i in rows]))
        return hits

    def impact_at(
        self, p_left: TimelikeVelocity, names: Sequence[str] = (), active: Optional[Array] = None
    ) -> ImpactEvent:
        """Resolve a single impact of *p_left* outside of a run, as the engine would resolve it.

        The impact happens on the unilateral constraints *p_left* is in contact with (or on the constraints in
        *names*). Without contact, *active* is applied as a scripted impulse.

        :raise SimulationError: If there is neither a contact nor an active impulse.
        """

        state = SimState(p_left)
        hits = self.contacts(p_left, names)
        if not hits:
            if active is None:
                raise SimulationError(f"{p_left.base} is not in contact with a unilateral constraint")
            self.scripted(state, ScriptedImpulse(p_left.base.t, active))
            return self.events[-1]
        surface = PositionalConstraint.combine(hits)
        side = classify(p_left, surface, self.system.metric, self.cfg.tol).side
        self.impact(ImpactLocation(state, tuple(hits), surface, side), state, active)
        return self.events[-1]

    def check_penetration(self, state: SimState) -> None:
        """Raise if *state* lies deeper than `penetration_tol` behind an unbroken unilateral constraint."""

        S_list = self.system.unilateral(state.broken)
        for S, gaps in zip(S_list, unilateral_gaps(state.p.base, S_list)):
            if np.any(gaps < -self.cfg.penetration_tol):
                raise SimulationError(
                    f"penetration of {S.name!r} by {-float(gaps.min())!r} at t = {state.t!r} exceeds the tolerance "
                    f"{self.cfg.penetration_tol!r}"
                )

    def run(self) -> SimulationResult:
        system, cfg = self.system, self.cfg
        state = SimState(self.initial)
        self.trajectory.append(state.p)
        pending = sorted(system.impulses, key=lambda impulse: impulse.time)
        for impulse in pending:
            if impulse.time > cfg.t_end:
                logger.warning("scripted impulse at t = %r lies after the end of the run", impulse.time)
        state = self.kinetic_violations(state)

        while cfg.t_end - state.t > cfg.t_tol:
            step = min(cfg.step, cfg.t_end - state.t)
            if pending and pending[0].time <= state.t + step:
                step = max(pending[0].time - state.t, 0.0)
            if step > 0.0:
                permanent = system.permanent(state.broken)
                following = smooth_step(state, system.forces, permanent, cfg, system.metric, step=step)
                location = locate_impact(
                    state, following, system.unilateral(state.broken), cfg, system.forces, permanent, system.metric
                )
                if location is not None and location.side is Side.LEFT:
                    state = self.impact(location, state)
                    state = self.kinetic_violations(state)
                    continue
                if location is not None:
                    logger.debug(
                        "%s arrival on %s at t = %r, no impact",
                        location.side.value,
                        location.surface.name,
                        location.time,
                    )
                state = following
                self.check_penetration(state)
            if pending and state.t >= pending[0].time - cfg.t_tol:
                state = self.scripted(state, pending.pop(0))
            state = self.kinetic_violations(state)
            if state.step_index % cfg.sample_every == 0:
                self.trajectory.append(state.p)

        if self.trajectory[-1] is not state.p:
            self.trajectory.append(state.p)
        logger.info("run finished at t = %r with %d event(s)", state.t, len(self.events))
        return SimulationResult(tuple(self.trajectory), tuple(self.events), state)


def run(system: MechanicalSystem, initial: TimelikeVelocity, cfg: IntegratorConfig) -> SimulationResult:
    """Run *system* from *initial* until `cfg.t_end`.

    :raise SimulationError: On a non-finite state, a bisection that does not converge, more than
        `cfg.max_events` events, a missing law or a penetration deeper than `cfg.penetration_tol`.
    """

    return Simulation(system, initial, cfg).run()

