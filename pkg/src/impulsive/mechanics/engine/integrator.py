"""Smooth motion between impacts: fixed-step RK4 followed by velocity post-stabilization."""

from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Sequence

import numpy as np

from impulsive.mechanics.constraints import KineticConstraint, Relation, split_rows, stacked_rows
from impulsive.mechanics.geometry import ForceSection, MassMetric, SpacetimePoint, TimelikeVelocity, metric_norm

from .config import IntegratorConfig

logger = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """Raised when a run cannot continue: a non-finite state, bisection that does not converge or an event storm."""


@dataclasses.dataclass(frozen=True)
class SimState:
    p: TimelikeVelocity

    #: Names of the constraints broken so far. A broken constraint stays broken for the rest of the run.
    broken: frozenset[str] = frozenset()
    step_index: int = 0

    #: The Φ-norm of the last velocity post-stabilization correction.
    drift: float = 0.0

    @property
    def t(self) -> float:
        return self.p.base.t

    @property
    def x(self) -> np.ndarray:
        return self.p.base.x

    @property
    def v(self) -> np.ndarray:
        return self.p.p


def _equality_part(A: KineticConstraint) -> Optional[KineticConstraint]:
    if not any(row.relation is Relation.EQ for row in A.rows):
        return None
    return A.equalities()


def stabilize(
    p: TimelikeVelocity, A_list: Sequence[KineticConstraint], metric: MassMetric
) -> tuple[TimelikeVelocity, float]:
    """Project *p* onto the intersection of the equality rows of *A_list*. Returns the projected velocity and the
    Φ-norm of the correction."""

    equalities = tuple(E for E in map(_equality_part, A_list) if E is not None)
    if not equalities:
        return p, 0.0
    rows, offsets = stacked_rows(p.base, None, equalities)
    split = split_rows(p, rows, offsets, metric, "permanent kinetic constraints")
    return split.parallel, metric_norm(split.vperp, metric)


def smooth_step(
    state: SimState,
    forces: ForceSection,
    A_list: Sequence[KineticConstraint],
    cfg: IntegratorConfig,
    metric: MassMetric,
    step: Optional[float] = None,
) -> SimState:
    """Advance `ẍ = Z(t, x, ẋ)` by one classical RK4 step of size *step* (default `cfg.step`), then project the
    velocity back onto the unbroken permanent kinetic equality rows.

    :raise SimulationError: If the new state is not finite.
    """

    h = cfg.step if step is None else step
    t, x, v = state.t, state.x, state.v

    k1x, k1v = v, forces.evaluate(t, x, v)
    k2x, k2v = v + 0.5 * h * k1v, forces.evaluate(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, forces.evaluate(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, forces.evaluate(t + h, x + h * k3x, v + h * k3v)
    x_next = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v_next = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(v_next))):
        raise SimulationError(f"integration produced a non-finite state after t = {t!r}")

    unbroken = [A for A in A_list if A.name not in state.broken]
    p_next, drift = stabilize(TimelikeVelocity(SpacetimePoint(t + h, x_next), v_next), unbroken, metric)
    if drift > cfg.drift_tol:
        logger.warning("velocity stabilization corrected a drift of %g at t = %g", drift, t + h)
    return dataclasses.replace(state, p=p_next, step_index=state.step_index + 1, drift=drift)
