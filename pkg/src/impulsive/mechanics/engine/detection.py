"""Localization of impacts with unilateral positional constraints inside one integration step."""

from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Sequence

import numpy as np

from impulsive.mechanics.constraints import (
    KineticConstraint,
    PositionalConstraint,
    Side,
    classify,
)
from impulsive.mechanics.constitutive import CONTACT_TOLERANCE
from impulsive.mechanics.geometry import ForceSection, MassMetric, SpacetimePoint, TimelikeVelocity

from .config import IntegratorConfig
from .integrator import SimState, SimulationError, smooth_step

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class ImpactLocation:
    """A located impact: the state at the last time before the crossing, the constraint rows hit within the
    final bracket and the classification of the left velocity against them."""

    state: SimState

    #: The rows hit, restricted to one positional constraint per entry.
    constraints: tuple[PositionalConstraint, ...]

    #: The constraint the impact happens on; several constraints hit together are combined.
    surface: PositionalConstraint
    side: Side

    @property
    def time(self) -> float:
        return self.state.t

    @property
    def point(self) -> SpacetimePoint:
        return self.state.p.base

    @property
    def p_left(self) -> TimelikeVelocity:
        return self.state.p


def unilateral_gaps(pt: SpacetimePoint, S_list: Sequence[PositionalConstraint]) -> list[np.ndarray]:
    """The signed gaps `orientation · f_ρ` of every row of *S_list*; bilateral rows report `+inf`."""

    gaps = []
    for S in S_list:
        values = S.gaps(pt)
        gaps.append(np.where(np.array(S.unilateral, dtype=bool), values, np.inf))
    return gaps


def _crossed(gaps: Sequence[np.ndarray], watched: Sequence[np.ndarray]) -> bool:
    return any(bool(np.any(g[w] < 0.0)) for g, w in zip(gaps, watched))


def locate_impact(
    state_prev: SimState,
    state_next: SimState,
    S_list: Sequence[PositionalConstraint],
    cfg: IntegratorConfig,
    forces: ForceSection,
    A_list: Sequence[KineticConstraint],
    metric: MassMetric,
) -> Optional[ImpactLocation]:
    """Find the earliest crossing `gap ≥ 0 → gap < 0` of a unilateral row within the step from *state_prev* to
    *state_next*.

    The step is bisected by re-integrating from *state_prev* with a shorter step until the bracket is narrower
    than `cfg.t_tol`. Every row that is negative at the right end of the final bracket is part of the impact, so
    crossings closer than `t_tol` form one multiple event. Returns `None` if no watched row changes sign.

    :raise SimulationError: If the located point is farther than the contact tolerance from a hit row.
    """

    if not S_list:
        return None
    gaps_prev = unilateral_gaps(state_prev.p.base, S_list)
    watched = [g >= 0.0 for g in gaps_prev]
    if not _crossed(unilateral_gaps(state_next.p.base, S_list), watched):
        return None

    total = state_next.t - state_prev.t
    lo, hi = 0.0, total
    lo_state, hi_state = state_prev, state_next
    iterations = 0
    while hi - lo > cfg.t_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        trial = smooth_step(state_prev, forces, A_list, cfg, metric, step=mid)
        if _crossed(unilateral_gaps(trial.p.base, S_list), watched):
            hi, hi_state = mid, trial
        else:
            lo, lo_state = mid, trial
        iterations += 1
    logger.debug("bisection converged after %d iterations to [%r, %r]", iterations, lo_state.t, hi_state.t)

    gaps_hi = unilateral_gaps(hi_state.p.base, S_list)
    gaps_lo = unilateral_gaps(lo_state.p.base, S_list)
    hit: list[PositionalConstraint] = []
    for S, g_hi, g_lo, w in zip(S_list, gaps_hi, gaps_lo, watched):
        rows = [int(i) for i in np.flatnonzero(w & (g_hi < 0.0))]
        if not rows:
            continue
        if np.any(np.abs(g_lo[rows]) > CONTACT_TOLERANCE):
            raise SimulationError(
                f"impact bisection on {S.name!r} did not converge near t = {lo_state.t!r} "
                f"(gaps {g_lo[rows].tolist()})"
            )
        hit.append(S if len(rows) == S.codim else S.restrict(rows))

    surface = PositionalConstraint.combine(hit)
    side = classify(lo_state.p, surface, metric, cfg.tol).side
    # The located state is one step of the integrator from `state_prev`; keep its step counter.
    located = dataclasses.replace(lo_state, step_index=state_prev.step_index + 1)
    return ImpactLocation(located, tuple(hit), surface, side)
