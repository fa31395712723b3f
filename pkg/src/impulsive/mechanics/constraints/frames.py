"""Rest frames of constraints, the non-commuting projection residual and anisotropy data."""

from __future__ import annotations

import logging
from typing import Iterable

import numpy as np

from impulsive.mechanics.geometry import (
    FrameField,
    MassMetric,
    SpacelikeVector,
    SpacetimePoint,
    TimelikeVelocity,
    metric_inner,
    metric_norm,
    relativize,
)

from .kinetic import KineticConstraint, Relation
from .positional import ConstraintError, PositionalConstraint
from .projection import project_spacelike_positional, split_positional

logger = logging.getLogger(__name__)

#: Tolerance of the unit-length and tangency checks of the anisotropy field.
ANISOTROPY_TOLERANCE = 1e-6


def is_rest_frame(h: FrameField, S: PositionalConstraint, sample_pts: Iterable[SpacetimePoint], tol: float) -> bool:
    """Whether `h(f_ρ) = ∂f_ρ/∂t + Hⁱ ∂f_ρ/∂xⁱ` vanishes within *tol* for every row at every sample
    point."""

    for pt in sample_pts:
        ft, fx = S.gradients(pt)
        residuals = ft + fx @ h.at(pt)
        if np.any(np.abs(residuals) > tol):
            logger.debug("frame is not at rest on %r at %s (residuals %s)", S.name, pt, residuals.tolist())
            return False
    return True


def is_rest_frame_kinetic(
    h: FrameField, A: KineticConstraint, sample_pts: Iterable[SpacetimePoint], tol: float
) -> bool:
    """Whether the frame takes values in the kinetic constraint: `a_ρ · H + b_ρ = 0` for every equality row."""

    for pt in sample_pts:
        rows, offsets = A.covectors(pt)
        equality = np.array([row.relation is Relation.EQ for row in A.rows])
        residuals = (rows @ h.at(pt) + offsets)[equality]
        if np.any(np.abs(residuals) > tol):
            logger.debug("frame is not at rest on %r at %s (residuals %s)", A.name, pt, residuals.tolist())
            return False
    return True


def projection_residual(p: TimelikeVelocity, h: FrameField, S: PositionalConstraint, metric: MassMetric) -> float:
    """The Φ-norm of `velort(p) − P⊥_V(p − h)`.

    The orthogonal part of an absolute velocity and the orthogonal part of its relative velocity agree exactly when
    *h* is a rest frame of *S*; otherwise the two projections do not commute and the residual is positive.
    """

    absolute = split_positional(p, S, metric).vperp
    _, relative = project_spacelike_positional(relativize(p, h), S, metric)
    return metric_norm(absolute - relative, metric)


def sample_points(
    S: PositionalConstraint,
    around: SpacetimePoint,
    count: int,
    rng: np.random.Generator,
    spread: float = 0.1,
    tol: float = 1e-12,
    max_iterations: int = 50,
) -> list[SpacetimePoint]:
    """Sample points of *S* near *around* by Gauss–Newton projection of random perturbations.

    :param spread: The scale of the perturbation relative to `max(1, |x|)`.
    :raise ConstraintError: If a perturbed point cannot be brought onto the constraint.
    """

    scale = spread * max(1.0, float(np.max(np.abs(around.x))))
    points = []
    for _ in range(count):
        x = around.x + rng.normal(scale=scale, size=around.dim)
        for _ in range(max_iterations):
            pt = SpacetimePoint(around.t, x)
            values = S.values(pt)
            if np.max(np.abs(values)) <= tol:
                break
            _, fx = S.gradients(pt)
            x = x - np.linalg.lstsq(fx, values, rcond=None)[0]
        else:
            raise ConstraintError(f"could not sample a point on {S.name!r} near {around}")
        points.append(SpacetimePoint(around.t, x))
    return points


def anisotropy_direction(pt: SpacetimePoint, S: PositionalConstraint, metric: MassMetric) -> SpacelikeVector:
    """Evaluate `L_Anis` at *pt*, checking that it is tangent to *S* and of unit length."""

    if S.anisotropy is None:
        raise ConstraintError(f"positional constraint {S.name!r} has no anisotropy direction")
    L = SpacelikeVector(pt, np.asarray(S.anisotropy(pt.t, pt.x), dtype=np.float64))
    if abs(metric_inner(L, L, metric) - 1.0) > ANISOTROPY_TOLERANCE:
        raise ConstraintError(f"anisotropy direction of {S.name!r} is not of unit length at {pt}")
    _, fx = S.gradients(pt)
    if np.any(np.abs(fx @ L.V) > ANISOTROPY_TOLERANCE):
        raise ConstraintError(f"anisotropy direction of {S.name!r} is not tangent at {pt}")
    return L
