"""Metric-orthogonal splittings of velocities and space-like vectors against constraint rows.

Every splitting reduces to the same Gram system: given covector rows `a_σ` and residuals `r_σ`, the orthogonal
part is `Σ c_ρ m_ρ` with `m_ρ = g⁻¹ a_ρ` and `G c = r`, `G_σρ = Φ(m_σ, m_ρ) = a_σ g⁻¹ a_ρ`.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np

from impulsive.mechanics.geometry import (
    Array,
    MassMetric,
    SpacelikeVector,
    SpacetimePoint,
    TimelikeVelocity,
)

from .kinetic import KineticConstraint, Relation
from .positional import ConstraintError, PositionalConstraint

#: Condition number above which a Gram matrix is treated as singular.
MAX_GRAM_CONDITION = 1e12


@dataclasses.dataclass(frozen=True)
class Splitting:
    """The decomposition `p = parallel + vperp`."""

    parallel: TimelikeVelocity
    vperp: SpacelikeVector

    #: The Gram system solution, one coefficient per row.
    coefficients: Array


def gram_solve(rows: Array, residuals: Array, g_inv: Array, what: str) -> tuple[Array, Array]:
    """Solve the Gram system for covector *rows* and return `(orthogonal part, coefficients)`."""

    if rows.shape[0] == 0:
        return np.zeros(g_inv.shape[0]), np.zeros(0)
    raised = g_inv @ rows.T
    gram = rows @ raised
    gram = 0.5 * (gram + gram.T)
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ConstraintError(f"{what}: rows are not linearly independent (singular Gram matrix)")
    if np.linalg.cond(gram) > MAX_GRAM_CONDITION:
        raise ConstraintError(f"{what}: rows are not linearly independent (ill-conditioned Gram matrix)")
    coefficients = np.linalg.solve(gram, residuals)
    return raised @ coefficients, coefficients


def positional_rows(pt: SpacetimePoint, S: PositionalConstraint) -> tuple[Array, Array]:
    """Return the tangency rows of *S* at *pt*: spatial gradients and time derivatives."""

    ft, fx = S.gradients(pt)
    return fx, ft


def normal_basis(pt: SpacetimePoint, S: PositionalConstraint, metric: MassMetric) -> list[SpacelikeVector]:
    """The raised gradients `n_ρ = g^ij ∂f_ρ/∂xʲ ∂/∂xⁱ`, a basis of the orthogonal space `V⊥(S)`."""

    fx, _ = positional_rows(pt, S)
    g_inv = metric.inverse(pt)
    raised = fx @ g_inv
    gram_solve(fx, np.zeros(S.codim), g_inv, f"positional constraint {S.name!r}")
    return [SpacelikeVector(pt, row) for row in raised]


def _split(p: TimelikeVelocity, rows: Array, residuals: Array, metric: MassMetric, what: str) -> Splitting:
    correction, coefficients = gram_solve(rows, residuals, metric.inverse(p.base), what)
    return Splitting(
        parallel=TimelikeVelocity(p.base, p.p - correction),
        vperp=SpacelikeVector(p.base, correction),
        coefficients=coefficients,
    )


def split_positional(p: TimelikeVelocity, S: PositionalConstraint, metric: MassMetric) -> Splitting:
    """Split *p* into `J₁(S) ⊕ V⊥(S)`. The residuals are `∂f_σ/∂t + ∂f_σ/∂xⁱ pⁱ`."""

    fx, ft = positional_rows(p.base, S)
    return _split(p, fx, ft + fx @ p.p, metric, f"positional constraint {S.name!r}")


def split_kinetic(p: TimelikeVelocity, A: KineticConstraint, metric: MassMetric) -> Splitting:
    """Split *p* into `A ⊕ V⊥(A)`. Only equality rows are accepted."""

    if A.has_inequalities:
        raise ConstraintError(f"kinetic constraint {A.name!r} has inequality rows; split its equalities instead")
    rows, offsets = A.covectors(p.base)
    return _split(p, rows, rows @ p.p + offsets, metric, f"kinetic constraint {A.name!r}")


def stacked_rows(
    pt: SpacetimePoint,
    S: Optional[PositionalConstraint],
    kinetic: tuple[KineticConstraint, ...],
) -> tuple[Array, Array]:
    """Stack the tangency rows of *S* and the rows of the kinetic constraints into `(covectors, offsets)`."""

    covectors = []
    offsets = []
    if S is not None:
        fx, ft = positional_rows(pt, S)
        covectors.append(fx)
        offsets.append(ft)
    for K in kinetic:
        rows, b = K.covectors(pt)
        covectors.append(rows)
        offsets.append(b)
    if not covectors:
        return np.zeros((0, pt.dim)), np.zeros(0)
    return np.vstack(covectors), np.concatenate(offsets)


def split_joint(
    p: TimelikeVelocity,
    S: PositionalConstraint,
    kinetic: KineticConstraint | tuple[KineticConstraint, ...],
    metric: MassMetric,
) -> Splitting:
    """Project *p* orthogonally onto `J₁(S) ∩ A` (or `∩ B`) through the stacked Gram system."""

    kinetic = kinetic if isinstance(kinetic, tuple) else (kinetic,)
    for K in kinetic:
        if K.has_inequalities:
            raise ConstraintError(f"kinetic constraint {K.name!r} has inequality rows")
    rows, offsets = stacked_rows(p.base, S, kinetic)
    names = "+".join([S.name] + [K.name for K in kinetic])
    return _split(p, rows, rows @ p.p + offsets, metric, f"joint constraint {names!r}")


def split_rows(p: TimelikeVelocity, rows: Array, offsets: Array, metric: MassMetric, what: str) -> Splitting:
    """Project *p* onto the affine set `rows · p + offsets = 0`."""

    return _split(p, rows, rows @ p.p + offsets, metric, what)


def project_spacelike(V: SpacelikeVector, rows: Array, metric: MassMetric) -> tuple[SpacelikeVector, SpacelikeVector]:
    """Split a space-like vector into its parts tangent and orthogonal to the kernel of *rows*.

    This is the linear splitting `V(M) = V(S) ⊕ V⊥(S)`; time derivatives and offsets play no role.
    """

    normal, _ = gram_solve(rows, rows @ V.V, metric.inverse(V.base), "space-like splitting")
    return SpacelikeVector(V.base, V.V - normal), SpacelikeVector(V.base, normal)


def project_spacelike_positional(
    V: SpacelikeVector, S: PositionalConstraint, metric: MassMetric
) -> tuple[SpacelikeVector, SpacelikeVector]:
    fx, _ = positional_rows(V.base, S)
    return project_spacelike(V, fx, metric)


def project_spacelike_kinetic(
    V: SpacelikeVector, A: KineticConstraint, metric: MassMetric
) -> tuple[SpacelikeVector, SpacelikeVector]:
    rows, _ = A.covectors(V.base)
    return project_spacelike(V, rows, metric)


def active_kinetic_rows(p: TimelikeVelocity, A: KineticConstraint, tol: float) -> list[int]:
    """Indices of rows that bind *p*: all equality rows and the inequality rows at or below zero."""

    residuals = A.residuals(p)
    return [
        i
        for i, (row, residual) in enumerate(zip(A.rows, residuals))
        if row.relation is Relation.EQ or residual < -tol
    ]
