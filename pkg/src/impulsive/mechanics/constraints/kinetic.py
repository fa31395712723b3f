from __future__ import annotations

import dataclasses
import enum
from typing import Callable, Optional

import numpy as np

from impulsive.mechanics.geometry import Array, ArrayLike, SpacetimePoint, TimelikeVelocity, as_vector

from .positional import ConstraintError


class Relation(enum.Enum):
    EQ = "="
    GE = ">="


class KineticKind(enum.Enum):
    #: Always acting on the system.
    PERMANENT = "permanent"
    #: Acting only at the impact with the positional constraint that owns it.
    INSTANTANEOUS = "instantaneous"


@dataclasses.dataclass(frozen=True)
class KineticRow:
    """An affine row `a(t, x) · ẋ + b(t, x)` with a relation `= 0` or `≥ 0`."""

    a: Callable[[float, Array], ArrayLike]
    b: Callable[[float, Array], float]
    relation: Relation = Relation.EQ
    source: Optional[str] = None

    @staticmethod
    def constant(a: ArrayLike, b: float = 0.0, relation: Relation = Relation.EQ) -> KineticRow:
        covector = as_vector(a, "kinetic row covector")
        return KineticRow(lambda t, x: covector, lambda t, x: b, relation)

    def evaluate(self, pt: SpacetimePoint) -> tuple[Array, float]:
        a = np.asarray(self.a(pt.t, pt.x), dtype=np.float64)
        b = float(self.b(pt.t, pt.x))
        if a.shape != (pt.dim,) or not np.all(np.isfinite(a)) or not np.isfinite(b):
            raise ConstraintError(f"kinetic row {self.source or '<anonymous>'} is not finite at {pt}")
        return a, b


@dataclasses.dataclass(frozen=True)
class KineticConstraint:
    """A kinetic constraint given by affine rows on the velocity components."""

    name: str
    rows: tuple[KineticRow, ...]
    kind: KineticKind = KineticKind.PERMANENT

    #: The positional constraint an instantaneous constraint acts with.
    owner: Optional[str] = None

    #: The frame the rows were authored in. Rolling conditions compare relative velocities, so the rows only
    #: mean something together with this frame; it is recorded and reported, never used for computation.
    frame: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.rows:
            raise ConstraintError(f"kinetic constraint {self.name!r} has no rows")
        if self.kind is KineticKind.INSTANTANEOUS and self.owner is None:
            raise ConstraintError(f"instantaneous kinetic constraint {self.name!r} needs an owner")

    @property
    def has_inequalities(self) -> bool:
        return any(row.relation is Relation.GE for row in self.rows)

    def equalities(self) -> KineticConstraint:
        return dataclasses.replace(self, rows=tuple(r for r in self.rows if r.relation is Relation.EQ))

    def covectors(self, pt: SpacetimePoint) -> tuple[Array, Array]:
        """Return the row covectors with shape `(k, n)` and the offsets with shape `(k,)`."""

        evaluated = [row.evaluate(pt) for row in self.rows]
        return np.array([e[0] for e in evaluated]).reshape(len(self.rows), pt.dim), np.array([e[1] for e in evaluated])

    def residuals(self, p: TimelikeVelocity) -> Array:
        A, b = self.covectors(p.base)
        return A @ p.p + b


def satisfies_kinetic(p: TimelikeVelocity, A: KineticConstraint, tol: float) -> tuple[bool, tuple[float, ...]]:
    """Check *p* against every row of *A*.

    Equality rows must hold within *tol*, inequality rows must not fall below `-tol`. The returned margins are the
    row residuals `a · p + b`.
    """

    residuals = A.residuals(p)
    ok = True
    for row, residual in zip(A.rows, residuals):
        if row.relation is Relation.EQ and abs(residual) > tol:
            ok = False
        elif row.relation is Relation.GE and residual < -tol:
            ok = False
    return ok, tuple(float(r) for r in residuals)
