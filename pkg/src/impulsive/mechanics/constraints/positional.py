from __future__ import annotations

import dataclasses
from typing import Callable, Optional, Sequence

import numpy as np

from impulsive.mechanics.geometry import Array, ArrayLike, ScalarField, SpacetimePoint


class ConstraintError(ValueError):
    """Raised when a constraint is not regular where it is used, or is missing data needed for an operation."""


@dataclasses.dataclass(frozen=True)
class PositionalConstraint:
    """A positional constraint in cartesian form `f_ρ(t, x) = 0`, `ρ = 1..k`.

    A row with an orientation declares its exit side: the admissible region is `orientation · f_ρ ≥ 0` and the
    exit direction `U⊥_ρ` is the raised gradient of `f_ρ` multiplied by the orientation. A constraint with
    several oriented unilateral rows is a multiple constraint; a constraint of codimension greater than one
    without orientations can only be classified with an explicit *side_rule*.
    """

    name: str
    funcs: tuple[ScalarField, ...]
    orientations: tuple[Optional[int], ...] = ()
    unilateral: tuple[bool, ...] = ()

    #: A direction field `L_Anis` tangent to the constraint, of unit length in the mass metric.
    anisotropy: Optional[Callable[[float, Array], ArrayLike]] = None

    #: User-declared left/right rule for constraints of codimension greater than one. It receives the margins
    #: `Φ(velort(p), n_ρ)` against the raised gradients and returns -1 (left), 0 (tangent) or +1 (right).
    side_rule: Optional[Callable[[Sequence[float]], int]] = None

    #: The names of the constraints this one was assembled from (just its own name unless built by
    #: :meth:`combine`).
    members: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        k = len(self.funcs)
        if k == 0:
            raise ConstraintError(f"positional constraint {self.name!r} has no functions")
        if not self.orientations:
            object.__setattr__(self, "orientations", (None,) * k)
        if not self.unilateral:
            object.__setattr__(self, "unilateral", (True,) * k)
        if not self.members:
            object.__setattr__(self, "members", (self.name,))
        if len(self.orientations) != k or len(self.unilateral) != k:
            raise ConstraintError(f"positional constraint {self.name!r}: per-row lists must have {k} entries")
        for orientation in self.orientations:
            if orientation not in (None, 1, -1):
                raise ConstraintError(f"positional constraint {self.name!r}: orientation must be +1 or -1")

    @property
    def codim(self) -> int:
        return len(self.funcs)

    @property
    def oriented(self) -> bool:
        return all(o is not None for o in self.orientations)

    def values(self, pt: SpacetimePoint) -> Array:
        return np.array([f.at(pt) for f in self.funcs])

    def gradients(self, pt: SpacetimePoint) -> tuple[Array, Array]:
        """Return `∂f_ρ/∂t` with shape `(k,)` and `∂f_ρ/∂x` with shape `(k, n)`."""

        grads = [f.gradient(pt) for f in self.funcs]
        return np.array([g[0] for g in grads]), np.array([g[1] for g in grads]).reshape(self.codim, pt.dim)

    def signs(self) -> Array:
        return np.array([1.0 if o is None else float(o) for o in self.orientations])

    def gaps(self, pt: SpacetimePoint) -> Array:
        """The signed distances `orientation · f_ρ`; non-negative on the admissible side."""

        return self.signs() * self.values(pt)

    def restrict(self, rows: Sequence[int]) -> PositionalConstraint:
        """The constraint formed by a subset of the rows."""

        rows = sorted(rows)
        return dataclasses.replace(
            self,
            funcs=tuple(self.funcs[i] for i in rows),
            orientations=tuple(self.orientations[i] for i in rows),
            unilateral=tuple(self.unilateral[i] for i in rows),
        )

    @staticmethod
    def combine(constraints: Sequence[PositionalConstraint]) -> PositionalConstraint:
        """Stack the rows of several constraints into the multiple constraint of their intersection."""

        if len(constraints) == 1:
            return constraints[0]
        members = tuple(m for c in constraints for m in c.members)
        return PositionalConstraint(
            name="+".join(members),
            funcs=tuple(f for c in constraints for f in c.funcs),
            orientations=tuple(o for c in constraints for o in c.orientations),
            unilateral=tuple(u for c in constraints for u in c.unilateral),
            members=members,
        )
