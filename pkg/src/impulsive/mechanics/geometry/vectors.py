"""Points, time-like and space-like vectors of the configuration space-time, in a single chart."""

from __future__ import annotations

import dataclasses
from typing import Any, Sequence, Union

import numpy as np
import numpy.typing as npt

Array = npt.NDArray[np.float64]
ArrayLike = Union[Sequence[float], Array]


class GeometryError(ValueError):
    """Raised for inconsistent geometric input: mismatched base points, non-finite values, a mass matrix that is
    not positive definite or a singular coordinate change."""


def as_vector(values: ArrayLike | float, what: str = "vector") -> Array:
    """Convert *values* to a read-only, finite, one-dimensional float array."""

    array = np.array(values, dtype=np.float64, ndmin=1)
    if array.ndim != 1:
        raise GeometryError(f"{what} must be one-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise GeometryError(f"{what} has non-finite entries: {array.tolist()}")
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class SpacetimePoint:
    """A point `(t, x¹, …, xⁿ)` of the space-time in admissible coordinates."""

    t: float
    x: Array

    def __init__(self, t: float, x: ArrayLike) -> None:
        if not np.isfinite(t):
            raise GeometryError(f"time coordinate is not finite: {t!r}")
        object.__setattr__(self, "t", float(t))
        object.__setattr__(self, "x", as_vector(x, "spatial coordinates"))

    @property
    def dim(self) -> int:
        return len(self.x)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, SpacetimePoint):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash((self.t, self.x.tobytes()))

    def __repr__(self) -> str:
        return f"SpacetimePoint(t={self.t!r}, x={self.x.tolist()!r})"


def check_same_base(a: SpacetimePoint, b: SpacetimePoint) -> None:
    if a != b:
        raise GeometryError(f"vectors are based at different points: {a} and {b}")


@dataclasses.dataclass(frozen=True, eq=False)
class SpacelikeVector:
    """A vertical vector `Vⁱ ∂/∂xⁱ` (zero time component). Impulses and relative velocities live here."""

    base: SpacetimePoint
    V: Array

    def __init__(self, base: SpacetimePoint, V: ArrayLike) -> None:
        components = as_vector(V, "space-like vector")
        if len(components) != base.dim:
            raise GeometryError(f"space-like vector has {len(components)} components, chart has {base.dim}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "V", components)

    @staticmethod
    def zero(base: SpacetimePoint) -> SpacelikeVector:
        return SpacelikeVector(base, np.zeros(base.dim))

    def __add__(self, other: SpacelikeVector) -> SpacelikeVector:
        check_same_base(self.base, other.base)
        return SpacelikeVector(self.base, self.V + other.V)

    def __sub__(self, other: SpacelikeVector) -> SpacelikeVector:
        check_same_base(self.base, other.base)
        return SpacelikeVector(self.base, self.V - other.V)

    def __neg__(self) -> SpacelikeVector:
        return SpacelikeVector(self.base, -self.V)

    def __mul__(self, factor: float) -> SpacelikeVector:
        return SpacelikeVector(self.base, float(factor) * self.V)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SpacelikeVector({self.V.tolist()!r} @ {self.base})"


@dataclasses.dataclass(frozen=True, eq=False)
class TimelikeVelocity:
    """An absolute velocity `∂/∂t + pⁱ ∂/∂xⁱ`. Only the spatial components are stored; the time component is
    identically 1."""

    base: SpacetimePoint
    p: Array

    def __init__(self, base: SpacetimePoint, p: ArrayLike) -> None:
        components = as_vector(p, "time-like velocity")
        if len(components) != base.dim:
            raise GeometryError(f"velocity has {len(components)} components, chart has {base.dim}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "p", components)

    def __sub__(self, other: TimelikeVelocity) -> SpacelikeVector:
        """The difference of two time-like vectors at the same point is space-like."""

        check_same_base(self.base, other.base)
        return SpacelikeVector(self.base, self.p - other.p)

    def __repr__(self) -> str:
        return f"TimelikeVelocity({self.p.tolist()!r} @ {self.base})"
