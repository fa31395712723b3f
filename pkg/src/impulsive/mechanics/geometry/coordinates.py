"""Admissible coordinate changes `t̄ = t + c, x̄ = x̄(t, x)` and the transformation of geometric objects."""

from __future__ import annotations

import dataclasses
from typing import Callable, Iterable, Optional, TypeVar, Union

import numpy as np

from .differences import jacobian
from .fields import FrameField, MassMetric
from .vectors import Array, ArrayLike, GeometryError, SpacelikeVector, SpacetimePoint, TimelikeVelocity, as_vector

#: Condition number above which a Jacobian is treated as singular.
MAX_CONDITION = 1e12

Transformable = Union[SpacetimePoint, TimelikeVelocity, SpacelikeVector, MassMetric, FrameField]
T = TypeVar("T", SpacetimePoint, TimelikeVelocity, SpacelikeVector, MassMetric, FrameField)


@dataclasses.dataclass(frozen=True)
class CoordinateChange:
    """A change of admissible coordinates. The *inverse* map takes the new coordinates `(t̄, x̄)`."""

    c: float
    forward: Callable[[float, Array], ArrayLike]
    inverse: Callable[[float, Array], ArrayLike]

    #: Optional analytic `(∂x̄/∂t, ∂x̄/∂x)`. Central finite differences are used otherwise.
    jacobian_fn: Optional[Callable[[float, Array], tuple[Array, Array]]] = None

    @staticmethod
    def identity() -> CoordinateChange:
        return CoordinateChange(
            0.0,
            lambda t, x: x,
            lambda t, x: x,
            lambda t, x: (np.zeros(len(x)), np.eye(len(x))),
        )

    @staticmethod
    def affine(
        A: ArrayLike | list[list[float]],
        velocity: ArrayLike | None = None,
        offset: ArrayLike | None = None,
        c: float = 0.0,
    ) -> CoordinateChange:
        """The change `x̄ = A x + velocity·t + offset`, `t̄ = t + c`."""

        matrix = np.array(A, dtype=np.float64)
        n = matrix.shape[0]
        v = np.zeros(n) if velocity is None else as_vector(velocity)
        b = np.zeros(n) if offset is None else as_vector(offset)
        try:
            matrix_inv = np.linalg.inv(matrix)
        except np.linalg.LinAlgError:
            raise GeometryError("affine coordinate change has a singular matrix")
        return CoordinateChange(
            c,
            lambda t, x: matrix @ x + v * t + b,
            lambda t, x: matrix_inv @ (x - v * (t - c) - b),
            lambda t, x: (v, matrix),
        )

    @staticmethod
    def galilean(velocity: ArrayLike) -> CoordinateChange:
        v = as_vector(velocity)
        return CoordinateChange.affine(np.eye(len(v)), velocity=v)

    def map_point(self, pt: SpacetimePoint) -> SpacetimePoint:
        return SpacetimePoint(pt.t + self.c, np.asarray(self.forward(pt.t, pt.x), dtype=np.float64))

    def pull_point(self, pt: SpacetimePoint) -> SpacetimePoint:
        return SpacetimePoint(pt.t - self.c, np.asarray(self.inverse(pt.t, pt.x), dtype=np.float64))

    def jacobian(self, pt: SpacetimePoint) -> tuple[Array, Array]:
        """Return the time column `∂x̄/∂t` and the spatial Jacobian `∂x̄/∂x` at *pt* (old coordinates)."""

        if self.jacobian_fn is not None:
            xt, J = self.jacobian_fn(pt.t, pt.x)
        else:
            xt, J = jacobian(lambda t, x: np.asarray(self.forward(t, x), dtype=np.float64), pt.t, pt.x.copy())
        J = np.asarray(J, dtype=np.float64)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > MAX_CONDITION:
            raise GeometryError(f"coordinate change has a singular Jacobian at {pt}")
        return np.asarray(xt, dtype=np.float64), J

    def validate(self, points: Iterable[SpacetimePoint], tol: float = 1e-10) -> None:
        """Check that the inverse map undoes the forward map and that the Jacobian is regular at *points*."""

        for pt in points:
            back = self.pull_point(self.map_point(pt))
            bad_t = abs(back.t - pt.t) > tol * max(1.0, abs(pt.t))
            if bad_t or not np.allclose(back.x, pt.x, rtol=0.0, atol=tol * max(1.0, np.abs(pt.x).max(initial=0.0))):
                raise GeometryError(f"inverse coordinate map does not undo the forward map at {pt}")
            self.jacobian(pt)


def push_forward(obj: T, chg: CoordinateChange) -> T:
    """Express *obj* in the coordinates introduced by *chg*.

    Points map by `(t + c, x̄(t, x))`, space-like vectors by the spatial Jacobian, time-like velocities
    and frames by `p̄ⁱ = ∂x̄ⁱ/∂t + (∂x̄ⁱ/∂xʲ) pʲ`. The mass matrix maps by congruence with the
    inverse spatial Jacobian, which leaves :func:`metric_inner` invariant.
    """

    if isinstance(obj, SpacetimePoint):
        return chg.map_point(obj)
    if isinstance(obj, SpacelikeVector):
        _, J = chg.jacobian(obj.base)
        return SpacelikeVector(chg.map_point(obj.base), J @ obj.V)
    if isinstance(obj, TimelikeVelocity):
        xt, J = chg.jacobian(obj.base)
        return TimelikeVelocity(chg.map_point(obj.base), xt + J @ obj.p)
    if isinstance(obj, MassMetric):
        metric = obj

        def g(t: float, x: Array) -> Array:
            old = chg.pull_point(SpacetimePoint(t, x))
            _, J = chg.jacobian(old)
            J_inv = np.linalg.inv(J)
            return J_inv.T @ np.asarray(metric.g(old.t, old.x), dtype=np.float64) @ J_inv

        return MassMetric(g, metric.dim)
    if isinstance(obj, FrameField):
        frame = obj

        def H(t: float, x: Array) -> Array:
            old = chg.pull_point(SpacetimePoint(t, x))
            xt, J = chg.jacobian(old)
            return xt + J @ frame.at(old)

        return FrameField(H, frame.dim)
    raise TypeError(f"cannot push forward an object of type {type(obj).__name__}")
