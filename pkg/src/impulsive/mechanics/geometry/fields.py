"""Fields over the space-time: scalar functions, the mass metric, frames of reference and force sections."""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional, Sequence

import numpy as np

from .differences import partial_derivatives
from .vectors import Array, ArrayLike, GeometryError, SpacetimePoint, TimelikeVelocity, as_vector

#: Relative tolerance for the symmetry check of the mass matrix.
SYMMETRY_TOLERANCE = 1e-12


@dataclasses.dataclass(frozen=True)
class ScalarField:
    """A scalar function `f(t, x)`, optionally with an analytic gradient `(∂f/∂t, ∂f/∂x)`."""

    value: Callable[[float, Array], float]
    gradient_fn: Optional[Callable[[float, Array], tuple[float, Array]]] = None

    #: The source text the field was built from, if any. Only used for messages.
    source: Optional[str] = None

    @staticmethod
    def constant(value: float) -> ScalarField:
        return ScalarField(lambda t, x: value, lambda t, x: (0.0, np.zeros(len(x))), repr(value))

    def at(self, pt: SpacetimePoint) -> float:
        result = float(self.value(pt.t, pt.x))
        if not np.isfinite(result):
            raise GeometryError(f"field {self.source or '<anonymous>'} is not finite at {pt}")
        return result

    def gradient(self, pt: SpacetimePoint) -> tuple[float, Array]:
        if self.gradient_fn is not None:
            ft, fx = self.gradient_fn(pt.t, pt.x)
            return float(ft), np.asarray(fx, dtype=np.float64)
        return partial_derivatives(self.value, pt.t, pt.x.copy())


@dataclasses.dataclass(frozen=True)
class MassMetric:
    """The vertical metric Φ. Its component matrix `g_ij(t, x)` is the mass matrix of the system."""

    g: Callable[[float, Array], ArrayLike]
    dim: int

    @staticmethod
    def constant(matrix: Sequence[Sequence[float]] | Array) -> MassMetric:
        g = np.array(matrix, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise GeometryError(f"mass matrix must be square, got shape {g.shape}")
        g.setflags(write=False)
        return MassMetric(lambda t, x: g, g.shape[0])

    @staticmethod
    def diagonal(values: ArrayLike) -> MassMetric:
        return MassMetric.constant(np.diag(as_vector(values, "mass matrix diagonal")))

    def matrix(self, pt: SpacetimePoint) -> Array:
        """Evaluate `g_ij` at *pt*. Raises a :class:`GeometryError` unless the matrix is symmetric positive
        definite there."""

        g = np.array(self.g(pt.t, pt.x), dtype=np.float64)
        if g.shape != (self.dim, self.dim):
            raise GeometryError(f"mass matrix has shape {g.shape} at {pt}, expected {(self.dim, self.dim)}")
        if not np.all(np.isfinite(g)):
            raise GeometryError(f"mass matrix is not finite at {pt}")
        scale = max(1.0, float(np.max(np.abs(g))))
        if not np.allclose(g, g.T, rtol=0.0, atol=SYMMETRY_TOLERANCE * scale):
            raise GeometryError(f"mass matrix is not symmetric at {pt}")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise GeometryError(f"mass matrix is not positive definite at {pt}")
        return g

    def inverse(self, pt: SpacetimePoint) -> Array:
        """The contravariant components `g^ij`, used to raise covectors."""

        return np.linalg.solve(self.matrix(pt), np.eye(self.dim))


@dataclasses.dataclass(frozen=True)
class FrameField:
    """A frame of reference `h = ∂/∂t + Hⁱ(t, x) ∂/∂xⁱ`, stored by its spatial components."""

    H: Callable[[float, Array], ArrayLike]
    dim: int

    @staticmethod
    def static(dim: int) -> FrameField:
        """The frame `∂/∂t` of the chart."""

        zero = np.zeros(dim)
        return FrameField(lambda t, x: zero, dim)

    @staticmethod
    def constant(components: ArrayLike) -> FrameField:
        H = as_vector(components, "frame components")
        return FrameField(lambda t, x: H, len(H))

    def at(self, pt: SpacetimePoint) -> Array:
        H = np.asarray(self.H(pt.t, pt.x), dtype=np.float64)
        if H.shape != (self.dim,) or not np.all(np.isfinite(H)):
            raise GeometryError(f"frame is not a finite {self.dim}-vector at {pt}: {H!r}")
        return H


@dataclasses.dataclass(frozen=True)
class ForceSection:
    """The active forces as a section of the vertical bundle of the velocity space, already identified with
    accelerations: the free motion obeys `ẍⁱ = Zⁱ(t, x, ẋ)`."""

    Z: Callable[[float, Array, Array], ArrayLike]
    dim: int

    @staticmethod
    def zero(dim: int) -> ForceSection:
        zero = np.zeros(dim)
        return ForceSection(lambda t, x, v: zero, dim)

    @staticmethod
    def constant(components: ArrayLike) -> ForceSection:
        Z = as_vector(components, "force components")
        return ForceSection(lambda t, x, v: Z, len(Z))

    @staticmethod
    def from_covector(metric: MassMetric, F: Callable[[float, Array, Array], ArrayLike]) -> ForceSection:
        """Convert covector forces `F_i` into accelerations `Zⁱ = g^ij F_j`."""

        def Z(t: float, x: Array, v: Array) -> Array:
            return np.linalg.solve(metric.matrix(SpacetimePoint(t, x)), np.asarray(F(t, x, v), dtype=np.float64))

        return ForceSection(Z, metric.dim)

    def evaluate(self, t: float, x: Array, v: Array) -> Array:
        Z = np.asarray(self.Z(t, x, v), dtype=np.float64)
        if Z.shape != (self.dim,) or not np.all(np.isfinite(Z)):
            raise GeometryError(f"force section is not a finite {self.dim}-vector at t={t}: {Z!r}")
        return Z

    def at(self, p: TimelikeVelocity) -> Array:
        return self.evaluate(p.base.t, p.base.x, p.p)
