"""The configuration space-time in a single chart: points, velocities, the mass metric and frames."""

from .coordinates import CoordinateChange, push_forward
from .fields import ForceSection, FrameField, MassMetric, ScalarField
from .operations import kinetic_energy, metric_inner, metric_norm, relativize, shift
from .vectors import Array, ArrayLike, GeometryError, SpacelikeVector, SpacetimePoint, TimelikeVelocity, as_vector

__all__ = [
    "Array",
    "ArrayLike",
    "as_vector",
    "CoordinateChange",
    "ForceSection",
    "FrameField",
    "GeometryError",
    "kinetic_energy",
    "MassMetric",
    "metric_inner",
    "metric_norm",
    "push_forward",
    "relativize",
    "ScalarField",
    "shift",
    "SpacelikeVector",
    "SpacetimePoint",
    "TimelikeVelocity",
]
