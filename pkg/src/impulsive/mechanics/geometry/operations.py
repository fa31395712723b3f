from __future__ import annotations

import math

from .fields import FrameField, MassMetric
from .vectors import GeometryError, SpacelikeVector, TimelikeVelocity, check_same_base


def metric_inner(V1: SpacelikeVector, V2: SpacelikeVector, metric: MassMetric) -> float:
    """Evaluate `Φ(V1, V2) = g_ij V1ⁱ V2ʲ` at the common base point."""

    check_same_base(V1.base, V2.base)
    result = float(V1.V @ metric.matrix(V1.base) @ V2.V)
    if not math.isfinite(result):
        raise GeometryError(f"metric product is not finite at {V1.base}")
    return result


def metric_norm(V: SpacelikeVector, metric: MassMetric) -> float:
    return math.sqrt(max(metric_inner(V, V, metric), 0.0))


def relativize(p: TimelikeVelocity, h: FrameField) -> SpacelikeVector:
    """The relative velocity `Δ_h(p) = p − h(π(p))` of *p* with respect to the frame *h*."""

    return SpacelikeVector(p.base, p.p - h.at(p.base))


def kinetic_energy(p: TimelikeVelocity, h: FrameField, metric: MassMetric) -> float:
    """The kinetic energy `½ Φ(Δ_h p, Δ_h p)` of *p* relative to *h*."""

    V = relativize(p, h)
    return 0.5 * metric_inner(V, V, metric)


def shift(p: TimelikeVelocity, V: SpacelikeVector) -> TimelikeVelocity:
    """The affine action of a space-like vector on a time-like one, `p + V`."""

    check_same_base(p.base, V.base)
    return TimelikeVelocity(p.base, p.p + V.V)
