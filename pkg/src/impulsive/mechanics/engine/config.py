from __future__ import annotations

import dataclasses


@dataclasses.dataclass
class IntegratorConfig:
    """Options of the event-driven integrator. This is the `[integrator]` table of a scenario file."""

    #: The fixed RK4 step size.
    step: float = 1e-3

    #: The time at which the run stops.
    t_end: float = 1.0

    #: The width of the bracket at which impact bisection stops.
    t_tol: float = 1e-10

    #: A run with more events than this is aborted.
    max_events: int = 1000

    #: Velocity post-stabilization drift (Φ-norm) above which a warning is logged.
    drift_tol: float = 1e-9

    #: How far a unilateral constraint function may fall below zero on an accepted state.
    penetration_tol: float = 1e-8

    #: The band of the left/tangent/right classification margins.
    tol: float = 1e-9

    #: A trajectory sample is recorded every `sample_every` accepted steps (and at every event).
    sample_every: int = 1

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"integrator option {field.name!r} must be positive, got {value!r}")
