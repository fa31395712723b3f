"""The event-driven impact engine."""

from .config import IntegratorConfig
from .detection import ImpactLocation, locate_impact, unilateral_gaps
from .events import FrameEnergy, ImpactEvent, frame_energies, handle_event
from .integrator import SimState, SimulationError, smooth_step, stabilize
from .simulation import MechanicalSystem, ScriptedImpulse, Simulation, SimulationResult, joint_kinetic, run

__all__ = [
    "FrameEnergy",
    "ImpactEvent",
    "ImpactLocation",
    "IntegratorConfig",
    "MechanicalSystem",
    "ScriptedImpulse",
    "SimState",
    "Simulation",
    "SimulationError",
    "SimulationResult",
    "frame_energies",
    "handle_event",
    "joint_kinetic",
    "locate_impact",
    "run",
    "smooth_step",
    "stabilize",
    "unilateral_gaps",
]
