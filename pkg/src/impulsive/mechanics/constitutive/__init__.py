"""Constitutive characterizations: maps from left velocities to reactive impulses at an impact."""

from .active import (
    CoulombWithActive,
    FreeImpulse,
    KineticIdeal,
    coulomb_with_active,
    free_impulse,
    kinetic_ideal_with_active,
)
from .base import (
    CONTACT_TOLERANCE,
    ConstitutiveLaw,
    ImpactContext,
    ImpactResolution,
    LawContractError,
    LawError,
    Parameter,
    check_resolution,
    require_entering,
    resolve,
)
from .breakable import (
    BreakableLowspeed,
    BreakableSaturating,
    DiskWallBreakable,
    breakable_lowspeed,
    breakable_saturating,
    disk_wall_breakable,
    lowspeed_factor,
    saturating_factor,
)
from .clamp import InelasticClamp, inelastic_clamp_kinetic
from .friction import RestFrameFriction, rest_frame_friction
from .reflection import (
    IdealReflection,
    NewtonRestitution,
    TotallyInelastic,
    energy_restitution_table,
    ideal_reflection,
    newton_restitution,
    target_splitting,
    totally_inelastic,
)
from .registry import LAWS, create_law, get_law_type, law_parameters

__all__ = [
    "CONTACT_TOLERANCE",
    "LAWS",
    "BreakableLowspeed",
    "BreakableSaturating",
    "ConstitutiveLaw",
    "CoulombWithActive",
    "DiskWallBreakable",
    "FreeImpulse",
    "IdealReflection",
    "ImpactContext",
    "ImpactResolution",
    "InelasticClamp",
    "KineticIdeal",
    "LawContractError",
    "LawError",
    "NewtonRestitution",
    "Parameter",
    "RestFrameFriction",
    "TotallyInelastic",
    "breakable_lowspeed",
    "breakable_saturating",
    "check_resolution",
    "coulomb_with_active",
    "create_law",
    "disk_wall_breakable",
    "energy_restitution_table",
    "free_impulse",
    "get_law_type",
    "ideal_reflection",
    "inelastic_clamp_kinetic",
    "kinetic_ideal_with_active",
    "law_parameters",
    "lowspeed_factor",
    "newton_restitution",
    "require_entering",
    "resolve",
    "rest_frame_friction",
    "saturating_factor",
    "target_splitting",
    "totally_inelastic",
]
