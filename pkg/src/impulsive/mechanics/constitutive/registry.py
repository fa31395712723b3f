"""The table of constitutive laws available to scenario files, keyed by tag."""

from __future__ import annotations

import dataclasses
from typing import Mapping, Type, Union

from .active import CoulombWithActive, FreeImpulse, KineticIdeal
from .base import ConstitutiveLaw, LawError, Parameter
from .breakable import BreakableLowspeed, BreakableSaturating, DiskWallBreakable
from .clamp import InelasticClamp
from .friction import RestFrameFriction
from .reflection import IdealReflection, NewtonRestitution, TotallyInelastic

LAWS: dict[str, Type[ConstitutiveLaw]] = {
    law.tag: law
    for law in (
        IdealReflection,
        NewtonRestitution,
        TotallyInelastic,
        RestFrameFriction,
        KineticIdeal,
        CoulombWithActive,
        FreeImpulse,
        BreakableSaturating,
        BreakableLowspeed,
        DiskWallBreakable,
        InelasticClamp,
    )
}

ParameterValue = Union[Parameter, float, str]


def law_parameters(tag: str) -> tuple[str, ...]:
    return tuple(field.name for field in dataclasses.fields(get_law_type(tag)))  # type: ignore[arg-type]


def get_law_type(tag: str) -> Type[ConstitutiveLaw]:
    try:
        return LAWS[tag]
    except KeyError:
        raise LawError(f"unknown law {tag!r}, expected one of {', '.join(sorted(LAWS))}")


def create_law(tag: str, params: Mapping[str, ParameterValue]) -> ConstitutiveLaw:
    """Instantiate the law registered under *tag*. Scalar parameters may be given as numbers or :class:`Parameter`
    objects; text parameters (such as a reflection `target`) must be strings.

    :raise LawError: If the tag is unknown, a parameter is unknown or missing, or has the wrong kind.
    """

    law_type = get_law_type(tag)
    accepted = law_parameters(tag)
    unknown = sorted(set(params) - set(accepted))
    if unknown:
        raise LawError(f"law {tag!r} has no parameter(s) {', '.join(unknown)}; accepted: {', '.join(accepted) or '-'}")
    kwargs: dict[str, object] = {}
    for key, value in params.items():
        if key in law_type.text_parameters:
            if not isinstance(value, str):
                raise LawError(f"parameter {key!r} of law {tag!r} must be a string")
            kwargs[key] = value
        elif isinstance(value, str):
            raise LawError(f"parameter {key!r} of law {tag!r} must be a number or an expression")
        else:
            kwargs[key] = Parameter.of(value)
    try:
        return law_type(**kwargs)
    except TypeError as exc:
        raise LawError(f"law {tag!r}: {exc}")
