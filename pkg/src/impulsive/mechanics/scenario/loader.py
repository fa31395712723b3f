"""Compile scenario files into mechanical systems the engine can run."""

from __future__ import annotations

import dataclasses
import logging
import re
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
import tomli
import tomli_w

from impulsive.mechanics.constitutive import ConstitutiveLaw, LawError, Parameter, create_law, get_law_type
from impulsive.mechanics.constraints import (
    ConstraintError,
    KineticConstraint,
    KineticKind,
    KineticRow,
    PositionalConstraint,
    Relation,
    normal_basis,
    split_rows,
)
from impulsive.mechanics.engine import MechanicalSystem, ScriptedImpulse, SimulationResult, run
from impulsive.mechanics.geometry import (
    Array,
    ForceSection,
    FrameField,
    GeometryError,
    MassMetric,
    ScalarField,
    SpacetimePoint,
    TimelikeVelocity,
)

from .expression import FUNCTIONS, Expression, ExpressionError, NotDifferentiableError, as_expression
from .schema import KineticSpec, LawSpec, PositionalSpec, ScenarioError, ScenarioFile, Value

logger = logging.getLogger(__name__)

#: The directory of the scenarios shipped with the package.
BUILTIN_DIRECTORY = Path(__file__).parent / "data"

#: Suffixes that may be given with the name of a built-in scenario.
SCENARIO_SUFFIXES = (".toml", ".scn")

#: The frame `∂/∂t` of the chart is always available under this name.
STATIC_FRAME = "static"

#: The names law parameter expressions may refer to.
LAW_QUANTITIES = ("vperp", "vpar", "force")

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


@dataclasses.dataclass(frozen=True)
class Scenario:
    """A validated scenario: the file model together with the compiled system and initial velocity."""

    file: ScenarioFile
    system: MechanicalSystem
    initial: TimelikeVelocity
    parameters: Mapping[str, float]
    path: Optional[Path] = None

    @property
    def name(self) -> str:
        return self.file.name

    def positional(self, name: str) -> PositionalConstraint:
        for S in self.system.positional:
            if S.name == name:
                return S
        raise ScenarioError("constraints.positional", f"no positional constraint named {name!r}")

    def kinetic(self, name: str) -> KineticConstraint:
        for A in self.system.kinetic:
            if A.name == name:
                return A
        raise ScenarioError("constraints.kinetic", f"no kinetic constraint named {name!r}")

    def frame(self, name: str) -> FrameField:
        try:
            return self.system.frames[name]
        except KeyError:
            raise ScenarioError("frames", f"no frame named {name!r}; known frames: {', '.join(self.system.frames)}")

    def run(self) -> SimulationResult:
        return run(self.system, self.initial, self.file.integrator)


class _Compiler:
    """Turns the expressions of a :class:`ScenarioFile` into the callables of the geometry layer."""

    def __init__(self, file: ScenarioFile) -> None:
        self.file = file
        self.coordinates = list(file.coordinates)
        self.dotted = [f"{c}dot" for c in self.coordinates]
        self.parameters: dict[str, float] = {}

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def expression(self, value: Value, location: str) -> Expression:
        try:
            return as_expression(value).substitute(self.parameters)
        except ExpressionError as exc:
            raise ScenarioError(location, str(exc))

    def bind(
        self, expression: Expression, variables: Sequence[str], location: str
    ) -> Callable[[Sequence[float]], float]:
        try:
            return expression.bind(variables)
        except ExpressionError as exc:
            raise ScenarioError(location, str(exc))

    def constant(self, value: Value, location: str) -> float:
        compiled = self.bind(self.expression(value, location), (), location)
        try:
            return compiled(())
        except ExpressionError as exc:
            raise ScenarioError(location, str(exc))

    def spatial(self, expression: Expression, location: str) -> Callable[[float, Array], float]:
        compiled = self.bind(expression, ["t", *self.coordinates], location)
        return lambda t, x: compiled((t, *x))

    def spatial_vector(self, values: Sequence[Value], location: str) -> Callable[[float, Array], Array]:
        if len(values) != self.dim:
            raise ScenarioError(location, f"expected {self.dim} entries, got {len(values)}")
        fns = [self.spatial(self.expression(v, f"{location}[{i}]"), f"{location}[{i}]") for i, v in enumerate(values)]
        return lambda t, x: np.array([f(t, x) for f in fns])

    def field(self, value: Value, location: str) -> ScalarField:
        expression = self.expression(value, location)
        value_fn = self.spatial(expression, location)
        try:
            ft = self.spatial(expression.diff("t"), location)
            fx = [self.spatial(expression.diff(c), location) for c in self.coordinates]
        except NotDifferentiableError as exc:
            logger.debug("%s: using finite differences (%s)", location, exc.message)
            return ScalarField(value_fn, None, expression.source)
        return ScalarField(value_fn, lambda t, x: (ft(t, x), np.array([f(t, x) for f in fx])), expression.source)

    # Sections

    def chart(self) -> None:
        seen: set[str] = set()
        if not self.coordinates:
            raise ScenarioError("chart.coordinates", "expected at least one coordinate")
        for i, name in enumerate(self.coordinates + self.dotted):
            location = f"chart.coordinates[{i % self.dim}]"
            if not _IDENTIFIER.match(name) or name in FUNCTIONS or name in ("t", *LAW_QUANTITIES):
                raise ScenarioError(location, f"{name!r} cannot be used as a coordinate name")
            if name in seen:
                raise ScenarioError(location, f"coordinate name {name!r} is used twice")
            seen.add(name)

    def evaluate_parameters(self) -> None:
        reserved = {"t", *self.coordinates, *self.dotted, *FUNCTIONS, *LAW_QUANTITIES}
        for name, value in self.file.parameters.items():
            location = f"parameters.{name}"
            if not _IDENTIFIER.match(name) or name in reserved:
                raise ScenarioError(location, f"{name!r} cannot be used as a parameter name")
            self.parameters[name] = self.constant(value, location)

    def metric(self) -> MassMetric:
        spec = self.file.metric
        if spec.diagonal is not None:
            if len(spec.diagonal) != self.dim:
                raise ScenarioError("metric.diagonal", f"expected {self.dim} entries, got {len(spec.diagonal)}")
            entries = [self.expression(v, f"metric.diagonal[{i}]") for i, v in enumerate(spec.diagonal)]
            if all(e.is_constant for e in entries):
                return MassMetric.diagonal([self.constant(v, "metric.diagonal") for v in spec.diagonal])
            fns = [self.spatial(e, f"metric.diagonal[{i}]") for i, e in enumerate(entries)]
            return MassMetric(lambda t, x: np.diag([f(t, x) for f in fns]), self.dim)
        assert spec.matrix is not None
        if len(spec.matrix) != self.dim or any(len(row) != self.dim for row in spec.matrix):
            raise ScenarioError("metric.matrix", f"expected a {self.dim}x{self.dim} matrix")
        cells = [[self.matrix_entry(v, i, j) for j, v in enumerate(r)] for i, r in enumerate(spec.matrix)]
        return MassMetric(lambda t, x: np.array([[f(t, x) for f in row] for row in cells]), self.dim)

    def matrix_entry(self, value: Value, i: int, j: int) -> Callable[[float, Array], float]:
        location = f"metric.matrix[{i}][{j}]"
        return self.spatial(self.expression(value, location), location)

    def positional(self, spec: PositionalSpec, location: str) -> PositionalConstraint:
        funcs = tuple(self.field(f, f"{location}.functions[{i}]") for i, f in enumerate(spec.functions))
        anisotropy = None
        if spec.anisotropy is not None:
            anisotropy = self.spatial_vector(spec.anisotropy, f"{location}.anisotropy")
        try:
            return PositionalConstraint(
                name=spec.name,
                funcs=funcs,
                orientations=tuple(o if o != 0 else None for o in spec.orientation),
                unilateral=tuple(spec.unilateral),
                anisotropy=anisotropy,
            )
        except ConstraintError as exc:
            raise ScenarioError(location, str(exc))

    def kinetic_row(self, source: str, relation: str, location: str) -> KineticRow:
        expression = self.expression(source, location)
        self.bind(expression, ["t", *self.coordinates, *self.dotted], location)
        try:
            coefficients = [expression.diff(d) for d in self.dotted]
        except NotDifferentiableError as exc:
            raise ScenarioError(location, f"row is not affine in the velocities: {exc.message}")
        for coefficient in coefficients:
            if coefficient.variables & set(self.dotted):
                raise ScenarioError(location, "row is not affine in the velocities")
        offset = self.spatial(expression.substitute({d: 0.0 for d in self.dotted}), location)
        a_fns = [self.spatial(c, location) for c in coefficients]
        return KineticRow(
            lambda t, x: np.array([f(t, x) for f in a_fns]),
            offset,
            Relation.EQ if relation == "eq" else Relation.GE,
            f"{location}: {source}",
        )

    def kinetic(self, spec: KineticSpec, location: str) -> KineticConstraint:
        rows = tuple(
            self.kinetic_row(row, relation, f"{location}.rows[{i}]")
            for i, (row, relation) in enumerate(zip(spec.rows, spec.relations))
        )
        try:
            return KineticConstraint(
                name=spec.name,
                rows=rows,
                kind=KineticKind(spec.kind),
                owner=spec.owner,
                frame=spec.frame,
            )
        except ConstraintError as exc:
            raise ScenarioError(location, str(exc))

    def law(self, spec: LawSpec, location: str) -> ConstitutiveLaw:
        try:
            law_type = get_law_type(spec.tag)
        except LawError as exc:
            raise ScenarioError(f"{location}.tag", str(exc))
        params: dict[str, Union[Parameter, str]] = {}
        for key, value in spec.params.items():
            if key in law_type.text_parameters or not isinstance(value, str):
                params[key] = value if isinstance(value, str) else Parameter.of(value)
                continue
            compiled = self.bind(self.expression(value, f"{location}.{key}"), LAW_QUANTITIES, f"{location}.{key}")
            params[key] = Parameter(
                lambda q, compiled=compiled: compiled([q["vperp"], q["vpar"], q["force"]]),  # type: ignore[misc]
                value,
            )
        try:
            return create_law(spec.tag, params)
        except LawError as exc:
            raise ScenarioError(location, str(exc))

    def forces(self, metric: MassMetric) -> ForceSection:
        spec = self.file.forces
        values = spec.Z if spec.Z is not None else spec.covector
        if values is None:
            return ForceSection.zero(self.dim)
        location = "forces.Z" if spec.Z is not None else "forces.covector"
        if len(values) != self.dim:
            raise ScenarioError(location, f"expected {self.dim} entries, got {len(values)}")
        variables = ["t", *self.coordinates, *self.dotted]
        fns: list[Callable[[Sequence[float]], float]] = []
        for i, v in enumerate(values):
            entry = f"{location}[{i}]"
            fns.append(self.bind(self.expression(v, entry), variables, entry))

        def evaluate(t: float, x: Array, v: Array) -> Array:
            state = (t, *x, *v)
            return np.array([f(state) for f in fns])

        if spec.Z is not None:
            return ForceSection(evaluate, self.dim)
        return ForceSection.from_covector(metric, evaluate)

    def vector(self, values: Sequence[Value], location: str) -> list[float]:
        if len(values) != self.dim:
            raise ScenarioError(location, f"expected {self.dim} entries, got {len(values)}")
        return [self.constant(v, f"{location}[{i}]") for i, v in enumerate(values)]


def _check_names(file: ScenarioFile) -> None:
    names: set[str] = set()
    for section, specs in (("positional", file.positional), ("kinetic", file.kinetic)):
        for i, spec in enumerate(specs):
            location = f"constraints.{section}[{i}].name"
            if not _IDENTIFIER.match(spec.name) or spec.name == "multiple":
                raise ScenarioError(location, f"{spec.name!r} cannot be used as a constraint name")
            if spec.name in names:
                raise ScenarioError(location, f"constraint name {spec.name!r} is used twice")
            names.add(spec.name)
    for key in file.laws:
        if key != "multiple" and key not in names:
            raise ScenarioError(f"laws.{key}", f"there is no constraint named {key!r}")
    for i, spec in enumerate(file.kinetic):
        if spec.owner is not None and spec.owner not in {p.name for p in file.positional}:
            raise ScenarioError(f"constraints.kinetic[{i}].owner", f"there is no positional constraint {spec.owner!r}")
    for i, spec in enumerate(file.positional):
        if any(spec.unilateral) and spec.name not in file.laws:
            raise ScenarioError(f"constraints.positional[{i}]", f"no law is configured for {spec.name!r}")


def _check_frame_references(file: ScenarioFile) -> None:
    frames = {STATIC_FRAME, *file.frames}
    references = [(f"diagnostics.frames[{i}]", name) for i, name in enumerate(file.diagnostics)]
    for i, spec in enumerate(file.positional):
        if spec.rest_frame:
            references.append((f"constraints.positional[{i}].rest_frame", spec.rest_frame))
    for i, kspec in enumerate(file.kinetic):
        if kspec.frame:
            references.append((f"constraints.kinetic[{i}].frame", kspec.frame))
    for location, name in references:
        if name not in frames:
            raise ScenarioError(location, f"there is no frame named {name!r}")


def _check_initial_point(system: MechanicalSystem, initial: TimelikeVelocity, file: ScenarioFile) -> None:
    """The metric must be positive definite, the constraints regular and the unilateral constraints satisfied at
    the initial point."""

    pt = initial.base
    try:
        system.metric.matrix(pt)
    except GeometryError as exc:
        raise ScenarioError("metric", str(exc))
    for i, S in enumerate(system.positional):
        location = f"constraints.positional[{i}]"
        try:
            normal_basis(pt, S, system.metric)
        except (ConstraintError, GeometryError) as exc:
            raise ScenarioError(location, f"not regular at the initial point: {exc}")
        gaps = S.gaps(pt)
        unilateral = np.array(S.unilateral, dtype=bool)
        if np.any(gaps[unilateral] < -file.integrator.penetration_tol):
            raise ScenarioError(location, f"the initial point violates {S.name!r} (gaps {gaps.tolist()})")
    for i, A in enumerate(system.kinetic):
        if not any(r.relation is Relation.EQ for r in A.rows):
            continue
        rows, offsets = A.equalities().covectors(pt)
        try:
            split_rows(initial, rows, offsets, system.metric, f"kinetic constraint {A.name!r}")
        except ConstraintError as exc:
            raise ScenarioError(f"constraints.kinetic[{i}]", f"not regular at the initial point: {exc}")


def compile_scenario(file: ScenarioFile, path: Optional[Path] = None) -> Scenario:
    """Validate *file* and compile it into a :class:`Scenario`.

    :raise ScenarioError: With the location of the first problem found.
    """

    compiler = _Compiler(file)
    compiler.chart()
    compiler.evaluate_parameters()
    _check_names(file)
    _check_frame_references(file)

    metric = compiler.metric()
    positional = tuple(
        compiler.positional(spec, f"constraints.positional[{i}]") for i, spec in enumerate(file.positional)
    )
    kinetic = tuple(compiler.kinetic(spec, f"constraints.kinetic[{i}]") for i, spec in enumerate(file.kinetic))
    laws = {key: compiler.law(spec, f"laws.{key}") for key, spec in file.laws.items() if key != "multiple"}
    multiple = compiler.law(file.laws["multiple"], "laws.multiple") if "multiple" in file.laws else None

    frames = {STATIC_FRAME: FrameField.static(compiler.dim)}
    for name, frame in file.frames.items():
        frames[name] = FrameField(compiler.spatial_vector(frame.H, f"frames.{name}.H"), compiler.dim)

    impulses = tuple(
        ScriptedImpulse(
            time=spec.time,
            vector=np.array(compiler.vector(spec.vector, f"impulses[{i}].vector")),
            law=compiler.law(spec.law, f"impulses[{i}].law") if spec.law is not None else None,
        )
        for i, spec in enumerate(file.impulses)
    )

    if file.initial is None:
        raise ScenarioError("initial", "the initial state is missing")
    initial = TimelikeVelocity(
        SpacetimePoint(file.initial.t, compiler.vector(file.initial.x, "initial.x")),
        compiler.vector(file.initial.xdot, "initial.xdot"),
    )

    system = MechanicalSystem(
        coordinates=tuple(file.coordinates),
        metric=metric,
        forces=compiler.forces(metric),
        positional=positional,
        kinetic=kinetic,
        laws=laws,
        multiple_law=multiple,
        frames=frames,
        diagnostic_frames=tuple(file.diagnostics),
        rest_frames={spec.name: spec.rest_frame for spec in file.positional if spec.rest_frame},
        impulses=impulses,
    )
    _check_initial_point(system, initial, file)
    return Scenario(file, system, initial, dict(compiler.parameters), path)


def builtin_scenarios() -> list[str]:
    return sorted(p.stem for p in BUILTIN_DIRECTORY.glob("*.toml"))


def resolve_scenario_path(ref: Union[str, Path]) -> Path:
    """Return *ref* if it is an existing file, or the path of the built-in scenario it names (with or without a
    `.toml` or `.scn` suffix)."""

    path = Path(ref)
    if path.is_file():
        return path
    stem = path.stem if path.suffix in SCENARIO_SUFFIXES else path.name
    candidate = BUILTIN_DIRECTORY / f"{stem}.toml"
    if path.parent == Path(".") and candidate.is_file():
        return candidate
    known = ", ".join(builtin_scenarios())
    raise ScenarioError("", f"{ref}: no such file and no built-in scenario (built-ins: {known})")


def loads_scenario(text: str, path: Optional[Path] = None) -> Scenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError("", f"{path or '<string>'}: {exc}")
    return compile_scenario(ScenarioFile.from_json(data), path)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load, validate and compile a scenario file or built-in scenario.

    :raise ScenarioError: If the file cannot be found, is not valid TOML or does not validate.
    """

    resolved = resolve_scenario_path(path)
    logger.debug("loading scenario %s", resolved)
    return loads_scenario(resolved.read_text(encoding="utf-8"), resolved)


def dump_scenario(file: ScenarioFile) -> str:
    """The canonical TOML text of *file*."""

    return tomli_w.dumps(file.to_json())
