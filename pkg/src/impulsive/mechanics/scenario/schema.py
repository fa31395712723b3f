"""The scenario file model.

Each TOML section maps onto a dataclass with a `from_json` constructor that validates the shape of the data and
a `to_json` method that emits the canonical form: every default filled in, per-row options expanded to lists and
numbers normalized to floats. Semantic checks (expressions, cross references, the metric at the initial point)
happen when the scenario is compiled, see :mod:`impulsive.mechanics.scenario.loader`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import databind.json
from databind.core import ConversionError

from impulsive.mechanics.engine import IntegratorConfig

#: A number or the source text of an expression.
Value = Union[str, float]


class ScenarioError(ValueError):
    """A scenario that does not validate. The message starts with the location of the offending entry, such as
    `constraints.positional[0].functions[1]`."""

    def __init__(self, location: str, message: str) -> None:
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}" if location else message)


def _table(data: Any, location: str) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise ScenarioError(location, f"expected a table, got {type(data).__name__}")
    return dict(data)


def _list(data: Any, location: str) -> list[Any]:
    if not isinstance(data, list):
        raise ScenarioError(location, f"expected an array, got {type(data).__name__}")
    return list(data)


def _str(data: Any, location: str) -> str:
    if not isinstance(data, str):
        raise ScenarioError(location, f"expected a string, got {type(data).__name__}")
    return data


def _float(data: Any, location: str) -> float:
    if isinstance(data, bool) or not isinstance(data, (int, float)):
        raise ScenarioError(location, f"expected a number, got {type(data).__name__}")
    return float(data)


def _value(data: Any, location: str) -> Value:
    if isinstance(data, str):
        return data
    return _float(data, location)


def _values(data: Any, location: str) -> list[Value]:
    return [_value(item, f"{location}[{i}]") for i, item in enumerate(_list(data, location))]


def _no_extra_keys(cloned: dict[str, Any], location: str) -> None:
    if cloned:
        raise ScenarioError(location, f"unknown key(s) {', '.join(sorted(cloned))}")


def _per_row(data: Any, count: int, location: str, kind: type, default: Any) -> list[Any]:
    """Options such as `unilateral` may be given once for all rows or as a list with one entry per row."""

    if data is None:
        return [default] * count
    if not isinstance(data, list):
        data = [data] * count
    if len(data) != count:
        raise ScenarioError(location, f"expected {count} entries, got {len(data)}")
    for i, item in enumerate(data):
        if isinstance(item, bool) != (kind is bool) or not isinstance(item, kind):
            raise ScenarioError(f"{location}[{i}]", f"expected a {kind.__name__}, got {type(item).__name__}")
    return list(data)


def _prune(values: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in values.items() if v is not None}


@dataclass
class MetricSpec:
    diagonal: Optional[List[Value]] = None
    matrix: Optional[List[List[Value]]] = None

    @classmethod
    def from_json(cls, json: Any, location: str = "metric") -> MetricSpec:
        cloned = _table(json, location)
        diagonal = cloned.pop("diagonal", None)
        matrix = cloned.pop("matrix", None)
        _no_extra_keys(cloned, location)
        if (diagonal is None) == (matrix is None):
            raise ScenarioError(location, "expected exactly one of 'diagonal' or 'matrix'")
        if diagonal is not None:
            return MetricSpec(diagonal=_values(diagonal, f"{location}.diagonal"))
        rows = _list(matrix, f"{location}.matrix")
        return MetricSpec(matrix=[_values(row, f"{location}.matrix[{i}]") for i, row in enumerate(rows)])

    def to_json(self) -> dict[str, Any]:
        return _prune({"diagonal": self.diagonal, "matrix": self.matrix})


@dataclass
class PositionalSpec:
    name: str
    functions: List[Value]
    unilateral: List[bool]

    #: `+1` or `-1` per row; `orientation · f ≥ 0` is the admissible side. Bilateral rows have `0`.
    orientation: List[int]
    anisotropy: Optional[List[Value]] = None
    rest_frame: Optional[str] = None

    @classmethod
    def from_json(cls, json: Any, location: str) -> PositionalSpec:
        cloned = _table(json, location)
        name = _str(cloned.pop("name", None), f"{location}.name")
        functions = _values(cloned.pop("functions", None), f"{location}.functions")
        if not functions:
            raise ScenarioError(f"{location}.functions", "expected at least one function")
        unilateral = _per_row(cloned.pop("unilateral", None), len(functions), f"{location}.unilateral", bool, True)
        orientation = _per_row(cloned.pop("orientation", None), len(functions), f"{location}.orientation", int, 1)
        for i, (sign, one_sided) in enumerate(zip(orientation, unilateral)):
            if one_sided and sign not in (1, -1):
                raise ScenarioError(f"{location}.orientation[{i}]", f"expected +1 or -1, got {sign}")
        orientation = [sign if one_sided else 0 for sign, one_sided in zip(orientation, unilateral)]
        anisotropy = cloned.pop("anisotropy", None)
        rest_frame = cloned.pop("rest_frame", None)
        _no_extra_keys(cloned, location)
        return PositionalSpec(
            name,
            functions,
            unilateral,
            orientation,
            _values(anisotropy, f"{location}.anisotropy") if anisotropy is not None else None,
            _str(rest_frame, f"{location}.rest_frame") if rest_frame is not None else None,
        )

    def to_json(self) -> dict[str, Any]:
        return _prune(
            {
                "name": self.name,
                "functions": self.functions,
                "unilateral": self.unilateral,
                "orientation": self.orientation,
                "anisotropy": self.anisotropy,
                "rest_frame": self.rest_frame,
            }
        )


@dataclass
class KineticSpec:
    name: str
    rows: List[str]

    #: `"eq"` or `">="` per row.
    relations: List[str]
    kind: str = "permanent"
    owner: Optional[str] = None
    frame: Optional[str] = None

    @classmethod
    def from_json(cls, json: Any, location: str) -> KineticSpec:
        cloned = _table(json, location)
        name = _str(cloned.pop("name", None), f"{location}.name")
        rows = [_str(row, f"{location}.rows[{i}]") for i, row in enumerate(_list(cloned.pop("rows", None), location))]
        if not rows:
            raise ScenarioError(f"{location}.rows", "expected at least one row")
        relations = _per_row(cloned.pop("relations", None), len(rows), f"{location}.relations", str, "eq")
        for i, relation in enumerate(relations):
            if relation not in ("eq", ">="):
                raise ScenarioError(f"{location}.relations[{i}]", f"expected 'eq' or '>=', got {relation!r}")
        kind = _str(cloned.pop("kind", "permanent"), f"{location}.kind")
        if kind not in ("permanent", "instantaneous"):
            raise ScenarioError(f"{location}.kind", f"expected 'permanent' or 'instantaneous', got {kind!r}")
        owner = cloned.pop("owner", None)
        frame = cloned.pop("frame", None)
        _no_extra_keys(cloned, location)
        if kind == "instantaneous" and owner is None:
            raise ScenarioError(f"{location}.owner", "an instantaneous kinetic constraint needs an owner")
        return KineticSpec(
            name,
            rows,
            relations,
            kind,
            _str(owner, f"{location}.owner") if owner is not None else None,
            _str(frame, f"{location}.frame") if frame is not None else None,
        )

    def to_json(self) -> dict[str, Any]:
        return _prune(dataclasses.asdict(self))


@dataclass
class LawSpec:
    tag: str
    params: Dict[str, Value] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_json(cls, json: Any, location: str) -> LawSpec:
        if isinstance(json, str):
            return LawSpec(json)
        cloned = _table(json, location)
        tag = _str(cloned.pop("tag", None), f"{location}.tag")
        return LawSpec(tag, {key: _value(value, f"{location}.{key}") for key, value in cloned.items()})

    def to_json(self) -> dict[str, Any]:
        return {"tag": self.tag, **self.params}


@dataclass
class FrameSpec:
    H: List[Value]

    @classmethod
    def from_json(cls, json: Any, location: str) -> FrameSpec:
        cloned = _table(json, location)
        H = _values(cloned.pop("H", None), f"{location}.H")
        _no_extra_keys(cloned, location)
        return FrameSpec(H)

    def to_json(self) -> dict[str, Any]:
        return {"H": self.H}


@dataclass
class ForcesSpec:
    #: Accelerations `Zⁱ(t, x, ẋ)`.
    Z: Optional[List[Value]] = None

    #: Covector forces `F_i(t, x, ẋ)`, converted to accelerations with the inverse mass matrix.
    covector: Optional[List[Value]] = None

    @classmethod
    def from_json(cls, json: Any, location: str = "forces") -> ForcesSpec:
        cloned = _table(json, location)
        Z = cloned.pop("Z", None)
        covector = cloned.pop("covector", None)
        _no_extra_keys(cloned, location)
        if Z is not None and covector is not None:
            raise ScenarioError(location, "expected at most one of 'Z' or 'covector'")
        return ForcesSpec(
            _values(Z, f"{location}.Z") if Z is not None else None,
            _values(covector, f"{location}.covector") if covector is not None else None,
        )

    def to_json(self) -> dict[str, Any]:
        return _prune({"Z": self.Z, "covector": self.covector})


@dataclass
class InitialSpec:
    t: float
    x: List[Value]
    xdot: List[Value]

    @classmethod
    def from_json(cls, json: Any, location: str = "initial") -> InitialSpec:
        cloned = _table(json, location)
        t = _float(cloned.pop("t", 0.0), f"{location}.t")
        x = _values(cloned.pop("x", None), f"{location}.x")
        xdot = _values(cloned.pop("xdot", None), f"{location}.xdot")
        _no_extra_keys(cloned, location)
        return InitialSpec(t, x, xdot)

    def to_json(self) -> dict[str, Any]:
        return {"t": self.t, "x": self.x, "xdot": self.xdot}


@dataclass
class ImpulseSpec:
    time: float
    vector: List[Value]
    law: Optional[LawSpec] = None

    @classmethod
    def from_json(cls, json: Any, location: str) -> ImpulseSpec:
        cloned = _table(json, location)
        time = _float(cloned.pop("time", None), f"{location}.time")
        vector = _values(cloned.pop("vector", None), f"{location}.vector")
        law = cloned.pop("law", None)
        _no_extra_keys(cloned, location)
        return ImpulseSpec(time, vector, LawSpec.from_json(law, f"{location}.law") if law is not None else None)

    def to_json(self) -> dict[str, Any]:
        return _prune({"time": self.time, "vector": self.vector, "law": self.law.to_json() if self.law else None})


@dataclass
class OutputConfig:
    """Where `run` writes its logs. This is the `[output]` table of a scenario file."""

    #: The output directory. Relative paths are resolved against the directory given on the command line.
    directory: Optional[str] = None
    events: str = "events.jsonl"
    trajectory: str = "trajectory.csv"


def _load_options(json: Any, datatype: type, location: str) -> Any:
    """Deserialize a flat option table with databind."""

    cloned = _table(json, location)
    for field in dataclasses.fields(datatype):
        value = cloned.get(field.name)
        if field.type == "float" and isinstance(value, int) and not isinstance(value, bool):
            cloned[field.name] = float(value)
    try:
        return databind.json.load(cloned, datatype)
    except ConversionError as exc:
        raise ScenarioError(location, str(exc))
    except ValueError as exc:
        raise ScenarioError(location, str(exc))


@dataclass
class ScenarioFile:
    name: str
    coordinates: List[str]
    description: Optional[str] = None

    #: Named constants in declaration order; later entries may refer to earlier ones.
    parameters: Dict[str, Value] = dataclasses.field(default_factory=dict)
    metric: MetricSpec = dataclasses.field(default_factory=MetricSpec)
    positional: List[PositionalSpec] = dataclasses.field(default_factory=list)
    kinetic: List[KineticSpec] = dataclasses.field(default_factory=list)

    #: Laws by constraint name. The key `multiple` holds the law for impacts with several constraints at once.
    laws: Dict[str, LawSpec] = dataclasses.field(default_factory=dict)
    frames: Dict[str, FrameSpec] = dataclasses.field(default_factory=dict)
    forces: ForcesSpec = dataclasses.field(default_factory=ForcesSpec)
    initial: Optional[InitialSpec] = None
    integrator: IntegratorConfig = dataclasses.field(default_factory=IntegratorConfig)
    output: OutputConfig = dataclasses.field(default_factory=OutputConfig)

    #: Frames the energy diagnostics of every event are computed in.
    diagnostics: List[str] = dataclasses.field(default_factory=list)
    impulses: List[ImpulseSpec] = dataclasses.field(default_factory=list)

    @classmethod
    def from_json(cls, json: Any) -> ScenarioFile:
        cloned = _table(json, "")

        scenario = _table(cloned.pop("scenario", {}), "scenario")
        name = _str(scenario.pop("name", None), "scenario.name")
        description = scenario.pop("description", None)
        _no_extra_keys(scenario, "scenario")

        chart = _table(cloned.pop("chart", None), "chart")
        coordinates = [
            _str(c, f"chart.coordinates[{i}]") for i, c in enumerate(_list(chart.pop("coordinates", None), "chart"))
        ]
        _no_extra_keys(chart, "chart")

        parameters_table = _table(cloned.pop("parameters", {}), "parameters")
        parameters = {key: _value(value, f"parameters.{key}") for key, value in parameters_table.items()}
        metric = MetricSpec.from_json(cloned.pop("metric", None))

        constraints = _table(cloned.pop("constraints", {}), "constraints")
        positional = [
            PositionalSpec.from_json(item, f"constraints.positional[{i}]")
            for i, item in enumerate(_list(constraints.pop("positional", []), "constraints.positional"))
        ]
        kinetic = [
            KineticSpec.from_json(item, f"constraints.kinetic[{i}]")
            for i, item in enumerate(_list(constraints.pop("kinetic", []), "constraints.kinetic"))
        ]
        _no_extra_keys(constraints, "constraints")

        laws_table = _table(cloned.pop("laws", {}), "laws")
        laws = {key: LawSpec.from_json(value, f"laws.{key}") for key, value in laws_table.items()}
        frames_table = _table(cloned.pop("frames", {}), "frames")
        frames = {key: FrameSpec.from_json(value, f"frames.{key}") for key, value in frames_table.items()}
        forces = ForcesSpec.from_json(cloned.pop("forces", {}))
        initial = cloned.pop("initial", None)
        integrator = _load_options(cloned.pop("integrator", {}), IntegratorConfig, "integrator")
        output = _load_options(cloned.pop("output", {}), OutputConfig, "output")

        diagnostics_table = _table(cloned.pop("diagnostics", {}), "diagnostics")
        diagnostics = [
            _str(f, f"diagnostics.frames[{i}]")
            for i, f in enumerate(_list(diagnostics_table.pop("frames", []), "diagnostics.frames"))
        ]
        _no_extra_keys(diagnostics_table, "diagnostics")
        impulses = [
            ImpulseSpec.from_json(item, f"impulses[{i}]")
            for i, item in enumerate(_list(cloned.pop("impulses", []), "impulses"))
        ]
        _no_extra_keys(cloned, "")

        return ScenarioFile(
            name=name,
            coordinates=coordinates,
            description=_str(description, "scenario.description") if description is not None else None,
            parameters=parameters,
            metric=metric,
            positional=positional,
            kinetic=kinetic,
            laws=laws,
            frames=frames,
            forces=forces,
            initial=InitialSpec.from_json(initial) if initial is not None else None,
            integrator=integrator,
            output=output,
            diagnostics=diagnostics,
            impulses=impulses,
        )

    def to_json(self) -> dict[str, Any]:
        """The canonical form of the scenario. Loading it again yields an equal :class:`ScenarioFile`."""

        values: dict[str, Any] = {
            "scenario": _prune({"name": self.name, "description": self.description}),
            "chart": {"coordinates": self.coordinates},
            "parameters": self.parameters or None,
            "metric": self.metric.to_json(),
            "constraints": _prune(
                {
                    "positional": [c.to_json() for c in self.positional] or None,
                    "kinetic": [c.to_json() for c in self.kinetic] or None,
                }
            )
            or None,
            "laws": {key: law.to_json() for key, law in self.laws.items()} or None,
            "frames": {key: frame.to_json() for key, frame in self.frames.items()} or None,
            "forces": self.forces.to_json() or None,
            "initial": self.initial.to_json() if self.initial else None,
            "integrator": databind.json.dump(self.integrator, IntegratorConfig),
            "output": _prune(databind.json.dump(self.output, OutputConfig)),
            "diagnostics": {"frames": self.diagnostics} if self.diagnostics else None,
            "impulses": [impulse.to_json() for impulse in self.impulses] or None,
        }
        return _prune(values)
