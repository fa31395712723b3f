"""Scenario files: the expression language, the TOML schema, compilation into mechanical systems and the
writers of run logs."""

from .expression import (
    FUNCTIONS,
    Expression,
    ExpressionError,
    NotDifferentiableError,
    as_expression,
    parse_expression,
)
from .loader import (
    BUILTIN_DIRECTORY,
    STATIC_FRAME,
    Scenario,
    builtin_scenarios,
    compile_scenario,
    dump_scenario,
    load_scenario,
    loads_scenario,
    resolve_scenario_path,
)
from .schema import (
    FrameSpec,
    ForcesSpec,
    ImpulseSpec,
    InitialSpec,
    KineticSpec,
    LawSpec,
    MetricSpec,
    OutputConfig,
    PositionalSpec,
    ScenarioError,
    ScenarioFile,
)
from .writers import (
    EVENT_FIELDS,
    event_record,
    read_event_log,
    trajectory_header,
    trajectory_table,
    write_event_log,
    write_logs,
    write_trajectory,
)

__all__ = [
    "FUNCTIONS",
    "Expression",
    "ExpressionError",
    "NotDifferentiableError",
    "as_expression",
    "parse_expression",
    "BUILTIN_DIRECTORY",
    "STATIC_FRAME",
    "Scenario",
    "builtin_scenarios",
    "compile_scenario",
    "dump_scenario",
    "load_scenario",
    "loads_scenario",
    "resolve_scenario_path",
    "FrameSpec",
    "ForcesSpec",
    "ImpulseSpec",
    "InitialSpec",
    "KineticSpec",
    "LawSpec",
    "MetricSpec",
    "OutputConfig",
    "PositionalSpec",
    "ScenarioError",
    "ScenarioFile",
    "EVENT_FIELDS",
    "event_record",
    "read_event_log",
    "trajectory_header",
    "trajectory_table",
    "write_event_log",
    "write_logs",
    "write_trajectory",
]
