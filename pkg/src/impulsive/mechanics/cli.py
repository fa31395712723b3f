"""The `impulsive` command line: run scenarios, resolve single impacts, classify velocities and check frames."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, NoReturn, Optional, Sequence

import numpy as np
from termcolor import colored

from impulsive.mechanics.constraints import (
    ConstraintError,
    classify,
    classify_multiple,
    is_rest_frame,
    is_rest_frame_kinetic,
    sample_points,
)
from impulsive.mechanics.engine import ImpactEvent, Simulation
from impulsive.mechanics.geometry import GeometryError, SpacetimePoint, TimelikeVelocity
from impulsive.mechanics.scenario import (
    ExpressionError,
    Scenario,
    ScenarioError,
    as_expression,
    load_scenario,
    trajectory_table,
    write_logs,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

#: Errors that mean a scenario does not validate when raised while loading it.
VALIDATION_ERRORS = (ScenarioError, ExpressionError, GeometryError, ConstraintError)

#: Tolerance of the rest frame predicates of `check-frame`.
FRAME_TOLERANCE = 1e-9


class UsageError(Exception):
    """Bad command line values that argparse cannot check."""


class _ValidationFailed(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """Exits with :data:`EXIT_USAGE` instead of argparse's default status 2, which is taken by validation
    errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def get_argument_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="impulsive", description=__doc__)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="the level of the log messages written to stderr (default: %(default)s)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_ArgumentParser)
    subparsers.required = True

    run = subparsers.add_parser("run", help="simulate scenarios and write their event logs and trajectories")
    run.add_argument("scenarios", nargs="+", metavar="SCENARIO", help="a scenario file or built-in scenario name")
    run.add_argument("--out", default="out", help="the output directory (default: %(default)s)")
    run.add_argument("--plot", action="store_true", help="print the trajectory as CSV to stdout")
    run.add_argument("--jobs", type=int, default=1, help="run up to N scenarios in parallel")

    impact = subparsers.add_parser("impact", help="resolve a single impact at the initial point")
    impact.add_argument("scenario", metavar="SCENARIO")
    impact.add_argument("--p-left", required=True, help="the left velocity, comma separated")
    impact.add_argument("--i-act", help="an active impulse, comma separated")
    impact.add_argument("--constraint", action="append", default=[], help="impact on this constraint only")

    classify_ = subparsers.add_parser("classify", help="classify a velocity at the initial point")
    classify_.add_argument("scenario", metavar="SCENARIO")
    classify_.add_argument("--p", required=True, help="the velocity, comma separated")

    check_frame = subparsers.add_parser("check-frame", help="check whether a frame is a rest frame of each constraint")
    check_frame.add_argument("scenario", metavar="SCENARIO")
    check_frame.add_argument("--frame", required=True)
    check_frame.add_argument("--samples", type=int, default=16, help="number of sample points (default: %(default)s)")
    check_frame.add_argument("--seed", type=int, default=0)

    validate = subparsers.add_parser("validate", help="load and validate a scenario")
    validate.add_argument("scenario", metavar="SCENARIO")
    return parser


def parse_vector(text: str, scenario: Scenario, what: str) -> np.ndarray:
    """Parse a comma separated vector. Entries may be expressions over the scenario parameters."""

    entries = [item.strip() for item in text.split(",")]
    if len(entries) != scenario.system.dim:
        raise UsageError(f"{what}: expected {scenario.system.dim} components, got {len(entries)}")
    values = []
    for entry in entries:
        try:
            values.append(as_expression(entry).bind((), scenario.parameters)(()))
        except ExpressionError as exc:
            raise UsageError(f"{what}: {exc}")
    return np.array(values, dtype=np.float64)


def format_vector(values: Sequence[float]) -> str:
    # Adding 0.0 turns negative zeros into zeros.
    return ",".join(f"{float(v) + 0.0:.12g}" for v in values)


def _load(ref: str) -> Scenario:
    try:
        return load_scenario(ref)
    except VALIDATION_ERRORS as exc:
        raise _ValidationFailed(str(exc))


def _run_one(ref: str, out: str, plot: bool) -> dict[str, Any]:
    """Run one scenario and write its logs. Executed in worker processes with `--jobs`."""

    scenario = _load(ref)
    result = scenario.run()
    output = scenario.file.output
    directory = Path(out) / (output.directory or scenario.name)
    write_logs(
        result,
        directory,
        scenario.name,
        scenario.system.coordinates,
        scenario.system.diagnostic_frames,
        output.events,
        output.trajectory,
    )
    return {
        "name": scenario.name,
        "events": len(result.events),
        "t_end": result.final.t,
        "broken": sorted(result.final.broken),
        "directory": str(directory),
        "table": trajectory_table(result.trajectory, scenario.system.coordinates) if plot else None,
    }


def cmd_run(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.jobs == 1 or len(args.scenarios) == 1:
        summaries = [_run_one(ref, args.out, args.plot) for ref in args.scenarios]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as executor:
            futures = [executor.submit(_run_one, ref, args.out, args.plot) for ref in args.scenarios]
            summaries = [future.result() for future in futures]
    for summary in summaries:
        broken = f", broken {', '.join(summary['broken'])}" if summary["broken"] else ""
        print(
            colored(summary["name"], "green"),
            f"{summary['events']} event(s) until t = {summary['t_end']:.12g}{broken}; logs in {summary['directory']}",
            file=sys.stderr if args.plot else sys.stdout,
        )
        if summary["table"] is not None:
            sys.stdout.write(summary["table"])
    return EXIT_OK


def print_event(event: ImpactEvent) -> None:
    print(colored(f"impact on {'+'.join(event.constraints) or '-'}", "cyan"), f"at t = {event.time:.12g} ({event.law})")
    print(f"  p_L      {format_vector(event.p_left.p)}")
    print(f"  I_act    {format_vector(event.active.V)}")
    print(f"  I_react  {format_vector(event.impulse.V)}")
    print(f"  p_R      {format_vector(event.p_right.p)}")
    print(f"  broken   {', '.join(sorted(event.broken)) or '-'}")
    for key, value in sorted(event.diagnostics.items()):
        print(f"  {key:<8} {value:.12g}")
    for name, energy in sorted(event.energy.items()):
        ratio = "-" if energy.ratio is None else f"{energy.ratio:.12g}"
        residual = "-" if energy.residual is None else f"{energy.residual:.3g}"
        print(
            f"  frame {name}: K_L = {energy.K_left:.12g}, K_R = {energy.K_right:.12g}, ratio = {ratio}, "
            f"projection residual = {residual}"
        )


def cmd_impact(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    p_left = TimelikeVelocity(scenario.initial.base, parse_vector(args.p_left, scenario, "--p-left"))
    active = parse_vector(args.i_act, scenario, "--i-act") if args.i_act else None
    simulation = Simulation(scenario.system, scenario.initial, scenario.file.integrator)
    print_event(simulation.impact_at(p_left, args.constraint, active))
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    system = scenario.system
    p = TimelikeVelocity(scenario.initial.base, parse_vector(args.p, scenario, "--p"))
    tol = scenario.file.integrator.tol
    simulation = Simulation(system, scenario.initial, scenario.file.integrator)
    hits = simulation.contacts(p)
    in_contact = {S.name for S in hits}
    for S in system.unilateral():
        result = classify(p, S, system.metric, tol)
        contact = "" if S.name in in_contact else " (not in contact)"
        print(f"{S.name}: {result.side.value}{contact}; margins {format_vector(result.margins)}")
    if len(hits) > 1:
        result = classify_multiple(p, hits, system.metric, tol)
        name = "+".join(S.name for S in hits)
        print(f"{name}: {result.side.value}; margins {format_vector(result.margins)}")
    return EXIT_OK


def cmd_check_frame(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    system = scenario.system
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    try:
        frame = scenario.frame(args.frame)
    except ScenarioError as exc:
        raise UsageError(str(exc))
    rng = np.random.default_rng(args.seed)
    around = scenario.initial.base
    for S in system.positional:
        points = sample_points(S, around, args.samples, rng)
        answer = "yes" if is_rest_frame(frame, S, points, FRAME_TOLERANCE) else "no"
        print(f"rest frame of {S.name}: {colored(answer, 'green' if answer == 'yes' else 'yellow')}")
    for A in system.kinetic:
        spread = 0.1 * max(1.0, float(np.max(np.abs(around.x))))
        points = [around]
        for _ in range(args.samples - 1):
            points.append(SpacetimePoint(around.t, around.x + rng.normal(scale=spread, size=around.dim)))
        answer = "yes" if is_rest_frame_kinetic(frame, A, points, FRAME_TOLERANCE) else "no"
        print(f"rest frame of {A.name}: {colored(answer, 'green' if answer == 'yes' else 'yellow')}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    system = scenario.system
    print(
        colored(scenario.name, "green"),
        f"is valid: {system.dim} coordinate(s), {len(system.positional)} positional and {len(system.kinetic)} "
        f"kinetic constraint(s)",
    )
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "impact": cmd_impact,
    "classify": cmd_classify,
    "check-frame": cmd_check_frame,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = get_argument_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(colored("error:", "red"), exc, file=sys.stderr)
        return EXIT_USAGE
    except _ValidationFailed as exc:
        print(colored("invalid scenario:", "red"), exc, file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(colored(f"{type(exc).__name__}:", "red"), exc, file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
