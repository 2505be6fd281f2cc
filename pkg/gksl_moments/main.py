"""
Command-line front end.

Reads a JSON scenario, runs the closed-form moment propagation, the
Fock-space oracle, their comparison, the Gaussian stationarity check or the
operator-identity suite, and writes CSV trajectories and JSON reports.

Exit codes: 0 success or pass, 1 comparison fail, 2 input or validation
error, 3 resource cap or truncation alarm.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import get_settings
from .errors import GKSLError
from .schemas import Scenario
from .services.scenario_service import ScenarioService
from .utils.log_helpers import command_context
from .utils.logging_config import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

COMMANDS = ("propagate", "oracle", "compare", "stationary", "verify-lemmas")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gksl-moments",
        description="Closed-form moment dynamics of quadratic GKSL generators, "
        "checked against a Fock-space oracle",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("--config", required=True, help="Path to the scenario JSON file")
    parser.add_argument("--out", default="out", help="Output directory (default: out)")
    parser.add_argument(
        "--tolerance",
        type=float,
        default=None,
        help="Override the tolerance the command judges against",
    )
    parser.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="Worker threads for independent time points; above 1 each point gets its own "
        "exponential instead of reusing one step on the uniform grid",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-json", action="store_true", help="Structured JSON log records")
    parser.add_argument("--log-file", default=None, help="Also write logs to this file")
    return parser


def load_scenario(path: str) -> Scenario:
    """
    Parse and validate a scenario file.

    Raises:
        OSError: If the file cannot be read
        ValidationError: On JSON syntax errors or invalid fields
    """
    text = Path(path).read_text(encoding="utf-8")
    return Scenario.model_validate_json(text)


def apply_overrides(scenario: Scenario, command: str, args: argparse.Namespace) -> Scenario:
    """Copy of the scenario with command-line overrides applied."""
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.tolerance is not None:
        field = {
            "compare": "compare",
            "stationary": "stationarity",
            "verify-lemmas": "identity",
        }.get(command, "compare")
        updates["tolerances"] = scenario.tolerances.model_copy(update={field: args.tolerance})
    # re-validate so overrides obey the same constraints as file values
    return Scenario.model_validate(scenario.model_copy(update=updates).model_dump())


def _emit(payload: str) -> None:
    sys.stdout.write(payload + "\n")


def cmd_propagate(service: ScenarioService, out: str) -> int:
    """Closed-form trajectories, one CSV per moment order."""
    for order, tensors in service.propagate().items():
        _emit(str(service.write_trajectory_csv(out, "propagate", order, tensors)))
    return EXIT_OK


def cmd_oracle(service: ScenarioService, out: str) -> int:
    """Oracle trajectories reduced to moments, one CSV per moment order."""
    for order, tensors in service.oracle_moments().items():
        _emit(str(service.write_trajectory_csv(out, "oracle", order, tensors)))
    return EXIT_OK


def cmd_compare(service: ScenarioService, out: str) -> int:
    """
    Closed form against oracle from the same initial state.

    Returns 0 on pass, 1 on fail and 3 on a truncation alarm.
    """
    report = service.compare()
    service.write_report(out, "compare", report)
    _emit(report.model_dump_json(indent=2))
    if report.verdict == "truncation-alarm":
        return EXIT_RESOURCE
    return EXIT_OK if report.verdict == "pass" else EXIT_FAIL


def cmd_stationary(service: ScenarioService, out: str) -> int:
    """Stationarity residuals; a 'not stationary' verdict is a result, not a failure."""
    report = service.stationary()
    service.write_report(out, "stationary", report)
    _emit(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_verify_lemmas(service: ScenarioService, out: str) -> int:
    report = service.verify_lemmas()
    service.write_report(out, "lemmas", report)
    _emit(report.model_dump_json(indent=2))
    return EXIT_OK if report.passed else EXIT_FAIL


HANDLERS = {
    "propagate": cmd_propagate,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "stationary": cmd_stationary,
    "verify-lemmas": cmd_verify_lemmas,
}


def _format_validation_error(e: ValidationError) -> str:
    lines = []
    for error in e.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"  {location}: {error['msg']}")
    return "invalid scenario:\n" + "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and return its exit code.

    Library exceptions are converted to exit codes here and nowhere else.
    """
    args = build_parser().parse_args(argv)
    setup_logging(
        args.log_level or get_settings().log_level,
        json_format=args.log_json,
        log_file=args.log_file,
    )

    try:
        with command_context(args.command, config=args.config) as run_id:
            scenario = apply_overrides(load_scenario(args.config), args.command, args)
            service = ScenarioService(scenario)
            code = HANDLERS[args.command](service, args.out)
            logger.debug(f"Exit code {code}", extra={"run_id": run_id})
            return code
    except ValidationError as e:
        print(_format_validation_error(e), file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"cannot read scenario: {e}", file=sys.stderr)
        return EXIT_INPUT
    except GKSLError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
