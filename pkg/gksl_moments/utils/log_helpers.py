"""
Logging helper functions.

Provides standardized logging patterns for command runs, written artifacts
and numerical checks so that every report line has the same shape.
"""

import time
import uuid
from contextlib import contextmanager
from typing import Iterator, Optional

from ..utils.logging_config import get_logger

logger = get_logger(__name__)


def log_run_started(command: str, run_id: str, **extra_fields) -> None:
    """
    Log the start of a command run.

    Args:
        command: CLI subcommand name (e.g. 'propagate')
        run_id: Correlation id shared by all records of this run
        **extra_fields: Additional context fields to include in the log
    """
    extra = {"command": command, "run_id": run_id, **extra_fields}
    logger.debug(f"Run started [command={command}]", extra=extra)


def log_run_completed(
    command: str, run_id: str, duration_ms: int, **extra_fields
) -> None:
    """
    Log the completion of a command run with its duration.

    Args:
        command: CLI subcommand name
        run_id: Correlation id shared by all records of this run
        duration_ms: Wall time of the run in milliseconds
        **extra_fields: Additional context fields to include in the log
    """
    extra = {
        "command": command,
        "run_id": run_id,
        "duration_ms": duration_ms,
        **extra_fields,
    }
    logger.info(f"Run completed in {duration_ms}ms [command={command}]", extra=extra)


def log_artifact_written(kind: str, path: str, rows: Optional[int] = None, **extra_fields):
    """
    Log that an output file was written.

    Args:
        kind: Artifact type ('csv', 'json')
        path: Destination path
        rows: Number of data rows, for tabular artifacts
        **extra_fields: Additional context fields to include in the log
    """
    extra = {"kind": kind, "path": str(path), **extra_fields}
    if rows is not None:
        extra["rows"] = rows

    logger.info(f"{kind.upper()} written to {path}", extra=extra)


def log_check_result(name: str, value: float, tolerance: float, **extra_fields) -> bool:
    """
    Log a numerical check against its tolerance and return the verdict.

    Passing checks go to debug level to keep batch runs quiet.

    Args:
        name: Short name of the checked quantity
        value: Measured deviation or residual
        tolerance: Threshold the value must stay below
        **extra_fields: Additional context fields to include in the log

    Returns:
        bool: True if value < tolerance
    """
    passed = bool(value < tolerance)
    extra = {
        "check": name,
        "value": float(value),
        "tolerance": float(tolerance),
        "passed": passed,
        **extra_fields,
    }
    if passed:
        logger.debug(f"Check passed: {name} = {value:.3e}", extra=extra)
    else:
        logger.warning(
            f"Check failed: {name} = {value:.3e} (tolerance {tolerance:.1e})",
            extra=extra,
        )
    return passed


@contextmanager
def command_context(command: str, **extra_fields) -> Iterator[str]:
    """
    Track one command run: assign a correlation id and log its duration.

    Yields:
        str: The run id
    """
    run_id = str(uuid.uuid4())
    start_time = time.time()
    log_run_started(command, run_id, **extra_fields)
    try:
        yield run_id
    except Exception as e:
        duration_ms = round((time.time() - start_time) * 1000)
        logger.error(
            f"Run failed: {str(e)}",
            extra={
                "command": command,
                "run_id": run_id,
                "duration_ms": duration_ms,
                "error_type": type(e).__name__,
                "exit_code": getattr(e, "exit_code", None),
            },
        )
        raise
    else:
        duration_ms = round((time.time() - start_time) * 1000)
        log_run_completed(command, run_id, duration_ms, **extra_fields)
