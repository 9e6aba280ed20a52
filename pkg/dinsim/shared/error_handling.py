"""Custom exceptions and the exit-code mapping decorator for commands."""

from __future__ import annotations

import functools
import logging
from collections.abc import Callable
from typing import ParamSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_TRANSITION = 4


class AppError(Exception):
    """Base application error."""

    def __init__(self, message: str, exit_code: int = EXIT_FAILURE) -> None:
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code


# ---- Input validation (exit 2) ----


class ValidationError(AppError):
    """Value violates a documented invariant."""

    def __init__(self, message: str) -> None:
        super().__init__(message, exit_code=EXIT_CONFIG)


class ConfigError(ValidationError):
    """Config file or override could not be parsed or validated."""


class MocOutOfRange(ValidationError):
    """Multiple of original capital outside the regulatory bound."""


# ---- Output (exit 3) ----


class OutputError(AppError):
    """Artifact could not be read or written."""

    def __init__(self, message: str) -> None:
        super().__init__(message, exit_code=EXIT_IO)


# ---- Lien state machine (exit 4) ----


class TransitionError(AppError):
    """Lien case cannot take the requested action in its current state."""

    def __init__(self, message: str) -> None:
        super().__init__(message, exit_code=EXIT_TRANSITION)


class CaseClosed(TransitionError):
    pass


class WrongEventKind(TransitionError):
    pass


class InsufficientCash(TransitionError):
    pass


# ---- Contract arithmetic ----


class ContractError(AppError):
    pass


class NotInDefault(ContractError):
    pass


class ZeroAllocation(ContractError):
    pass


# ---- Ledger ----


class LedgerError(AppError):
    pass


class UnbalancedEvent(LedgerError):
    pass


# ---- Solvers ----


class SolverError(AppError):
    pass


class NotBracketed(SolverError):
    pass


class NotMonotone(SolverError):
    pass


class NoCrossing(SolverError):
    pass


class NonPositiveDenominator(SolverError):
    pass


class InfeasibleBounds(SolverError):
    pass


# ---- Simulation ----


class SimulationError(AppError):
    pass


class BadDistribution(SimulationError):
    pass


class EmptyInput(SimulationError):
    pass


P = ParamSpec("P")


def handle_errors(func: Callable[P, int]) -> Callable[P, int]:
    """Decorator that catches exceptions and returns the documented exit code."""

    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except ValidationError as exc:
            logger.warning("Validation error: %s", exc.message)
            return exc.exit_code
        except TransitionError as exc:
            logger.warning("Invalid transition: %s", exc.message)
            return exc.exit_code
        except OutputError as exc:
            logger.error("Output error: %s", exc.message)
            return exc.exit_code
        except AppError as exc:
            logger.exception("Application error: %s", exc.message)
            return exc.exit_code
        except OSError:
            logger.exception("I/O failure")
            return EXIT_IO
        except Exception:
            logger.exception("Unhandled exception")
            return EXIT_FAILURE

    return wrapper
