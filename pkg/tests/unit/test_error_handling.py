"""Tests for shared error handling module."""

from dinsim.shared.error_handling import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_OK,
    EXIT_TRANSITION,
    CaseClosed,
    ConfigError,
    MocOutOfRange,
    NotBracketed,
    OutputError,
    ValidationError,
    handle_errors,
)


def test_handle_errors_passes_through_success() -> None:
    @handle_errors
    def run() -> int:
        return EXIT_OK

    assert run() == EXIT_OK


def test_handle_errors_catches_validation_error() -> None:
    @handle_errors
    def run() -> int:
        raise ValidationError("bad input")

    assert run() == EXIT_CONFIG


def test_config_and_moc_errors_are_validation_errors() -> None:
    assert isinstance(ConfigError("x"), ValidationError)
    assert MocOutOfRange("x").exit_code == EXIT_CONFIG


def test_handle_errors_catches_output_error() -> None:
    @handle_errors
    def run() -> int:
        raise OutputError("disk full")

    assert run() == EXIT_IO


def test_handle_errors_maps_os_error_to_io() -> None:
    @handle_errors
    def run() -> int:
        raise PermissionError("denied")

    assert run() == EXIT_IO


def test_handle_errors_catches_transition_error() -> None:
    @handle_errors
    def run() -> int:
        raise CaseClosed("cannot settle: lien case is Settled")

    assert run() == EXIT_TRANSITION


def test_handle_errors_catches_solver_error() -> None:
    @handle_errors
    def run() -> int:
        raise NotBracketed("no root")

    assert run() == EXIT_FAILURE


def test_handle_errors_catches_unhandled_exception() -> None:
    @handle_errors
    def run() -> int:
        raise RuntimeError("unexpected")

    assert run() == EXIT_FAILURE
