"""Tolerances, size caps and the exception hierarchy shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, replace


class McIteError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(McIteError, ValueError):
    """An input violated a documented precondition (e.g. non-Hermitian generator)."""


class ShapeError(McIteError, ValueError):
    """Inconsistent dimensions between operands."""


class SizeError(McIteError, MemoryError):
    """A requested object would exceed the configured dimension cap."""


class NumericalRangeError(McIteError, ArithmeticError):
    """A quantity under- or overflowed beyond recovery."""


@dataclass(frozen=True)
class NumericsConfig:
    hermitian_tol: float = 1e-12
    unitary_tol: float = 1e-10
    trace_tol: float = 1e-10
    psd_tol: float = 1e-10
    norm_tol: float = 1e-10
    # amplitudes in a statevector
    max_state_dim: int = 2**22
    # per side of a dense density operator
    max_density_dim: int = 2**13
    # single-copy dimension for the two-copy tree recurrence
    max_recurrence_dim: int = 2**7
    max_ising_sites: int = 10
    max_schedule_n: int = 12
    eps_max: float = 1.0
    eps_warn: float = 0.3
    # relative to ||H||
    degeneracy_rtol: float = 1e-9


_config = NumericsConfig()


def get_config() -> NumericsConfig:
    return _config


def set_config(**changes) -> NumericsConfig:
    """Replace fields of the global config; returns the previous config."""
    global _config
    previous = _config
    _config = replace(_config, **changes)
    return previous
