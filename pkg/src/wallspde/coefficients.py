"""Registry of drift (f) and noise-amplitude (chi) coefficient handles.

A handle is a callable (x, t, state) -> array broadcastable to state's shape,
where state is the solution time-slice the coefficient is evaluated on.  All
registry entries are Lipschitz in the state with linear growth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = ["CoefficientSpec", "make_coefficient", "coefficient_registry",
           "verify_chi_lower_bound"]


def _zero(**_params):
    def fn(x, t, state):
        return np.zeros_like(np.asarray(state, dtype=float))
    return fn


def _constant(value: float = 1.0, **_params):
    def fn(x, t, state):
        return np.full_like(np.asarray(state, dtype=float), value)
    return fn


def _sin_state(amplitude: float = 0.5, **_params):
    """State-feedback drift amplitude*sin(state); Lipschitz constant |amplitude|."""
    def fn(x, t, state):
        return amplitude * np.sin(np.asarray(state, dtype=float))
    return fn


def _space_sine(amplitude: float = 1.0, wavenumber: int = 1, **_params):
    def fn(x, t, state):
        return amplitude * np.sin(2.0 * np.pi * wavenumber * x) \
            + 0.0 * np.asarray(state, dtype=float)
    return fn


def _bounded_state(value: float = 1.0, span: float = 0.5, **_params):
    """chi = value + span*sin(state): stays in [value-span, value+span], so a
    positive value - span certifies a uniform lower bound |chi| >= c."""
    def fn(x, t, state):
        return value + span * np.sin(np.asarray(state, dtype=float))
    return fn


_REGISTRY = {
    "zero": _zero,
    "constant": _constant,
    "sin_state": _sin_state,
    "space_sine": _space_sine,
    "bounded_state": _bounded_state,
}


def coefficient_registry() -> tuple:
    return tuple(sorted(_REGISTRY))


def make_coefficient(name: str, **params):
    if name not in _REGISTRY:
        raise ConfigurationError(
            f"unknown coefficient {name!r}; registry: {coefficient_registry()}")
    return _REGISTRY[name](**params)


@dataclass
class CoefficientSpec:
    """The equation's f and chi, plus the names/params they were built from
    (kept for config echoes and hashes)."""

    f: object
    chi: object
    f_name: str = "zero"
    f_params: dict = field(default_factory=dict)
    chi_name: str = "zero"
    chi_params: dict = field(default_factory=dict)
    chi_lower_bound: float | None = None

    @classmethod
    def from_names(cls, f_name: str = "zero", chi_name: str = "zero",
                   f_params: dict | None = None, chi_params: dict | None = None,
                   chi_lower_bound: float | None = None) -> "CoefficientSpec":
        fp = dict(f_params or {})
        cp = dict(chi_params or {})
        return cls(make_coefficient(f_name, **fp), make_coefficient(chi_name, **cp),
                   f_name, fp, chi_name, cp, chi_lower_bound)


def verify_chi_lower_bound(coeff: CoefficientSpec, x: np.ndarray,
                           states: np.ndarray, t: float = 0.0) -> bool:
    """Spot-check |chi| >= declared lower bound on the supplied state samples."""
    if coeff.chi_lower_bound is None:
        return True
    vals = np.abs(np.asarray(coeff.chi(x, t, states)))
    return bool(np.all(vals >= coeff.chi_lower_bound - 1e-12))
