"""
Constitutive functions of the mixture.

The double well is split as ``W(c; u) = theta0 * F(c) + u * G(c)`` with
``F = c^4/4 - c^2/2`` and ``G = c^2/2``; ``u = theta + omega^2`` is the
effective temperature raised by stirring. Scalar helpers accept floats or
numpy arrays and never clamp ``c``; only the viscosity blend clamps.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .grid import Ghost, ScalarField, require_same_grid, curl2d, laplacian


class MobilityModel(str, enum.Enum):
    CONSTANT = 'constant'
    DEGENERATE = 'degenerate'


@dataclass(frozen=True)
class MaterialParams:
    """Material constants; everything is nondimensional."""

    rho0: float = 1.0
    gamma: float = 0.01
    theta0: float = 1.0
    mobility_model: MobilityModel = MobilityModel.CONSTANT
    mobility0: float = 1.0
    nu_a: float = 0.05
    nu_b: float = 0.05
    kappa0: float = 0.01
    spec_heat: float = 1.0

    # mobility0 == 0 is pure transport, kappa0 == 0 an insulated non-conductor
    _NON_NEGATIVE = ('mobility0', 'kappa0')
    _POSITIVE = ('rho0', 'gamma', 'theta0', 'nu_a', 'nu_b', 'spec_heat')

    def __post_init__(self):
        for name in self._POSITIVE + self._NON_NEGATIVE:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            if name in self._POSITIVE and value <= 0:
                raise ParameterError(f"{name} must be positive, got {value}")
            if value < 0:
                raise ParameterError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)
        try:
            object.__setattr__(self, 'mobility_model', MobilityModel(self.mobility_model))
        except ValueError as exc:
            raise ParameterError(f"unknown mobility_model {self.mobility_model!r}") from exc


@dataclass(frozen=True)
class SpinodalResult:
    separates: bool
    c1: float = None


def _out(value):
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


# ==================================================================
# POTENTIALS
# ==================================================================

def f_val(c):
    c = np.asarray(c, dtype=float)
    return _out(c ** 4 / 4 - c ** 2 / 2)


def f_prime(c):
    c = np.asarray(c, dtype=float)
    return _out(c ** 3 - c)


def g_val(c):
    c = np.asarray(c, dtype=float)
    return _out(c ** 2 / 2)


def g_prime(c):
    return _out(np.asarray(c, dtype=float))


def effective_u(theta, omega):
    """Effective temperature ``u = theta + omega^2``."""
    return _out(np.asarray(theta, dtype=float) + np.asarray(omega, dtype=float) ** 2)


def w_val(c, u, theta0):
    return _out(theta0 * np.asarray(f_val(c)) + np.asarray(u) * np.asarray(g_val(c)))


def w_prime(c, u, theta0):
    return _out(theta0 * np.asarray(f_prime(c)) + np.asarray(u) * np.asarray(g_prime(c)))


def w_second(c, u, theta0):
    c = np.asarray(c, dtype=float)
    return _out(3 * theta0 * c ** 2 + np.asarray(u, dtype=float) - theta0)


def spinodal_interval(theta0, u):
    """
    Half-width of the spinodal interval ``(-c1, c1)`` where ``W'' < 0``.

    A uniform mixture separates only when ``u < theta0``.
    """
    if not theta0 > 0:
        raise ParameterError(f"theta0 must be positive, got {theta0}")
    if u < 0:
        raise ParameterError(f"u must be non-negative, got {u}")
    if u >= theta0:
        return SpinodalResult(separates=False)
    return SpinodalResult(separates=True, c1=math.sqrt((theta0 - u) / (3 * theta0)))


# ==================================================================
# TRANSPORT COEFFICIENTS
# ==================================================================

def mobility(c, params):
    c = np.asarray(c, dtype=float)
    if params.mobility_model is MobilityModel.DEGENERATE:
        return _out(params.mobility0 * np.maximum(0.0, 1.0 - c ** 2))
    return _out(np.full_like(c, params.mobility0))


def viscosity(c, params):
    """Linear blend between ``nu_a`` (c = -1) and ``nu_b`` (c = 1)."""
    c_hat = np.clip(np.asarray(c, dtype=float), -1.0, 1.0)
    return _out(params.nu_a * (1 - c_hat) / 2 + params.nu_b * (1 + c_hat) / 2)


def conductivity(theta, params):
    return _out(np.full_like(np.asarray(theta, dtype=float), params.kappa0))


def diffusivity_K(c, u, params):
    """``K(c) = M(c) W''(c)``; negative inside the spinodal interval."""
    return _out(np.asarray(mobility(c, params)) * np.asarray(w_second(c, u, params.theta0)))


# ==================================================================
# CHEMICAL POTENTIAL
# ==================================================================

def chemical_potential_u(c, u, params):
    """``mu = -gamma * lap(c) + theta0 F'(c) + u G'(c)`` for a given ``u`` (field or number)."""
    if isinstance(u, ScalarField):
        require_same_grid(c, u)
        u = u.values
    lap = laplacian(c, Ghost.MIRROR)
    return ScalarField(
        c.spec,
        -params.gamma * lap.values
        + params.theta0 * f_prime(c.values)
        + u * g_prime(c.values),
    )


def chemical_potential(c, theta, v, params, vorticity_ghost=Ghost.ANTIMIRROR):
    """Curl-augmented chemical potential with ``u = theta + |curl v|^2``."""
    require_same_grid(c, theta, v)
    omega = curl2d(v, vorticity_ghost)
    return chemical_potential_u(c, effective_u(theta.values, omega.values), params)
