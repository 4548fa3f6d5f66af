"""
Initial-condition generators.

Noise is drawn from ``numpy.random.default_rng(seed)`` so identical seeds
give bitwise-identical states.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .grid import ScalarField, VectorField
from .dynamics import State, StepConfig, project

logger = logging.getLogger(__name__)


class InitialMode(str, enum.Enum):
    UNIFORM_NOISE = 'uniform_noise'
    SINGLE_MODE = 'single_mode'
    VORTEX_STIR = 'vortex_stir'
    FROM_SNAPSHOT = 'from_snapshot'


@dataclass(frozen=True)
class InitialCondition:
    mode: InitialMode = InitialMode.UNIFORM_NOISE
    c_mean: float = 0.0
    amplitude: float = 1e-3
    seed: int = 0
    theta: float = 0.5
    wavenumber_index: int = 1
    vortex_strength: float = 0.5
    snapshot_prefix: str = ''

    def __post_init__(self):
        try:
            object.__setattr__(self, 'mode', InitialMode(self.mode))
        except ValueError as exc:
            raise ParameterError(f"unknown initial mode {self.mode!r}") from exc
        if not self.theta > 0:
            raise ParameterError(f"initial theta must be positive, got {self.theta}")
        if self.amplitude < 0:
            raise ParameterError(f"amplitude must be non-negative, got {self.amplitude}")
        if self.mode is InitialMode.FROM_SNAPSHOT and not self.snapshot_prefix:
            raise ParameterError("from_snapshot needs snapshot_prefix")


def white_noise(spec, c_mean, amplitude, seed):
    rng = np.random.default_rng(seed)
    return ScalarField(spec, c_mean + amplitude * rng.standard_normal(spec.shape))


def single_mode(spec, c_mean, amplitude, wavenumber_index=1):
    """``c_mean + amplitude * sin(k x)`` with ``k = 2 pi n / lx``."""
    k = 2 * math.pi * wavenumber_index / spec.lx
    return ScalarField.from_function(spec, lambda x, y: c_mean + amplitude * np.sin(k * x))


def cellular_vortex(spec, strength):
    """Solenoidal cellular flow filling the box, peak speed ``strength``."""
    kx = 2 * math.pi / spec.lx
    ky = 2 * math.pi / spec.ly
    return VectorField.from_function(
        spec,
        lambda x, y: strength * np.sin(kx * x) * np.cos(ky * y),
        lambda x, y: -strength * (kx / ky) * np.cos(kx * x) * np.sin(ky * y),
    )


def rigid_rotation(spec, angular_velocity):
    """``v = Omega * (-(y - yc), x - xc)`` about the domain centre; vorticity ``2 Omega``."""
    xc, yc = spec.lx / 2, spec.ly / 2
    return VectorField.from_function(
        spec,
        lambda x, y: -angular_velocity * (y - yc),
        lambda x, y: angular_velocity * (x - xc),
    )


def build_initial_state(spec, initial, cfg=None):
    """Build the ``State`` described by an ``InitialCondition``."""
    if initial.mode is InitialMode.FROM_SNAPSHOT:
        from .snapshots import read_state

        state = read_state(initial.snapshot_prefix, spec=spec)
        logger.info(f"Initial state read from {initial.snapshot_prefix} (t={state.t:.6g})")
        return state

    if initial.mode is InitialMode.SINGLE_MODE:
        c = single_mode(spec, initial.c_mean, initial.amplitude, initial.wavenumber_index)
    else:
        c = white_noise(spec, initial.c_mean, initial.amplitude, initial.seed)
    state = State.at_rest(c, initial.theta)

    if initial.mode is InitialMode.VORTEX_STIR:
        v, _, _ = project(cellular_vortex(spec, initial.vortex_strength), cfg or StepConfig())
        state = state.evolve(v=v)
    return state
