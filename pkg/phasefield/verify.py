"""
Oracles that tie simulation output to closed-form analysis.

* linear dispersion of the Cahn-Hilliard step about a uniform state
* the grow / decay dichotomy around ``u = theta0`` and its bisection
* suppression of phase separation by stirring (``u = theta + omega^2``)
* the gradient / material-derivative identity on analytic fields
* operator convergence orders and the bundled consistency suite

Every experiment uses ``FrozenCahnHilliard``: the effective temperature is
held fixed and nothing is transported.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import FrozenCahnHilliard, step_count
from .exceptions import FitWindowError, ParameterError
from .grid import (
    BoundaryMode,
    Ghost,
    GridSpec,
    ScalarField,
    VectorField,
    advect,
    biharmonic,
    curl2d,
    divergence,
    gradient,
    integrate,
    laplacian,
    sym_gradient,
    velocity_gradient,
)
from .initial_conditions import rigid_rotation, single_mode, white_noise
from .material import MobilityModel, effective_u, mobility, w_second
from .thermo import entropy_density, free_energy_density, internal_energy_density, thermo_restriction_check

logger = logging.getLogger(__name__)

GROWTH_FACTOR = 10.0
FIT_CEILING = 1e-2


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    sigma_predicted: float
    sigma_measured: float
    rel_error: float
    samples: int = 0


@dataclass(frozen=True)
class ThresholdResult:
    u: float
    grew: bool
    amplitude_ratio: float


@dataclass(frozen=True)
class ThresholdBracket:
    low: float
    high: float
    results: tuple = ()

    @property
    def width(self):
        return self.high - self.low

    def contains(self, value):
        return self.low <= value <= self.high


@dataclass(frozen=True)
class StirReport:
    theta: float
    angular_velocity: float
    min_omega_sq: float
    quiescent: ThresholdResult
    stirred: ThresholdResult

    @property
    def suppressed(self):
        return self.quiescent.grew and self.stirred.amplitude_ratio < 1.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ConsistencyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]


# ==================================================================
# DISPERSION
# ==================================================================

def predicted_growth_rate(k, c_bar, u, params):
    """``sigma(k) = -(M(c_bar) k^2 / rho0) (gamma k^2 + W''(c_bar; u))``."""
    if params.mobility_model is MobilityModel.DEGENERATE and abs(c_bar) >= 1:
        raise ParameterError(f"degenerate mobility vanishes at c_bar={c_bar}")
    m = mobility(c_bar, params)
    return -(m * k ** 2 / params.rho0) * (params.gamma * k ** 2 + w_second(c_bar, u, params.theta0))


def neutral_wavenumber(c_bar, u, params):
    """Wavenumber where ``sigma`` changes sign, or ``None`` if every mode decays."""
    w2 = w_second(c_bar, u, params.theta0)
    return math.sqrt(-w2 / params.gamma) if w2 < 0 else None


def dispersion_grid(k, nx=256, ny=4, periods=4):
    """Strip-shaped periodic grid whose length holds ``periods`` waves of ``k``."""
    lx = 2 * math.pi * periods / k
    return GridSpec(nx=nx, ny=ny, lx=lx, ly=lx * ny / nx)


def mode_amplitude(c, c_bar, index):
    """Amplitude of the ``sin`` mode with ``index`` periods along x."""
    profile = np.mean(c.values - c_bar, axis=0)
    return 2 * abs(np.fft.rfft(profile)[index]) / c.spec.nx


def measure_growth_rate(k, c_bar, u, params, cfg, spec=None, epsilon=1e-5, max_steps=200000):
    """
    Fit the exponential rate of a single ``sin(k x)`` perturbation.

    The log amplitude is fitted while it stays within
    ``[1e-3 * epsilon, FIT_CEILING]``, over roughly three e-folds of the
    predicted rate.
    """
    spec = spec or dispersion_grid(k)
    if not spec.periodic:
        raise ParameterError("growth rates are measured on periodic grids")
    index = k * spec.lx / (2 * math.pi)
    if abs(index - round(index)) > 1e-9 or round(index) < 1:
        raise ParameterError(f"k={k} is not an admissible wavenumber for lx={spec.lx}")
    index = int(round(index))
    if epsilon > 1e-4:
        raise ParameterError(f"perturbation amplitude {epsilon} leaves the linear regime")

    predicted = predicted_growth_rate(k, c_bar, u, params)
    horizon = 3.0 / max(abs(predicted), 1e-12)
    n_steps = min(max_steps, step_count(horizon, cfg.dt))
    floor = 1e-3 * epsilon

    harness = FrozenCahnHilliard(u, params, cfg)
    c = single_mode(spec, c_bar, epsilon, index)
    times, logs = [0.0], [math.log(mode_amplitude(c, c_bar, index))]
    for step, c in harness.run(c, n_steps):
        amplitude = mode_amplitude(c, c_bar, index)
        if not floor <= amplitude <= FIT_CEILING:
            break
        times.append(step * cfg.dt)
        logs.append(math.log(amplitude))
    if len(times) < 3:
        raise FitWindowError(f"fit window for k={k:.6g} holds {len(times)} samples")

    measured = float(np.polyfit(times, logs, 1)[0])
    rel_error = abs(measured - predicted) / max(abs(predicted), 1e-12)
    logger.info(f"k={k:.6g} sigma predicted {predicted:.6g} measured {measured:.6g}")
    return DispersionPoint(k=k, sigma_predicted=predicted, sigma_measured=measured,
                           rel_error=rel_error, samples=len(times))


# ==================================================================
# SPINODAL THRESHOLD
# ==================================================================

def amplitude_ratio(c0, c1):
    d0 = c0.values - c0.values.mean()
    d1 = c1.values - c1.values.mean()
    return float(np.linalg.norm(d1) / np.linalg.norm(d0))


def _frozen_run(c0, u, params, cfg, t_end):
    harness = FrozenCahnHilliard(u, params, cfg)
    c = c0
    for _, c in harness.run(c0, step_count(t_end, cfg.dt)):
        pass
    return c


def threshold_run(u, c0, params, cfg, t_end):
    ratio = amplitude_ratio(c0, _frozen_run(c0, u, params, cfg, t_end))
    u_label = float(np.min(u.values)) if isinstance(u, ScalarField) else float(u)
    return ThresholdResult(u=u_label, grew=ratio > GROWTH_FACTOR, amplitude_ratio=ratio)


def spinodal_sweep(u_values, params, cfg, spec, c_mean=0.0, amplitude=1e-3, seed=0, t_end=100.0):
    """Run a frozen-temperature spinodal experiment for every ``u`` from the same noisy start."""
    c0 = white_noise(spec, c_mean, amplitude, seed)
    results = []
    for u in u_values:
        result = threshold_run(float(u), c0, params, cfg, t_end)
        logger.info(f"u={result.u:.6g} ratio={result.amplitude_ratio:.6g} grew={result.grew}")
        results.append(result)
    return results


def locate_threshold(params, cfg, spec, u_low, u_high, tol=None, **sweep_kwargs):
    """
    Bisect ``u`` until the grow / decay bracket is at most ``tol`` wide
    (``0.1 * theta0`` by default). ``u_low`` must grow and ``u_high`` decay.
    """
    tol = tol if tol is not None else 0.1 * params.theta0
    low, high = spinodal_sweep([u_low, u_high], params, cfg, spec, **sweep_kwargs)
    if not low.grew or high.grew:
        raise ParameterError(
            f"bracket [{u_low}, {u_high}] does not straddle the threshold "
            f"(grew: {low.grew}, {high.grew})"
        )
    results = [low, high]
    lo, hi = float(u_low), float(u_high)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        result = spinodal_sweep([mid], params, cfg, spec, **sweep_kwargs)[0]
        results.append(result)
        if result.grew:
            lo = mid
        else:
            hi = mid
    return ThresholdBracket(low=lo, high=hi, results=tuple(results))


def curl_suppression_experiment(params, cfg, spec, theta=None, angular_velocity=0.5,
                                amplitude=1e-3, seed=0, t_end=100.0):
    """
    Quiescent versus stirred separation from one noisy start at ``theta < theta0``.

    Both runs use the walled version of ``spec``. The quiescent run is
    ``spinodal_sweep`` at ``u = theta``; the stirred run imposes a rigid
    rotation whose vorticity ``2 Omega`` raises ``u`` to ``theta + 4 Omega^2`` everywhere.
    """
    theta = 0.5 * params.theta0 if theta is None else theta
    walled = replace(spec, bc_mode=BoundaryMode.PHYSICAL)
    quiescent = spinodal_sweep([theta], params, cfg, walled, amplitude=amplitude, seed=seed, t_end=t_end)[0]

    omega = curl2d(rigid_rotation(walled, angular_velocity), Ghost.EXTRAPOLATE)
    u = ScalarField(walled, effective_u(theta, omega.values))
    min_omega_sq = float(np.min(omega.values ** 2))
    if min_omega_sq <= params.theta0 - theta:
        logger.warning(f"Stirring too weak: min omega^2 {min_omega_sq:.4g} <= theta0 - theta {params.theta0 - theta:.4g}")
    c0 = white_noise(walled, 0.0, amplitude, seed)
    stirred = threshold_run(u, c0, params, cfg, t_end)
    logger.info(f"stir: quiescent ratio {quiescent.amplitude_ratio:.4g}, stirred ratio {stirred.amplitude_ratio:.4g}")
    return StirReport(theta=theta, angular_velocity=angular_velocity, min_omega_sq=min_omega_sq,
                      quiescent=quiescent, stirred=stirred)


# ==================================================================
# GRADIENT / MATERIAL-DERIVATIVE IDENTITY
# ==================================================================

@dataclass(frozen=True)
class AnalyticField:
    """Closed-form ``g(x, y, t)`` with the derivatives the identity needs."""

    value: object
    time_rate: object
    grad: object
    grad_time_rate: object
    hessian: object
    periodic: bool = True


@dataclass(frozen=True)
class AnalyticVelocity:
    value: object
    periodic: bool = True


def _wavenumbers(spec):
    return 2 * math.pi / spec.lx, 2 * math.pi / spec.ly


def _static_mode(spec):
    kx, ky = _wavenumbers(spec)
    zero = lambda x, y, t: np.zeros_like(x)  # noqa: E731
    return AnalyticField(
        value=lambda x, y, t: np.sin(kx * x) * np.cos(ky * y),
        time_rate=zero,
        grad=lambda x, y, t: (kx * np.cos(kx * x) * np.cos(ky * y), -ky * np.sin(kx * x) * np.sin(ky * y)),
        grad_time_rate=lambda x, y, t: (np.zeros_like(x), np.zeros_like(x)),
        hessian=lambda x, y, t: (
            -kx ** 2 * np.sin(kx * x) * np.cos(ky * y),
            -kx * ky * np.cos(kx * x) * np.sin(ky * y),
            -ky ** 2 * np.sin(kx * x) * np.cos(ky * y),
        ),
    )


def _ramp(spec):
    return AnalyticField(
        value=lambda x, y, t: x * t,
        time_rate=lambda x, y, t: x,
        grad=lambda x, y, t: (np.full_like(x, t), np.zeros_like(x)),
        grad_time_rate=lambda x, y, t: (np.ones_like(x), np.zeros_like(x)),
        hessian=lambda x, y, t: (np.zeros_like(x),) * 3,
        periodic=False,
    )


def _travelling_wave(spec):
    kx, ky = _wavenumbers(spec)
    return AnalyticField(
        value=lambda x, y, t: np.sin(kx * x - t) * np.cos(ky * y),
        time_rate=lambda x, y, t: -np.cos(kx * x - t) * np.cos(ky * y),
        grad=lambda x, y, t: (kx * np.cos(kx * x - t) * np.cos(ky * y), -ky * np.sin(kx * x - t) * np.sin(ky * y)),
        grad_time_rate=lambda x, y, t: (kx * np.sin(kx * x - t) * np.cos(ky * y), ky * np.cos(kx * x - t) * np.sin(ky * y)),
        hessian=lambda x, y, t: (
            -kx ** 2 * np.sin(kx * x - t) * np.cos(ky * y),
            -kx * ky * np.cos(kx * x - t) * np.sin(ky * y),
            -ky ** 2 * np.sin(kx * x - t) * np.cos(ky * y),
        ),
    )


def _still(spec):
    return AnalyticVelocity(value=lambda x, y: (np.zeros_like(x), np.zeros_like(x)))


def _uniform_x(spec):
    return AnalyticVelocity(value=lambda x, y: (np.ones_like(x), np.zeros_like(x)))


def _cellular(spec):
    kx, ky = _wavenumbers(spec)
    return AnalyticVelocity(value=lambda x, y: (np.sin(ky * y), np.sin(kx * x)))


ANALYTIC_FIELDS = {
    'static_mode': _static_mode,
    'ramp_translation': _ramp,
    'cellular_flow': _travelling_wave,
}
ANALYTIC_VELOCITIES = {
    'still': _still,
    'uniform_x': _uniform_x,
    'cellular': _cellular,
}
IDENTITY_CASES = (
    ('static_mode', 'still'),
    ('ramp_translation', 'uniform_x'),
    ('cellular_flow', 'cellular'),
)


def lemma1_check(field_id, velocity_id, t, spec):
    """
    Max residual of ``d/dt(grad g) = grad(g_dot) - (grad v)^T grad g``.

    The left side is evaluated in closed form, the right side with the grid
    operators. Physical grids skip the two outermost cell layers.
    """
    try:
        g = ANALYTIC_FIELDS[field_id](spec)
        vel = ANALYTIC_VELOCITIES[velocity_id](spec)
    except KeyError as exc:
        raise ParameterError(f"unknown analytic case {exc.args[0]!r}") from exc
    if spec.periodic and not g.periodic:
        raise ParameterError(f"field {field_id!r} needs a physical grid")

    x, y = spec.cell_centers()
    vx, vy = vel.value(x, y)
    gx, gy = g.grad(x, y, t)
    gtx, gty = g.grad_time_rate(x, y, t)
    hxx, hxy, hyy = g.hessian(x, y, t)
    lhs_x = gtx + vx * hxx + vy * hxy
    lhs_y = gty + vx * hxy + vy * hyy

    g_field = ScalarField(spec, g.value(x, y, t))
    v = VectorField(spec, vx, vy)
    g_dot = ScalarField(spec, g.time_rate(x, y, t)) + advect(g_field, v)
    grad_g = gradient(g_field)
    grad_v = velocity_gradient(v, Ghost.EXTRAPOLATE)
    rhs = gradient(g_dot)
    rhs_x = rhs.x - (grad_v.xx * grad_g.x + grad_v.yx * grad_g.y)
    rhs_y = rhs.y - (grad_v.xy * grad_g.x + grad_v.yy * grad_g.y)

    mask = spec.interior_mask(width=2)
    residual = np.maximum(np.abs(lhs_x - rhs_x), np.abs(lhs_y - rhs_y))
    return float(np.max(residual[mask]))


def lemma1_convergence(field_id, velocity_id, t=0.3, sizes=(32, 64, 128),
                       bc_mode=BoundaryMode.PERIODIC, lx=2 * math.pi, ly=2 * math.pi):
    """Residuals on successively doubled grids and the ratios between them."""
    residuals = [
        lemma1_check(field_id, velocity_id, t, GridSpec(nx=n, ny=n, lx=lx, ly=ly, bc_mode=bc_mode))
        for n in sizes
    ]
    ratios = [a / b if b > 0 else math.inf for a, b in zip(residuals, residuals[1:])]
    return residuals, ratios


# ==================================================================
# OPERATOR ORDERS AND THE CONSISTENCY SUITE
# ==================================================================

def _operator_errors(n):
    spec = GridSpec(nx=n, ny=n)
    x, y = spec.cell_centers()
    f = ScalarField(spec, np.sin(x) * np.cos(2 * y))
    grad_f = gradient(f)
    v = VectorField(spec, np.sin(y) * np.cos(x), np.cos(2 * x) * np.sin(y))
    errors = {
        'gradient': max(np.max(np.abs(grad_f.x - np.cos(x) * np.cos(2 * y))),
                        np.max(np.abs(grad_f.y + 2 * np.sin(x) * np.sin(2 * y)))),
        'divergence': np.max(np.abs(divergence(v).values
                                    - (-np.sin(y) * np.sin(x) + np.cos(2 * x) * np.cos(y)))),
        'laplacian': np.max(np.abs(laplacian(f).values + 5 * f.values)),
        'biharmonic': np.max(np.abs(biharmonic(f).values - 25 * f.values)),
        'curl2d': np.max(np.abs(curl2d(v).values
                                - (-2 * np.sin(2 * x) * np.sin(y) - np.cos(y) * np.cos(x)))),
        'sym_gradient': np.max(np.abs(sym_gradient(v).xy
                                      - 0.5 * (np.cos(y) * np.cos(x) - 2 * np.sin(2 * x) * np.sin(y)))),
        'advect': np.max(np.abs(advect(f, v).values
                                - (v.x * np.cos(x) * np.cos(2 * y) - v.y * 2 * np.sin(x) * np.sin(2 * y)))),
    }
    return {name: float(err) for name, err in errors.items()}


def operator_convergence_suite(sizes=(32, 64, 128)):
    """``{operator: (errors, min ratio)}`` on analytic trigonometric fields."""
    per_size = [_operator_errors(n) for n in sizes]
    suite = {}
    for name in per_size[0]:
        errors = [entry[name] for entry in per_size]
        ratios = [a / b for a, b in zip(errors, errors[1:])]
        suite[name] = (errors, min(ratios))
    return suite


def adjointness_residual(n=32, seed=0):
    """Relative mismatch of ``integral f div F`` and ``-integral grad f . F`` on random periodic fields."""
    spec = GridSpec(nx=n, ny=n)
    rng = np.random.default_rng(seed)
    f = ScalarField(spec, rng.standard_normal(spec.shape))
    F = VectorField(spec, rng.standard_normal(spec.shape), rng.standard_normal(spec.shape))
    lhs = integrate(f * divergence(F))
    rhs = -float(np.sum(gradient(f).dot(F))) * spec.cell_area
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def psi_identity_residual(params, n_samples=100, seed=0):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.2, 3.0, n_samples)
    c = rng.uniform(-1.5, 1.5, n_samples)
    grad_c = (rng.uniform(-2, 2, n_samples), rng.uniform(-2, 2, n_samples))
    psi = free_energy_density(theta, c, grad_c, params)
    e = internal_energy_density(theta, c, grad_c, params)
    eta = entropy_density(theta, c, params)
    return float(np.max(np.abs(psi - (e - theta * eta)) / np.maximum(np.abs(psi), 1.0)))


def run_consistency_suite(params=None):
    """Operator orders, adjointness, the gradient identity and the constitutive restrictions."""
    from .material import MaterialParams

    params = params or MaterialParams()
    checks = []
    for name, (errors, ratio) in operator_convergence_suite().items():
        checks.append(CheckResult(f"order:{name}", ratio, 3.5, ratio >= 3.5))

    adj = adjointness_residual()
    checks.append(CheckResult('adjointness', adj, 1e-10, adj < 1e-10))

    spec = GridSpec(nx=32, ny=32)
    rng = np.random.default_rng(1)
    F = VectorField(spec, rng.standard_normal(spec.shape), rng.standard_normal(spec.shape))
    scale = float(np.sum(np.abs(F.x)) + np.sum(np.abs(F.y))) * spec.cell_area
    cons = abs(integrate(divergence(F))) / scale
    checks.append(CheckResult('conservation', cons, 1e-12, cons < 1e-12))

    for field_id, velocity_id in IDENTITY_CASES:
        if field_id == 'ramp_translation':
            residual = lemma1_check(field_id, velocity_id, 0.7,
                                    GridSpec(nx=32, ny=32, bc_mode=BoundaryMode.PHYSICAL))
            checks.append(CheckResult('gradient_identity:ramp_translation', residual, 1e-9, residual < 1e-9))
        elif field_id == 'static_mode':
            residual = lemma1_check(field_id, velocity_id, 0.0, GridSpec(nx=32, ny=32))
            checks.append(CheckResult('gradient_identity:static_mode', residual, 1e-12, residual < 1e-12))
        else:
            _, ratios = lemma1_convergence(field_id, velocity_id)
            checks.append(CheckResult(f"gradient_identity:{field_id}", min(ratios), 3.5, min(ratios) >= 3.5))

    restriction = thermo_restriction_check(params)
    checks.append(CheckResult('restrictions', restriction.max_error, 1e-6, restriction.passed(1e-6)))
    psi = psi_identity_residual(params)
    checks.append(CheckResult('psi_identity', psi, 1e-12, psi < 1e-12))

    report = ConsistencyReport(checks=checks)
    for check in report.checks:
        log = logger.info if check.passed else logger.error
        status = 'ok' if check.passed else 'FAILED'
        log(f"{check.name:<24} {check.value:.3e} (threshold {check.threshold:.1e}) {status}")
    return report
