"""
Energy and entropy functionals plus the per-step thermodynamic audit.

Closed forms (``e0 = spec_heat * theta``)::

    e   = spec_heat * theta + theta0 F(c) + gamma/2 |grad c|^2
    eta = -G(c) + spec_heat * ln(theta)
    psi = e - theta * eta
        = theta0 F(c) + theta G(c) + gamma/2 |grad c|^2 + spec_heat * theta (1 - ln theta)

The audit never raises: every check is reported as a number or a flag.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .grid import (
    ScalarField,
    advect,
    curl2d,
    divergence,
    gradient,
    gradient_energy,
    integrate,
    velocity_gradient,
    weighted_laplacian,
)
from .material import conductivity, f_prime, f_val, g_prime, g_val, viscosity

logger = logging.getLogger(__name__)

CD_TOLERANCE_PER_AREA = 1e-6


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    internal: float
    free_energy: float
    entropy: float
    mass_diff: float

    @property
    def total(self):
        return self.kinetic + self.internal


@dataclass(frozen=True)
class DissipationReport:
    viscous: float
    chemical: float
    thermal: float
    heat_absorption: float
    nonnegative: bool = True


@dataclass(frozen=True)
class AuditReport:
    time: float
    energy: EnergyReport
    dissipation: DissipationReport
    cd_residual: float
    cd_tolerance: float
    power_identity_residual: float
    energy_budget_residual: float
    mass_drift: float
    theta_floor_hits: int = 0

    @property
    def cd_satisfied(self):
        return self.cd_residual >= -self.cd_tolerance


@dataclass(frozen=True)
class RestrictionReport:
    """Largest relative finite-difference error of each constitutive restriction."""

    theta_error: float
    c_error: float
    grad_error: float
    samples: int

    @property
    def max_error(self):
        return max(self.theta_error, self.c_error, self.grad_error)

    def passed(self, tol=1e-6):
        return self.max_error < tol


def _check_theta(theta):
    if np.any(np.asarray(theta) <= 0):
        raise ParameterError("theta must be positive")


def _grad_sq(grad_c):
    gx, gy = grad_c
    return np.asarray(gx, dtype=float) ** 2 + np.asarray(gy, dtype=float) ** 2


# ==================================================================
# DENSITIES
# ==================================================================

def internal_energy_density(theta, c, grad_c, params):
    """``e`` per unit mass; ``grad_c`` is an ``(x, y)`` pair of numbers or arrays."""
    return (params.spec_heat * np.asarray(theta, dtype=float)
            + params.theta0 * np.asarray(f_val(c))
            + 0.5 * params.gamma * _grad_sq(grad_c))


def free_energy_density(theta, c, grad_c, params):
    _check_theta(theta)
    theta = np.asarray(theta, dtype=float)
    return (params.theta0 * np.asarray(f_val(c))
            + theta * np.asarray(g_val(c))
            + 0.5 * params.gamma * _grad_sq(grad_c)
            + params.spec_heat * theta * (1 - np.log(theta)))


def entropy_density(theta, c, params):
    _check_theta(theta)
    return -np.asarray(g_val(c)) + params.spec_heat * np.log(np.asarray(theta, dtype=float))


def thermo_restriction_check(params, sample_states=None, n_samples=100, seed=0, step=1e-5):
    """
    Compare centred differences of ``free_energy_density`` with the closed forms
    ``d psi/d theta = -eta``, ``d psi/dc = theta0 F' + theta G'`` and
    ``d psi/d grad c = gamma grad c``.

    ``sample_states`` is an ``(n, 4)`` array of ``(theta, c, gx, gy)`` rows;
    by default ``n_samples`` rows are drawn from a seeded generator.
    """
    if sample_states is None:
        rng = np.random.default_rng(seed)
        sample_states = np.column_stack([
            rng.uniform(0.2, 3.0, n_samples),
            rng.uniform(-1.5, 1.5, n_samples),
            rng.uniform(-2.0, 2.0, n_samples),
            rng.uniform(-2.0, 2.0, n_samples),
        ])
    states = np.asarray(sample_states, dtype=float)
    theta, c, gx, gy = states.T

    def psi(t, cc, x, y):
        return free_energy_density(t, cc, (x, y), params)

    def rel(approx, exact):
        return float(np.max(np.abs(approx - exact) / np.maximum(np.abs(exact), 1.0)))

    d_theta = (psi(theta + step, c, gx, gy) - psi(theta - step, c, gx, gy)) / (2 * step)
    d_c = (psi(theta, c + step, gx, gy) - psi(theta, c - step, gx, gy)) / (2 * step)
    d_gx = (psi(theta, c, gx + step, gy) - psi(theta, c, gx - step, gy)) / (2 * step)
    d_gy = (psi(theta, c, gx, gy + step) - psi(theta, c, gx, gy - step)) / (2 * step)

    return RestrictionReport(
        theta_error=rel(d_theta, -entropy_density(theta, c, params)),
        c_error=rel(d_c, params.theta0 * f_prime(c) + theta * g_prime(c)),
        grad_error=max(rel(d_gx, params.gamma * gx), rel(d_gy, params.gamma * gy)),
        samples=len(states),
    )


# ==================================================================
# GLOBAL FUNCTIONALS
# ==================================================================

def mass(state, params):
    """``m_A - m_B = integral of rho0 c``."""
    return params.rho0 * integrate(state.c)


def mass_drift(initial, current, params):
    """Relative drift of ``mass``; the denominator is at least one."""
    m0 = mass(initial, params)
    return abs(mass(current, params) - m0) / max(abs(m0), 1.0)


def kinetic_energy(state, params):
    return 0.5 * params.rho0 * float(np.sum(state.v.norm_squared())) * state.spec.cell_area


def ginzburg_landau_energy(c, u, params):
    """``integral of theta0 F + u G + gamma/2 |grad c|^2`` for a fixed ``u``."""
    u = u.values if isinstance(u, ScalarField) else u
    bulk = ScalarField(c.spec, params.theta0 * f_val(c.values) + u * g_val(c.values))
    return integrate(bulk) + params.gamma * gradient_energy(c)


def energy_report(state, params):
    c, theta = state.c.values, state.theta.values
    rho0 = params.rho0
    capillary = rho0 * params.gamma * gradient_energy(state.c)
    spec = state.spec
    internal = rho0 * float(np.sum(params.spec_heat * theta + params.theta0 * f_val(c))) * spec.cell_area
    free = rho0 * float(np.sum(
        params.theta0 * f_val(c) + theta * g_val(c) + params.spec_heat * theta * (1 - np.log(theta))
    )) * spec.cell_area
    entropy = rho0 * float(np.sum(entropy_density(theta, c, params))) * spec.cell_area
    return EnergyReport(
        kinetic=kinetic_energy(state, params),
        internal=internal + capillary,
        free_energy=free + capillary,
        entropy=entropy,
        mass_diff=mass(state, params),
    )


# ==================================================================
# DISSIPATION
# ==================================================================

def viscous_dissipation_density(v, c, params):
    """
    ``nu (|grad v|^2 + grad v^T : grad v)``, written as the sum of squares
    ``nu (2 v_x,x^2 + 2 v_y,y^2 + (v_x,y + v_y,x)^2)`` it equals.
    """
    g = velocity_gradient(v)
    nu = viscosity(c.values, params)
    return nu * (2 * g.xx ** 2 + 2 * g.yy ** 2 + (g.xy + g.yx) ** 2)


def dissipation_densities(state, chem, params):
    """Pointwise viscous, chemical and thermal dissipation integrands."""
    theta = state.theta
    kappa = conductivity(theta.values, params)
    grad_theta = gradient(theta)
    return (
        viscous_dissipation_density(state.v, state.c, params),
        chem.flux_j.dot(gradient(chem.mu)),
        kappa * grad_theta.norm_squared() / theta.values,
    )


def dissipation_report(state, chem, src, params):
    spec = state.spec
    viscous, chemical, thermal = dissipation_densities(state, chem, params)
    kappa = ScalarField(spec, conductivity(state.theta.values, params))
    absorption = weighted_laplacian(kappa, state.theta) + params.rho0 * src.heat_supply(spec)
    area = spec.cell_area
    return DissipationReport(
        viscous=float(np.sum(viscous)) * area,
        chemical=float(np.sum(chemical)) * area,
        thermal=float(np.sum(thermal)) * area,
        heat_absorption=integrate(absorption),
        nonnegative=bool(np.all(viscous >= 0) and np.all(chemical >= 0) and np.all(thermal >= 0)),
    )


# ==================================================================
# AUDIT
# ==================================================================

def clausius_duhem_residual(before, after, src, params, dt):
    """Global ``integral of rho0 d(eta)/dt + div(q/theta) - rho0 r/theta``."""
    spec = before.spec
    rho0 = params.rho0
    eta0 = entropy_density(before.theta.values, before.c.values, params)
    eta1 = entropy_density(after.theta.values, after.c.values, params)
    theta = before.theta
    kappa = conductivity(theta.values, params)
    q_over_theta = gradient(theta).scaled(-kappa / theta.values)
    supply = src.heat_supply(spec).values
    integrand = rho0 * (eta1 - eta0) / dt + divergence(q_over_theta).values - rho0 * supply / theta.values
    return float(np.sum(integrand)) * spec.cell_area


def power_identity_residual(before, after, chem, params, dt):
    """
    Internal powers of momentum and concentration against their sum.

    Both sides are integrated; ``c_dot`` is the step difference
    ``(c1 - c0)/dt + v0 . grad c0`` and ``G_dot = G'(c0) c_dot``.
    """
    spec = before.spec
    rho0, gamma, theta0 = params.rho0, params.gamma, params.theta0
    c0, c1, v0, v1 = before.c, after.c, before.v, after.v
    c_dot = ScalarField(spec, (c1.values - c0.values) / dt + advect(c0, v0).values)
    g_dot = g_prime(c0.values) * c_dot.values
    omega_sq = curl2d(v0).values ** 2
    grad_c = gradient(c0)
    grad_v = velocity_gradient(v0)
    kinetic_rate = rho0 * (v1.norm_squared() - v0.norm_squared()) / (2 * dt)
    viscous = viscous_dissipation_density(v1, c0, params)
    ericksen = -gamma * rho0 * (
        grad_c.x * grad_c.x * grad_v.xx + grad_c.x * grad_c.y * grad_v.xy
        + grad_c.y * grad_c.x * grad_v.yx + grad_c.y * grad_c.y * grad_v.yy
    )
    chemical = chem.flux_j.dot(gradient(chem.mu))
    p_mech = kinetic_rate + viscous + ericksen - rho0 * g_dot * omega_sq
    p_chem = (rho0 * theta0 * f_prime(c0.values) * c_dot.values
              + rho0 * g_dot * (before.theta.values + omega_sq)
              + rho0 * gamma * gradient(c_dot).dot(grad_c)
              + chemical)

    grad_c1 = gradient(c1)
    stored_rate = rho0 * (
        kinetic_rate / rho0
        + theta0 * (f_val(c1.values) - f_val(c0.values)) / dt
        + 0.5 * gamma * (grad_c1.norm_squared() - grad_c.norm_squared()) / dt
    )
    rhs = stored_rate + viscous + rho0 * before.theta.values * g_dot + chemical
    return abs(float(np.sum(p_mech + p_chem - rhs)) * spec.cell_area)


def total_energy(state, params):
    report = energy_report(state, params)
    return report.kinetic + report.internal


def energy_budget_residual(before, after, src, params, dt):
    """``d/dt integral of rho0 E - integral of rho0 (b . v + r)`` over one step."""
    spec = before.spec
    rho0 = params.rho0
    b = src.body_force(spec)
    v_mid = before.v + after.v
    supply = rho0 * (0.5 * b.dot(v_mid) + src.heat_supply(spec).values)
    return (total_energy(after, params) - total_energy(before, params)) / dt - float(np.sum(supply)) * spec.cell_area


def audit_step(state_before, state_after, chem, src, params, cfg, initial=None, theta_floor_hits=0):
    """Audit one coupled step; ``chem`` is the chemistry of ``state_before``."""
    dt = cfg.dt
    spec = state_before.spec
    origin = initial if initial is not None else state_before
    mid = state_before.evolve(v=state_after.v)
    report = AuditReport(
        time=state_after.t,
        energy=energy_report(state_after, params),
        dissipation=dissipation_report(mid, chem, src, params),
        cd_residual=clausius_duhem_residual(state_before, state_after, src, params, dt),
        cd_tolerance=CD_TOLERANCE_PER_AREA * spec.area,
        power_identity_residual=power_identity_residual(state_before, state_after, chem, params, dt),
        energy_budget_residual=energy_budget_residual(state_before, state_after, src, params, dt),
        mass_drift=mass_drift(origin, state_after, params),
        theta_floor_hits=theta_floor_hits,
    )
    if not report.dissipation.nonnegative:
        logger.warning(f"Negative pointwise dissipation at t={report.time:.6g}")
    return report
