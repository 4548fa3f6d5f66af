"""
Time integration of the coupled Cahn-Hilliard / Navier-Stokes / heat system.

One step runs three sub-steps in a fixed order:

1. ``ch_step``   c^n -> c^{n+1}   stabilized IMEX solve for the increment
2. ``ns_step``   v^n -> v^{n+1}   explicit predictor + pressure projection
3. ``heat_step`` theta^n -> theta^{n+1}  explicit update with v^{n+1}

All three use the chemistry (``ChemFields``) evaluated on the state at the
start of the step, except the phase-change heating ``rho0 theta G_dot``,
which takes ``G_dot`` from the increment ``ch_step`` produced
(``realized_g_dot``). ``explicit_dt_limit`` gives the remaining explicit
bounds. Failures are re-raised as ``StepFailure`` tagged with the stage
that failed.
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from . import thermo
from .exceptions import LinearSolverError, ParameterError, PhaseFieldError, StepFailure
from .grid import (
    Ghost,
    ScalarField,
    VectorField,
    TensorField,
    advect,
    central_symbols,
    curl2d,
    divergence,
    divergence_matrix,
    gradient,
    laplacian_matrix,
    laplacian_symbol,
    require_same_grid,
    sym_gradient,
    tensor_divergence,
    weighted_laplacian,
)
from .material import (
    chemical_potential_u,
    conductivity,
    effective_u,
    g_prime,
    mobility,
    viscosity,
)

logger = logging.getLogger(__name__)

THETA_MIN = 1e-8
CH_RTOL = 1e-10


# ==================================================================
# STATE AND CONFIGURATION
# ==================================================================

@dataclass(frozen=True, eq=False)
class State:
    """Full simulation state; every field lives on one grid and ``theta > 0``."""

    c: ScalarField
    v: VectorField
    p: ScalarField
    theta: ScalarField
    t: float = 0.0

    def __post_init__(self):
        require_same_grid(self.c, self.v, self.p, self.theta)
        if np.any(self.theta.values <= 0):
            raise ParameterError(f"theta must be positive everywhere, min is {self.theta.values.min()}")

    @property
    def spec(self):
        return self.c.spec

    @classmethod
    def at_rest(cls, c, theta, t=0.0):
        spec = c.spec
        if not isinstance(theta, ScalarField):
            theta = ScalarField.full(spec, theta)
        return cls(c, VectorField.zeros(spec), ScalarField.zeros(spec), theta, t)

    def evolve(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class SourceTerms:
    """Body force per unit mass ``b`` and heat supply ``r``; ``None`` means zero."""

    b: VectorField = None
    r: ScalarField = None

    @classmethod
    def uniform(cls, spec, body_force_x=0.0, body_force_y=0.0, heat_supply=0.0):
        b = None
        if body_force_x or body_force_y:
            b = VectorField(spec, np.full(spec.shape, float(body_force_x)), np.full(spec.shape, float(body_force_y)))
        r = ScalarField.full(spec, heat_supply) if heat_supply else None
        return cls(b=b, r=r)

    def body_force(self, spec):
        return self.b if self.b is not None else VectorField.zeros(spec)

    def heat_supply(self, spec):
        return self.r if self.r is not None else ScalarField.zeros(spec)


@dataclass(frozen=True)
class StepConfig:
    dt: float = 1e-3
    stabilization_s: float = 2.0
    projection_tol: float = 1e-8
    max_linear_iters: int = 2000

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.stabilization_s >= 0:
            raise ParameterError(f"stabilization_s must be non-negative, got {self.stabilization_s}")
        if not self.projection_tol > 0:
            raise ParameterError(f"projection_tol must be positive, got {self.projection_tol}")
        if int(self.max_linear_iters) < 1:
            raise ParameterError(f"max_linear_iters must be >= 1, got {self.max_linear_iters}")


@dataclass(frozen=True, eq=False)
class ChemFields:
    """Chemistry of one state: ``mu``, ``J = M grad mu``, material rate ``c_dot`` and ``G'(c) c_dot``."""

    mu: ScalarField
    flux_j: VectorField
    c_dot: ScalarField
    g_dot: ScalarField


@dataclass(frozen=True, eq=False)
class StepOutcome:
    state: State
    chem: ChemFields
    theta_floor_hits: int = 0
    max_divergence: float = 0.0


@dataclass(frozen=True, eq=False)
class StepRecord:
    """One emitted step of ``run``; ``audit`` is ``None`` on non-audited steps."""

    step: int
    state: State
    audit: object = None
    snapshot: bool = False
    theta_floor_hits: int = 0


# ==================================================================
# LINEAR SOLVES
# ==================================================================

def _conjugate_gradient(matrix, rhs, stage, cfg, rtol=0.0, atol=0.0):
    iterations = 0

    def count(_xk):
        nonlocal iterations
        iterations += 1

    x, info = cg(matrix, rhs, rtol=rtol, atol=atol, maxiter=int(cfg.max_linear_iters), callback=count)
    if info != 0:
        residual = float(np.linalg.norm(rhs - matrix @ x))
        raise LinearSolverError(stage, iterations, residual)
    logger.debug(f"{stage} solve converged in {iterations} iterations")
    return x, iterations


@lru_cache(maxsize=8)
def _ch_matrix(spec, dt, biharmonic_coeff, laplacian_coeff):
    lap = laplacian_matrix(spec, Ghost.MIRROR)
    eye = sp.identity(spec.size, format='csr')
    return (eye + dt * biharmonic_coeff * (lap @ lap) - dt * laplacian_coeff * lap).tocsr()


@lru_cache(maxsize=None)
def _projection_matrix(spec):
    d = divergence_matrix(spec, Ghost.ANTIMIRROR)
    return (d @ d.T).tocsr()


# ==================================================================
# CAHN-HILLIARD
# ==================================================================

def cahn_hilliard_rates(c, u, params):
    """Chemistry for a prescribed effective temperature ``u`` (field or number)."""
    mu = chemical_potential_u(c, u, params)
    m = ScalarField(c.spec, mobility(c.values, params))
    flux_j = gradient(mu).scaled(m)
    c_dot = weighted_laplacian(m, mu) / params.rho0
    g_dot = ScalarField(c.spec, g_prime(c.values) * c_dot.values)
    return ChemFields(mu=mu, flux_j=flux_j, c_dot=c_dot, g_dot=g_dot)


def ch_rhs(state, params, vorticity_ghost=Ghost.ANTIMIRROR):
    omega = curl2d(state.v, vorticity_ghost)
    u = effective_u(state.theta.values, omega.values)
    return cahn_hilliard_rates(state.c, u, params)


def transport_rate(c, v):
    """
    Skew-symmetric transport ``(v . grad c + div(c v)) / 2`` with its mean removed.

    Equals ``v . grad c`` for solenoidal ``v``. Because ``divergence`` is the
    negative adjoint of ``gradient``, ``sum(c * rate)`` vanishes up to the
    mean correction, so transport neither creates nor destroys ``integral G(c)``.
    """
    if not (np.any(v.x) or np.any(v.y)):
        return ScalarField.zeros(c.spec)
    rate = 0.5 * (advect(c, v).values + divergence(v.scaled(c), Ghost.ANTIMIRROR).values)
    return ScalarField(c.spec, rate - rate.mean())


def realized_g_dot(state, c_new, cfg):
    """``G'(c) c_dot`` with ``c_dot`` the material rate the Cahn-Hilliard stage actually took."""
    c_dot = (c_new.values - state.c.values) / cfg.dt + transport_rate(state.c, state.v).values
    return ScalarField(state.spec, g_prime(state.c.values) * c_dot)


def ch_update(c, rate, params, cfg):
    """
    Solve ``(I + dt a L^2 - dt b L) delta = dt * rate`` and return ``c + delta``.

    ``a = max(M) gamma / rho0`` and ``b = s / rho0``. Periodic grids solve
    diagonally in Fourier space, physical grids by conjugate gradients.
    Returns the new concentration and the iteration count (0 for FFT).
    """
    spec = c.spec
    m_bar = float(np.max(mobility(c.values, params)))
    a = m_bar * params.gamma / params.rho0
    b = cfg.stabilization_s / params.rho0
    rhs = cfg.dt * rate.values
    if spec.periodic:
        lam = laplacian_symbol(spec)
        delta = np.real(np.fft.ifft2(np.fft.fft2(rhs) / (1 + cfg.dt * a * lam ** 2 - cfg.dt * b * lam)))
        iterations = 0
    else:
        matrix = _ch_matrix(spec, cfg.dt, a, b)
        flat, iterations = _conjugate_gradient(matrix, rhs.ravel(), 'cahn_hilliard', cfg, rtol=CH_RTOL)
        delta = flat.reshape(spec.shape)
    # the increment carries exactly the mean of the rate
    delta = delta - delta.mean() + rhs.mean()
    return ScalarField(spec, c.values + delta), iterations


def ch_step(state, params, cfg, chem=None):
    chem = chem if chem is not None else ch_rhs(state, params)
    rate = chem.c_dot - transport_rate(state.c, state.v)
    c_new, _ = ch_update(state.c, rate, params, cfg)
    return c_new


class FrozenCahnHilliard:
    """
    Cahn-Hilliard stepping with a fixed effective temperature and no flow.

    Used wherever the chemistry has to be isolated from the coupled system.
    """

    def __init__(self, u, params, cfg):
        self.u = u
        self.params = params
        self.cfg = cfg

    def rates(self, c):
        return cahn_hilliard_rates(c, self.u, self.params)

    def step(self, c):
        c_new, _ = ch_update(c, self.rates(c).c_dot, self.params, self.cfg)
        return c_new

    def run(self, c, n_steps):
        """Yield ``(step, c)`` after each of ``n_steps`` steps."""
        for step in range(1, n_steps + 1):
            c = self.step(c)
            yield step, c


# ==================================================================
# NAVIER-STOKES
# ==================================================================

def ericksen_force(c, params):
    """Capillary force ``-gamma rho0 div(grad c (x) grad c)``."""
    g = gradient(c)
    stress = TensorField(c.spec, g.x * g.x, g.x * g.y, g.y * g.x, g.y * g.y)
    return tensor_divergence(stress).scaled(-params.gamma * params.rho0)


def skew_force(c_dot, c, v, params, vorticity_ghost=Ghost.ANTIMIRROR):
    """
    Divergence of the skew stress, ``rho0 curl(G_dot curl v)``.

    In 2D with ``w = G_dot * omega`` this is ``rho0 * (dw/dy, -dw/dx)``.
    """
    require_same_grid(c_dot, c, v)
    omega = curl2d(v, vorticity_ghost)
    w = ScalarField(c.spec, g_prime(c.values) * c_dot.values * omega.values)
    grad_w = gradient(w)
    return VectorField(c.spec, params.rho0 * grad_w.y, -params.rho0 * grad_w.x)


def viscous_force(v, c, params):
    """``div(2 nu D) = nu lap v + nu grad(div v) + 2 D grad nu``."""
    spec = v.spec
    nu = viscosity(c.values, params)
    lap = laplacian_matrix(spec, Ghost.ANTIMIRROR)
    lap_x = (lap @ v.x.ravel()).reshape(spec.shape)
    lap_y = (lap @ v.y.ravel()).reshape(spec.shape)
    grad_div = gradient(divergence(v))
    strain = sym_gradient(v)
    grad_nu = gradient(ScalarField(spec, nu))
    return VectorField(
        spec,
        nu * (lap_x + grad_div.x) + 2 * (strain.xx * grad_nu.x + strain.xy * grad_nu.y),
        nu * (lap_y + grad_div.y) + 2 * (strain.yx * grad_nu.x + strain.yy * grad_nu.y),
    )


def project(v_star, cfg):
    """
    Remove the gradient part of ``v_star``.

    Returns ``(v, phi, iterations)`` with ``v = v_star - grad phi`` and
    ``phi`` of zero mean. On periodic grids the central divergence of ``v``
    vanishes to round-off; on physical grids it is below
    ``projection_tol`` in the max norm.
    """
    spec = v_star.spec
    if spec.periodic:
        sx, sy = central_symbols(spec)
        vx_hat = np.fft.fft2(v_star.x)
        vy_hat = np.fft.fft2(v_star.y)
        symbol = sx ** 2 + sy ** 2
        div_hat = 1j * (sx * vx_hat + sy * vy_hat)
        phi_hat = np.zeros_like(div_hat)
        # Nyquist and checkerboard modes have a round-off symbol and no central divergence
        nonzero = symbol > 1e-12 * symbol.max()
        phi_hat[nonzero] = -div_hat[nonzero] / symbol[nonzero]
        v = VectorField(
            spec,
            np.real(np.fft.ifft2(vx_hat - 1j * sx * phi_hat)),
            np.real(np.fft.ifft2(vy_hat - 1j * sy * phi_hat)),
        )
        return v, np.real(np.fft.ifft2(phi_hat)), 0

    d = divergence_matrix(spec, Ghost.ANTIMIRROR)
    stacked = np.concatenate([v_star.x.ravel(), v_star.y.ravel()])
    psi, iterations = _conjugate_gradient(
        _projection_matrix(spec), d @ stacked, 'projection', cfg, atol=0.5 * cfg.projection_tol,
    )
    corrected = stacked - d.T @ psi
    v = VectorField(spec, corrected[:spec.size], corrected[spec.size:])
    # D^T psi = -grad(psi) with mirrored ghosts, so phi = -psi
    phi = -psi.reshape(spec.shape)
    return v, phi - phi.mean(), iterations


def ns_step(state, chem, src, params, cfg, vorticity_ghost=Ghost.ANTIMIRROR):
    """Explicit momentum predictor followed by the pressure projection; returns ``(v, p)``."""
    spec = state.spec
    v = state.v
    rho0 = params.rho0
    forces = (
        viscous_force(v, state.c, params)
        + ericksen_force(state.c, params)
        + skew_force(chem.c_dot, state.c, v, params, vorticity_ghost)
    )
    b = src.body_force(spec)
    conv_x = advect(v.x_component, v, Ghost.ANTIMIRROR).values
    conv_y = advect(v.y_component, v, Ghost.ANTIMIRROR).values
    v_star = VectorField(
        spec,
        v.x + cfg.dt * (-conv_x + forces.x / rho0 + b.x),
        v.y + cfg.dt * (-conv_y + forces.y / rho0 + b.y),
    )
    v_new, phi, _ = project(v_star, cfg)
    p = ScalarField(spec, rho0 * phi / cfg.dt)
    return v_new, p


# ==================================================================
# HEAT
# ==================================================================

def heat_step(state, chem, src, params, cfg, g_dot=None):
    """
    Explicit temperature update with the velocity carried by ``state``.

    ``g_dot`` is the phase-change rate ``G'(c) c_dot`` feeding ``rho0 theta G_dot``;
    ``advance`` passes ``realized_g_dot`` so the heating follows the implicit
    concentration increment. Without it ``chem.g_dot`` is used.
    Returns ``(theta, floor_hits)``; values below ``THETA_MIN`` are floored.
    """
    spec = state.spec
    theta = state.theta
    rho0 = params.rho0
    g_dot = chem.g_dot if g_dot is None else g_dot
    kappa = ScalarField(spec, conductivity(theta.values, params))
    heating = (
        thermo.viscous_dissipation_density(state.v, state.c, params)
        + rho0 * theta.values * g_dot.values
        + chem.flux_j.dot(gradient(chem.mu))
        + weighted_laplacian(kappa, theta).values
        + rho0 * src.heat_supply(spec).values
    )
    rate = heating / (rho0 * params.spec_heat) - advect(theta, state.v).values
    updated = theta.values + cfg.dt * rate
    if not np.all(np.isfinite(updated)):
        raise FloatingPointError("temperature update produced non-finite values")
    below = updated < THETA_MIN
    hits = int(np.count_nonzero(below))
    if hits:
        logger.warning(
            f"Temperature floor hit in {hits} cells at t={state.t + cfg.dt:.6g} "
            f"(min before floor {float(updated.min()):.3e})"
        )
        updated = np.where(below, THETA_MIN, updated)
    return ScalarField(spec, updated), hits


# ==================================================================
# COUPLED STEPPING
# ==================================================================

def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (PhaseFieldError, ArithmeticError) as exc:
        if isinstance(exc, StepFailure):
            raise
        raise StepFailure(name, exc) from exc


def advance(state, src, params, cfg, vorticity_ghost=Ghost.ANTIMIRROR):
    """One coupled step with its by-products (chemistry, floor hits, divergence)."""
    chem = _stage('cahn_hilliard', ch_rhs, state, params, vorticity_ghost)
    c_new = _stage('cahn_hilliard', ch_step, state, params, cfg, chem)
    v_new, p_new = _stage('navier_stokes', ns_step, state, chem, src, params, cfg, vorticity_ghost)
    g_dot = realized_g_dot(state, c_new, cfg)
    intermediate = state.evolve(v=v_new, p=p_new)
    theta_new, hits = _stage('heat', heat_step, intermediate, chem, src, params, cfg, g_dot)
    new_state = State(c_new, v_new, p_new, theta_new, state.t + cfg.dt)
    max_div = float(np.max(np.abs(divergence(v_new).values)))
    return StepOutcome(state=new_state, chem=chem, theta_floor_hits=hits, max_divergence=max_div)


def coupled_step(state, src, params, cfg):
    return advance(state, src, params, cfg).state


def step_count(t_end, dt):
    return max(0, int(math.ceil(t_end / dt - 1e-9)))


def explicit_dt_limit(spec, params):
    """
    Largest ``dt`` the explicit viscous and conductive terms tolerate on ``spec``.

    Forward Euler on the 5-point Laplacian needs
    ``dt * D * (1/dx^2 + 1/dy^2) <= 1/2`` for a diffusivity ``D``, here
    ``max(nu_a, nu_b)`` or ``kappa0 / (rho0 spec_heat)``.
    """
    inverse_h2 = 1 / spec.dx ** 2 + 1 / spec.dy ** 2
    diffusivity = max(params.nu_a, params.nu_b, params.kappa0 / (params.rho0 * params.spec_heat))
    return 0.5 / (diffusivity * inverse_h2)


def run(initial, src, params, cfg, t_end, snapshot_every=0, audit_every=1):
    """
    Iterate ``advance`` up to ``t_end`` and yield a ``StepRecord`` per step.

    Audits are computed every ``audit_every`` steps and on the last step;
    ``snapshot`` marks every ``snapshot_every``-th step and the last one.
    """
    n_steps = step_count(t_end, cfg.dt)
    limit = explicit_dt_limit(initial.spec, params)
    if cfg.dt > limit:
        logger.warning(f"dt={cfg.dt:g} exceeds the explicit diffusion limit {limit:.3g}")
    state = initial
    for step in range(1, n_steps + 1):
        outcome = advance(state, src, params, cfg)
        last = step == n_steps
        audit = None
        if last or (audit_every and step % audit_every == 0):
            audit = thermo.audit_step(
                state, outcome.state, outcome.chem, src, params, cfg,
                initial=initial, theta_floor_hits=outcome.theta_floor_hits,
            )
        snapshot = last or bool(snapshot_every and step % snapshot_every == 0)
        yield StepRecord(
            step=step, state=outcome.state, audit=audit,
            snapshot=snapshot, theta_floor_hits=outcome.theta_floor_hits,
        )
        state = outcome.state
