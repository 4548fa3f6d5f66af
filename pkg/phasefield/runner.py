"""
Orchestration behind the management commands.

Each ``run_*`` function takes a parsed ``RunConfig``, drives the numerical
core and writes its outputs; the commands only handle arguments, the run
ledger and exit codes.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, dynamics, snapshots, thermo, verify
from .exceptions import ParameterError
from .initial_conditions import build_initial_state
from .material import MaterialParams

logger = logging.getLogger(__name__)

DIAGNOSTICS_FILE = 'diagnostics.csv'

DISPERSION_COLUMNS = ['k', 'sigma_predicted', 'sigma_measured', 'rel_error', 'samples']
SPINODAL_COLUMNS = ['u', 'grew', 'amplitude_ratio']
STIR_COLUMNS = ['run', 'theta', 'angular_velocity', 'min_omega_sq', 'amplitude_ratio', 'grew']
ENERGY_COLUMNS = ['time', 'mass_diff', 'kinetic', 'internal', 'free_energy', 'entropy', 'total']


@dataclass(frozen=True)
class RunSummary:
    output_dir: Path
    steps: int
    final_time: float
    mass_drift: float
    snapshots: int
    theta_floor_hits: int
    cd_violations: int


# ==================================================================
# SIMULATE
# ==================================================================

def run_simulation(config, output_dir=None):
    """Full coupled run: snapshots plus one diagnostics row per audited step."""
    out = config.resolve_output_dir(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / DIAGNOSTICS_FILE
    if csv_path.exists():
        csv_path.unlink()

    spec = config.grid
    initial = build_initial_state(spec, config.initial, config.step)
    src = config.sources.build(spec)
    snapshots.write_state(initial, out, 0)
    logger.info(
        f"Simulation start: grid {spec.nx}x{spec.ny} ({spec.bc_mode.value}), "
        f"dt={config.step.dt:g}, t_end={config.run.t_end:g}, output {out}"
    )

    steps = written = floor_hits = cd_violations = 0
    state = initial
    for record in dynamics.run(initial, src, config.material, config.step, config.run.t_end,
                               snapshot_every=config.run.snapshot_every,
                               audit_every=config.run.audit_every):
        steps, state = record.step, record.state
        floor_hits += record.theta_floor_hits
        if record.audit is not None:
            diagnostics.write_diagnostics_row(record.audit, record.step, csv_path)
            if not record.audit.cd_satisfied:
                cd_violations += 1
                logger.warning(
                    f"Clausius-Duhem residual {record.audit.cd_residual:.3e} below tolerance at step {record.step}"
                )
        if record.snapshot:
            snapshots.write_state(record.state, out, record.step)
            written += 1

    drift = thermo.mass_drift(initial, state, config.material)
    logger.info(f"Simulation finished: {steps} steps, t={state.t:.6g}, mass drift {drift:.3e}")
    return RunSummary(output_dir=out, steps=steps, final_time=state.t, mass_drift=drift,
                      snapshots=written, theta_floor_hits=floor_hits, cd_violations=cd_violations)


# ==================================================================
# OFFLINE AUDIT
# ==================================================================

def run_audit(prefix, config=None, out=None):
    """Recompute the ``EnergyReport`` of a stored state."""
    spec = config.grid if config else None
    params = config.material if config else MaterialParams()
    state = snapshots.read_state(prefix, spec=spec)
    report = thermo.energy_report(state, params)
    if out:
        row = {
            'time': state.t,
            'mass_diff': report.mass_diff,
            'kinetic': report.kinetic,
            'internal': report.internal,
            'free_energy': report.free_energy,
            'entropy': report.entropy,
            'total': report.total,
        }
        diagnostics.write_table([row], ENERGY_COLUMNS, out)
    return state, report


# ==================================================================
# SWEEPS
# ==================================================================

def _write_reports(rows, columns, out, xlsx, title):
    if out:
        diagnostics.write_table(rows, columns, out)
    if xlsx:
        diagnostics.write_workbook(rows, columns, xlsx, title)


def run_dispersion(config, kmin, kmax, nk, u=None, out=None, xlsx=None):
    """
    Measured against predicted growth rates for ``nk`` wavenumbers.

    The mean state and the perturbation size come from ``[initial]``
    (``c_mean``, ``amplitude``), ``u`` defaults to ``[initial] theta`` and the
    strip size comes from ``[grid]``.
    """
    if nk < 1 or kmin <= 0 or kmax < kmin:
        raise ParameterError(f"invalid wavenumber range kmin={kmin} kmax={kmax} nk={nk}")
    initial = config.initial
    u = initial.theta if u is None else u
    points = []
    for k in np.linspace(kmin, kmax, nk):
        spec = verify.dispersion_grid(float(k), nx=config.grid.nx, ny=config.grid.ny)
        points.append(verify.measure_growth_rate(
            float(k), initial.c_mean, u, config.material, config.step,
            spec=spec, epsilon=initial.amplitude,
        ))
    rows = [
        {'k': p.k, 'sigma_predicted': p.sigma_predicted, 'sigma_measured': p.sigma_measured,
         'rel_error': p.rel_error, 'samples': p.samples}
        for p in points
    ]
    _write_reports(rows, DISPERSION_COLUMNS, out, xlsx, 'Dispersion')
    return points


def _straddle(results):
    """Adjacent sweep entries where growth turns into decay."""
    for low, high in zip(results, results[1:]):
        if low.grew and not high.grew:
            return low.u, high.u
    return None


def run_spinodal(config, umin, umax, n, out=None, xlsx=None):
    """Sweep ``u`` over ``n`` values, then bisect the first grow / decay bracket found."""
    if n < 2 or umax <= umin or umin < 0:
        raise ParameterError(f"invalid sweep umin={umin} umax={umax} n={n}")
    initial = config.initial
    sweep_kwargs = {
        'c_mean': initial.c_mean,
        'amplitude': initial.amplitude,
        'seed': initial.seed,
        't_end': config.run.t_end,
    }
    results = verify.spinodal_sweep(np.linspace(umin, umax, n), config.material, config.step,
                                    config.grid, **sweep_kwargs)
    bracket = None
    straddle = _straddle(results)
    if straddle is None:
        logger.warning(f"No grow/decay transition in u in [{umin:g}, {umax:g}]")
    else:
        bracket = verify.locate_threshold(config.material, config.step, config.grid,
                                          *straddle, **sweep_kwargs)
        logger.info(f"Threshold bracket [{bracket.low:.6g}, {bracket.high:.6g}]")
    rows = [{'u': r.u, 'grew': r.grew, 'amplitude_ratio': r.amplitude_ratio} for r in results]
    _write_reports(rows, SPINODAL_COLUMNS, out, xlsx, 'Spinodal sweep')
    return results, bracket


def run_stir(config, angular_velocity=None, out=None, xlsx=None):
    """
    Curl-suppression experiment at ``theta = [initial] theta``.

    The rotation rate defaults to ``[initial] vortex_strength``.
    """
    initial = config.initial
    omega = initial.vortex_strength if angular_velocity is None else angular_velocity
    report = verify.curl_suppression_experiment(
        config.material, config.step, config.grid, theta=initial.theta, angular_velocity=omega,
        amplitude=initial.amplitude, seed=initial.seed, t_end=config.run.t_end,
    )
    rows = [
        {'run': label, 'theta': report.theta, 'angular_velocity': rate,
         'min_omega_sq': omega_sq, 'amplitude_ratio': result.amplitude_ratio, 'grew': result.grew}
        for label, rate, omega_sq, result in (
            ('quiescent', 0.0, 0.0, report.quiescent),
            ('stirred', report.angular_velocity, report.min_omega_sq, report.stirred),
        )
    ]
    _write_reports(rows, STIR_COLUMNS, out, xlsx, 'Stirring')
    return report
