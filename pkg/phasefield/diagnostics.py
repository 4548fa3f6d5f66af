"""
Tabular output: the per-step diagnostics CSV and the sweep reports.
"""
import logging
from pathlib import Path

import openpyxl
import pandas as pd

logger = logging.getLogger(__name__)

DIAGNOSTICS_COLUMNS = [
    'step',
    'time',
    'mass_diff',
    'kinetic',
    'internal',
    'free_energy',
    'entropy',
    'viscous_diss',
    'chemical_diss',
    'thermal_diss',
    'cd_residual',
    'power_residual',
    'energy_budget_residual',
    'theta_floor_hits',
]

FLOAT_FORMAT = '%.17g'


def audit_row(report, step):
    energy, diss = report.energy, report.dissipation
    return {
        'step': int(step),
        'time': report.time,
        'mass_diff': energy.mass_diff,
        'kinetic': energy.kinetic,
        'internal': energy.internal,
        'free_energy': energy.free_energy,
        'entropy': energy.entropy,
        'viscous_diss': diss.viscous,
        'chemical_diss': diss.chemical,
        'thermal_diss': diss.thermal,
        'cd_residual': report.cd_residual,
        'power_residual': report.power_identity_residual,
        'energy_budget_residual': report.energy_budget_residual,
        'theta_floor_hits': int(report.theta_floor_hits),
    }


def write_diagnostics_row(report, step, path):
    """Append one audit row; the header is written with the first row."""
    path = Path(path)
    frame = pd.DataFrame([audit_row(report, step)], columns=DIAGNOSTICS_COLUMNS)
    frame.to_csv(path, mode='a', header=not path.exists(), index=False,
                 float_format=FLOAT_FORMAT, lineterminator='\n')


def read_diagnostics(path):
    frame = pd.read_csv(path)
    missing = [name for name in DIAGNOSTICS_COLUMNS if name not in frame.columns]
    if missing:
        raise ValueError(f"{path} lacks diagnostics columns {missing}")
    return frame


def write_table(rows, columns, path):
    """Write sweep rows (dicts) as CSV with full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, float_format=FLOAT_FORMAT,
                                               lineterminator='\n')
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def write_workbook(rows, columns, path, title):
    """One sheet, one header row, one row per sweep entry."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    wb = openpyxl.Workbook()
    ws = wb.active
    ws.title = title[:31]

    ws.append(columns)
    for row in rows:
        ws.append([row.get(name, '') for name in columns])

    wb.save(path)
    logger.info(f"Wrote workbook {path}")
    return path
