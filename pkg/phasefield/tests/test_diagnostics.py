import tempfile
from pathlib import Path

import openpyxl
from django.test import SimpleTestCase

from phasefield.diagnostics import (
    DIAGNOSTICS_COLUMNS,
    audit_row,
    read_diagnostics,
    write_diagnostics_row,
    write_table,
    write_workbook,
)
from phasefield.thermo import AuditReport, DissipationReport, EnergyReport


def make_report(time=0.1, kinetic=1 / 3):
    return AuditReport(
        time=time,
        energy=EnergyReport(kinetic=kinetic, internal=2.0, free_energy=-0.5, entropy=0.25, mass_diff=1e-17),
        dissipation=DissipationReport(viscous=0.1, chemical=0.2, thermal=0.3, heat_absorption=0.0),
        cd_residual=0.6,
        cd_tolerance=1e-6,
        power_identity_residual=1e-9,
        energy_budget_residual=-2e-12,
        mass_drift=0.0,
        theta_floor_hits=3,
    )


class DiagnosticsCsvTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_row_covers_every_column(self):
        row = audit_row(make_report(), 7)
        self.assertEqual(list(row), DIAGNOSTICS_COLUMNS)
        self.assertEqual(row['step'], 7)
        self.assertEqual(row['theta_floor_hits'], 3)

    def test_header_is_written_once(self):
        path = self.dir / 'diagnostics.csv'
        write_diagnostics_row(make_report(0.1), 1, path)
        write_diagnostics_row(make_report(0.2), 2, path)
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], ','.join(DIAGNOSTICS_COLUMNS))
        self.assertEqual(len(lines), 3)

    def test_floats_keep_full_precision(self):
        path = self.dir / 'diagnostics.csv'
        write_diagnostics_row(make_report(kinetic=1 / 3), 1, path)
        frame = read_diagnostics(path)
        self.assertEqual(frame['kinetic'].iloc[0], 1 / 3)
        self.assertEqual(frame['mass_diff'].iloc[0], 1e-17)
        self.assertIn('0.33333333333333331', path.read_text())

    def test_foreign_csv_is_rejected(self):
        path = self.dir / 'other.csv'
        path.write_text('a,b\n1,2\n')
        with self.assertRaises(ValueError):
            read_diagnostics(path)


class ReportTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.columns = ['u', 'grew', 'amplitude_ratio']
        self.rows = [
            {'u': 0.0, 'grew': True, 'amplitude_ratio': 120.5},
            {'u': 2.0, 'grew': False, 'amplitude_ratio': 0.01},
        ]

    def test_table(self):
        path = write_table(self.rows, self.columns, self.dir / 'reports' / 'spinodal.csv')
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], 'u,grew,amplitude_ratio')
        self.assertEqual(len(lines), 3)

    def test_workbook(self):
        path = write_workbook(self.rows, self.columns, self.dir / 'spinodal.xlsx',
                              'spinodal threshold sweep over u values')
        ws = openpyxl.load_workbook(path).active
        self.assertEqual(ws.title, 'spinodal threshold sweep over u ')
        self.assertEqual([cell.value for cell in ws[1]], self.columns)
        self.assertEqual(ws.max_row, 3)
        self.assertEqual(ws.cell(row=2, column=3).value, 120.5)
