import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from phasefield.config import load_config, parse_config
from phasefield.exceptions import ConfigError
from phasefield.grid import BoundaryMode, GridSpec, ScalarField
from phasefield.initial_conditions import InitialMode
from phasefield.material import MobilityModel
from phasefield.snapshots import write_snapshot

MINIMAL = """
[grid]
nx = 16
ny = 8
"""


class ParseConfigTests(SimpleTestCase):

    def test_minimal_config_uses_defaults(self):
        config = parse_config(MINIMAL)
        self.assertEqual(config.grid.shape, (8, 16))
        self.assertIs(config.grid.bc_mode, BoundaryMode.PERIODIC)
        self.assertEqual(config.material.theta0, 1.0)
        self.assertEqual(config.step.dt, 1e-3)
        self.assertIs(config.initial.mode, InitialMode.UNIFORM_NOISE)
        self.assertEqual(config.run.audit_every, 1)

    def test_values_are_coerced(self):
        config = parse_config(MINIMAL + """
# walled box
[material]
mobility_model = degenerate   # vanishes in the pure phases
kappa0 = 0

[step]
dt = 5e-3
max_linear_iters = 200

[initial]
mode = single_mode
wavenumber_index = 3

[sources]
heat_supply = -0.25
""")
        self.assertIs(config.material.mobility_model, MobilityModel.DEGENERATE)
        self.assertEqual(config.material.kappa0, 0.0)
        self.assertEqual(config.step.dt, 5e-3)
        self.assertEqual(config.step.max_linear_iters, 200)
        self.assertEqual(config.initial.wavenumber_index, 3)
        self.assertEqual(config.sources.heat_supply, -0.25)

    def test_shipped_configs_parse(self):
        root = Path(__file__).resolve().parents[2] / 'configs'
        for path in sorted(root.glob('*.cfg')):
            config = load_config(path)
            self.assertIsInstance(config.grid, GridSpec, path.name)


class ConfigErrorTests(SimpleTestCase):

    def assertConfigError(self, text, key, line):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertEqual(ctx.exception.key, key)
        self.assertEqual(ctx.exception.line, line)
        return ctx.exception

    def test_out_of_range_value_names_key_and_line(self):
        error = self.assertConfigError(MINIMAL + "[material]\ntheta0 = -1\n", 'material.theta0', 6)
        self.assertIn('material.theta0', str(error))
        self.assertIn('line=6', str(error))

    def test_duplicate_key_names_both_lines(self):
        error = self.assertConfigError("[grid]\nnx = 8\nny = 8\nnx = 16\n", 'grid.nx', 4)
        self.assertIn('line 2', str(error))

    def test_unknown_section(self):
        self.assertConfigError(MINIMAL + "[plotting]\n", 'plotting', 5)

    def test_unknown_key(self):
        self.assertConfigError(MINIMAL + "[step]\ncfl = 0.5\n", 'step.cfl', 6)

    def test_key_outside_section(self):
        self.assertConfigError("nx = 8\n[grid]\nny = 8\n", 'nx', 1)

    def test_missing_grid_section(self):
        self.assertConfigError("[material]\ngamma = 0.02\n", 'grid', None)

    def test_missing_required_key_points_at_the_header(self):
        self.assertConfigError("\n[grid]\nnx = 8\n", 'grid.ny', 2)

    def test_bad_choice(self):
        self.assertConfigError("[grid]\nnx = 8\nny = 8\nbc_mode = open\n", 'grid.bc_mode', 4)

    def test_from_snapshot_needs_existing_files(self):
        text = MINIMAL + "[initial]\nmode = from_snapshot\nsnapshot_prefix = /nonexistent/snap_000000\n"
        self.assertConfigError(text, 'initial.snapshot_prefix', 5)

    def test_unreadable_file(self):
        with self.assertRaises(ConfigError):
            load_config('/nonexistent/run.cfg')


class SnapshotReferenceTests(SimpleTestCase):

    def test_relative_prefix_is_anchored_at_the_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            spec = GridSpec(nx=16, ny=8)
            (tmp / 'restart').mkdir()
            write_snapshot(ScalarField.zeros(spec), 'c', 0.0, tmp / 'restart' / 'snap_000010_c.spf')
            path = tmp / 'run.cfg'
            path.write_text(MINIMAL + "[initial]\nmode = from_snapshot\nsnapshot_prefix = restart/snap_000010\n")
            config = load_config(path)
            self.assertEqual(config.initial.snapshot_prefix, str(tmp / 'restart' / 'snap_000010'))
