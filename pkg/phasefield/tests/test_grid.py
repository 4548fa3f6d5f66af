import math

import numpy as np
from django.test import SimpleTestCase

from phasefield.exceptions import GridMismatchError, ParameterError
from phasefield.grid import (
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
    gradient_energy,
    integrate,
    laplacian,
    sym_gradient,
    velocity_gradient,
    weighted_laplacian,
)


def physical(n=16, lx=2 * math.pi):
    return GridSpec(nx=n, ny=n, lx=lx, ly=lx, bc_mode=BoundaryMode.PHYSICAL)


class GridSpecTests(SimpleTestCase):

    def test_derived_sizes(self):
        spec = GridSpec(nx=8, ny=4, lx=2.0, ly=1.0)
        self.assertEqual(spec.shape, (4, 8))
        self.assertAlmostEqual(spec.dx, 0.25)
        self.assertAlmostEqual(spec.cell_area, 0.0625)
        self.assertAlmostEqual(spec.area, 2.0)

    def test_rejects_small_or_fractional_sizes(self):
        with self.assertRaises(ParameterError):
            GridSpec(nx=3, ny=8)
        with self.assertRaises(ParameterError):
            GridSpec(nx=8.5, ny=8)
        with self.assertRaises(ParameterError):
            GridSpec(nx=8, ny=8, lx=-1.0)
        with self.assertRaises(ParameterError):
            GridSpec(nx=8, ny=8, bc_mode='open')

    def test_bc_mode_accepts_strings(self):
        self.assertIs(GridSpec(nx=8, ny=8, bc_mode='physical').bc_mode, BoundaryMode.PHYSICAL)

    def test_cell_centres_are_offset_by_half_a_cell(self):
        spec = GridSpec(nx=4, ny=4, lx=4.0, ly=4.0)
        x, y = spec.cell_centers()
        self.assertEqual(x[0, 0], 0.5)
        self.assertEqual(y[-1, 0], 3.5)

    def test_interior_mask(self):
        self.assertTrue(GridSpec(nx=8, ny=8).interior_mask(2).all())
        mask = physical(8).interior_mask(2)
        self.assertEqual(int(mask.sum()), 16)


class FieldTests(SimpleTestCase):

    def test_fields_are_read_only(self):
        f = ScalarField.zeros(GridSpec(nx=4, ny=4))
        with self.assertRaises(ValueError):
            f.values[0, 0] = 1.0

    def test_wrong_size_is_rejected(self):
        with self.assertRaises(ParameterError):
            ScalarField(GridSpec(nx=4, ny=4), np.zeros(5))

    def test_mixing_grids_is_rejected(self):
        a = ScalarField.zeros(GridSpec(nx=4, ny=4))
        b = ScalarField.zeros(GridSpec(nx=8, ny=4))
        with self.assertRaises(GridMismatchError):
            a + b


class OperatorTests(SimpleTestCase):

    def test_gradient_of_constant_vanishes(self):
        for spec in (GridSpec(nx=8, ny=8), physical(8)):
            g = gradient(ScalarField.full(spec, 5.0))
            self.assertEqual(np.abs(g.x).max(), 0.0)
            self.assertEqual(np.abs(g.y).max(), 0.0)

    def test_gradient_of_sine_converges_at_second_order(self):
        errors = []
        for n in (32, 64, 128):
            spec = GridSpec(nx=n, ny=4, lx=1.0, ly=4.0 / n)
            k = 2 * math.pi
            f = ScalarField.from_function(spec, lambda x, y: np.sin(k * x))
            x, _ = spec.cell_centers()
            errors.append(np.abs(gradient(f).x - k * np.cos(k * x)).max())
        self.assertGreater(errors[0] / errors[1], 3.5)
        self.assertGreater(errors[1] / errors[2], 3.5)

    def test_gradient_of_ramp_is_exact_inside_walls(self):
        spec = physical(16)
        g = gradient(ScalarField.from_function(spec, lambda x, y: 3.0 * x))
        mask = spec.interior_mask()
        np.testing.assert_allclose(g.x[mask], 3.0, rtol=1e-12)

    def test_divergence_integrates_to_zero(self):
        rng = np.random.default_rng(3)
        for spec in (GridSpec(nx=16, ny=16), physical(16)):
            F = VectorField(spec, rng.standard_normal(spec.shape), rng.standard_normal(spec.shape))
            scale = float(np.abs(F.x).sum() + np.abs(F.y).sum()) * spec.cell_area
            self.assertLess(abs(integrate(divergence(F))) / scale, 1e-12)

    def test_divergence_is_negative_adjoint_of_gradient(self):
        rng = np.random.default_rng(4)
        for spec in (GridSpec(nx=12, ny=12), physical(12)):
            f = ScalarField(spec, rng.standard_normal(spec.shape))
            F = VectorField(spec, rng.standard_normal(spec.shape), rng.standard_normal(spec.shape))
            lhs = float(np.sum(f.values * divergence(F).values))
            rhs = -float(np.sum(gradient(f).dot(F)))
            self.assertAlmostEqual(lhs, rhs, delta=1e-10 * max(1.0, abs(lhs)))

    def test_laplacian_of_product_mode(self):
        spec = GridSpec(nx=64, ny=64)
        f = ScalarField.from_function(spec, lambda x, y: np.sin(x) * np.sin(y))
        err = np.abs(laplacian(f).values + 2 * f.values).max()
        self.assertLess(err, 5e-3)

    def test_laplacian_of_quadratic_is_exact_inside_walls(self):
        spec = physical(16)
        lap = laplacian(ScalarField.from_function(spec, lambda x, y: x ** 2))
        np.testing.assert_allclose(lap.values[spec.interior_mask()], 2.0, rtol=1e-9)

    def test_biharmonic_of_sine(self):
        spec = GridSpec(nx=128, ny=4, lx=2 * math.pi, ly=2 * math.pi * 4 / 128)
        f = ScalarField.from_function(spec, lambda x, y: np.sin(x))
        np.testing.assert_allclose(biharmonic(f).values, f.values, atol=1e-3)

    def test_weighted_laplacian_with_unit_weight_is_laplacian(self):
        rng = np.random.default_rng(5)
        for spec in (GridSpec(nx=10, ny=8), physical(10)):
            f = ScalarField(spec, rng.standard_normal(spec.shape))
            np.testing.assert_allclose(weighted_laplacian(1.0, f).values, laplacian(f).values,
                                       rtol=1e-12, atol=1e-10)

    def test_gradient_energy_is_the_laplacian_quadratic_form(self):
        rng = np.random.default_rng(6)
        for spec in (GridSpec(nx=10, ny=10), physical(10)):
            f = ScalarField(spec, rng.standard_normal(spec.shape))
            form = -0.5 * float(np.sum(f.values * laplacian(f).values)) * spec.cell_area
            self.assertAlmostEqual(gradient_energy(f), form, delta=1e-10 * form)

    def test_curl_of_rigid_rotation(self):
        spec = physical(16)
        v = VectorField.from_function(spec, lambda x, y: -y, lambda x, y: x)
        omega = curl2d(v)
        np.testing.assert_allclose(omega.values[spec.interior_mask()], 2.0, rtol=1e-12)
        np.testing.assert_allclose(curl2d(v, Ghost.EXTRAPOLATE).values, 2.0, rtol=1e-12)

    def test_curl_of_gradient_vanishes(self):
        spec = GridSpec(nx=32, ny=32)
        f = ScalarField.from_function(spec, lambda x, y: np.sin(x) * np.cos(2 * y))
        self.assertLess(np.abs(curl2d(gradient(f)).values).max(), 1e-12)

    def test_sym_gradient(self):
        spec = physical(16)
        mask = spec.interior_mask()
        rotation = VectorField.from_function(spec, lambda x, y: -y, lambda x, y: x)
        d = sym_gradient(rotation)
        for component in (d.xx, d.xy, d.yy):
            self.assertLess(np.abs(component[mask]).max(), 1e-12)
        shear = VectorField.from_function(spec, lambda x, y: 0.3 * y, lambda x, y: 0 * x)
        d = sym_gradient(shear)
        np.testing.assert_allclose(d.xy[mask], 0.15, rtol=1e-12)
        np.testing.assert_allclose(d.yx[mask], 0.15, rtol=1e-12)

    def test_strain_is_the_symmetric_part_of_the_velocity_gradient(self):
        spec = GridSpec(nx=16, ny=16)
        v = VectorField.from_function(spec, lambda x, y: np.sin(x) * np.cos(y), lambda x, y: np.cos(2 * x))
        grad_v = velocity_gradient(v)
        d = sym_gradient(v)
        for g, gt, expected in zip(grad_v.components(), grad_v.transpose().components(), d.components()):
            np.testing.assert_allclose(0.5 * (g + gt), expected, atol=1e-12)

    def test_trace_of_strain_is_divergence(self):
        spec = GridSpec(nx=16, ny=16)
        v = VectorField.from_function(spec, lambda x, y: np.sin(x) * np.cos(y), lambda x, y: np.cos(2 * x))
        np.testing.assert_allclose(sym_gradient(v).trace(), divergence(v).values, atol=1e-12)

    def test_integrate(self):
        spec = GridSpec(nx=16, ny=16, lx=2.0, ly=3.0)
        self.assertAlmostEqual(integrate(ScalarField.full(spec, 1.0)), 6.0, places=12)
        k = 2 * math.pi / spec.lx
        self.assertLess(abs(integrate(ScalarField.from_function(spec, lambda x, y: np.sin(k * x)))), 1e-12 * 6)
        half = integrate(ScalarField.from_function(spec, lambda x, y: np.sin(k * x) ** 2))
        self.assertAlmostEqual(half, 3.0, delta=1e-12 * 3)

    def test_advect(self):
        spec = physical(16)
        f = ScalarField.from_function(spec, lambda x, y: x)
        self.assertEqual(np.abs(advect(f, VectorField.zeros(spec)).values).max(), 0.0)
        moving = VectorField.from_function(spec, lambda x, y: 1 + 0 * x, lambda x, y: 0 * x)
        rate = advect(f, moving)
        np.testing.assert_allclose(rate.values[spec.interior_mask()], 1.0, rtol=1e-12)
