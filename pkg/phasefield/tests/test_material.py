import math

import numpy as np
from django.test import SimpleTestCase

from phasefield.exceptions import ParameterError
from phasefield.grid import BoundaryMode, Ghost, GridSpec, ScalarField, VectorField
from phasefield.material import (
    MaterialParams,
    MobilityModel,
    chemical_potential,
    chemical_potential_u,
    conductivity,
    diffusivity_K,
    effective_u,
    f_prime,
    f_val,
    g_prime,
    g_val,
    mobility,
    spinodal_interval,
    viscosity,
    w_prime,
    w_second,
    w_val,
)


class MaterialParamsTests(SimpleTestCase):

    def test_defaults(self):
        params = MaterialParams()
        self.assertEqual(params.theta0, 1.0)
        self.assertIs(params.mobility_model, MobilityModel.CONSTANT)

    def test_positivity(self):
        with self.assertRaises(ParameterError):
            MaterialParams(theta0=-1.0)
        with self.assertRaises(ParameterError):
            MaterialParams(gamma=0.0)
        with self.assertRaises(ParameterError):
            MaterialParams(kappa0=-0.1)

    def test_zero_mobility_and_conductivity_are_allowed(self):
        params = MaterialParams(mobility0=0.0, kappa0=0.0)
        self.assertEqual(params.mobility0, 0.0)
        self.assertEqual(params.kappa0, 0.0)

    def test_unknown_mobility_model(self):
        with self.assertRaises(ParameterError):
            MaterialParams(mobility_model='quadratic')


class PotentialTests(SimpleTestCase):

    def test_double_well_pieces(self):
        self.assertEqual(f_val(1.0), -0.25)
        self.assertEqual(f_prime(1.0), 0.0)
        self.assertEqual(g_val(2.0), 2.0)
        self.assertEqual(g_prime(-0.5), -0.5)
        np.testing.assert_allclose(f_prime(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 6.0])

    def test_effective_u(self):
        self.assertEqual(effective_u(1.0, 0.0), 1.0)
        self.assertEqual(effective_u(0.5, 1.0), 1.5)

    def test_effective_potential_combines_the_wells(self):
        self.assertEqual(w_val(1.0, 2.0, 1.0), -0.25 + 1.0)
        self.assertEqual(w_prime(1.0, 0.5, 2.0), 0.5)
        np.testing.assert_allclose(w_prime(np.array([0.0, 2.0]), 1.0, 1.0), [0.0, 8.0])

    def test_w_second_changes_sign_at_theta0(self):
        self.assertLess(w_second(0.0, 0.5, 1.0), 0)
        self.assertEqual(w_second(0.0, 1.0, 1.0), 0)
        self.assertGreater(w_second(0.0, 1.5, 1.0), 0)

    def test_spinodal_interval(self):
        self.assertFalse(spinodal_interval(1.0, 2.0).separates)
        self.assertFalse(spinodal_interval(1.0, 1.0).separates)
        result = spinodal_interval(1.0, 0.0)
        self.assertTrue(result.separates)
        self.assertAlmostEqual(result.c1, math.sqrt(1 / 3), places=12)
        with self.assertRaises(ParameterError):
            spinodal_interval(0.0, 0.5)
        with self.assertRaises(ParameterError):
            spinodal_interval(1.0, -0.1)


class TransportTests(SimpleTestCase):

    def test_mobility(self):
        constant = MaterialParams(mobility0=2.0)
        self.assertEqual(mobility(0.7, constant), 2.0)
        degenerate = MaterialParams(mobility0=2.0, mobility_model='degenerate')
        self.assertEqual(mobility(1.0, degenerate), 0.0)
        self.assertEqual(mobility(-1.0, degenerate), 0.0)
        self.assertEqual(mobility(0.0, degenerate), 2.0)
        self.assertEqual(mobility(1.5, degenerate), 0.0)

    def test_viscosity_blend(self):
        params = MaterialParams(nu_a=0.1, nu_b=0.3)
        self.assertAlmostEqual(viscosity(-1.0, params), 0.1)
        self.assertAlmostEqual(viscosity(1.0, params), 0.3)
        self.assertAlmostEqual(viscosity(0.0, params), 0.2)
        self.assertAlmostEqual(viscosity(3.0, params), 0.3)

    def test_conductivity_is_constant(self):
        params = MaterialParams(kappa0=0.02)
        self.assertEqual(conductivity(300.0, params), 0.02)
        self.assertEqual(conductivity(1.0, params), 0.02)

    def test_diffusivity_negative_inside_spinodal(self):
        params = MaterialParams()
        self.assertAlmostEqual(diffusivity_K(0.0, 0.0, params), -1.0)
        self.assertGreater(diffusivity_K(0.0, 2.0, params), 0)


class ChemicalPotentialTests(SimpleTestCase):

    def setUp(self):
        self.params = MaterialParams()
        self.spec = GridSpec(nx=8, ny=8)

    def test_zero_concentration(self):
        mu = chemical_potential(ScalarField.zeros(self.spec), ScalarField.full(self.spec, 0.7),
                                VectorField.zeros(self.spec), self.params)
        self.assertEqual(np.abs(mu.values).max(), 0.0)

    def test_uniform_state(self):
        c_bar, theta_bar = 0.4, 0.6
        mu = chemical_potential(ScalarField.full(self.spec, c_bar), ScalarField.full(self.spec, theta_bar),
                                VectorField.zeros(self.spec), self.params)
        expected = self.params.theta0 * (c_bar ** 3 - c_bar) + theta_bar * c_bar
        np.testing.assert_allclose(mu.values, expected, rtol=1e-14)

    def test_rotation_raises_the_potential(self):
        spec = GridSpec(nx=8, ny=8, bc_mode=BoundaryMode.PHYSICAL)
        rotation = VectorField.from_function(spec, lambda x, y: -y, lambda x, y: x)
        mu = chemical_potential(ScalarField.full(spec, 1.0), ScalarField.full(spec, 0.3), rotation,
                                self.params, vorticity_ghost=Ghost.EXTRAPOLATE)
        np.testing.assert_allclose(mu.values, 4.3, rtol=1e-12)

    def test_still_fluid_matches_the_explicit_temperature_form(self):
        c = ScalarField.from_function(self.spec, lambda x, y: 0.5 * np.sin(x) * np.cos(y))
        theta = ScalarField.full(self.spec, 0.6)
        mu = chemical_potential(c, theta, VectorField.zeros(self.spec), self.params)
        np.testing.assert_allclose(chemical_potential_u(c, 0.6, self.params).values, mu.values,
                                   rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(chemical_potential_u(c, theta, self.params).values, mu.values,
                                   rtol=1e-13, atol=1e-15)
