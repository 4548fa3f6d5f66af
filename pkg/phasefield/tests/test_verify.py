import math

import numpy as np
from django.test import SimpleTestCase

from phasefield import verify
from phasefield.dynamics import StepConfig
from phasefield.exceptions import FitWindowError, ParameterError
from phasefield.grid import BoundaryMode, GridSpec
from phasefield.material import MaterialParams


class DispersionRelationTests(SimpleTestCase):

    def setUp(self):
        self.params = MaterialParams(rho0=1.0, mobility0=1.0, gamma=0.01, theta0=1.0)

    def test_peak_mode(self):
        sigma = verify.predicted_growth_rate(math.sqrt(50), 0.0, 0.0, self.params)
        self.assertAlmostEqual(sigma, 25.0, places=10)

    def test_closed_form_for_deep_quench(self):
        for k in (1.0, 3.0, 9.0):
            expected = k ** 2 * (1 - 0.01 * k ** 2)
            self.assertAlmostEqual(verify.predicted_growth_rate(k, 0.0, 0.0, self.params), expected, places=10)

    def test_mixed_phase_is_stable_above_theta0(self):
        for k in np.linspace(0.1, 30, 50):
            self.assertLess(verify.predicted_growth_rate(k, 0.0, 1.0, self.params), 0)
            self.assertLess(verify.predicted_growth_rate(k, 0.0, 2.0, self.params), 0)

    def test_long_waves_do_not_grow(self):
        self.assertAlmostEqual(verify.predicted_growth_rate(1e-8, 0.0, 0.0, self.params), 0.0, places=12)

    def test_neutral_wavenumber(self):
        self.assertAlmostEqual(verify.neutral_wavenumber(0.0, 0.0, self.params), 10.0)
        self.assertIsNone(verify.neutral_wavenumber(0.0, 1.5, self.params))

    def test_degenerate_mobility_in_pure_phase_is_rejected(self):
        params = MaterialParams(mobility_model='degenerate')
        with self.assertRaises(ParameterError):
            verify.predicted_growth_rate(2.0, 1.0, 0.0, params)


class GrowthRateMeasurementTests(SimpleTestCase):

    def setUp(self):
        self.params = MaterialParams(rho0=1.0, mobility0=1.0, gamma=0.01, theta0=1.0)

    def test_peak_mode_matches_prediction(self):
        point = verify.measure_growth_rate(math.sqrt(50), 0.0, 0.0, self.params,
                                           StepConfig(dt=1e-4, stabilization_s=0.0))
        self.assertLess(point.rel_error, 0.02)
        self.assertGreater(point.samples, 100)

    def test_stable_mode_decays_at_the_predicted_rate(self):
        point = verify.measure_growth_rate(2.0, 0.0, 2.0, self.params,
                                           StepConfig(dt=1e-3, stabilization_s=0.0), epsilon=1e-4)
        self.assertLess(point.sigma_measured, 0)
        self.assertLess(point.rel_error, 0.05)

    def test_short_wave_decays(self):
        point = verify.measure_growth_rate(12.0, 0.0, 0.0, self.params,
                                           StepConfig(dt=1e-4, stabilization_s=0.0), epsilon=1e-4)
        self.assertLess(point.sigma_predicted, 0)
        self.assertLess(point.sigma_measured, 0)

    def test_inadmissible_wavenumber(self):
        spec = GridSpec(nx=64, ny=4, lx=2 * math.pi, ly=2 * math.pi / 16)
        with self.assertRaises(ParameterError):
            verify.measure_growth_rate(1.5, 0.0, 0.0, self.params, StepConfig(), spec=spec)

    def test_large_perturbation_is_rejected(self):
        with self.assertRaises(ParameterError):
            verify.measure_growth_rate(3.0, 0.0, 0.0, self.params, StepConfig(), epsilon=1e-2)

    def test_empty_fit_window(self):
        with self.assertRaises(FitWindowError):
            verify.measure_growth_rate(math.sqrt(50), 0.0, 0.0, self.params,
                                       StepConfig(dt=0.5, stabilization_s=0.0))


class ThresholdTests(SimpleTestCase):

    def setUp(self):
        self.params = MaterialParams()
        self.cfg = StepConfig(dt=0.1, stabilization_s=2.0)
        self.spec = GridSpec(nx=32, ny=32, lx=4 * math.pi, ly=4 * math.pi)

    def test_sweep_end_points(self):
        low, high = verify.spinodal_sweep([0.0, 2.0], self.params, self.cfg, self.spec, t_end=50.0)
        self.assertTrue(low.grew)
        self.assertGreater(low.amplitude_ratio, verify.GROWTH_FACTOR)
        self.assertFalse(high.grew)
        self.assertLess(high.amplitude_ratio, 1.0)

    def test_growth_decreases_with_u(self):
        us = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0]
        results = verify.spinodal_sweep(us, self.params, self.cfg, self.spec, t_end=50.0)
        ratios = [result.amplitude_ratio for result in results]
        self.assertEqual(ratios, sorted(ratios, reverse=True))
        grew = [result.grew for result in results]
        self.assertEqual(grew, [True, True, True, False, False, False])

    def test_bisection_finds_theta0(self):
        bracket = verify.locate_threshold(self.params, self.cfg, self.spec, 0.0, 2.0)
        self.assertLessEqual(bracket.width, 0.1 * self.params.theta0)
        self.assertLess(bracket.low, 1.0)
        self.assertGreater(bracket.high, 0.9)

    def test_bracket_must_straddle(self):
        with self.assertRaises(ParameterError):
            verify.locate_threshold(self.params, self.cfg, self.spec, 1.5, 2.0, t_end=10.0)


class StirTests(SimpleTestCase):

    def test_rotation_suppresses_separation(self):
        spec = GridSpec(nx=32, ny=32, lx=4 * math.pi, ly=4 * math.pi)
        report = verify.curl_suppression_experiment(
            MaterialParams(), StepConfig(dt=0.1), spec, theta=0.5, angular_velocity=0.5, t_end=20.0,
        )
        self.assertAlmostEqual(report.min_omega_sq, 1.0, places=10)
        self.assertTrue(report.quiescent.grew)
        self.assertLess(report.stirred.amplitude_ratio, 1.0)
        self.assertTrue(report.suppressed)

    def test_zero_rotation_reproduces_the_quiescent_run(self):
        spec = GridSpec(nx=32, ny=32, lx=4 * math.pi, ly=4 * math.pi)
        with self.assertLogs('phasefield.verify', level='WARNING'):
            report = verify.curl_suppression_experiment(
                MaterialParams(), StepConfig(dt=0.1), spec, theta=0.5, angular_velocity=0.0, t_end=10.0,
            )
        self.assertEqual(report.min_omega_sq, 0.0)
        self.assertEqual(report.stirred.amplitude_ratio, report.quiescent.amplitude_ratio)
        self.assertFalse(report.suppressed)


class GradientIdentityTests(SimpleTestCase):

    def test_static_field(self):
        self.assertEqual(verify.lemma1_check('static_mode', 'still', 0.0, GridSpec(nx=16, ny=16)), 0.0)

    def test_ramp_translation_is_exact(self):
        spec = GridSpec(nx=16, ny=16, bc_mode=BoundaryMode.PHYSICAL)
        self.assertLess(verify.lemma1_check('ramp_translation', 'uniform_x', 0.7, spec), 1e-9)

    def test_ramp_needs_walls(self):
        with self.assertRaises(ParameterError):
            verify.lemma1_check('ramp_translation', 'uniform_x', 0.7, GridSpec(nx=16, ny=16))

    def test_cellular_flow_converges(self):
        residuals, ratios = verify.lemma1_convergence('cellular_flow', 'cellular')
        self.assertEqual(len(residuals), 3)
        self.assertGreaterEqual(min(ratios), 3.5)

    def test_unknown_case(self):
        with self.assertRaises(ParameterError):
            verify.lemma1_check('spiral', 'still', 0.0, GridSpec(nx=8, ny=8))


class ConsistencySuiteTests(SimpleTestCase):

    def test_operator_orders(self):
        suite = verify.operator_convergence_suite()
        self.assertIn('laplacian', suite)
        for name, (errors, ratio) in suite.items():
            self.assertGreaterEqual(ratio, 3.5, name)

    def test_adjointness(self):
        self.assertLess(verify.adjointness_residual(), 1e-10)

    def test_full_suite_passes(self):
        report = verify.run_consistency_suite()
        self.assertTrue(report.passed, [check.name for check in report.failures])
