"""
Error hierarchy for the phase-field solver.

Every error carries a short machine-readable ``code`` and the exit status the
management commands report for it.
"""


class PhaseFieldError(Exception):
    code = 'phasefield_error'
    exit_code = 1


class ParameterError(PhaseFieldError, ValueError):
    code = 'parameter_error'


class GridMismatchError(PhaseFieldError, ValueError):
    code = 'grid_mismatch'


class ConfigError(PhaseFieldError):
    """Run-config parse or validation failure, located by key path and line."""

    code = 'config_error'

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        location = []
        if key:
            location.append(f"key={key}")
        if line is not None:
            location.append(f"line={line}")
        prefix = f"[{' '.join(location)}] " if location else ''
        super().__init__(f"{prefix}{message}")


class NonFiniteFieldError(PhaseFieldError, FloatingPointError):
    code = 'non_finite_field'
    exit_code = 2


class LinearSolverError(PhaseFieldError):
    code = 'solver_divergence'
    exit_code = 2

    def __init__(self, stage, iterations, residual=None):
        self.stage = stage
        self.iterations = iterations
        self.residual = residual
        detail = f"{stage} solve did not converge after {iterations} iterations"
        if residual is not None:
            detail += f" (residual {residual:.3e})"
        super().__init__(detail)


class StepFailure(PhaseFieldError):
    """A sub-step of the coupled scheme failed; ``stage`` names which one."""

    code = 'step_failure'
    exit_code = 2

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


class FitWindowError(PhaseFieldError):
    code = 'fit_window_empty'
    exit_code = 2


class SnapshotError(PhaseFieldError):
    code = 'snapshot_error'
    exit_code = 3
