from django.core.management.base import CommandError

from phasefield.management.base import PhaseFieldCommand
from phasefield.verify import run_consistency_suite


class Command(PhaseFieldCommand):
    help = 'Operator orders, the gradient identity and the thermodynamic restrictions (exit 1 on failure)'

    def perform(self, **options):
        report = run_consistency_suite()
        for check in report.checks:
            line = f"{check.name:<24} {check.value:.3e}  threshold {check.threshold:.1e}"
            self.stdout.write(self.style.SUCCESS(line) if check.passed else self.style.ERROR(line))
        if not report.passed:
            names = ', '.join(check.name for check in report.failures)
            raise CommandError(f"consistency_failed: {names}", returncode=1)
        return {'message': f"{len(report.checks)} checks passed"}
