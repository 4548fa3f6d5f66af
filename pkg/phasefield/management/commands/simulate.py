from phasefield.management.base import PhaseFieldCommand
from phasefield.runner import run_simulation


class Command(PhaseFieldCommand):
    help = 'Run the coupled phase-field / flow / heat simulation described by a run config'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run-config file')
        parser.add_argument('--out', help='Output directory (overrides [run] output_dir)')

    def perform(self, **options):
        config = self.load(options['config'])
        summary = run_simulation(config, options.get('out'))
        self.stdout.write(self.style.SUCCESS(
            f"{summary.steps} steps to t={summary.final_time:.6g}, "
            f"{summary.snapshots} snapshots, mass drift {summary.mass_drift:.3e} -> {summary.output_dir}"
        ))
        if summary.theta_floor_hits:
            self.stdout.write(self.style.WARNING(f"temperature floor hit {summary.theta_floor_hits} times"))
        if summary.cd_violations:
            self.stdout.write(self.style.WARNING(
                f"Clausius-Duhem tolerance exceeded on {summary.cd_violations} audited steps"
            ))
        return {
            'steps_completed': summary.steps,
            'final_time': summary.final_time,
            'mass_drift': summary.mass_drift,
            'message': str(summary.output_dir),
        }
