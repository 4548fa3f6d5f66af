from phasefield.management.base import PhaseFieldCommand
from phasefield.runner import run_audit


class Command(PhaseFieldCommand):
    help = 'Recompute the energy report of a stored snapshot'

    def add_arguments(self, parser):
        parser.add_argument('--snapshot-prefix', required=True, dest='snapshot_prefix',
                            help='Prefix of the <prefix>_<field>.spf files')
        parser.add_argument('--config', help='Run config supplying grid and material (defaults otherwise)')
        parser.add_argument('--out', help='CSV of the report')

    def perform(self, **options):
        config = self.load(options['config']) if options.get('config') else None
        state, report = run_audit(options['snapshot_prefix'], config, options.get('out'))
        for name in ('mass_diff', 'kinetic', 'internal', 'free_energy', 'entropy'):
            self.stdout.write(f"{name:<12} {getattr(report, name):.17g}")
        self.stdout.write(f"{'total':<12} {report.total:.17g}")
        return {'final_time': state.t, 'message': f"audited {options['snapshot_prefix']}"}
