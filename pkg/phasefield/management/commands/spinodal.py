from phasefield.management.base import PhaseFieldCommand
from phasefield.runner import run_spinodal


class Command(PhaseFieldCommand):
    help = 'Sweep the effective temperature u and bisect the spinodal threshold'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True)
        parser.add_argument('--umin', type=float, required=True)
        parser.add_argument('--umax', type=float, required=True)
        parser.add_argument('--n', type=int, required=True, help='Number of sweep values')
        parser.add_argument('--out', help='CSV of the sweep')
        parser.add_argument('--xlsx', help='Excel copy of the sweep')

    def perform(self, **options):
        config = self.load(options['config'])
        results, bracket = run_spinodal(config, options['umin'], options['umax'], options['n'],
                                        out=options.get('out'), xlsx=options.get('xlsx'))
        for r in results:
            state = 'grows' if r.grew else 'decays'
            self.stdout.write(f"u={r.u:.6g}  ratio={r.amplitude_ratio:.4g}  {state}")
        if bracket is None:
            message = 'no threshold in range'
            self.stdout.write(self.style.WARNING(message))
        else:
            message = f"threshold in [{bracket.low:.6g}, {bracket.high:.6g}]"
            self.stdout.write(self.style.SUCCESS(message))
        return {'message': message}
