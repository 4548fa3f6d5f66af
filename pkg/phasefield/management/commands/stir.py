from phasefield.management.base import PhaseFieldCommand
from phasefield.runner import run_stir


class Command(PhaseFieldCommand):
    help = 'Quiescent versus stirred separation below the critical temperature'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True)
        parser.add_argument('--omega', type=float, help='Rotation rate (default: [initial] vortex_strength)')
        parser.add_argument('--out', help='CSV of both runs')
        parser.add_argument('--xlsx', help='Excel copy of both runs')

    def perform(self, **options):
        config = self.load(options['config'])
        report = run_stir(config, options.get('omega'), out=options.get('out'), xlsx=options.get('xlsx'))
        self.stdout.write(f"quiescent ratio {report.quiescent.amplitude_ratio:.4g}")
        self.stdout.write(f"stirred ratio   {report.stirred.amplitude_ratio:.4g} "
                          f"(min omega^2 {report.min_omega_sq:.4g})")
        if report.suppressed:
            message = 'stirring suppressed separation'
            self.stdout.write(self.style.SUCCESS(message))
        else:
            message = 'separation not suppressed'
            self.stdout.write(self.style.WARNING(message))
        return {'message': message}
