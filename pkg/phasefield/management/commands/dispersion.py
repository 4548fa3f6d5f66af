from phasefield.management.base import PhaseFieldCommand
from phasefield.runner import run_dispersion


class Command(PhaseFieldCommand):
    help = 'Compare measured linear growth rates with the dispersion relation'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True)
        parser.add_argument('--kmin', type=float, required=True)
        parser.add_argument('--kmax', type=float, required=True)
        parser.add_argument('--nk', type=int, required=True)
        parser.add_argument('--u', type=float, help='Effective temperature (default: [initial] theta)')
        parser.add_argument('--out', help='CSV of the sweep')
        parser.add_argument('--xlsx', help='Excel copy of the sweep')

    def perform(self, **options):
        config = self.load(options['config'])
        points = run_dispersion(config, options['kmin'], options['kmax'], options['nk'],
                                u=options.get('u'), out=options.get('out'), xlsx=options.get('xlsx'))
        for p in points:
            self.stdout.write(
                f"k={p.k:.6g}  predicted={p.sigma_predicted:.6g}  measured={p.sigma_measured:.6g}  "
                f"rel_error={p.rel_error:.3e}"
            )
        worst = max(p.rel_error for p in points)
        return {'message': f"{len(points)} wavenumbers, worst rel_error {worst:.3e}"}
