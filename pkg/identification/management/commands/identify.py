from django.core.management.base import CommandError

from identification.core_types import IdentificationConfig
from identification.csv_io import read_dataset, write_diagnostics
from identification.estimation import identify
from identification.exceptions import IdentificationError, OrderSearchError
from identification.management.base import ALGORITHM_ERROR, IdentificationCommand
from identification.serializers import ReportSerializer
import logging

logger = logging.getLogger(__name__)


class Command(IdentificationCommand):
    help = 'Identify the order and parameters of an ARX model from a k,u,y CSV file'

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='CSV file with header k,u,y[,y_star]')
        parser.add_argument('--eta-init', type=int, help='First equation order guess')
        parser.add_argument('--eta-max', type=int, help='Largest equation order guess')
        parser.add_argument('--l-offset', type=int, help='Verification lag offset above the guess')
        parser.add_argument('--unity-tol', type=float, help='Half width of the unity eigenvalue band')
        parser.add_argument('--conv-tol', type=float, help='Relative theta change that ends the inner loop')
        parser.add_argument('--max-iter', type=int, help='Inner loop iteration cap')
        parser.add_argument('--grid-points', type=int, help='Frequency grid size for the noise ACVF')
        parser.add_argument('--bootstrap', type=int, help='Bootstrap replicates (0 disables)')
        parser.add_argument('--seed', type=int, help='Bootstrap seed')
        parser.add_argument('--detrend', action='store_true', help='Remove the sample means of u and y first')
        parser.add_argument('--out', help='JSON report path (default: stdout)')
        parser.add_argument('--diagnostics', help='CSV path for per-guess eigenvalues and iteration traces')

    def handle(self, *args, **options):
        try:
            config = IdentificationConfig.from_settings(
                eta_guess_initial=options['eta_init'],
                eta_max=options['eta_max'],
                l_verify_offset=options['l_offset'],
                unity_tol=options['unity_tol'],
                conv_tol=options['conv_tol'],
                max_inner_iters=options['max_iter'],
                acvf_grid_points=options['grid_points'],
                bootstrap_reps=options['bootstrap'],
                seed=options['seed'],
            )
            data = read_dataset(options['input'])
            if options['detrend']:
                data = data.detrended()
            report = identify(data, config)
        except OrderSearchError as e:
            self._report_failure(e, options['diagnostics'])
        except IdentificationError as e:
            logger.error(f"Identification of {options['input']} failed: {str(e)}")
            self.fail(e)

        if options['diagnostics']:
            write_diagnostics(report.guesses, options['diagnostics'])
        self.write_json(ReportSerializer(report).data, options['out'])

        message = (
            f"Identified {report.model} with eta_hat={report.eta_hat}, "
            f"sigma_e2={report.noise.sigma_e2:.6g}"
        )
        if not report.converged:
            self.stderr.write(self.style.WARNING(f"Inner loop hit the iteration cap; {message}"))
        elif options['out']:
            self.stdout.write(self.style.SUCCESS(message))

    def _report_failure(self, error, diagnostics_path):
        logger.error(f"Order search failed: {str(error)}")
        if diagnostics_path:
            write_diagnostics(error.guesses, diagnostics_path)
        for guess in error.guesses:
            self.stderr.write(
                f"  eta_guess={guess.eta_guess} L_verify={guess.l_verify} "
                f"d_hat={guess.d_hat} eta_hat={guess.eta_hat}: {guess.reason}"
            )
        raise CommandError(str(error), returncode=ALGORITHM_ERROR) from error
