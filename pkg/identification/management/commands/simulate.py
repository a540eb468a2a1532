from pathlib import Path

from identification.core_types import SCHEMA_VERSION, ArxModel
from identification.csv_io import write_dataset
from identification.exceptions import IdentificationError
from identification.excitation import SNR_REFERENCES, design_input, simulate_dataset
from identification.management.base import IdentificationCommand, float_list
from identification.serializers import ArxModelSerializer
import logging

logger = logging.getLogger(__name__)


class Command(IdentificationCommand):
    help = 'Simulate an ARX process driven by a PRBS input and write it as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--a', type=float_list, default=[], help='A coefficients a1..a_ny, e.g. --a=-0.4,0.6')
        parser.add_argument('--b', type=float_list, required=True, help='B coefficients b_D..b_nu')
        parser.add_argument('--delay', type=int, default=0, help='Input delay D')
        length = parser.add_mutually_exclusive_group(required=True)
        length.add_argument('--n', type=int, help='Number of samples')
        length.add_argument('--prbs-order', type=int, help='LFSR register length (one period of 2^n - 1 samples)')
        noise = parser.add_mutually_exclusive_group()
        noise.add_argument('--snr', type=float, help='Target signal-to-noise ratio')
        noise.add_argument('--sigma-e2', type=float, help='Innovation variance (default 0)')
        parser.add_argument('--snr-reference', choices=SNR_REFERENCES, default='noise',
                            help='SNR denominator: output noise variance or innovation variance')
        parser.add_argument('--seed', type=int, default=0, help='Noise seed')
        parser.add_argument('--burn-in', type=int, default=0, help='Discarded noise warm-up samples')
        parser.add_argument('--allow-unstable', action='store_true', help='Simulate unstable A polynomials')
        parser.add_argument('--out', required=True, help='CSV output path; a .json sidecar is written next to it')

    def handle(self, *args, **options):
        try:
            model = ArxModel(a=options['a'], b=options['b'], delay=options['delay'])
            u = design_input(n_samples=options['n'], prbs_order=options['prbs_order'])
            result = simulate_dataset(
                model,
                u,
                snr=options['snr'],
                sigma_e2=options['sigma_e2'],
                reference=options['snr_reference'],
                seed=options['seed'],
                burn_in=options['burn_in'],
                allow_unstable=options['allow_unstable'],
            )
        except IdentificationError as e:
            logger.error(f"Simulation of {options['a']}/{options['b']} failed: {str(e)}")
            self.fail(e)

        out = Path(options['out'])
        write_dataset(result.data, out)
        sidecar = out.with_suffix('.json')
        self.write_json({
            'schema_version': SCHEMA_VERSION,
            'model': ArxModelSerializer(model).data,
            'n_samples': result.data.n_samples,
            'sigma_e2': result.sigma_e2,
            'seed': options['seed'],
            'burn_in': options['burn_in'],
            'snr': options['snr'],
            'snr_reference': options['snr_reference'],
            'achieved_snr': result.achieved_snr if result.achieved_snr != float('inf') else None,
        }, sidecar)

        self.stdout.write(self.style.SUCCESS(
            f"Wrote {result.data.n_samples} samples to {out} (sigma_e2={result.sigma_e2:.6g}, sidecar {sidecar})"
        ))
