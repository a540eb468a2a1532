import numpy as np

from identification.core_types import IdentificationConfig
from identification.csv_io import read_dataset, write_eigenvalues
from identification.estimation import (
    build_lagged_matrix,
    build_noise_covariance,
    count_unity_eigenvalues,
    extract_theta,
    identify_evd,
    sample_covariance,
)
from identification.exceptions import (
    DataFormatError,
    DegenerateNormalizationError,
    IdentificationError,
)
from identification.management.base import IdentificationCommand
from identification.serializers import NoiseModelSerializer
import logging

logger = logging.getLogger(__name__)


class Command(IdentificationCommand):
    help = 'Print the generalized eigenvalues of the data covariance at one stacking lag'

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='CSV file with header k,u,y[,y_star]')
        parser.add_argument('--l-stack', type=int, required=True, help='Stacking lag L')
        noise = parser.add_mutually_exclusive_group(required=True)
        noise.add_argument('--acvf', help='JSON noise model, or a report whose "noise" entry is used')
        noise.add_argument('--identity', action='store_true', help='Use the identity as noise covariance')
        parser.add_argument('--unity-tol', type=float, help='Half width of the unity eigenvalue band')
        parser.add_argument('--out', help='CSV path for the eigenvalues')

    def handle(self, *args, **options):
        lag = options['l_stack']
        try:
            data = read_dataset(options['input'])
            data.require_samples(lag)
            S = sample_covariance(build_lagged_matrix(data, lag))
            if options['identity']:
                sigma = np.eye(S.shape[0])
            else:
                sigma = build_noise_covariance(self._load_noise(options['acvf']), lag)
            evd = identify_evd(S, sigma)
        except IdentificationError as e:
            logger.error(f"Eigen-analysis of {options['input']} at L={lag} failed: {str(e)}")
            self.fail(e)

        unity_tol = options['unity_tol'] or IdentificationConfig.from_settings().unity_tol
        for index, value in enumerate(evd.eigenvalues):
            self.stdout.write(f"{index:4d}  {value:.10g}")
        self.stdout.write(f"infinite eigenvalues: {evd.infinite_count}")
        self.stdout.write(f"eigenvalues within {unity_tol:g} of one: "
                          f"{count_unity_eigenvalues(evd.eigenvalues, unity_tol)}")
        if evd.eigenvalues.size:
            try:
                theta = extract_theta(evd.vectors[:, 0])
                self.stdout.write('theta: ' + ' '.join(f"{value:.6g}" for value in theta))
            except DegenerateNormalizationError as e:
                self.stdout.write(self.style.WARNING(f"theta: {str(e)}"))

        if options['out']:
            write_eigenvalues(evd.eigenvalues, options['out'])
            self.stdout.write(self.style.SUCCESS(f"Wrote {evd.eigenvalues.size} eigenvalues to {options['out']}"))

    def _load_noise(self, path):
        payload = self.read_json(path)
        if isinstance(payload, dict) and 'noise' in payload:
            payload = payload['noise']
        serializer = NoiseModelSerializer(data=payload)
        if not serializer.is_valid():
            raise DataFormatError(f"{path}: invalid noise model {serializer.errors}")
        return serializer.save()
