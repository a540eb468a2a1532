import json
import math
from functools import lru_cache
from pathlib import Path

from rest_framework import serializers

from .core_types import (
    SCHEMA_VERSION,
    ArxModel,
    GuessDiagnostics,
    IdentificationConfig,
    IdentificationReport,
    IterationRecord,
    NoiseModel,
)
from .exceptions import ConfigurationError
from .excitation import SNR_REFERENCES
from .models import IdentificationRun

REPORT_SCHEMA_PATH = Path(__file__).resolve().parent / 'schemas' / f"report-{SCHEMA_VERSION}.json"


@lru_cache(maxsize=1)
def load_report_schema():
    """JSON Schema of the report layout written by ReportSerializer."""
    return json.loads(REPORT_SCHEMA_PATH.read_text(encoding='utf-8'))


def _float_list(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), **kwargs)


class FiniteFloatField(serializers.FloatField):
    """Float that is written as null when it is not finite (JSON has no infinity)."""

    def to_representation(self, value):
        value = float(value)
        return value if math.isfinite(value) else None


def _iteration_record(record):
    record = dict(record)
    if record.get('change') is None:
        record['change'] = math.inf
    return IterationRecord(**record)


class ArxModelSerializer(serializers.Serializer):
    a = _float_list(default=list, help_text="A(q^-1) coefficients a1..a_ny")
    b = _float_list(default=list, help_text="B(q^-1) coefficients b_D..b_nu")
    delay = serializers.IntegerField(min_value=0, default=0, help_text="Input delay D")
    n_y = serializers.IntegerField(read_only=True)
    n_u = serializers.IntegerField(read_only=True)

    def validate(self, data):
        try:
            ArxModel(**data)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return data

    def create(self, validated_data):
        return ArxModel(**validated_data)


class NoiseModelSerializer(serializers.Serializer):
    sigma_e2 = serializers.FloatField(min_value=0.0, help_text="Innovation variance")
    acvf = _float_list(min_length=1, help_text="Output-noise autocovariance at lags 0..L")

    def validate(self, data):
        try:
            NoiseModel(**data)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return data

    def create(self, validated_data):
        return NoiseModel(**validated_data)


class ConfigSerializer(serializers.Serializer):
    eta_guess_initial = serializers.IntegerField(min_value=1)
    eta_max = serializers.IntegerField(min_value=1)
    l_verify_offset = serializers.IntegerField(min_value=1)
    unity_tol = serializers.FloatField()
    conv_tol = serializers.FloatField()
    max_inner_iters = serializers.IntegerField(min_value=1)
    acvf_grid_points = serializers.IntegerField(min_value=512)
    bootstrap_reps = serializers.IntegerField(min_value=0)
    seed = serializers.IntegerField()

    def validate(self, data):
        try:
            IdentificationConfig(**data)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return data

    def create(self, validated_data):
        return IdentificationConfig(**validated_data)


class IterationRecordSerializer(serializers.Serializer):
    iteration = serializers.IntegerField(min_value=1)
    theta = _float_list()
    sigma_e2 = serializers.FloatField()
    change = FiniteFloatField(allow_null=True, help_text="Relative theta change, null on the first iteration")
    min_eigenvalue = serializers.FloatField()


class GuessDiagnosticsSerializer(serializers.Serializer):
    eta_guess = serializers.IntegerField(min_value=1)
    l_verify = serializers.IntegerField(allow_null=True, required=False)
    eigenvalues = _float_list(default=list)
    d_hat = serializers.IntegerField(allow_null=True, required=False)
    eta_hat = serializers.IntegerField(allow_null=True, required=False)
    accepted = serializers.BooleanField(default=False)
    reason = serializers.CharField(allow_blank=True, default='')
    trace = IterationRecordSerializer(many=True, default=list)


class ReportSerializer(serializers.Serializer):
    """JSON layout of an IdentificationReport; ``save()`` rebuilds the report."""
    schema_version = serializers.CharField(default=SCHEMA_VERSION)
    eta_hat = serializers.IntegerField(min_value=1)
    d_hat = serializers.IntegerField(min_value=1)
    l_verify = serializers.IntegerField(min_value=1)
    theta = _float_list(min_length=4)
    theta_std = _float_list(allow_null=True, required=False)
    theta_interval = serializers.ListField(
        child=_float_list(min_length=2, max_length=2), allow_null=True, required=False,
    )
    model = ArxModelSerializer()
    noise = NoiseModelSerializer()
    eigenvalues = _float_list()
    trace = IterationRecordSerializer(many=True)
    converged = serializers.BooleanField()
    config = ConfigSerializer()
    guesses = GuessDiagnosticsSerializer(many=True, default=list)

    def validate_schema_version(self, value):
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(f"unsupported schema version {value}")
        return value

    def create(self, validated_data):
        data = dict(validated_data)
        data['model'] = ArxModel(**data['model'])
        data['noise'] = NoiseModel(**data['noise'])
        data['config'] = IdentificationConfig(**data['config'])
        data['trace'] = tuple(_iteration_record(record) for record in data['trace'])
        data['guesses'] = tuple(
            GuessDiagnostics(
                **{**guess, 'trace': tuple(_iteration_record(record) for record in guess.get('trace', []))}
            )
            for guess in data.get('guesses', [])
        )
        try:
            return IdentificationReport(**data)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))


class IdentificationRunSerializer(serializers.ModelSerializer):
    theta = serializers.SerializerMethodField(
        help_text="Estimated constraint vector [1, a.., -b..] of an accepted run"
    )

    class Meta:
        model = IdentificationRun
        fields = [
            'id', 'name', 'sample_count', 'status', 'eta_hat', 'd_hat', 'converged',
            'theta', 'report', 'error_message', 'created_at', 'updated_at'
        ]
        read_only_fields = fields

    def get_theta(self, obj):
        """Return theta as a list."""
        return obj.get_theta()


class IdentifyRequestSerializer(serializers.Serializer):
    """Serializer for identification requests."""
    name = serializers.CharField(max_length=200, default='identification run', help_text="Label of the run")
    u = _float_list(min_length=8, help_text="Input samples u[0..N-1]")
    y = _float_list(min_length=8, help_text="Output samples y[0..N-1]")
    detrend = serializers.BooleanField(default=False, help_text="Remove the means of u and y first")
    eta_guess_initial = serializers.IntegerField(required=False, min_value=1)
    eta_max = serializers.IntegerField(required=False, min_value=1, max_value=30)
    l_verify_offset = serializers.IntegerField(required=False, min_value=1)
    unity_tol = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    conv_tol = serializers.FloatField(required=False, min_value=0.0)
    max_inner_iters = serializers.IntegerField(required=False, min_value=1)
    acvf_grid_points = serializers.IntegerField(required=False, min_value=512)
    bootstrap_reps = serializers.IntegerField(
        required=False, min_value=0, max_value=1000,
        help_text="Bootstrap replicates (0 disables confidence intervals)"
    )
    seed = serializers.IntegerField(required=False, min_value=0)

    CONFIG_FIELDS = (
        'eta_guess_initial', 'eta_max', 'l_verify_offset', 'unity_tol', 'conv_tol',
        'max_inner_iters', 'acvf_grid_points', 'bootstrap_reps', 'seed',
    )

    def validate(self, data):
        """Validate the combined data."""
        if len(data['u']) != len(data['y']):
            raise serializers.ValidationError(
                f"u has {len(data['u'])} samples but y has {len(data['y'])}"
            )
        overrides = {name: data.get(name) for name in self.CONFIG_FIELDS}
        try:
            data['config'] = IdentificationConfig.from_settings(**overrides)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return data


class SimulateRequestSerializer(serializers.Serializer):
    """Serializer for data simulation requests."""
    a = _float_list(default=list, help_text="A(q^-1) coefficients a1..a_ny")
    b = _float_list(min_length=1, help_text="B(q^-1) coefficients b_D..b_nu")
    delay = serializers.IntegerField(min_value=0, default=0, help_text="Input delay D")
    n = serializers.IntegerField(required=False, min_value=8, max_value=1_000_000, help_text="Number of samples")
    prbs_order = serializers.IntegerField(
        required=False, min_value=2, max_value=16,
        help_text="LFSR register length; one full PRBS period of 2^n - 1 samples"
    )
    snr = serializers.FloatField(required=False, min_value=0.0, help_text="Target signal-to-noise ratio")
    sigma_e2 = serializers.FloatField(required=False, min_value=0.0, help_text="Innovation variance")
    snr_reference = serializers.ChoiceField(choices=SNR_REFERENCES, default='noise')
    seed = serializers.IntegerField(default=0, min_value=0)
    burn_in = serializers.IntegerField(default=0, min_value=0)
    allow_unstable = serializers.BooleanField(default=False)

    def validate(self, data):
        """Validate the combined data."""
        if ('n' in data) == ('prbs_order' in data):
            raise serializers.ValidationError("Exactly one of n and prbs_order must be provided")
        if 'snr' in data and 'sigma_e2' in data:
            raise serializers.ValidationError("snr and sigma_e2 cannot both be provided")
        if 'snr' in data and not data['snr'] > 0:
            raise serializers.ValidationError("snr must be positive")
        try:
            model = ArxModel(a=data['a'], b=data['b'], delay=data['delay'])
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        if not data['allow_unstable'] and not model.is_stable():
            raise serializers.ValidationError(
                f"A polynomial {model.a} is unstable; set allow_unstable to simulate it anyway"
            )
        data['model'] = model
        return data


class SimulationSerializer(serializers.Serializer):
    model = ArxModelSerializer()
    sigma_e2 = serializers.FloatField()
    achieved_snr = FiniteFloatField(allow_null=True, help_text="var(y*)/var(v); null for noise-free data")
    seed = serializers.IntegerField(allow_null=True)
    u = serializers.SerializerMethodField()
    y = serializers.SerializerMethodField()
    y_star = serializers.SerializerMethodField()

    def get_u(self, obj):
        return obj.data.u.tolist()

    def get_y(self, obj):
        return obj.data.y.tolist()

    def get_y_star(self, obj):
        return obj.data.y_star.tolist()
