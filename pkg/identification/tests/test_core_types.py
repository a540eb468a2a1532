import numpy as np
import pytest
from identification.core_types import (
    ArxModel,
    DataSet,
    IdentificationConfig,
    IdentificationReport,
    NoiseModel,
    equation_order,
    is_stable_polynomial,
    stabilized_polynomial,
)
from identification.exceptions import ConfigurationError, InsufficientDataError


def test_arx_model_orders():
    model = ArxModel(a=(-0.3, 0.7), b=(1.2, 1.6), delay=2)
    assert model.n_y == 2
    assert model.n_u == 3
    assert equation_order(model) == 3
    assert str(model) == 'ARX(n_y=2, n_u=3, delay=2)'


def test_arx_model_theta_layout():
    model = ArxModel(a=(-0.4, 0.6), b=(2.0,), delay=1)
    np.testing.assert_allclose(model.to_theta(), [1.0, -0.4, 0.6, 0.0, -2.0, 0.0])
    padded = model.to_theta(eta=3)
    assert len(padded) == 8
    np.testing.assert_allclose(padded, [1.0, -0.4, 0.6, 0.0, 0.0, -2.0, 0.0, 0.0])


def test_arx_model_rejects_short_theta_and_bad_delay():
    model = ArxModel(a=(-0.3, 0.7), b=(1.2, 1.6), delay=2)
    with pytest.raises(ConfigurationError):
        model.to_theta(eta=2)
    with pytest.raises(ConfigurationError):
        ArxModel(a=(0.5,), b=(1.0,), delay=-1)


def test_model_without_input_term():
    model = ArxModel(a=(0.5,))
    assert model.n_u == 0
    np.testing.assert_allclose(model.to_theta(), [1.0, 0.5, 0.0, 0.0])


@pytest.mark.parametrize('a, stable', [
    ((-0.4, 0.6), True),
    ((-0.3, 0.7), True),
    ((), True),
    ((-1.0,), False),
    ((0.0, -1.2), False),
])
def test_stability(a, stable):
    assert is_stable_polynomial(a) is stable
    assert ArxModel(a=a, b=(1.0,)).is_stable() is stable


def test_stabilized_polynomial_reflects_outside_roots():
    # roots 2 and 0.5; 2 is reflected onto 0.5
    np.testing.assert_allclose(stabilized_polynomial([-2.5, 1.0]), [-1.0, 0.25], atol=1e-12)
    np.testing.assert_allclose(stabilized_polynomial([-0.4, 0.6]), [-0.4, 0.6], atol=1e-12)
    assert stabilized_polynomial([]).size == 0
    # a unit-circle root is pulled inside
    assert is_stable_polynomial(stabilized_polynomial([-1.0]))


def test_noise_model_validation():
    noise = NoiseModel(sigma_e2=1.0, acvf=(2.0, 1.0, 0.5))
    assert noise.max_lag == 2
    assert noise.is_positive_semidefinite()
    with pytest.raises(ConfigurationError):
        NoiseModel(sigma_e2=-1.0, acvf=(1.0,))
    with pytest.raises(ConfigurationError):
        NoiseModel(sigma_e2=1.0, acvf=(1.0, 1.5))
    with pytest.raises(ConfigurationError):
        NoiseModel(sigma_e2=1.0, acvf=())


def test_indefinite_acvf_is_detected():
    assert not NoiseModel(sigma_e2=1.0, acvf=(1.0, 0.9, -0.9)).is_positive_semidefinite()


def test_dataset_is_read_only_and_checks_lengths():
    data = DataSet(u=[1.0, -1.0, 1.0], y=[0.0, 2.0, -2.0])
    assert data.n_samples == 3
    with pytest.raises(ValueError):
        data.u[0] = 5.0
    with pytest.raises(ConfigurationError):
        DataSet(u=[1.0, 2.0], y=[1.0])
    with pytest.raises(ConfigurationError):
        DataSet(u=[1.0, 2.0], y=[1.0, 2.0], y_star=[1.0])


def test_dataset_sample_requirement():
    data = DataSet(u=np.ones(6), y=np.ones(6))
    data.require_samples(1)
    with pytest.raises(InsufficientDataError):
        data.require_samples(2)


def test_detrended_removes_means():
    data = DataSet(u=[1.0, 2.0, 3.0], y=[4.0, 6.0, 8.0], y_star=[1.0, 1.0, 4.0])
    centred = data.detrended()
    assert centred.u.mean() == pytest.approx(0.0)
    assert centred.y.mean() == pytest.approx(0.0)
    assert centred.y_star.mean() == pytest.approx(0.0)
    assert centred != data
    assert centred == centred.detrended()


def test_config_defaults_and_overrides(settings):
    settings.IDENTIFICATION = {'eta_max': 6, 'bootstrap_reps': 0}
    config = IdentificationConfig.from_settings(seed=3, unity_tol=None)
    assert config.eta_max == 6
    assert config.bootstrap_reps == 0
    assert config.seed == 3
    assert config.unity_tol == 0.15


@pytest.mark.parametrize('overrides', [
    {'eta_guess_initial': 0},
    {'eta_guess_initial': 4, 'eta_max': 3},
    {'unity_tol': 0.0},
    {'acvf_grid_points': 100},
    {'bootstrap_reps': -1},
])
def test_invalid_config(overrides):
    with pytest.raises(ConfigurationError):
        IdentificationConfig(**overrides)


def test_unknown_setting_is_rejected(settings):
    settings.IDENTIFICATION = {'eta_maximum': 4}
    with pytest.raises(ConfigurationError):
        IdentificationConfig.from_settings()


def test_report_checks_order_relation():
    model = ArxModel(a=(-0.4, 0.6), b=(2.0,), delay=1)
    kwargs = dict(
        d_hat=4,
        l_verify=5,
        theta=model.to_theta(),
        model=model,
        noise=NoiseModel(),
        eigenvalues=(),
        trace=(),
        converged=True,
        config=IdentificationConfig(),
    )
    assert IdentificationReport(eta_hat=2, **kwargs).eta_hat == 2
    with pytest.raises(ConfigurationError):
        IdentificationReport(eta_hat=3, **kwargs)
