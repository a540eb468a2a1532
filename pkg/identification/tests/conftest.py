import os
import django
import pytest
import sys

# Set up Django settings
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'arx_ident.settings')
django.setup()

from identification.core_types import ArxModel, IdentificationConfig  # noqa: E402
from identification.csv_io import write_dataset  # noqa: E402
from identification.excitation import design_input, simulate_dataset  # noqa: E402

if 'pytest' in sys.modules:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': ':memory:',
        }
    }

# Second-order plant with a single delayed input tap
CASE1_MODEL = ArxModel(a=(-0.4, 0.6), b=(2.0,), delay=1)
CASE1_SIGMA_E2 = 1.4368
# Second-order plant, input delay 2 and equation order 3
CASE2_MODEL = ArxModel(a=(-0.3, 0.7), b=(1.2, 1.6), delay=2)
CASE2_SIGMA_E2 = 1.7


@pytest.fixture(autouse=True)
def enable_db_access_for_all_tests(db):
    pass


@pytest.fixture
def prbs_input():
    return design_input(prbs_order=10)


@pytest.fixture
def case1_clean(prbs_input):
    return simulate_dataset(CASE1_MODEL, prbs_input).data


@pytest.fixture
def case2_clean(prbs_input):
    return simulate_dataset(CASE2_MODEL, prbs_input).data


@pytest.fixture
def case1_noisy(prbs_input):
    return simulate_dataset(CASE1_MODEL, prbs_input, sigma_e2=CASE1_SIGMA_E2, seed=7, burn_in=200).data


@pytest.fixture
def case2_noisy(prbs_input):
    return simulate_dataset(CASE2_MODEL, prbs_input, sigma_e2=CASE2_SIGMA_E2, seed=11, burn_in=200).data


@pytest.fixture
def fast_config():
    """Search settings without the bootstrap."""
    return IdentificationConfig(eta_max=5, bootstrap_reps=0)


@pytest.fixture
def case1_csv(tmp_path, case1_clean):
    path = tmp_path / 'case1.csv'
    write_dataset(case1_clean, path)
    return path
