import csv
import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError
from identification.csv_io import read_dataset
from identification.serializers import ReportSerializer


def _run(*args):
    out, err = StringIO(), StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def _eigenvalue_lines(output):
    values = []
    for line in output.splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[0].isdigit():
            values.append(float(parts[1]))
    return values


def test_simulate_writes_csv_and_sidecar(tmp_path):
    path = tmp_path / 'sim.csv'
    out, _ = _run(
        'simulate', '--a=-0.4,0.6', '--b=2', '--delay=1', '--prbs-order=7',
        '--sigma-e2=0.5', '--seed=3', '--burn-in=50', f'--out={path}',
    )
    data = read_dataset(path)
    assert data.n_samples == 127
    assert data.y_star is not None
    sidecar = json.loads((tmp_path / 'sim.json').read_text())
    assert sidecar['sigma_e2'] == 0.5
    assert sidecar['seed'] == 3
    assert sidecar['model'] == {'a': [-0.4, 0.6], 'b': [2.0], 'delay': 1, 'n_y': 2, 'n_u': 1}
    assert sidecar['achieved_snr'] > 0
    assert 'Wrote 127 samples' in out


def test_simulate_at_target_snr(tmp_path):
    path = tmp_path / 'sim.csv'
    _run('simulate', '--a=-0.3,0.7', '--b=1.2,1.6', '--delay=2', '--n=500',
         '--snr=6', '--snr-reference=innovation', f'--out={path}')
    sidecar = json.loads((tmp_path / 'sim.json').read_text())
    assert sidecar['snr_reference'] == 'innovation'
    assert sidecar['n_samples'] == 500
    assert sidecar['sigma_e2'] > 0


def test_simulate_noise_free_has_no_snr(tmp_path):
    path = tmp_path / 'clean.csv'
    _run('simulate', '--b=1', '--prbs-order=5', f'--out={path}')
    sidecar = json.loads((tmp_path / 'clean.json').read_text())
    assert sidecar['sigma_e2'] == 0.0
    assert sidecar['achieved_snr'] is None


@pytest.mark.parametrize('args', [
    ('--a=-1.5', '--b=1', '--n=100'),
    ('--b=1', '--n=100', '--snr=2', '--sigma-e2=1'),
    ('--b=1', '--n=100', '--prbs-order=7'),
    ('--b=1,x', '--n=100'),
    ('--b=1',),
])
def test_simulate_input_errors(tmp_path, args):
    with pytest.raises(CommandError) as excinfo:
        _run('simulate', *args, f"--out={tmp_path / 'x.csv'}")
    assert excinfo.value.returncode == 1


def test_simulate_unstable_allowed_on_request(tmp_path):
    path = tmp_path / 'unstable.csv'
    _run('simulate', '--a=-1.1', '--b=1', '--prbs-order=4', '--allow-unstable', f'--out={path}')
    assert read_dataset(path).n_samples == 15


def test_identify_writes_report_and_diagnostics(tmp_path, case1_csv):
    report_path = tmp_path / 'report.json'
    diagnostics_path = tmp_path / 'diag.csv'
    out, _ = _run('identify', f'--input={case1_csv}', '--bootstrap=0', '--eta-max=4',
                  f'--out={report_path}', f'--diagnostics={diagnostics_path}')
    payload = json.loads(report_path.read_text())
    assert payload['schema_version'] == '1.0'
    assert payload['eta_hat'] == 2
    assert payload['model']['delay'] == 1
    assert payload['trace'][0]['change'] is None
    serializer = ReportSerializer(data=payload)
    assert serializer.is_valid(), serializer.errors
    assert serializer.save().eta_hat == 2
    kinds = {row['kind'] for row in csv.DictReader(diagnostics_path.open())}
    assert kinds == {'eigenvalue', 'iteration'}
    assert 'eta_hat=2' in out


def test_identify_prints_report_without_out(case1_csv):
    out, _ = _run('identify', f'--input={case1_csv}', '--bootstrap=0', '--eta-max=3')
    assert json.loads(out)['eta_hat'] == 2


def test_identify_order_search_failure(tmp_path, case1_csv):
    diagnostics_path = tmp_path / 'diag.csv'
    with pytest.raises(CommandError) as excinfo:
        _run('identify', f'--input={case1_csv}', '--bootstrap=0', '--eta-max=1',
             f'--diagnostics={diagnostics_path}')
    assert excinfo.value.returncode == 2
    assert diagnostics_path.exists()
    rows = list(csv.DictReader(diagnostics_path.open()))
    assert all(row['eta_guess'] == '1' for row in rows)


@pytest.mark.parametrize('content, returncode', [
    ('k,u\n0,1\n', 1),
    ('k,u,y\n0,1,2\n1,1,2\n', 1),
])
def test_identify_input_errors(tmp_path, content, returncode):
    path = tmp_path / 'bad.csv'
    path.write_text(content)
    with pytest.raises(CommandError) as excinfo:
        _run('identify', f'--input={path}', '--bootstrap=0')
    assert excinfo.value.returncode == returncode


def test_identify_rejects_invalid_config(case1_csv):
    with pytest.raises(CommandError) as excinfo:
        _run('identify', f'--input={case1_csv}', '--eta-init=4', '--eta-max=2')
    assert excinfo.value.returncode == 1


def test_inspect_evd_identity(case1_csv):
    out, _ = _run('inspect_evd', f'--input={case1_csv}', '--l-stack=2', '--identity')
    values = _eigenvalue_lines(out)
    assert len(values) == 6
    assert values == sorted(values)
    assert abs(values[0]) < 1e-8 * sum(values)
    assert 'infinite eigenvalues: 0' in out
    assert 'theta: 1 -0.4 0.6' in out


def test_inspect_evd_with_noise_model(tmp_path, case1_csv):
    noise_path = tmp_path / 'noise.json'
    noise_path.write_text(json.dumps({'sigma_e2': 1.0, 'acvf': [1.0, 0.5, 0.25, 0.1]}))
    eig_path = tmp_path / 'eig.csv'
    out, _ = _run('inspect_evd', f'--input={case1_csv}', '--l-stack=3',
                  f'--acvf={noise_path}', f'--out={eig_path}')
    assert 'infinite eigenvalues: 4' in out
    rows = list(csv.DictReader(eig_path.open()))
    assert len(rows) == 4


@pytest.mark.parametrize('args', [
    ('--l-stack=600', '--identity'),
    ('--l-stack=2',),
    ('--l-stack=2', '--identity', '--acvf=noise.json'),
])
def test_inspect_evd_input_errors(case1_csv, args):
    with pytest.raises(CommandError) as excinfo:
        _run('inspect_evd', f'--input={case1_csv}', *args)
    assert excinfo.value.returncode == 1


def test_inspect_evd_short_acvf(tmp_path, case1_csv):
    noise_path = tmp_path / 'noise.json'
    noise_path.write_text(json.dumps({'noise': {'sigma_e2': 1.0, 'acvf': [1.0, 0.5]}}))
    with pytest.raises(CommandError) as excinfo:
        _run('inspect_evd', f'--input={case1_csv}', '--l-stack=3', f'--acvf={noise_path}')
    assert excinfo.value.returncode == 1
