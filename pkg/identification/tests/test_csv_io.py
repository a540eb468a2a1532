import csv

import numpy as np
import pytest
from identification.core_types import DataSet, GuessDiagnostics, IterationRecord
from identification.csv_io import read_dataset, write_dataset, write_diagnostics, write_eigenvalues
from identification.exceptions import DataFormatError


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_dataset_survives_file_exactly(tmp_path, case1_noisy):
    path = tmp_path / 'data.csv'
    write_dataset(case1_noisy, path)
    assert path.read_text().splitlines()[0] == 'k,u,y,y_star'
    assert read_dataset(path) == case1_noisy


def test_dataset_without_reference_output(tmp_path):
    path = _write(tmp_path / 'data.csv', 'k,u,y\n0,1,0.5\n1,-1,0.25\n\n')
    data = read_dataset(path)
    np.testing.assert_array_equal(data.u, [1.0, -1.0])
    np.testing.assert_array_equal(data.y, [0.5, 0.25])
    assert data.y_star is None


@pytest.mark.parametrize('text, line, fragment', [
    ('', 1, 'empty'),
    ('k,y,u\n0,1,2\n', 1, 'header'),
    ('k,u,y\n', 2, 'no samples'),
    ('k,u,y\n0,1\n', 2, 'columns'),
    ('k,u,y\n0,1,2\nx,1,2\n', 3, 'integer'),
    ('k,u,y\n0,1,2\n2,1,2\n', 3, 'sequence'),
    ('k,u,y\n0,1,abc\n', 2, 'not a number'),
    ('k,u,y\n0,nan,1\n', 2, 'not finite'),
])
def test_malformed_files(tmp_path, text, line, fragment):
    path = _write(tmp_path / 'bad.csv', text)
    with pytest.raises(DataFormatError) as excinfo:
        read_dataset(path)
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"line {line}: ")
    assert fragment in str(excinfo.value)


def test_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        read_dataset(tmp_path / 'absent.csv')


def test_write_eigenvalues(tmp_path):
    path = tmp_path / 'eig.csv'
    write_eigenvalues([0.9689, 0.9988, 4.5536], path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ['index', 'eigenvalue']
    assert [float(row[1]) for row in rows[1:]] == [0.9689, 0.9988, 4.5536]


def test_write_diagnostics(tmp_path):
    record = IterationRecord(iteration=1, theta=(1.0, -0.4), sigma_e2=1.2, change=float('inf'), min_eigenvalue=0.9)
    guesses = [
        GuessDiagnostics(eta_guess=1, l_verify=4, eigenvalues=(0.2, 0.3), d_hat=0, eta_hat=5,
                         reason='no unity eigenvalues', trace=(record,)),
        GuessDiagnostics(eta_guess=2, l_verify=5, reason='singular'),
    ]
    path = tmp_path / 'diag.csv'
    write_diagnostics(guesses, path)
    rows = list(csv.DictReader(path.open()))
    assert [row['kind'] for row in rows] == ['eigenvalue', 'eigenvalue', 'iteration']
    assert rows[2]['values'] == '1 -0.40000000000000002'
    assert rows[2]['change'] == 'inf'
