"""CSV exchange format: header ``k,u,y[,y_star]``, one sample per row."""
import csv
import logging
import math

import numpy as np

from .core_types import DataSet
from .exceptions import DataFormatError

logger = logging.getLogger(__name__)

HEADER = ('k', 'u', 'y')
HEADER_WITH_STAR = ('k', 'u', 'y', 'y_star')


def _number(value):
    return format(float(value), '.17g')


def write_dataset(data, path):
    header = HEADER if data.y_star is None else HEADER_WITH_STAR
    columns = [data.u, data.y] if data.y_star is None else [data.u, data.y, data.y_star]
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for k, row in enumerate(zip(*columns)):
            writer.writerow([k, *(_number(value) for value in row)])
    logger.info(f"Wrote {data.n_samples} samples to {path}")


def _parse_float(cell, name, line):
    try:
        value = float(cell)
    except ValueError:
        raise DataFormatError(f"{name} value {cell!r} is not a number", line=line)
    if not math.isfinite(value):
        raise DataFormatError(f"{name} value {cell!r} is not finite", line=line)
    return value


def read_dataset(path):
    """Parse a data file; every format problem raises DataFormatError with its line."""
    try:
        handle = open(path, newline='', encoding='utf-8')
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc}")
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataFormatError("input file is empty", line=1)
        header = tuple(cell.strip() for cell in header)
        if header not in (HEADER, HEADER_WITH_STAR):
            raise DataFormatError(f"expected header k,u,y[,y_star], got {','.join(header)}", line=1)

        rows = []
        for cells in reader:
            line = reader.line_num
            if not cells:
                continue
            if len(cells) != len(header):
                raise DataFormatError(f"expected {len(header)} columns, got {len(cells)}", line=line)
            try:
                k = int(cells[0])
            except ValueError:
                raise DataFormatError(f"sample index {cells[0]!r} is not an integer", line=line)
            if k != len(rows):
                raise DataFormatError(f"sample index {k} out of sequence, expected {len(rows)}", line=line)
            rows.append([_parse_float(cell, name, line) for cell, name in zip(cells[1:], header[1:])])

    if not rows:
        raise DataFormatError("input file holds no samples", line=2)
    values = np.array(rows)
    y_star = values[:, 2] if len(header) == 4 else None
    logger.info(f"Read {len(rows)} samples from {path}")
    return DataSet(u=values[:, 0], y=values[:, 1], y_star=y_star)


def write_eigenvalues(eigenvalues, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(('index', 'eigenvalue'))
        for index, value in enumerate(eigenvalues):
            writer.writerow((index, _number(value)))


def write_diagnostics(guesses, path):
    """Per-guess eigenvalues and per-iteration theta traces, one record per row."""
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(('kind', 'eta_guess', 'index', 'sigma_e2', 'change', 'values'))
        for guess in guesses:
            for index, value in enumerate(guess.eigenvalues):
                writer.writerow(('eigenvalue', guess.eta_guess, index, '', '', _number(value)))
            for record in guess.trace:
                writer.writerow((
                    'iteration',
                    guess.eta_guess,
                    record.iteration,
                    _number(record.sigma_e2),
                    _number(record.change),
                    ' '.join(_number(value) for value in record.theta),
                ))
