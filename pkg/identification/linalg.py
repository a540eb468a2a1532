"""
Dense linear algebra for covariance pencils.

``qz_solve`` reduces a real pencil (A, B) to generalized Schur form
Q^T (A - lambda B) Z = T - lambda S using Givens rotations only, so B is
never inverted and may be singular. Zero diagonal entries of S are chased
to the edge of the active block and deflated as infinite eigenvalues.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import toeplitz

from .exceptions import ConfigurationError, LinAlgError, QZConvergenceError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class MatrixPencil:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape or A.size == 0:
            raise LinAlgError(
                f"a pencil needs two non-empty square matrices of equal size, "
                f"got {A.shape} and {B.shape}"
            )
        if not (np.isfinite(A).all() and np.isfinite(B).all()):
            raise LinAlgError("pencil entries must be finite")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class GeneralizedSchur:
    """Q^T A Z = T (quasi-upper-triangular) and Q^T B Z = S (upper-triangular)."""
    Q: np.ndarray
    Z: np.ndarray
    T: np.ndarray
    S: np.ndarray

    def blocks(self):
        """(start, size) of the 1x1 and 2x2 diagonal blocks of T, top to bottom."""
        n = self.T.shape[0]
        blocks = []
        k = 0
        while k < n:
            if k + 1 < n and self.T[k + 1, k] != 0:
                blocks.append((k, 2))
                k += 2
            else:
                blocks.append((k, 1))
                k += 1
        return blocks


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """
    Eigenpairs lambda_i = alpha_i / beta_i with unit-norm right eigenvectors.

    Finite eigenvalues come first, sorted by descending |lambda|; infinite
    ones (beta_i == 0) follow.
    """
    alpha: np.ndarray
    beta: np.ndarray
    vectors: np.ndarray

    @property
    def finite_count(self):
        return int(np.count_nonzero(self.beta))

    @property
    def infinite_count(self):
        return len(self.beta) - self.finite_count

    @property
    def eigenvalues(self):
        k = self.finite_count
        return self.alpha[:k] / self.beta[:k]

    @property
    def finite_vectors(self):
        return self.vectors[:, :self.finite_count]

    @property
    def infinite_vectors(self):
        return self.vectors[:, self.finite_count:]


class SymmetricEigen(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class HessenbergTriangular(NamedTuple):
    H: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    Z: np.ndarray


def symmetric_eig(matrix, tol=1e-10):
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise LinAlgError(f"expected a square matrix, got shape {M.shape}")
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > tol * max(scale, np.finfo(float).tiny):
        raise LinAlgError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(0.5 * (M + M.T))
    return SymmetricEigen(values=values, vectors=vectors)


def toeplitz_from_acvf(acvf):
    """Symmetric Toeplitz matrix M[i][j] = acvf[|i - j|]."""
    acvf = np.asarray(acvf, dtype=float)
    if acvf.ndim != 1 or acvf.size == 0:
        raise ConfigurationError("acvf must be a non-empty sequence")
    return toeplitz(acvf)


def _givens(a, b):
    r = math.hypot(a, b)
    if r == 0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def _block_quadratic(A2, B2):
    """Coefficients (qa, qb, qc) of det(A2 - lambda B2) = qa lambda^2 - qb lambda + qc for triangular B2."""
    a11, a12, a21, a22 = A2[0, 0], A2[0, 1], A2[1, 0], A2[1, 1]
    b11, b12, b22 = B2[0, 0], B2[0, 1], B2[1, 1]
    return b11 * b22, a11 * b22 + a22 * b11 - a21 * b12, a11 * a22 - a12 * a21


def _block_roots(A2, B2):
    qa, qb, qc = _block_quadratic(A2, B2)
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        half = complex(qb, math.sqrt(-disc)) / (2.0 * qa)
        return half, half.conjugate()
    t = 0.5 * (qb + math.copysign(math.sqrt(disc), qb))
    if t == 0:
        return 0j, 0j
    return complex(t / qa), complex(qc / t)


class _QZWorkspace:
    """Working copies of H and R together with the accumulated Q and Z."""

    def __init__(self, pencil):
        self.n = pencil.n
        self.H = np.array(pencil.A)
        self.R = np.array(pencil.B)
        self.Q = np.eye(self.n)
        self.Z = np.eye(self.n)

    def rotate_rows(self, i, j, c, s):
        for M in (self.H, self.R):
            upper = M[i].copy()
            M[i] = c * upper + s * M[j]
            M[j] = -s * upper + c * M[j]
        left = self.Q[:, i].copy()
        self.Q[:, i] = c * left + s * self.Q[:, j]
        self.Q[:, j] = -s * left + c * self.Q[:, j]

    def rotate_columns(self, i, j, c, s):
        for M in (self.H, self.R, self.Z):
            left = M[:, i].copy()
            M[:, i] = c * left + s * M[:, j]
            M[:, j] = -s * left + c * M[:, j]

    def zero_row_entry(self, M, i, j, col):
        """Row rotation on (i, j) annihilating M[j, col] against M[i, col]."""
        c, s, r = _givens(M[i, col], M[j, col])
        if r == 0:
            return
        self.rotate_rows(i, j, c, s)
        M[j, col] = 0.0

    def zero_column_entry(self, M, row, i, j):
        """Column rotation on (i, j) annihilating M[row, i] against M[row, j]."""
        a, b = M[row, i], M[row, j]
        r = math.hypot(a, b)
        if r == 0:
            return
        self.rotate_columns(i, j, b / r, -a / r)
        M[row, i] = 0.0

    def reduce(self):
        """Hessenberg-triangular reduction."""
        if np.any(np.tril(self.R, -1)):
            q, r = np.linalg.qr(self.R)
            self.H = q.T @ self.H
            self.R = np.triu(r)
            self.Q = q
        for j in range(self.n - 2):
            for i in range(self.n - 1, j + 1, -1):
                self.zero_row_entry(self.H, i - 1, i, j)
                self.zero_column_entry(self.R, i, i - 1, i)

    def snapshot(self):
        return GeneralizedSchur(Q=self.Q.copy(), Z=self.Z.copy(), T=self.H.copy(), S=self.R.copy())

    def iterate(self, a_norm, b_tol, max_sweeps):
        hi = self.n - 1
        sweeps = 0
        since_deflation = 0
        while hi >= 0:
            lo = self._block_start(hi, a_norm)
            if lo == hi:
                hi -= 1
                since_deflation = 0
                continue
            k = self._zero_diagonal(lo, hi, b_tol)
            if k is not None:
                self._push_infinite(lo, hi, k)
                continue
            if hi - lo == 1:
                if not self._split_block(lo):
                    hi -= 2
                since_deflation = 0
                continue
            sweeps += 1
            if sweeps > max_sweeps:
                raise QZConvergenceError(
                    f"QZ iteration did not converge within {max_sweeps} sweeps",
                    schur=self.snapshot(),
                )
            since_deflation += 1
            self._double_shift_sweep(lo, hi, exceptional=since_deflation % 10 == 0)
        return sweeps

    def _block_start(self, hi, a_norm):
        H = self.H
        for k in range(hi, 0, -1):
            h = abs(H[k, k - 1])
            if h <= EPS * (abs(H[k - 1, k - 1]) + abs(H[k, k])) or h <= EPS * a_norm:
                H[k, k - 1] = 0.0
                return k
        return 0

    def _zero_diagonal(self, lo, hi, b_tol):
        for k in range(lo, hi + 1):
            if abs(self.R[k, k]) <= b_tol:
                self.R[k, k] = 0.0
                return k
        return None

    def _push_infinite(self, lo, hi, k):
        """Deflate the zero R[k, k] at the top of the block or chase it to the bottom."""
        H, R = self.H, self.R
        if k == lo:
            self.zero_row_entry(H, lo, lo + 1, lo)
            return
        for j in range(k, hi):
            self.zero_row_entry(R, j, j + 1, j + 1)
            self.zero_column_entry(H, j + 1, j - 1, j)
            R[j, j - 1] = 0.0
        self.zero_column_entry(H, hi, hi - 1, hi)
        R[hi, hi - 1] = 0.0

    def _split_block(self, m):
        """Triangularize a 2x2 block with real eigenvalues; False when they are complex."""
        H, R = self.H, self.R
        rows = slice(m, m + 2)
        qa, qb, qc = _block_quadratic(H[rows, rows], R[rows, rows])
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0:
            return False
        root = 0.5 * (qb + math.copysign(math.sqrt(disc), qb)) / qa
        shifted = H[rows, rows] - root * R[rows, rows]
        p, q = max(shifted, key=lambda row: math.hypot(row[0], row[1]))
        norm = math.hypot(p, q)
        if norm > 0:
            self.rotate_columns(m, m + 1, q / norm, -p / norm)
        target = R if math.hypot(R[m, m], R[m + 1, m]) > 0 else H
        self.zero_row_entry(target, m, m + 1, m)
        H[m + 1, m] = 0.0
        R[m + 1, m] = 0.0
        return True

    def _shift_vector(self, lo, hi, exceptional):
        H, R = self.H, self.R
        tail = slice(hi - 1, hi + 1)
        qa, qb, qc = _block_quadratic(H[tail, tail], R[tail, tail])
        trace, det = qb / qa, qc / qa
        if exceptional:
            d = H[hi, hi] / R[hi, hi]
            sigma = (abs(H[hi, hi - 1] / R[hi - 1, hi - 1])
                     + abs(H[hi - 1, hi - 2] / R[hi - 2, hi - 2]))
            trace = 2.0 * d + 1.5 * sigma
            det = d * d + 1.5 * sigma * d + sigma * sigma

        a11, a12 = H[lo, lo], H[lo, lo + 1]
        a21, a22 = H[lo + 1, lo], H[lo + 1, lo + 1]
        a32 = H[lo + 2, lo + 1]
        b11, b12, b22 = R[lo, lo], R[lo, lo + 1], R[lo + 1, lo + 1]

        # first column of (A B^-1)^2 - trace (A B^-1) + det I
        m1 = a11 / b11
        m2 = a21 / b11
        w2 = m2 / b22
        w1 = (m1 - b12 * w2) / b11
        x = a11 * w1 + a12 * w2 - trace * m1 + det
        y = a21 * w1 + a22 * w2 - trace * m2
        z = a32 * w2
        return x, y, z

    def _double_shift_sweep(self, lo, hi, exceptional=False):
        H, R = self.H, self.R
        x, y, z = self._shift_vector(lo, hi, exceptional)
        for k in range(lo, hi - 1):
            if k > lo:
                x, y, z = H[k, k - 1], H[k + 1, k - 1], H[k + 2, k - 1]
            c, s, r = _givens(y, z)
            self.rotate_rows(k + 1, k + 2, c, s)
            c, s, _ = _givens(x, r)
            self.rotate_rows(k, k + 1, c, s)
            if k > lo:
                H[k + 1, k - 1] = 0.0
                H[k + 2, k - 1] = 0.0
            self.zero_column_entry(R, k + 2, k + 1, k + 2)
            self.zero_column_entry(R, k + 1, k, k + 1)
        self.zero_row_entry(H, hi - 1, hi, hi - 2)
        self.zero_column_entry(R, hi, hi - 1, hi)


def hessenberg_triangular(pencil):
    """Q^T A Z = H upper-Hessenberg and Q^T B Z = R upper-triangular."""
    workspace = _QZWorkspace(pencil)
    workspace.reduce()
    return HessenbergTriangular(H=workspace.H, R=workspace.R, Q=workspace.Q, Z=workspace.Z)


def _null_vector(block):
    p, q = max(block, key=lambda row: abs(row[0]) ** 2 + abs(row[1]) ** 2)
    norm = math.sqrt(abs(p) ** 2 + abs(q) ** 2)
    if norm == 0:
        return np.array([1.0, 0.0], dtype=complex)
    return np.array([q, -p], dtype=complex) / norm


def _eigenvector(schur, blocks, index, alpha, beta):
    """Back-substitution on (beta T - alpha S) y = 0, mapped back through Z."""
    T, S = schur.T, schur.S
    n = T.shape[0]
    M = beta * T - alpha * S
    # M vanishes when B = 0; the floor then follows the scale of the pencil
    scale = (abs(alpha) + abs(beta)) * (np.linalg.norm(T) + np.linalg.norm(S))
    floor = EPS * max(np.linalg.norm(M), EPS * scale, np.finfo(float).tiny / EPS)
    start, size = blocks[index]
    y = np.zeros(n, dtype=complex)
    if size == 1:
        y[start] = 1.0
    else:
        y[start:start + 2] = _null_vector(M[start:start + 2, start:start + 2])

    for j, width in reversed(blocks[:index]):
        rows = slice(j, j + width)
        rhs = -M[rows, j + width:] @ y[j + width:]
        if width == 1:
            pivot = M[j, j] if abs(M[j, j]) >= floor else floor
            y[j] = rhs[0] / pivot
        else:
            block = M[rows, rows]
            if abs(np.linalg.det(block)) <= floor * max(np.abs(block).max(), floor):
                block = block + floor * np.eye(2)
            y[rows] = np.linalg.solve(block, rhs)
        largest = np.abs(y).max()
        if largest > 1e150:
            y /= largest

    v = schur.Z @ y
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        return schur.Z[:, start].astype(complex)
    return v / norm


def _eigenpairs(schur, b_tol):
    n = schur.T.shape[0]
    alpha = np.zeros(n, dtype=complex)
    beta = np.zeros(n)
    vectors = np.zeros((n, n), dtype=complex)
    blocks = schur.blocks()
    for index, (start, size) in enumerate(blocks):
        if size == 1:
            a, b = schur.T[start, start], schur.S[start, start]
            if abs(b) <= b_tol:
                b = 0.0
            elif b < 0:
                a, b = -a, -b
            alpha[start], beta[start] = a, b
            vectors[:, start] = _eigenvector(schur, blocks, index, a, b)
            continue
        rows = slice(start, start + 2)
        scale = math.sqrt(abs(schur.S[start, start] * schur.S[start + 1, start + 1]))
        for offset, root in enumerate(_block_roots(schur.T[rows, rows], schur.S[rows, rows])):
            alpha[start + offset] = root * scale
            beta[start + offset] = scale
            vectors[:, start + offset] = _eigenvector(schur, blocks, index, root * scale, scale)

    finite = np.flatnonzero(beta)
    infinite = np.flatnonzero(beta == 0)
    magnitudes = np.abs(alpha[finite] / beta[finite])
    order = np.concatenate((finite[np.argsort(-magnitudes, kind='stable')], infinite))
    vectors = vectors[:, order]
    if not np.any(vectors.imag):
        vectors = vectors.real
    return EigenSolution(alpha=alpha[order], beta=beta[order], vectors=vectors)


def qz_solve(pencil, max_sweeps=None):
    """
    Generalized Schur form and eigenpairs of ``pencil``.

    Returns ``(GeneralizedSchur, EigenSolution)``. Raises QZConvergenceError,
    carrying the partially reduced form, after ``max_sweeps`` (default 30n)
    double-shift sweeps.
    """
    if not isinstance(pencil, MatrixPencil):
        pencil = MatrixPencil(*pencil)
    n = pencil.n
    max_sweeps = 30 * n if max_sweeps is None else max_sweeps
    a_norm = np.linalg.norm(pencil.A)
    b_tol = max(n, 10) * EPS * np.linalg.norm(pencil.B)

    workspace = _QZWorkspace(pencil)
    workspace.reduce()
    sweeps = workspace.iterate(a_norm, b_tol, max_sweeps)

    schur = workspace.snapshot()
    solution = _eigenpairs(schur, b_tol)
    logger.debug(
        f"QZ on {n}x{n} pencil: {sweeps} sweeps, "
        f"{solution.finite_count} finite / {solution.infinite_count} infinite eigenvalues"
    )
    return schur, solution
