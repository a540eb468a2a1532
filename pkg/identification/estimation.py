"""
ARX identification by iterative generalized spectral decomposition.

For a stacking lag L every row of the lagged data matrix is
[y[k]..y[k-L], u[k]..u[k-L]]. The generalized eigenproblem of the sample
covariance against the noise covariance yields eigenvalues close to one for
each exact linear relation in the data; the eigenvector of the smallest
eigenvalue at L = eta carries the model coefficients.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.integrate import trapezoid

from .core_types import (
    ArxModel,
    GuessDiagnostics,
    IdentificationConfig,
    IdentificationReport,
    IterationRecord,
    NoiseModel,
    is_stable_polynomial,
    stabilized_polynomial,
)
from .exceptions import (
    ComplexEigenvalueError,
    ConfigurationError,
    DegenerateNormalizationError,
    IdentificationError,
    InsufficientDataError,
    OrderSearchError,
    UnstableModelError,
)
from .linalg import MatrixPencil, qz_solve, symmetric_eig, toeplitz_from_acvf

logger = logging.getLogger(__name__)

# sigma_e2 below this fraction of var(y) means the data carry no noise
NOISE_FLOOR = 1e-16
# eigenvalues of S_Z below this fraction of its trace count as exact relations
NULLITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LaggedMatrix:
    Z: np.ndarray
    lag: int

    @property
    def labels(self):
        def lags(name):
            return [f"{name}[k]"] + [f"{name}[k-{i}]" for i in range(1, self.lag + 1)]
        return tuple(lags('y') + lags('u'))


@dataclass(frozen=True, eq=False)
class CovariancePencil:
    S: np.ndarray
    Sigma_e: np.ndarray

    def as_matrix_pencil(self):
        return MatrixPencil(self.S, self.Sigma_e)


class PencilEigen(NamedTuple):
    """Real finite eigenpairs, ascending, plus the number of infinite eigenvalues."""
    eigenvalues: np.ndarray
    vectors: np.ndarray
    infinite_count: int


class InnerLoopResult(NamedTuple):
    theta: np.ndarray
    noise: NoiseModel
    trace: tuple
    converged: bool
    noise_free: bool
    # AR polynomial behind the noise model; differs from theta when stabilized
    noise_a: np.ndarray = np.zeros(0)
    stabilized: bool = False


def build_lagged_matrix(data, lag):
    n = data.n_samples
    if lag < 0:
        raise ConfigurationError(f"stacking lag must be non-negative, got {lag}")
    if n < lag + 1:
        raise InsufficientDataError(f"{n} samples cannot be stacked at lag {lag}")
    y_rows = sliding_window_view(data.y, lag + 1)[:, ::-1]
    u_rows = sliding_window_view(data.u, lag + 1)[:, ::-1]
    return LaggedMatrix(Z=np.hstack((y_rows, u_rows)), lag=lag)


def sample_covariance(lagged):
    """Z^T Z / (N - L), no mean removal."""
    Z = lagged.Z
    if Z.shape[0] == 0:
        raise InsufficientDataError("lagged matrix has no rows")
    S = Z.T @ Z / Z.shape[0]
    return 0.5 * (S + S.T)


def build_noise_covariance(noise, lag):
    if len(noise.acvf) < lag + 1:
        raise ConfigurationError(
            f"noise ACVF has lags 0..{noise.max_lag}, stacking lag {lag} needs 0..{lag}"
        )
    size = lag + 1
    sigma = np.zeros((2 * size, 2 * size))
    sigma[:size, :size] = toeplitz_from_acvf(noise.acvf[:size])
    return sigma


def identify_evd(S, Sigma_e):
    """
    Finite generalized eigenpairs of (S, Sigma_e) in ascending order.

    Eigenvalues with |Im| <= 1e-6 (1 + |lambda|) are taken as real; other
    complex eigenvalues are dropped, unless the smallest one is complex.
    """
    pencil = CovariancePencil(S=np.asarray(S, dtype=float), Sigma_e=np.asarray(Sigma_e, dtype=float))
    _, solution = qz_solve(pencil.as_matrix_pencil())
    values = solution.eigenvalues
    vectors = solution.finite_vectors

    order = np.argsort(values.real, kind='stable')
    values, vectors = values[order], vectors[:, order]
    real = np.abs(values.imag) <= 1e-6 * (1.0 + np.abs(values))
    if values.size and not real[0]:
        raise ComplexEigenvalueError(f"smallest generalized eigenvalue {values[0]} is complex")
    if not real.all():
        logger.warning(f"Discarding {int(np.count_nonzero(~real))} complex generalized eigenvalues")

    vectors = vectors[:, real].real
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    return PencilEigen(
        eigenvalues=values[real].real,
        vectors=vectors,
        infinite_count=solution.infinite_count,
    )


def extract_theta(v):
    """Normalise an eigenvector so that its y[k] coefficient is one."""
    v = np.asarray(v, dtype=float)
    if abs(v[0]) <= 1e-10 * np.linalg.norm(v):
        raise DegenerateNormalizationError("eigenvector has no y[k] component")
    return v / v[0]


def residual_variance(theta, data):
    """Variance of e[k] = A(q^-1) y[k] - B(q^-1) u[k] over k = eta..N-1."""
    theta = np.asarray(theta, dtype=float)
    eta = len(theta) // 2 - 1
    residuals = build_lagged_matrix(data, eta).Z @ theta
    return float(np.var(residuals))


def acvf_from_model(a, sigma_e2, max_lag, grid_points=4096):
    """
    ACVF of v = e / A(q^-1) at lags 0..max_lag from its power spectrum,
    sigma[l] = (sigma_e2 / pi) * int_0^pi cos(w l) / |A(e^-jw)|^2 dw.
    """
    a = np.asarray(a, dtype=float)
    if grid_points < 512:
        raise ConfigurationError(f"grid_points must be at least 512, got {grid_points}")
    if not is_stable_polynomial(a):
        raise UnstableModelError(f"A polynomial {tuple(a)} has roots on or outside the unit circle")

    omega = np.linspace(0.0, np.pi, grid_points)
    a_poly = np.concatenate(([1.0], a))
    response = np.exp(-1j * np.outer(omega, np.arange(len(a_poly)))) @ a_poly
    magnitude = np.abs(response)
    if magnitude.min() < 1e-8:
        raise UnstableModelError("A polynomial has a pole too close to the unit circle")

    lags = np.arange(max_lag + 1)
    integrand = np.cos(np.outer(lags, omega)) / magnitude ** 2
    return sigma_e2 / np.pi * trapezoid(integrand, omega, axis=1)


def inner_loop(data, eta_guess, config=None):
    """Alternate eigenvector estimation and noise-covariance refinement at L = eta_guess."""
    config = config or IdentificationConfig()
    lag = eta_guess
    data.require_samples(lag)
    S = sample_covariance(build_lagged_matrix(data, lag))
    sigma = np.eye(2 * (lag + 1))
    floor = NOISE_FLOOR * max(float(np.var(data.y)), np.finfo(float).tiny)

    trace = []
    previous = None
    converged = False
    noise_free = False
    stabilized = False
    noise = None
    noise_a = np.zeros(lag)
    for iteration in range(1, config.max_inner_iters + 1):
        evd = identify_evd(S, sigma)
        theta = extract_theta(evd.vectors[:, 0])
        sigma_e2 = residual_variance(theta, data)
        change = (
            float('inf') if previous is None
            else float(np.linalg.norm(theta - previous) / np.linalg.norm(previous))
        )
        trace.append(IterationRecord(
            iteration=iteration,
            theta=theta,
            sigma_e2=sigma_e2,
            change=change,
            min_eigenvalue=float(evd.eigenvalues[0]),
        ))
        logger.debug(f"eta_guess={eta_guess} iteration {iteration}: sigma_e2={sigma_e2:.6g}, change={change:.3g}")

        if sigma_e2 <= floor:
            noise = NoiseModel(sigma_e2=sigma_e2, acvf=np.zeros(lag + 1))
            converged = noise_free = True
            break

        noise_a = theta[1:lag + 1]
        stabilized = not is_stable_polynomial(noise_a)
        if stabilized:
            logger.debug(f"eta_guess={eta_guess} iteration {iteration}: unstable A estimate, reflecting its roots")
            noise_a = stabilized_polynomial(noise_a)
        acvf = acvf_from_model(noise_a, sigma_e2, lag, config.acvf_grid_points)
        noise = NoiseModel(sigma_e2=sigma_e2, acvf=acvf)
        if change < config.conv_tol:
            converged = True
            break
        sigma = build_noise_covariance(noise, lag)
        previous = theta

    if not converged:
        logger.warning(
            f"Inner loop at eta_guess={eta_guess} stopped after {config.max_inner_iters} "
            f"iterations without converging"
        )
    return InnerLoopResult(
        theta=theta,
        noise=noise,
        trace=tuple(trace),
        converged=converged,
        noise_free=noise_free,
        noise_a=noise_a,
        stabilized=stabilized,
    )


def count_unity_eigenvalues(eigenvalues, unity_tol=0.15):
    """Length of the run of eigenvalues inside [1 - tol, 1 + tol], scanning upward."""
    count = 0
    for value in np.sort(np.asarray(eigenvalues, dtype=float)):
        if value < 1.0 - unity_tol:
            continue
        if value > 1.0 + unity_tol:
            break
        count += 1
    return count


def estimate_order(lag, d_hat):
    if not 0 <= d_hat <= lag + 1:
        raise ConfigurationError(f"d_hat must lie in [0, {lag + 1}], got {d_hat}")
    return lag - d_hat + 1


def _verify(data, inner, eta_guess, l_verify, config):
    """Eigenvalues at the verification lag and the number of relations they reveal."""
    S = sample_covariance(build_lagged_matrix(data, l_verify))
    if inner.noise_free:
        values = symmetric_eig(S).values
        d_hat = int(np.count_nonzero(values <= NULLITY_TOL * np.trace(S)))
        return values, d_hat, NoiseModel(sigma_e2=inner.noise.sigma_e2, acvf=np.zeros(l_verify + 1))

    acvf = acvf_from_model(inner.noise_a, inner.noise.sigma_e2, l_verify, config.acvf_grid_points)
    noise = NoiseModel(sigma_e2=inner.noise.sigma_e2, acvf=acvf)
    evd = identify_evd(S, build_noise_covariance(noise, l_verify))
    return evd.eigenvalues, count_unity_eigenvalues(evd.eigenvalues, config.unity_tol), noise


def _try_guess(data, eta_guess, config):
    l_verify = eta_guess + config.l_verify_offset
    try:
        data.require_samples(l_verify)
        inner = inner_loop(data, eta_guess, config)
        eigenvalues, d_hat, noise = _verify(data, inner, eta_guess, l_verify, config)
    except IdentificationError as exc:
        logger.info(f"eta_guess={eta_guess} failed: {exc}")
        return GuessDiagnostics(eta_guess=eta_guess, l_verify=l_verify, reason=str(exc)), None, None

    eta_hat = estimate_order(l_verify, d_hat)
    accepted = d_hat >= 1 and eta_hat == eta_guess
    if accepted:
        reason = 'accepted'
    elif d_hat == 0:
        reason = 'no unity eigenvalues: order is above the guess'
    else:
        reason = f"estimated order {eta_hat} differs from the guess"
    if inner.stabilized:
        reason += ' (noise model stabilized)'
    logger.info(f"eta_guess={eta_guess}, L_verify={l_verify}: d_hat={d_hat}, eta_hat={eta_hat} ({reason})")
    diagnostics = GuessDiagnostics(
        eta_guess=eta_guess,
        l_verify=l_verify,
        eigenvalues=eigenvalues,
        d_hat=d_hat,
        eta_hat=eta_hat,
        accepted=accepted,
        reason=reason,
        trace=inner.trace,
    )
    return diagnostics, inner, noise


def identify(data, config=None):
    """
    Search the equation order and estimate the ARX model.

    Guesses run upward from ``eta_guess_initial``; a guess is accepted when
    the verification stack reveals at least one relation and the implied
    order equals the guess. A smaller implied order not tried yet is tried
    next.
    """
    from .validation import bootstrap_ci

    config = config or IdentificationConfig()
    data.require_samples(config.eta_guess_initial + config.l_verify_offset)
    pending = deque(range(config.eta_guess_initial, config.eta_max + 1))
    tried = set()
    guesses = []
    while pending:
        eta_guess = pending.popleft()
        if eta_guess in tried:
            continue
        tried.add(eta_guess)
        diagnostics, inner, noise = _try_guess(data, eta_guess, config)
        guesses.append(diagnostics)
        if diagnostics.accepted:
            break
        hint = diagnostics.eta_hat
        if hint is not None and 1 <= hint < eta_guess and hint not in tried:
            pending.appendleft(hint)
    else:
        raise OrderSearchError(
            f"no order in [{config.eta_guess_initial}, {config.eta_max}] was accepted",
            guesses=guesses,
        )

    theta_std = theta_interval = None
    if config.bootstrap_reps > 0:
        bootstrap = bootstrap_ci(data, inner.theta, inner.noise, config)
        theta_std = bootstrap.std
        theta_interval = tuple(zip(bootstrap.lower, bootstrap.upper))
    model = prune_structure(inner.theta, theta_std)
    logger.info(f"Identified {model} with sigma_e2={noise.sigma_e2:.6g}")

    return IdentificationReport(
        eta_hat=diagnostics.eta_hat,
        d_hat=diagnostics.d_hat,
        l_verify=diagnostics.l_verify,
        theta=inner.theta,
        model=model,
        noise=noise,
        eigenvalues=diagnostics.eigenvalues,
        trace=inner.trace,
        converged=inner.converged,
        config=config,
        theta_std=theta_std,
        theta_interval=theta_interval,
        guesses=tuple(guesses),
    )


def prune_structure(theta, theta_std=None, relative_floor=0.05):
    """
    Read (n_y, n_u, delay) off an estimated theta.

    A coefficient counts as zero when |c| <= max(2 std(c), relative_floor * max|b|).
    At least one b coefficient always survives.
    """
    theta = np.asarray(theta, dtype=float)
    eta = len(theta) // 2 - 1
    std = np.zeros_like(theta) if theta_std is None else np.asarray(theta_std, dtype=float)
    a = theta[1:eta + 1]
    b = -theta[eta + 1:]
    floor = relative_floor * np.abs(b).max()

    a_keep = np.abs(a) > np.maximum(2.0 * std[1:eta + 1], floor)
    b_keep = np.abs(b) > np.maximum(2.0 * std[eta + 1:], floor)
    if not b_keep.any():
        b_keep[np.argmax(np.abs(b))] = True

    a = np.where(a_keep, a, 0.0)
    b = np.where(b_keep, b, 0.0)
    n_y = int(np.flatnonzero(a_keep).max()) + 1 if a_keep.any() else 0
    kept = np.flatnonzero(b_keep)
    delay, n_u = int(kept.min()), int(kept.max())
    return ArxModel(a=a[:n_y], b=b[delay:n_u + 1], delay=delay)
