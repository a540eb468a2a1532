"""
Statistical checks around an identified model: residual bootstrap,
the ordinary least squares baseline and simulation fit.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.signal import lfilter

from .core_types import ArxModel, DataSet, IdentificationConfig, is_stable_polynomial
from .estimation import build_lagged_matrix, inner_loop
from .exceptions import (
    BootstrapError,
    ConfigurationError,
    IdentificationError,
    InsufficientDataError,
    RankDeficientError,
    UnstableModelError,
)
from .excitation import simulate_arx

logger = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.2


@dataclass(frozen=True)
class BootstrapResult:
    mean: tuple
    std: tuple
    lower: tuple
    upper: tuple
    replicates: int
    seed: int
    failures: int = 0


def bootstrap_ci(data, theta, noise, config=None):
    """
    Residual bootstrap of theta.

    Centred innovations of the fitted model are resampled with replacement,
    filtered through 1/A and added to the fitted noise-free output; every
    replicate re-runs the inner loop at the same order with a seed derived
    from (config.seed, replicate index).
    """
    config = config or IdentificationConfig()
    replicates = config.bootstrap_reps
    if replicates < 2:
        raise ConfigurationError(f"bootstrap needs at least 2 replicates, got {replicates}")

    theta = np.asarray(theta, dtype=float)
    eta = len(theta) // 2 - 1
    a_poly = theta[:eta + 1]
    b_poly = -theta[eta + 1:]
    if not is_stable_polynomial(a_poly[1:]):
        raise UnstableModelError("cannot bootstrap a model with an unstable A polynomial")

    residuals = build_lagged_matrix(data, eta).Z @ theta
    residuals = residuals - residuals.mean()
    y_fit = lfilter(b_poly, a_poly, data.u)
    logger.info(
        f"Bootstrapping eta={eta} over {replicates} replicates "
        f"(sigma_e2={noise.sigma_e2:.6g}, seed={config.seed})"
    )

    samples = []
    reasons = []
    for replicate in range(replicates):
        rng = np.random.default_rng([config.seed, replicate])
        innovations = rng.choice(residuals, size=data.n_samples, replace=True)
        resampled = DataSet(u=data.u, y=y_fit + lfilter([1.0], a_poly, innovations))
        try:
            samples.append(inner_loop(resampled, eta, config).theta)
        except IdentificationError as exc:
            logger.warning(f"Bootstrap replicate {replicate} failed: {exc}")
            reasons.append(f"replicate {replicate}: {exc}")

    failures = len(reasons)
    if failures > MAX_FAILURE_RATE * replicates or len(samples) < 2:
        raise BootstrapError(
            f"{failures} of {replicates} bootstrap replicates failed",
            failures=failures,
            replicates=replicates,
            reasons=reasons,
        )

    samples = np.array(samples)
    mean = samples.mean(axis=0)
    std = samples.std(axis=0, ddof=1)
    lower, upper = np.percentile(samples, [2.5, 97.5], axis=0)
    return BootstrapResult(
        mean=tuple(mean),
        std=tuple(std),
        lower=tuple(np.minimum(lower, mean)),
        upper=tuple(np.maximum(upper, mean)),
        replicates=replicates,
        seed=config.seed,
        failures=failures,
    )


def ols_estimate(data, n_y, n_u, delay):
    """
    Least squares ARX fit for a known structure.

    Regressors are -y[k-1]..-y[k-n_y] and u[k-delay]..u[k-n_u]. The result
    is the full constraint vector [1, a.., -b_0..-b_eta] with eta = max(n_y, n_u),
    comparable entry by entry with an eigenvector-based estimate.
    """
    if n_y < 0 or delay < 0 or n_u < delay:
        raise ConfigurationError(f"invalid structure n_y={n_y}, n_u={n_u}, delay={delay}")
    y, u = data.y, data.u
    start = max(n_y, n_u)
    n = data.n_samples
    columns = [-y[start - i:n - i] for i in range(1, n_y + 1)]
    columns += [u[start - j:n - j] for j in range(delay, n_u + 1)]
    if n - start <= len(columns):
        raise InsufficientDataError(f"{n} samples are too few for {len(columns)} OLS regressors")

    phi = np.column_stack(columns)
    q, r = np.linalg.qr(phi)
    diagonal = np.abs(np.diag(r))
    if diagonal.min() <= max(phi.shape) * np.finfo(float).eps * diagonal.max():
        raise RankDeficientError("OLS regressor matrix is rank deficient")
    beta = solve_triangular(r, q.T @ y[start:])

    model = ArxModel(a=beta[:n_y], b=beta[n_y:], delay=delay)
    return model.to_theta(start)


def percent_fit(y_star, y_hat):
    """100 (1 - ||y* - y_hat|| / ||y* - mean(y*)||)."""
    y_star = np.asarray(y_star, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y_star.shape != y_hat.shape:
        raise ConfigurationError(f"length mismatch: {y_star.shape} vs {y_hat.shape}")
    spread = np.linalg.norm(y_star - y_star.mean())
    if spread == 0:
        raise ConfigurationError("percent fit is undefined for a constant reference output")
    return float(100.0 * (1.0 - np.linalg.norm(y_star - y_hat) / spread))


def simulate_model(model, u):
    """Noise-free output of ``model`` driven by ``u``."""
    return simulate_arx(model, u).y_star
