"""
Domain vocabulary shared by the identification app: models, data sets,
configuration and reports.

All types are frozen value objects. Coefficient sequences are stored as
tuples of floats, sample sequences as read-only numpy arrays.
"""
from dataclasses import dataclass, fields

import numpy as np

from .exceptions import ConfigurationError, InsufficientDataError

SCHEMA_VERSION = '1.0'


def _float_tuple(values):
    return tuple(float(v) for v in values)


def _frozen_array(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def polynomial_roots(a):
    """Roots z of z^n + a1 z^(n-1) + ... + an, i.e. of A(z^-1) = 0."""
    if len(a) == 0:
        return np.array([], dtype=complex)
    return np.roots(np.concatenate(([1.0], np.asarray(a, dtype=float))))


def is_stable_polynomial(a):
    """True when every root of 1 + sum a_i z^-i lies strictly inside the unit circle."""
    roots = polynomial_roots(a)
    return bool(np.all(np.abs(roots) < 1.0))


def stabilized_polynomial(a, max_radius=0.995):
    """
    Stable a1..an with the same spectral shape as ``a``: roots outside the unit
    circle are reflected to 1/conj(z), then every root is kept within ``max_radius``.
    """
    roots = polynomial_roots(a)
    if roots.size == 0:
        return np.zeros(0)
    outside = np.abs(roots) >= 1.0
    roots[outside] = 1.0 / np.conj(roots[outside])
    radius = np.abs(roots)
    clipped = radius > max_radius
    roots[clipped] *= max_radius / radius[clipped]
    return np.real(np.poly(roots))[1:]


@dataclass(frozen=True)
class ArxModel:
    """
    A(q^-1) y[k] = B(q^-1) u[k] with A = 1 + a1 q^-1 + ... + a_ny q^-ny and
    B = b_D q^-D + ... + b_nu q^-nu.

    ``b`` holds b_D..b_nu; an empty ``b`` means the model has no input term
    and ``n_u`` is reported as 0.
    """
    a: tuple = ()
    b: tuple = ()
    delay: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'a', _float_tuple(self.a))
        object.__setattr__(self, 'b', _float_tuple(self.b))
        if int(self.delay) != self.delay or self.delay < 0:
            raise ConfigurationError(f"delay must be a non-negative integer, got {self.delay}")
        object.__setattr__(self, 'delay', int(self.delay))

    @property
    def n_y(self):
        return len(self.a)

    @property
    def n_u(self):
        if not self.b:
            return 0
        return self.delay + len(self.b) - 1

    @property
    def eta(self):
        return max(self.n_y, self.n_u)

    @property
    def a_polynomial(self):
        return np.concatenate(([1.0], self.a))

    @property
    def b_polynomial(self):
        """Coefficients of B on lags 0..n_u (leading zeros for the delay)."""
        if not self.b:
            return np.zeros(1)
        return np.concatenate((np.zeros(self.delay), self.b))

    def is_stable(self):
        return is_stable_polynomial(self.a)

    def to_theta(self, eta=None):
        """Constraint vector [1, a1..a_eta, -b0..-b_eta] of the difference equation."""
        eta = self.eta if eta is None else eta
        if eta < self.eta:
            raise ConfigurationError(f"eta={eta} is below the model's equation order {self.eta}")
        theta = np.zeros(2 * (eta + 1))
        theta[0] = 1.0
        theta[1:1 + self.n_y] = self.a
        b_full = self.b_polynomial if self.b else np.zeros(0)
        theta[eta + 1:eta + 1 + len(b_full)] = -b_full
        return theta

    def __str__(self):
        return f"ARX(n_y={self.n_y}, n_u={self.n_u}, delay={self.delay})"


def equation_order(model):
    """eta = max(n_y, n_u)."""
    return model.eta


@dataclass(frozen=True)
class NoiseModel:
    """Innovation variance and ACVF sigma_vv[0..L] of the coloured output noise."""
    sigma_e2: float = 0.0
    acvf: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, 'sigma_e2', float(self.sigma_e2))
        object.__setattr__(self, 'acvf', _float_tuple(self.acvf))
        if self.sigma_e2 < 0:
            raise ConfigurationError(f"sigma_e2 must be non-negative, got {self.sigma_e2}")
        if not self.acvf:
            raise ConfigurationError("acvf must hold at least the lag-0 value")
        if self.acvf[0] < 0:
            raise ConfigurationError(f"acvf[0] must be non-negative, got {self.acvf[0]}")
        bound = self.acvf[0] * (1.0 + 1e-9)
        if any(abs(value) > bound for value in self.acvf[1:]):
            raise ConfigurationError("acvf[l] exceeds acvf[0] in magnitude")

    @property
    def max_lag(self):
        return len(self.acvf) - 1

    def is_positive_semidefinite(self, tol=1e-10):
        from scipy.linalg import toeplitz

        if self.acvf[0] == 0:
            return all(value == 0 for value in self.acvf)
        smallest = np.linalg.eigvalsh(toeplitz(self.acvf))[0]
        return bool(smallest >= -tol * self.acvf[0])


@dataclass(frozen=True, eq=False)
class DataSet:
    """Paired input/output samples; ``y_star`` only for simulated data."""
    u: np.ndarray
    y: np.ndarray
    y_star: np.ndarray = None

    def __post_init__(self):
        u = _frozen_array(self.u)
        y = _frozen_array(self.y)
        if u.ndim != 1 or y.ndim != 1:
            raise ConfigurationError("u and y must be one-dimensional")
        if len(u) != len(y):
            raise ConfigurationError(f"u has {len(u)} samples but y has {len(y)}")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'y', y)
        if self.y_star is not None:
            y_star = _frozen_array(self.y_star)
            if y_star.shape != y.shape:
                raise ConfigurationError(f"y_star has {len(y_star)} samples but y has {len(y)}")
            object.__setattr__(self, 'y_star', y_star)

    def __len__(self):
        return len(self.y)

    @property
    def n_samples(self):
        return len(self.y)

    def require_samples(self, lag):
        """Stacking at ``lag`` into a covariance pencil needs N > 2(L+1)."""
        if self.n_samples <= 2 * (lag + 1):
            raise InsufficientDataError(
                f"{self.n_samples} samples are not enough for stacking lag {lag} "
                f"(need more than {2 * (lag + 1)})"
            )

    def detrended(self):
        y_star = None if self.y_star is None else self.y_star - self.y_star.mean()
        return DataSet(u=self.u - self.u.mean(), y=self.y - self.y.mean(), y_star=y_star)

    def __eq__(self, other):
        if not isinstance(other, DataSet):
            return NotImplemented
        same_star = (
            (self.y_star is None and other.y_star is None)
            or (self.y_star is not None and other.y_star is not None
                and np.array_equal(self.y_star, other.y_star))
        )
        return np.array_equal(self.u, other.u) and np.array_equal(self.y, other.y) and same_star


@dataclass(frozen=True)
class IdentificationConfig:
    eta_guess_initial: int = 1
    eta_max: int = 10
    l_verify_offset: int = 3
    unity_tol: float = 0.15
    conv_tol: float = 1e-6
    max_inner_iters: int = 50
    acvf_grid_points: int = 4096
    bootstrap_reps: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ('unity_tol', 'conv_tol'):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not self.eta_max >= self.eta_guess_initial >= 1:
            raise ConfigurationError(
                f"need eta_max >= eta_guess_initial >= 1, got "
                f"{self.eta_max} and {self.eta_guess_initial}"
            )
        if self.l_verify_offset < 1:
            raise ConfigurationError("l_verify_offset must be at least 1")
        if self.max_inner_iters < 1:
            raise ConfigurationError("max_inner_iters must be at least 1")
        if self.acvf_grid_points < 512:
            raise ConfigurationError("acvf_grid_points must be at least 512")
        if self.bootstrap_reps < 0:
            raise ConfigurationError("bootstrap_reps must be non-negative")

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from ``settings.IDENTIFICATION``, then non-None overrides."""
        from django.conf import settings

        values = {}
        if settings.configured:
            values.update(getattr(settings, 'IDENTIFICATION', {}))
        values.update({key: value for key, value in overrides.items() if value is not None})
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown identification settings: {sorted(unknown)}")
        return cls(**values)


@dataclass(frozen=True)
class IterationRecord:
    """One pass of the inner loop."""
    iteration: int
    theta: tuple
    sigma_e2: float
    change: float
    min_eigenvalue: float

    def __post_init__(self):
        object.__setattr__(self, 'theta', _float_tuple(self.theta))


@dataclass(frozen=True)
class GuessDiagnostics:
    """Outcome of one order guess of the outer loop."""
    eta_guess: int
    l_verify: int = None
    eigenvalues: tuple = ()
    d_hat: int = None
    eta_hat: int = None
    accepted: bool = False
    reason: str = ''
    trace: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'eigenvalues', _float_tuple(self.eigenvalues))
        object.__setattr__(self, 'trace', tuple(self.trace))


@dataclass(frozen=True)
class IdentificationReport:
    eta_hat: int
    d_hat: int
    l_verify: int
    theta: tuple
    model: ArxModel
    noise: NoiseModel
    eigenvalues: tuple
    trace: tuple
    converged: bool
    config: IdentificationConfig
    theta_std: tuple = None
    theta_interval: tuple = None
    guesses: tuple = ()
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, 'theta', _float_tuple(self.theta))
        object.__setattr__(self, 'eigenvalues', _float_tuple(self.eigenvalues))
        object.__setattr__(self, 'trace', tuple(self.trace))
        object.__setattr__(self, 'guesses', tuple(self.guesses))
        if self.theta_std is not None:
            object.__setattr__(self, 'theta_std', _float_tuple(self.theta_std))
        if self.theta_interval is not None:
            object.__setattr__(
                self, 'theta_interval',
                tuple(_float_tuple(bounds) for bounds in self.theta_interval),
            )
        if self.theta and self.theta[0] != 1.0:
            raise ConfigurationError("theta must be normalised so that theta[0] == 1")
        if self.eta_hat != self.l_verify - self.d_hat + 1:
            raise ConfigurationError("eta_hat must equal l_verify - d_hat + 1")
