"""
Excitation signals and ARX process simulation.

PRBS inputs come from a Fibonacci LFSR; simulated outputs follow
A(q^-1) y*[k] = B(q^-1) u[k] with zero initial conditions, and the output
noise v is AR-filtered through the same A polynomial (ARX structure).
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

from .core_types import DataSet, is_stable_polynomial
from .exceptions import ConfigurationError, InsufficientDataError, UnstableModelError

logger = logging.getLogger(__name__)

# Feedback taps (polynomial degrees) of maximal-length LFSRs
PRIMITIVE_TAPS = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
}

SNR_REFERENCES = ('noise', 'innovation')


@dataclass(frozen=True)
class PrbsSpec:
    register_length: int = 10
    taps: tuple = None
    seed: int = 1
    levels: tuple = (-1.0, 1.0)

    def __post_init__(self):
        n = self.register_length
        if n < 2:
            raise ConfigurationError(f"register_length must be at least 2, got {n}")
        taps = self.taps
        if taps is None:
            if n not in PRIMITIVE_TAPS:
                raise ConfigurationError(
                    f"no default taps for register_length={n}; pass taps explicitly"
                )
            taps = PRIMITIVE_TAPS[n]
        taps = tuple(sorted({int(t) for t in taps}, reverse=True))
        if not taps or taps[0] != n or taps[-1] < 1:
            raise ConfigurationError(f"taps {taps} must lie in 1..{n} and include {n}")
        object.__setattr__(self, 'taps', taps)
        seed = self.seed & ((1 << n) - 1)
        if seed == 0:
            raise ConfigurationError("the LFSR seed must be non-zero")
        object.__setattr__(self, 'seed', seed)
        low, high = self.levels
        object.__setattr__(self, 'levels', (float(low), float(high)))

    @property
    def period(self):
        return (1 << self.register_length) - 1


class Simulation(NamedTuple):
    y_star: np.ndarray
    y: np.ndarray
    v: np.ndarray


def _lfsr_bits(spec):
    """One full period of output bits; raises when the register cycles early."""
    mask = (1 << spec.register_length) - 1
    state = spec.seed
    bits = np.empty(spec.period, dtype=np.int8)
    for k in range(spec.period):
        feedback = 0
        for tap in spec.taps:
            feedback ^= (state >> (tap - 1)) & 1
        state = ((state << 1) & mask) | feedback
        bits[k] = feedback
        if state == spec.seed and k < spec.period - 1:
            raise ConfigurationError(
                f"taps {spec.taps} are not primitive: period {k + 1} "
                f"instead of {spec.period}"
            )
    if state != spec.seed:
        raise ConfigurationError(f"taps {spec.taps} do not give a maximal-length sequence")
    return bits


def generate_prbs(spec=None):
    """One period (2^n - 1 samples) of a maximal-length PRBS over ``spec.levels``."""
    spec = spec or PrbsSpec()
    low, high = spec.levels
    bits = _lfsr_bits(spec)
    return np.where(bits == 1, high, low).astype(float)


def prbs_periodic(spec, n_samples):
    """PRBS periods tiled (or truncated) to ``n_samples``."""
    return np.resize(generate_prbs(spec), n_samples)


def simulate_arx(model, u, sigma_e2=0.0, seed=None, burn_in=0, allow_unstable=False):
    """
    Simulate y*[k], v[k] and y[k] = y*[k] + v[k].

    ``burn_in`` extra innovation samples are generated and discarded so the
    noise filter starts near stationarity; the plant always starts at rest.
    """
    u = np.asarray(u, dtype=float)
    if sigma_e2 < 0:
        raise ConfigurationError(f"sigma_e2 must be non-negative, got {sigma_e2}")
    if burn_in < 0:
        raise ConfigurationError(f"burn_in must be non-negative, got {burn_in}")
    if len(u) < max(model.eta, 1):
        raise InsufficientDataError(
            f"input has {len(u)} samples, model needs at least {max(model.eta, 1)}"
        )
    if not allow_unstable and not model.is_stable():
        raise UnstableModelError(f"A polynomial {model.a} has roots on or outside the unit circle")

    a_poly = model.a_polynomial
    y_star = lfilter(model.b_polynomial, a_poly, u)

    rng = np.random.default_rng(seed)
    e = rng.standard_normal(len(u) + burn_in) * np.sqrt(sigma_e2)
    v = lfilter([1.0], a_poly, e)[burn_in:]
    return Simulation(y_star=y_star, y=y_star + v, v=v)


def impulse_energy(a, rel_tol=1e-12, max_length=1 << 20):
    """Sum of h[k]^2 for the impulse response of 1/A(q^-1), truncated once the tail is negligible."""
    if not is_stable_polynomial(a):
        raise UnstableModelError(f"A polynomial {tuple(a)} has roots on or outside the unit circle")
    a_poly = np.concatenate(([1.0], np.asarray(a, dtype=float)))
    length = 256
    while length <= max_length:
        impulse = np.zeros(length)
        impulse[0] = 1.0
        h = lfilter([1.0], a_poly, impulse)
        energy = np.cumsum(h ** 2)
        total = energy[-1]
        tail = total - energy[length // 2 - 1]
        if tail < rel_tol * total:
            cut = int(np.searchsorted(energy, total * (1.0 - rel_tol)))
            return float(energy[min(cut, length - 1)])
        length *= 2
    raise UnstableModelError("impulse response of 1/A does not decay")


def noise_variance_for_snr(model, u, snr, reference='noise'):
    """
    Innovation variance giving the requested signal-to-noise ratio.

    ``reference='noise'`` targets var(y*)/var(v); ``'innovation'`` targets
    var(y*)/sigma_e2.
    """
    if not snr > 0:
        raise ConfigurationError(f"snr must be positive, got {snr}")
    if reference not in SNR_REFERENCES:
        raise ConfigurationError(f"reference must be one of {SNR_REFERENCES}, got {reference!r}")
    y_star = simulate_arx(model, u).y_star
    signal_variance = float(np.var(y_star))
    if reference == 'innovation':
        return signal_variance / snr
    return signal_variance / (snr * impulse_energy(model.a))


def achieved_snr(y_star, v):
    noise_variance = float(np.var(v))
    if noise_variance == 0:
        return float('inf')
    return float(np.var(y_star)) / noise_variance


class SimulatedData(NamedTuple):
    data: DataSet
    model: object
    sigma_e2: float
    achieved_snr: float
    seed: object


def design_input(n_samples=None, prbs_order=None):
    """
    PRBS input of either one full period of a ``prbs_order`` register or
    ``n_samples`` samples from the shortest register whose period covers them.
    """
    if (n_samples is None) == (prbs_order is None):
        raise ConfigurationError("give exactly one of n_samples and prbs_order")
    if prbs_order is not None:
        return generate_prbs(PrbsSpec(register_length=prbs_order))
    if n_samples < 1:
        raise ConfigurationError(f"n_samples must be positive, got {n_samples}")
    register_length = next(
        (length for length in sorted(PRIMITIVE_TAPS) if (1 << length) - 1 >= n_samples),
        max(PRIMITIVE_TAPS),
    )
    return prbs_periodic(PrbsSpec(register_length=register_length), n_samples)


def simulate_dataset(model, u, snr=None, sigma_e2=None, reference='noise', seed=None,
                     burn_in=0, allow_unstable=False):
    """Simulate a data set at a target SNR or an explicit innovation variance."""
    if snr is not None and sigma_e2 is not None:
        raise ConfigurationError("snr and sigma_e2 are mutually exclusive")
    if snr is not None:
        sigma_e2 = noise_variance_for_snr(model, u, snr, reference=reference)
    sigma_e2 = 0.0 if sigma_e2 is None else float(sigma_e2)
    simulation = simulate_arx(
        model, u, sigma_e2, seed=seed, burn_in=burn_in, allow_unstable=allow_unstable,
    )
    achieved = achieved_snr(simulation.y_star, simulation.v)
    logger.info(f"Simulated {len(u)} samples of {model}: sigma_e2={sigma_e2:.6g}, SNR={achieved:.4g}")
    return SimulatedData(
        data=DataSet(u=u, y=simulation.y, y_star=simulation.y_star),
        model=model,
        sigma_e2=sigma_e2,
        achieved_snr=achieved,
        seed=seed,
    )


def sample_acvf(x, max_lag):
    """Biased sample autocovariance (1/N normalisation) at lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        raise InsufficientDataError("cannot compute the ACVF of an empty sequence")
    if not 0 <= max_lag < n:
        raise InsufficientDataError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    centred = x - x.mean()
    return np.array([centred[:n - lag] @ centred[lag:] for lag in range(max_lag + 1)]) / n
