"""Phase-shift algebra for the reflecting surface.

A surface configuration is a vector of per-element phase shifts wrapped to
[-pi, pi); the diagonal reflection matrix has entries exp(j*theta_n). Quantized
shifters restrict each element to a 2^b-point grid.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import ContractViolation

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseSet:
    """Continuous phases (bits=None) or a b-bit uniform grid."""

    bits: int | None = None

    def __post_init__(self):
        if self.bits is not None and self.bits < 1:
            raise ContractViolation("quantized phase set needs bits >= 1")

    @property
    def quantized(self) -> bool:
        return self.bits is not None

    def grid(self) -> np.ndarray:
        """Grid points 2*pi*m / 2^b, m = 0..2^b-1, wrapped to [-pi, pi)."""
        if self.bits is None:
            raise ContractViolation("continuous phase set has no grid")
        m = np.arange(2**self.bits)
        return wrap_phase(TWO_PI * m / 2**self.bits)


CONTINUOUS = PhaseSet()


def wrap_phase(x):
    """Wrap angle(s) to the interval [-pi, pi)."""
    x = np.asarray(x, dtype=float)
    out = np.mod(x + np.pi, TWO_PI) - np.pi
    return out if out.ndim else float(out)


def quantize_phase(theta, pset: PhaseSet):
    """Nearest grid point in circular distance; ties go to the lower grid index.

    With a continuous set this is just wrapping.
    """
    if not pset.quantized:
        return wrap_phase(theta)
    theta = np.asarray(theta, dtype=float)
    grid = pset.grid()
    dist = np.abs(wrap_phase(theta[..., None] - grid))
    idx = np.argmin(dist, axis=-1)
    out = grid[idx]
    return out if out.ndim else float(out)


def circular_distance(a, b) -> float:
    """Sum over elements of the absolute principal angle difference."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ContractViolation(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(wrap_phase(a - b))))


def pairwise_circular_distance(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(K, Z) matrix of circular distances between rows of two phase arrays."""
    points = np.atleast_2d(points)
    centroids = np.atleast_2d(centroids)
    if points.shape[1] != centroids.shape[1]:
        raise ContractViolation("phase vectors have different lengths")
    diff = wrap_phase(points[:, None, :] - centroids[None, :, :])
    return np.sum(np.abs(diff), axis=2)


def circular_mean(points: np.ndarray, weights=None) -> np.ndarray:
    """Per-element argument of the weighted phasor sum.

    Elements whose resultant is exactly zero fall back to angle 0.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise ContractViolation("circular_mean of an empty set")
    if weights is None:
        weights = np.ones(points.shape[0])
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ContractViolation("weights must be nonnegative with positive sum")
    resultant = np.sum(weights[:, None] * np.exp(1j * points), axis=0)
    mean = np.angle(resultant)
    mean[np.abs(resultant) == 0.0] = 0.0
    return wrap_phase(mean)


def reflection_coefficients(theta) -> np.ndarray:
    """Diagonal of the reflection matrix, exp(j*theta_n)."""
    return np.exp(1j * np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class RadioParams:
    """Link budget: bandwidth [Hz], transmit power [W], noise PSD [W/Hz]."""

    bandwidth: float
    tx_power: float
    noise_psd: float

    def __post_init__(self):
        if min(self.bandwidth, self.tx_power, self.noise_psd) <= 0:
            raise ContractViolation("radio parameters must be positive")

    @property
    def noise_power(self) -> float:
        return self.noise_psd * self.bandwidth

    @property
    def snr_scale(self) -> float:
        """sigma_x^2 / sigma_n^2, multiplying the squared cascade gain."""
        return self.tx_power / self.noise_power


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def snr(g, h, theta, w, v, radio: RadioParams) -> float:
    """SNR through the reflected cascade for beamformers (w, v).

    The receive beamformer enters via v^T (no conjugation); with unit-norm v
    the noise term is just the noise power.
    """
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    w = np.asarray(w, dtype=complex)
    v = np.asarray(v, dtype=complex)
    cascade = (g * reflection_coefficients(theta)[None, :]) @ h
    amp = np.abs(v @ cascade @ w)
    vnorm2 = float(np.vdot(v, v).real)
    if vnorm2 == 0.0:
        raise ContractViolation("receive beamformer must be nonzero")
    return float(amp**2 * radio.tx_power / (vnorm2 * radio.noise_power))


def rate(snr_linear: float) -> float:
    """Spectral efficiency log2(1 + SNR) in bit/s/Hz."""
    if snr_linear < 0:
        raise ContractViolation("SNR must be nonnegative")
    return float(np.log2(1.0 + snr_linear))


def frame_sum_capacity(assignment, rates, radio: RadioParams) -> float:
    """Frame capacity B * sum of per-UE rates under the given grouping."""
    rates = np.asarray(rates, dtype=float)
    membership = np.asarray(assignment.membership)
    if membership.shape[0] != rates.shape[0]:
        raise ContractViolation("assignment does not cover every UE")
    if np.any(membership < 0) or np.any(membership >= assignment.effective_z):
        raise ContractViolation("membership index out of range")
    return float(radio.bandwidth * rates.sum())
