"""Per-UE joint optimization of surface phases and beamformers.

Alternates two closed-form steps: align the surface phases against the phase
accumulated through the current beamformers, then refit the beamformers as the
top singular vectors of the resulting cascade. Under continuous phases each
half-step maximizes its own block, so the rate sequence is non-decreasing;
under quantization the projection can cycle, so the best iterate seen wins.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import ContractViolation
from .phases import (
    CONTINUOUS,
    PhaseSet,
    RadioParams,
    quantize_phase,
    rate,
    reflection_coefficients,
)


class DegenerateChannelError(RuntimeError):
    """The cascade channel is identically zero; beamforming is undefined."""


@dataclass(frozen=True)
class OptimizerSettings:
    epsilon: float = 1e-6  # rate tolerance, bit/s/Hz
    max_iterations: int = 50

    def __post_init__(self):
        if self.epsilon <= 0 or self.max_iterations < 1:
            raise ContractViolation("epsilon > 0 and max_iterations >= 1 required")


@dataclass(frozen=True)
class PerUeOptimum:
    theta: np.ndarray  # (N_I,) phases in [-pi, pi)
    w: np.ndarray  # transmit beamformer, unit norm
    v: np.ndarray  # receive beamformer, unit norm
    achievable_rate: float
    iterations_used: int
    converged: bool


def cascade(g, h, theta) -> np.ndarray:
    """Effective channel G diag(e^{j theta}) H."""
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    return (g * reflection_coefficients(theta)[None, :]) @ h


def align_phases(s, u, pset: PhaseSet = CONTINUOUS) -> np.ndarray:
    """Cancel the per-element phase accumulated through s_n * u_n.

    Zero-magnitude elements carry no signal; their angle defaults to 0.
    """
    s = np.asarray(s, dtype=complex).reshape(-1)
    u = np.asarray(u, dtype=complex).reshape(-1)
    if s.shape != u.shape:
        raise ContractViolation("s and u must have equal length")
    theta = -(np.angle(s) + np.angle(u))
    return np.asarray(quantize_phase(theta, pset))


def best_beamformers(g, h, theta) -> tuple[np.ndarray, np.ndarray, float]:
    """Top singular pair of the cascade: returns (w, v, gain).

    w is the dominant right singular vector; v is the conjugate of the dominant
    left singular vector, so v^T A w equals the top singular value (real
    positive). Both are unit norm.
    """
    a = cascade(g, h, theta)
    if not np.any(a):
        raise DegenerateChannelError("cascade channel is identically zero")
    res = linalg.svd(a)
    w = res.v[:, 0]
    v = np.conj(res.u[:, 0])
    return w, v, float(res.singular_values[0])


def optimize_ue(
    g,
    h,
    pset: PhaseSet = CONTINUOUS,
    settings: OptimizerSettings = OptimizerSettings(),
    radio: RadioParams | None = None,
    record_rates: list | None = None,
) -> PerUeOptimum:
    """Alternate phase alignment and beamformer refitting until the rate
    change drops below epsilon or the iteration cap is hit.

    `record_rates`, if given, collects the per-iteration rates (used by the
    monotonicity tests).
    """
    if radio is None:
        raise ContractViolation("radio parameters are required")
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    n_g = h.shape[1]
    n_u = g.shape[0]
    w = np.ones(n_g, dtype=complex) / np.sqrt(n_g)
    v = np.ones(n_u, dtype=complex) / np.sqrt(n_u)

    best = None
    prev_rate = None
    converged = False
    iterations = 0
    for t in range(1, settings.max_iterations + 1):
        iterations = t
        s = v @ g
        u = h @ w
        theta = align_phases(s, u, pset)
        w, v, gain = best_beamformers(g, h, theta)
        r = rate(gain**2 * radio.snr_scale)
        if record_rates is not None:
            record_rates.append(r)
        if best is None or r > best[3]:
            best = (theta, w, v, r)
        if prev_rate is not None and abs(r - prev_rate) < settings.epsilon:
            converged = True
            break
        prev_rate = r
    theta, w, v, r = best
    return PerUeOptimum(
        theta=theta,
        w=w,
        v=v,
        achievable_rate=r,
        iterations_used=iterations,
        converged=converged,
    )


def rates_at_configs(g_all, h, thetas, radio: RadioParams) -> np.ndarray:
    """(K, Z) achievable rates: UE k served via configuration z with its own
    optimal beamformers (top singular value of the per-pair cascade)."""
    g_all = np.asarray(g_all, dtype=complex)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    phi = np.exp(1j * thetas)  # (Z, N_I)
    # (K, Z, N_U, N_I): per-UE channels phased by each candidate configuration
    gp = g_all[:, None, :, :] * phi[None, :, None, :]
    cascades = gp @ h  # (K, Z, N_U, N_g)
    gains = linalg.top_singular_values(cascades)
    return np.log2(1.0 + gains**2 * radio.snr_scale)
