"""Small dense complex linear algebra used by the rest of the package.

Matrices are plain complex ndarrays. The SVD wrapper pins the phase gauge of
the singular vectors so that downstream algorithms are reproducible run to run.
"""

from dataclasses import dataclass

import numpy as np


class ContractViolation(ValueError):
    """An argument breaks a documented precondition."""


class NumericFailure(RuntimeError):
    """The underlying numerical routine did not converge."""


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD a = u @ diag(s) @ v.conj().T with a fixed phase gauge."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.v.conj().T


def _check_matrix(a, name="a") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ContractViolation(f"{name} must be a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return a


def matmul(a, b) -> np.ndarray:
    a = _check_matrix(a, "a")
    b = _check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ContractViolation(
            f"inner dimensions differ: {a.shape} x {b.shape}"
        )
    return a @ b


def svd(a) -> SvdResult:
    """Full SVD of a small dense complex matrix.

    The gauge is fixed by rotating each right singular vector so that its
    largest-magnitude entry is real and positive (the matching left vector is
    rotated by the same phase, so the reconstruction is unchanged).
    """
    a = _check_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"SVD did not converge: {exc}") from exc
    v = vh.conj().T
    for i in range(s.size):
        col = v[:, i]
        pivot = np.argmax(np.abs(col))
        mag = np.abs(col[pivot])
        if mag > 0:
            c = np.conj(col[pivot]) / mag
            v[:, i] = col * c
            u[:, i] = u[:, i] * c
    return SvdResult(u=u, singular_values=s, v=v)


def top_singular_values(stack: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a (..., m, n) stack."""
    stack = np.asarray(stack, dtype=complex)
    m, n = stack.shape[-2:]
    if min(m, n) == 1:
        return np.linalg.norm(stack, axis=(-2, -1))
    if min(m, n) == 2:
        # closed form via the 2x2 Gram matrix; avoids per-matrix LAPACK calls
        b = stack if m <= n else np.swapaxes(stack, -2, -1)
        gram = b @ b.conj().swapaxes(-2, -1)
        p = gram[..., 0, 0].real
        q = gram[..., 1, 1].real
        off = np.abs(gram[..., 0, 1])
        lam = 0.5 * (p + q) + np.sqrt(0.25 * (p - q) ** 2 + off**2)
        return np.sqrt(np.maximum(lam, 0.0))
    return np.linalg.svd(stack, compute_uv=False)[..., 0]
