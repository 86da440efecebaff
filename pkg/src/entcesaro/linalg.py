"""Dense complex matrix helpers: norms, unitarity residuals, random matrices."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_operator",
    "as_vector",
    "frobenius_norm",
    "operator_norm",
    "unitarity_residual",
    "require_unitary",
    "haar_unitary",
    "gaussian_operator",
]

_POWER_ITER_REL_TOL = 1e-12
_POWER_ITER_MAX = 5000


def as_operator(a, dim: int | None = None, name: str = "operator") -> np.ndarray:
    """Validate and return a square complex128 matrix with finite entries."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def operator_norm(a, rel_tol: float = _POWER_ITER_REL_TOL, max_iter: int = _POWER_ITER_MAX) -> float:
    """Largest singular value by power iteration on A*A.

    The starting vector is drawn from a fixed-seed generator, so the result
    is deterministic for a given input.  Iteration stops on relative
    stagnation of the singular value estimate.
    """
    arr = as_operator(a)
    d = arr.shape[0]
    m = arr.conj().T @ arr
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = m @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        new_sigma = float(np.sqrt(nw))
        if abs(new_sigma - sigma) <= rel_tol * max(new_sigma, 1e-300):
            return new_sigma
        sigma = new_sigma
    return sigma


def unitarity_residual(u) -> float:
    """Operator-norm distance of U*U from the identity."""
    arr = as_operator(u, name="unitary")
    return operator_norm(arr.conj().T @ arr - np.eye(arr.shape[0]))


def require_unitary(u, tol: float, name: str = "unitary") -> np.ndarray:
    arr = as_operator(u, name=name)
    res = unitarity_residual(arr)
    if res > tol:
        raise ValueError(f"{name} fails unitarity: residual {res:.3e} > {tol:.3e}")
    return arr


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-like unitary from QR orthonormalization of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag = np.where(np.abs(diag) < 1e-300, 1.0, diag / np.abs(diag))
    return q * diag


def gaussian_operator(rng: np.random.Generator, d: int, op_norm: float | None = None) -> np.ndarray:
    """Complex Gaussian matrix, optionally rescaled to a target operator norm."""
    a = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0 * d)
    if op_norm is not None:
        current = operator_norm(a)
        if current == 0.0:
            raise ValueError("cannot rescale a zero matrix to a target norm")
        a = a * (op_norm / current)
    return a
