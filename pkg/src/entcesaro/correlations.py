"""Multiple correlations of finite-dimensional dynamical systems.

A system is a unitary U together with an invariant state: either a unit
vector fixed by U, or a positive trace-one density operator commuting with
U and supported inside the invariant eigenspace.  The automorphism is
conjugation by U; correlations average state values of products

    A_0 g^{c_1}(A_1) g^{c_2}(A_2) ... g^{c_m}(A_m),   c_i = n_a(1) + ... + n_a(i),

over the partition-driven index tuples, and converge to the state applied
to A_0 * limit_operator * A_m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engines import DIRECT_TUPLE_BUDGET, cesaro_direct, cesaro_spectral, limit_operator
from .linalg import as_operator, as_vector, operator_norm
from .partitions import Partition, require_pair
from .spectral import (
    SpectralDecomposition,
    Tolerances,
    decompose,
    invariant_projection,
    reconstruct,
)

__all__ = [
    "VectorState",
    "TraceState",
    "DynamicalSystem",
    "CorrelationSpec",
    "make_system",
    "correlation_term",
    "cesaro_correlation",
    "correlation_limit",
]

STATE_TOL = 1e-10
_AUTO_DIRECT_TUPLES = 100_000


@dataclass(frozen=True, eq=False)
class VectorState:
    """Unit vector fixed by the unitary; the state is A -> <A omega, omega>."""

    omega: np.ndarray

    def value(self, a: np.ndarray) -> complex:
        return complex(np.vdot(self.omega, a @ self.omega))


@dataclass(frozen=True, eq=False)
class TraceState:
    """Invariant density operator; the state is A -> tr(T A)."""

    density: np.ndarray

    def value(self, a: np.ndarray) -> complex:
        return complex(np.einsum("ij,ji->", self.density, a))


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    unitary: np.ndarray
    dec: SpectralDecomposition
    state: VectorState | TraceState

    @property
    def dim(self) -> int:
        return self.dec.dim

    def expect(self, a: np.ndarray) -> complex:
        return self.state.value(a)


@dataclass(frozen=True, eq=False)
class CorrelationSpec:
    """A pair partition plus the 2k+1 observables A_0 ... A_2k."""

    partition: Partition
    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        require_pair(self.partition)
        if len(self.ops) != self.partition.m + 1:
            raise ValueError(
                f"partition on {self.partition.m} slots needs {self.partition.m + 1} "
                f"observables, got {len(self.ops)}"
            )


def make_system(u, state, tol: float = STATE_TOL,
                dec: SpectralDecomposition | None = None,
                tolerances: Tolerances = Tolerances()) -> DynamicalSystem:
    """Validate a unitary plus invariant state into a DynamicalSystem.

    ``state`` is a vector (vector state, normalized here) or a square matrix
    (density operator).  Vector states must satisfy U omega = omega; trace
    states must be positive, trace one, commute with U, and be supported
    inside the invariant eigenspace.  Invariance of the induced state under
    conjugation by U is verified on the matrix-unit basis.
    """
    arr = as_operator(u, name="unitary")
    if dec is None:
        dec = decompose(arr, tolerances)
    else:
        if dec.dim != arr.shape[0]:
            raise ValueError("decomposition dimension does not match the unitary")
        if operator_norm(reconstruct(dec) - arr) > max(1e-9, tol):
            raise ValueError("decomposition does not reconstruct the unitary")
    d = arr.shape[0]
    state_arr = np.asarray(state, dtype=np.complex128)
    if state_arr.ndim == 1:
        omega = as_vector(state_arr, d, name="omega")
        norm = float(np.linalg.norm(omega))
        if norm == 0.0:
            raise ValueError("state vector must be nonzero")
        omega = omega / norm
        if float(np.linalg.norm(arr @ omega - omega)) > tol:
            raise ValueError("state vector is not invariant under the unitary")
        # Matrix-unit invariance check: omega(e_pq) = conj(omega_p) omega_q,
        # so invariance amounts to U* omega reproducing the same rank-one table.
        pulled = arr.conj().T @ omega
        if float(np.linalg.norm(np.outer(pulled.conj(), pulled) - np.outer(omega.conj(), omega))) > tol:
            raise ValueError("state is not invariant on the matrix-unit basis")
        return DynamicalSystem(arr, dec, VectorState(omega))
    if state_arr.ndim == 2:
        t = as_operator(state_arr, d, name="density")
        if operator_norm(t - t.conj().T) > tol:
            raise ValueError("density operator must be self-adjoint")
        eigs = np.linalg.eigvalsh(t)
        if float(eigs.min()) < -tol:
            raise ValueError(f"density operator must be positive, min eigenvalue {eigs.min():.3e}")
        trace = complex(np.trace(t))
        if abs(trace - 1.0) > tol:
            raise ValueError(f"density operator must have trace one, got {trace:.6f}")
        if operator_norm(arr @ t - t) > tol or operator_norm(t @ arr - t) > tol:
            raise ValueError("density operator is not fixed by the unitary (UT = T = TU fails)")
        e1 = invariant_projection(dec)
        if operator_norm((np.eye(d) - e1) @ t) > tol:
            raise ValueError("density operator is not supported inside the invariant eigenspace")
        # Matrix-unit invariance: omega(e_pq) = T_qp, and conjugating the unit
        # by U transposes into U* T U, which must equal T.
        if operator_norm(arr.conj().T @ t @ arr - t) > tol:
            raise ValueError("state is not invariant on the matrix-unit basis")
        return DynamicalSystem(arr, dec, TraceState(t))
    raise ValueError("state must be a vector or a square matrix")


def _check_spec(sys: DynamicalSystem, spec: CorrelationSpec) -> list[np.ndarray]:
    return [as_operator(a, sys.dim, name=f"observable {j}") for j, a in enumerate(spec.ops)]


def correlation_term(sys: DynamicalSystem, spec: CorrelationSpec, n,
                     check_identity: bool = True, identity_tol: float = 1e-10) -> complex:
    """One correlation value at the index tuple n = (n_1, ..., n_k).

    Evaluates the automorphism form with cumulative exponents and, when
    ``check_identity`` is set, also the sandwiched form

        omega(A_0 U^{n_a(1)} A_1 U^{n_a(2)} ... A_{m-1} U^{n_a(m)} A_m),

    raising if the two disagree beyond ``identity_tol`` (they are equal
    because every index occurs twice and the state is invariant).
    """
    ops = _check_spec(sys, spec)
    p = spec.partition
    n = [int(v) for v in n]
    if len(n) != p.k:
        raise ValueError(f"need {p.k} exponents, got {len(n)}")
    if any(v < 0 for v in n):
        raise ValueError("exponents must be nonnegative")
    u = sys.unitary
    u_star = u.conj().T

    powers: dict[int, np.ndarray] = {}

    def u_power(m: int) -> np.ndarray:
        if m not in powers:
            base = u if m >= 0 else u_star
            powers[m] = np.linalg.matrix_power(base, abs(m))
        return powers[m]

    cumulative = 0
    product = ops[0]
    for i, lab in enumerate(p.labels, start=1):
        cumulative += n[lab - 1]
        conjugated = u_power(cumulative) @ ops[i] @ u_power(-cumulative)
        product = product @ conjugated
    value = sys.expect(product)

    if check_identity:
        sandwich = ops[0]
        for i, lab in enumerate(p.labels, start=1):
            sandwich = sandwich @ u_power(n[lab - 1]) @ ops[i]
        other = sys.expect(sandwich)
        scale = max(1.0, max(operator_norm(a) for a in ops))
        if abs(value - other) > identity_tol * scale:
            raise ValueError(
                f"correlation identity violated: |{value} - {other}| > {identity_tol:.1e}"
            )
    return value


def _inner_mean(sys: DynamicalSystem, spec: CorrelationSpec, N: int, engine: str):
    inner = spec.ops[1:-1]
    if engine == "auto":
        engine = "direct" if N ** spec.partition.k <= _AUTO_DIRECT_TUPLES else "spectral"
    if engine == "direct":
        return cesaro_direct(sys.unitary, spec.partition, inner, N, budget=DIRECT_TUPLE_BUDGET)
    if engine == "spectral":
        return cesaro_spectral(sys.dec, spec.partition, inner, N)
    raise ValueError(f"unknown engine {engine!r} for correlations")


def cesaro_correlation(sys: DynamicalSystem, spec: CorrelationSpec, N: int,
                       engine: str = "auto") -> complex:
    """Cesaro average of the correlation terms up to horizon N.

    By linearity this equals the state applied to A_0 * M_N * A_m with M_N
    the entangled mean of the inner observables, which is how it is computed.
    """
    ops = _check_spec(sys, spec)
    mean = _inner_mean(sys, spec, int(N), engine)
    return sys.expect(ops[0] @ mean.matrix @ ops[-1])


def correlation_limit(sys: DynamicalSystem, spec: CorrelationSpec,
                      resonance_tol: float | None = None) -> complex:
    """Limit of the correlation averages: state of A_0 * limit_operator * A_m."""
    ops = _check_spec(sys, spec)
    limit = limit_operator(sys.dec, spec.partition, ops[1:-1], resonance_tol)
    return sys.expect(ops[0] @ limit @ ops[-1])
