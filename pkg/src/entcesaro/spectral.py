"""Spectral decompositions of unitary matrices.

Eigenphases are kept in turns (fractions of a full rotation, in [0, 1)),
either as exact rationals or as floats.  Exact phases make the resonance
test z*w == 1 an integer check on phase sums; float phases fall back to a
tolerance on |z*w - 1|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .linalg import as_operator, haar_unitary, operator_norm, unitarity_residual

__all__ = [
    "Phase",
    "Tolerances",
    "SpectralLine",
    "SpectralDecomposition",
    "decompose",
    "reconstruct",
    "from_eigensystem",
    "random_system",
    "antidiagonal_spectrum",
    "resonant_partners",
    "invariant_projection",
    "decomposition_residuals",
]

MAX_RANDOM_DIM = 64

# Residual ceilings every constructed decomposition must satisfy.
PROJECTOR_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True)
class Phase:
    """A point on the unit circle, stored as an angle in turns.

    ``turns`` is always in [0, 1).  When ``frac`` is set the phase is exact
    and ``turns == float(frac)``; arithmetic on exact phases stays exact.
    """

    turns: float
    frac: Fraction | None = None

    @classmethod
    def rational(cls, p: int, q: int) -> "Phase":
        f = Fraction(p, q) % 1
        return cls(float(f), f)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "Phase":
        f = f % 1
        return cls(float(f), f)

    @classmethod
    def from_turns(cls, t: float) -> "Phase":
        t = float(t) % 1.0
        if t == 1.0:  # rounding artifact of the modulo
            t = 0.0
        return cls(t, None)

    @property
    def is_exact(self) -> bool:
        return self.frac is not None

    def value(self) -> complex:
        if self.frac is not None and self.frac == 0:
            return 1.0 + 0.0j
        return cmath.exp(2j * math.pi * self.turns)

    def conjugate(self) -> "Phase":
        if self.frac is not None:
            return Phase.from_fraction(-self.frac)
        return Phase.from_turns(-self.turns)

    def __add__(self, other: "Phase") -> "Phase":
        if self.frac is not None and other.frac is not None:
            return Phase.from_fraction(self.frac + other.frac)
        return Phase.from_turns(self.turns + other.turns)

    def power(self, n: int) -> "Phase":
        if self.frac is not None:
            return Phase.from_fraction(self.frac * n)
        return Phase.from_turns(self.turns * n)

    def is_one(self, tol: float) -> bool:
        """Whether this phase equals 1 on the circle, within |z - 1| <= tol."""
        if self.frac is not None:
            return self.frac == 0
        return abs(self.value() - 1.0) <= tol

    def __format__(self, spec):
        return format(str(self), spec)

    def __str__(self):
        if self.frac is not None:
            return f"{self.frac.numerator}/{self.frac.denominator}"
        return repr(self.turns)


@dataclass(frozen=True)
class Tolerances:
    """Tolerance policy for decomposition and resonance decisions."""

    unitarity: float = 1e-10
    cluster: float = 1e-8
    resonance: float = 1e-8

    def __post_init__(self):
        for name in ("unitarity", "cluster", "resonance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")


@dataclass(frozen=True, eq=False)
class SpectralLine:
    phase: Phase
    projection: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.projection).real)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenphases with mutually orthogonal eigenprojections summing to I."""

    dim: int
    entries: tuple[SpectralLine, ...]
    source_unitarity: float
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def phases(self) -> tuple[Phase, ...]:
        return tuple(line.phase for line in self.entries)

    @property
    def projections(self) -> tuple[np.ndarray, ...]:
        return tuple(line.projection for line in self.entries)


def reconstruct(dec: SpectralDecomposition) -> np.ndarray:
    """Sum of phase * projection over all spectral lines."""
    u = np.zeros((dec.dim, dec.dim), dtype=np.complex128)
    for line in dec.entries:
        u += line.phase.value() * line.projection
    return u


def decomposition_residuals(dec: SpectralDecomposition, source=None) -> dict[str, float]:
    """Worst-case residuals of the decomposition invariants.

    When ``source`` is given, the reconstruction residual against it is
    included; otherwise that key reports the stored construction-time value.
    """
    herm = idem = ortho = 0.0
    total = np.zeros((dec.dim, dec.dim), dtype=np.complex128)
    for line in dec.entries:
        p = line.projection
        herm = max(herm, operator_norm(p - p.conj().T))
        idem = max(idem, operator_norm(p @ p - p))
        total += p
    for a in range(len(dec.entries)):
        for b in range(a + 1, len(dec.entries)):
            ortho = max(ortho, operator_norm(dec.entries[a].projection @ dec.entries[b].projection))
    completeness = operator_norm(total - np.eye(dec.dim))
    out = {
        "hermiticity": herm,
        "idempotency": idem,
        "orthogonality": ortho,
        "completeness": completeness,
        "unitarity": dec.source_unitarity,
    }
    if source is not None:
        out["reconstruction"] = operator_norm(reconstruct(dec) - as_operator(source))
    return out


def _validate(dec: SpectralDecomposition, source) -> SpectralDecomposition:
    res = decomposition_residuals(dec, source)
    for key in ("hermiticity", "idempotency", "orthogonality", "completeness"):
        if res[key] > PROJECTOR_TOL:
            raise ValueError(f"decomposition fails {key} check: residual {res[key]:.3e}")
    if res["reconstruction"] > RECONSTRUCTION_TOL:
        raise ValueError(
            f"decomposition fails reconstruction check: residual {res['reconstruction']:.3e}"
        )
    turns = [line.phase.turns for line in dec.entries]
    for a in range(len(turns)):
        for b in range(a + 1, len(turns)):
            gap = abs(turns[a] - turns[b])
            gap = min(gap, 1.0 - gap)
            if gap <= dec.tolerances.cluster:
                raise ValueError("decomposition has phases closer than the cluster tolerance")
    return dec


def decompose(u, tol: Tolerances = Tolerances()) -> SpectralDecomposition:
    """Spectral decomposition of a unitary via the complex Schur form.

    Eigenvalues are clustered at ``tol.cluster`` angular (turns) distance,
    with wrap-around at 0/1; each cluster's Schur vectors are re-orthonormalized
    and merged into a single projection.  All decomposition invariants are
    checked before returning.
    """
    arr = as_operator(u, name="unitary")
    source_res = unitarity_residual(arr)
    if source_res > tol.unitarity:
        raise ValueError(f"input fails unitarity: residual {source_res:.3e} > {tol.unitarity:.3e}")
    try:
        t, z = scipy.linalg.schur(arr, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ValueError(f"eigensolver failure: {exc}") from exc
    eigs = np.diagonal(t)
    angles = np.angle(eigs) / (2.0 * math.pi)
    angles = np.mod(angles, 1.0)
    order = np.argsort(angles, kind="stable")

    # Group sorted angles into clusters, merging across the 0/1 seam.
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and angles[idx] - angles[clusters[-1][-1]] <= tol.cluster:
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    if len(clusters) > 1:
        first, last = clusters[0], clusters[-1]
        if (angles[first[0]] + 1.0) - angles[last[-1]] <= tol.cluster:
            clusters[0] = last + first
            clusters.pop()

    entries = []
    for members in clusters:
        vecs = z[:, members]
        q, _ = np.linalg.qr(vecs)
        proj = q @ q.conj().T
        mean = complex(np.mean(eigs[members]))
        phase = Phase.from_turns(cmath.phase(mean) / (2.0 * math.pi))
        entries.append(SpectralLine(phase, proj))
    entries.sort(key=lambda line: line.phase.turns)
    dec = SpectralDecomposition(arr.shape[0], tuple(entries), source_res, tol)
    return _validate(dec, arr)


def from_eigensystem(phases, basis, tol: Tolerances = Tolerances()) -> tuple[np.ndarray, SpectralDecomposition]:
    """Build (U, decomposition) from per-column phases and a unitary eigenbasis.

    Equal phases are merged into one projection.  The returned unitary is the
    reconstruction itself, so the pair is exactly consistent.
    """
    basis = as_operator(basis, name="eigenbasis")
    d = basis.shape[0]
    if len(phases) != d:
        raise ValueError(f"need {d} phases, got {len(phases)}")
    res = unitarity_residual(basis)
    if res > tol.unitarity:
        raise ValueError(f"eigenbasis fails unitarity: residual {res:.3e}")
    groups: dict[Phase, list[int]] = {}
    for col, ph in enumerate(phases):
        groups.setdefault(ph, []).append(col)
    entries = []
    for ph in sorted(groups, key=lambda p: p.turns):
        vecs = basis[:, groups[ph]]
        entries.append(SpectralLine(ph, vecs @ vecs.conj().T))
    u = np.zeros((d, d), dtype=np.complex128)
    for line in entries:
        u += line.phase.value() * line.projection
    dec = SpectralDecomposition(d, tuple(entries), unitarity_residual(u), tol)
    return u, _validate(dec, u)


def random_system(
    seed,
    d: int,
    phase_mode: str = "haar",
    max_denominator: int = 8,
    tol: Tolerances = Tolerances(),
) -> tuple[np.ndarray, SpectralDecomposition]:
    """Reproducible random unitary plus its decomposition.

    ``haar`` draws a Haar-like unitary and decomposes it (float phases).
    ``rational`` draws rational eigenphases with denominator at most
    ``max_denominator`` and a Haar-like eigenbasis, so every resonance among
    the phases is exact.
    """
    if not 1 <= d <= MAX_RANDOM_DIM:
        raise ValueError(f"dimension {d} outside supported range 1..{MAX_RANDOM_DIM}")
    rng = np.random.default_rng(seed)
    if phase_mode == "haar":
        u = haar_unitary(rng, d)
        return u, decompose(u, tol)
    if phase_mode == "rational":
        if max_denominator < 1:
            raise ValueError("max_denominator must be >= 1")
        phases = []
        for _ in range(d):
            q = int(rng.integers(1, max_denominator + 1))
            p = int(rng.integers(0, q))
            phases.append(Phase.rational(p, q))
        basis = haar_unitary(rng, d)
        return from_eigensystem(phases, basis, tol)
    raise ValueError(f"unknown phase mode {phase_mode!r}")


def resonant_partners(dec: SpectralDecomposition, tol: float | None = None) -> tuple[int | None, ...]:
    """For each spectral line, the index of the line it resonates with.

    Line b resonates with b' when z_b * z_b' == 1: exactly for exact phases,
    within ``tol`` on |z_b * z_b' - 1| otherwise.  Distinct phases admit at
    most one partner; ambiguity means the tolerance exceeds the phase
    separation and is rejected.
    """
    if tol is None:
        tol = dec.tolerances.resonance
    phases = dec.phases
    partners: list[int | None] = []
    for b, zb in enumerate(phases):
        matches = []
        for c, zc in enumerate(phases):
            combined = zb + zc
            if combined.is_one(tol):
                matches.append((abs(combined.value() - 1.0), c))
        if not matches:
            partners.append(None)
        elif len(matches) == 1:
            partners.append(matches[0][1])
        else:
            raise ValueError(
                "resonance tolerance admits multiple partners for one phase; "
                "decrease the tolerance or separate the spectrum"
            )
    for b, c in enumerate(partners):
        if c is not None and partners[c] != b:
            raise ValueError("resonance pairing is not symmetric; tolerance too large")
    return tuple(partners)


def antidiagonal_spectrum(dec: SpectralDecomposition, tol: float | None = None) -> tuple[Phase, ...]:
    """Phases whose product with some phase of the decomposition equals 1."""
    partners = resonant_partners(dec, tol)
    return tuple(dec.phases[b] for b in range(len(partners)) if partners[b] is not None)


def invariant_projection(dec: SpectralDecomposition) -> np.ndarray:
    """Eigenprojection at phase 1, or the zero matrix when absent."""
    for line in dec.entries:
        if line.phase.is_one(dec.tolerances.resonance):
            return line.projection.copy()
    return np.zeros((dec.dim, dec.dim), dtype=np.complex128)
