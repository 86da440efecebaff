"""Evaluation engines for entangled Cesaro means of unitary dynamics.

The object of interest is the k-fold average

    M_N = (1/N^k) sum_{n_1..n_k < N}  U^{n_a(1)} A_1 U^{n_a(2)} ... A_{m-1} U^{n_a(m)}

over a pair partition a of {1..m}, m = 2k.  Three engines compute it:

* ``cesaro_direct``    walks the power table of U and contracts the sum
  slot by slot, left to right (cost grows with N).
* ``cesaro_spectral``  inserts the eigenprojection resolution at every slot,
  which turns the average into a sum over projection-block tuples weighted
  by products of Cesaro kernel values (cost independent of N).
* ``cesaro_nested``    collapses innermost adjacent class pairs recursively;
  valid for non-crossing partitions only.

All three compute the same finite-N sum by different factorizations.  The
N -> infinity limit keeps exactly the block tuples whose per-class phase
products equal 1; ``limit_operator`` evaluates it and ``error_bound``
certifies |M_N - limit| from the kernel deviations.

Classes of size other than two are supported behind ``general=True``; that
finite-dimensional extension is flagged and kept out of the default path.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .linalg import as_operator, as_vector, frobenius_norm, operator_norm, require_unitary
from .partitions import Partition, is_crossing, require_pair
from .spectral import (
    Phase,
    SpectralDecomposition,
    antidiagonal_spectrum,
    reconstruct,
    resonant_partners,
)

__all__ = [
    "BudgetError",
    "CesaroResult",
    "ReportRow",
    "ConvergenceReport",
    "kernel",
    "mean_ergodic",
    "cesaro_direct",
    "cesaro_spectral",
    "cesaro_nested",
    "limit_operator",
    "limit_truncated",
    "form_value",
    "error_bound",
    "spectral_gap",
    "convergence_report",
    "ENGINE_NAMES",
]

DIRECT_TUPLE_BUDGET = 10**8
SPECTRAL_TUPLE_BUDGET = 10**7
_SWEEP_ENTRY_BUDGET = 1 << 24  # complex entries allowed in one sweep intermediate

ENGINE_NAMES = ("direct", "spectral", "nested")


class BudgetError(ValueError):
    """Requested evaluation exceeds the configured work budget."""


@dataclass(frozen=True, eq=False)
class CesaroResult:
    matrix: np.ndarray
    engine: str
    N: int
    elapsed: float


@dataclass(frozen=True)
class ReportRow:
    N: int
    error_op: float
    error_frob: float
    certified_bound: float
    engine: str
    seconds: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ReportRow, ...]
    spectral_gap: float


def _check_horizon(n) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"horizon N must be a positive integer, got {n!r}")
    return int(n)


def _check_partition(p, general: bool) -> Partition:
    if not isinstance(p, Partition):
        raise ValueError("expected a Partition")
    if not general:
        require_pair(p)
    return p


def _check_ops(p: Partition, ops, dim: int) -> list[np.ndarray]:
    ops = [as_operator(a, dim, name=f"operator {j + 1}") for j, a in enumerate(ops)]
    if len(ops) != p.m - 1:
        raise ValueError(f"partition on {p.m} slots needs {p.m - 1} operators, got {len(ops)}")
    return ops


def _first_last(p: Partition) -> tuple[list[int], list[int]]:
    """First and last slot (1-based) of each class, indexed by slot."""
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for pos, lab in enumerate(p.labels, start=1):
        first.setdefault(lab, pos)
        last[lab] = pos
    return (
        [first[lab] for lab in p.labels],
        [last[lab] for lab in p.labels],
    )


def kernel(phase: Phase, N) -> complex:
    """Cesaro kernel (1/N) sum_{n<N} z^n for z the given phase.

    Equals 1 at z == 1 and (1 - z^N) / (N (1 - z)) otherwise; exact phases
    use exact rational arithmetic for z^N, so periodic zeros are exact.
    """
    N = _check_horizon(N)
    if phase.is_exact:
        if phase.frac == 0:
            return 1.0 + 0.0j
        lam = phase.value()
        lam_n = phase.power(N).value()
        return (1.0 - lam_n) / (N * (1.0 - lam))
    if phase.turns == 0.0:
        return 1.0 + 0.0j
    lam = phase.value()
    if lam == 1.0 + 0.0j:
        return 1.0 + 0.0j
    lam_n = Phase.from_turns(phase.turns * N).value()
    return (1.0 - lam_n) / (N * (1.0 - lam))


def mean_ergodic(u, N, unitarity_tol: float = 1e-10) -> np.ndarray:
    """(1/N) sum_{n<N} U^n, evaluated by binary splitting of the sum."""
    arr = require_unitary(u, unitarity_tol)
    N = _check_horizon(N)
    d = arr.shape[0]
    total = np.eye(d, dtype=np.complex128)  # sum over n < 1
    power = arr.copy()
    for bit in bin(N)[3:]:
        total = total + power @ total
        power = power @ power
        if bit == "1":
            total = total + power
            power = power @ arr
    return total / N


def _max_open_axes(p: Partition, first: list[int], last: list[int]) -> int:
    open_count = 0
    worst = 0
    for pos in range(1, p.m + 1):
        idx = pos - 1
        if first[idx] == pos and last[idx] != pos:
            open_count += 1
        worst = max(worst, open_count)
        if last[idx] == pos and first[idx] != pos:
            open_count -= 1
    return worst


def cesaro_direct(u, p: Partition, ops, N, *, general: bool = False,
                  budget: int = DIRECT_TUPLE_BUDGET) -> CesaroResult:
    """Finite-N entangled mean from the power table of U.

    The sum over index tuples is contracted slot by slot: each class opens an
    axis of size N at its first slot and is summed out at its last slot.  The
    contraction path is fixed, so results are reproducible bit for bit.
    """
    start = time.perf_counter()
    arr = as_operator(u, name="unitary")
    p = _check_partition(p, general)
    ops = _check_ops(p, ops, arr.shape[0])
    N = _check_horizon(N)
    d = arr.shape[0]
    if N**p.k > budget:
        raise BudgetError(f"direct engine: N^k = {N**p.k:.3e} exceeds budget {budget:.1e}")
    first, last = _first_last(p)
    peak = max(_max_open_axes(p, first, last), 1)
    if (N**peak) * d * d > _SWEEP_ENTRY_BUDGET:
        raise BudgetError("direct engine: sweep intermediate exceeds the memory budget")

    powers = np.empty((N, d, d), dtype=np.complex128)
    powers[0] = np.eye(d)
    for n in range(1, N):
        powers[n] = powers[n - 1] @ arr
    power_sum = powers.sum(axis=0)

    letters = iter("abcdefghijklmnopqrstuvw")
    open_axes: list[tuple[int, str]] = []  # (class label, axis letter), in axis order
    tensor = None
    for pos, lab in enumerate(p.labels, start=1):
        idx = pos - 1
        if tensor is not None:
            tensor = tensor @ ops[pos - 2]
        if tensor is None:
            if first[idx] == last[idx]:
                tensor = power_sum
            else:
                tensor = powers
                open_axes.append((lab, next(letters)))
            continue
        base = "".join(l for _, l in open_axes)
        open_labels = [c for c, _ in open_axes]
        if lab not in open_labels:
            if first[idx] == last[idx]:
                tensor = np.einsum(f"{base}xy,yz->{base}xz", tensor, power_sum)
            else:
                ell = next(letters)
                tensor = np.einsum(f"{base}xy,{ell}yz->{base}{ell}xz", tensor, powers)
                open_axes.append((lab, ell))
        else:
            ell = open_axes[open_labels.index(lab)][1]
            if pos == last[idx]:
                out = "".join(l for c, l in open_axes if c != lab)
                tensor = np.einsum(f"{base}xy,{ell}yz->{out}xz", tensor, powers)
                open_axes.pop(open_labels.index(lab))
            else:
                tensor = np.einsum(f"{base}xy,{ell}yz->{base}xz", tensor, powers)
    matrix = tensor / float(N) ** p.k
    return CesaroResult(matrix, "direct", N, time.perf_counter() - start)


def _sandwich_blocks(dec: SpectralDecomposition, ops) -> np.ndarray:
    """blocks[j, b, c] = E_b @ ops[j] @ E_c, cached once per evaluation."""
    projections = dec.projections
    B = len(projections)
    d = dec.dim
    blocks = np.empty((len(ops), B, B, d, d), dtype=np.complex128)
    for j, a in enumerate(ops):
        left = [proj @ a for proj in projections]
        for b in range(B):
            for c in range(B):
                blocks[j, b, c] = left[b] @ projections[c]
    return blocks


def _tuple_sweep(dec, p, ops, *, mode, N=None, resonance_tol=None, budget):
    """Depth-first walk over projection-block tuples in lexicographic order.

    mode "mean":  weight each tuple by its kernel product, return the sum.
    mode "limit": keep tuples whose classes are all resonant, return the sum.
    mode "bound": return sum of |kernel product - resonance indicator| times
                  the operator norm of the tuple's block chain.
    """
    B = len(dec.entries)
    m = p.m
    if B**m > budget:
        raise BudgetError(f"spectral engine: B^m = {B**m:.3e} exceeds budget {budget:.1e}")
    blocks = _sandwich_blocks(dec, ops)
    phases = dec.phases
    first, last = _first_last(p)
    labels = p.labels
    tol = dec.tolerances.resonance if resonance_tol is None else resonance_tol

    need_kern = mode in ("mean", "bound")
    need_res = mode in ("limit", "bound")
    if need_res:
        partners = resonant_partners(dec, tol)
        one_single = [phases[b].is_one(tol) for b in range(B)]
    if need_kern:
        kern_single = [kernel(phases[b], N) for b in range(B)]
        kern_pair = [[kernel(phases[b] + phases[c], N) for c in range(B)] for b in range(B)]

    class_size = [0] * p.k
    for lab in labels:
        class_size[lab - 1] += 1

    d = dec.dim
    matrix = np.zeros((d, d), dtype=np.complex128)
    bound = 0.0
    # Per-class carry along the current path: the first block index for pair
    # classes, the accumulated phase sum for larger ones.
    carry: list = [None] * p.k

    def walk(pos, prev_b, prefix, kern, resonant):
        nonlocal matrix, bound
        idx = pos - 1
        lab_idx = labels[idx] - 1
        opens = first[idx] == pos
        closes = last[idx] == pos
        saved = carry[lab_idx]
        for b in range(B):
            kern_here, resonant_here = kern, resonant
            if closes:
                if opens:  # singleton class
                    if need_kern:
                        kern_here = kern_here * kern_single[b]
                    if need_res:
                        resonant_here = resonant_here and one_single[b]
                elif class_size[lab_idx] == 2:
                    if need_kern:
                        kern_here = kern_here * kern_pair[saved][b]
                    if need_res:
                        resonant_here = resonant_here and partners[saved] == b
                else:
                    total = saved + phases[b]
                    if need_kern:
                        kern_here = kern_here * kernel(total, N)
                    if need_res:
                        resonant_here = resonant_here and total.is_one(tol)
            elif opens:
                carry[lab_idx] = b if class_size[lab_idx] == 2 else phases[b]
            else:
                carry[lab_idx] = saved + phases[b]
            if mode == "mean" and kern_here == 0:
                continue
            if mode == "limit" and not resonant_here:
                continue
            if mode == "bound" and kern_here == 0 and not resonant_here:
                continue
            if pos == 1:
                # A one-slot partition has no sandwich blocks; the chain is
                # the bare projection.  Longer chains start at the first block.
                chain = dec.entries[b].projection if m == 1 else None
            elif prefix is None:
                chain = blocks[pos - 2, prev_b, b]
            else:
                chain = prefix @ blocks[pos - 2, prev_b, b]
            if pos == m:
                if mode == "mean":
                    matrix += kern_here * chain
                elif mode == "limit":
                    matrix += chain
                else:
                    delta = abs(kern_here - (1.0 if resonant_here else 0.0))
                    if delta != 0.0:
                        bound += delta * operator_norm(chain)
            else:
                walk(pos + 1, b, chain, kern_here, resonant_here)
        carry[lab_idx] = saved

    walk(1, -1, None, 1.0 + 0.0j, True)
    return matrix, bound


def cesaro_spectral(dec: SpectralDecomposition, p: Partition, ops, N, *,
                    general: bool = False, budget: int = SPECTRAL_TUPLE_BUDGET) -> CesaroResult:
    """Finite-N entangled mean as a kernel-weighted sum over projection tuples.

    Mathematically identical to ``cesaro_direct`` for every N; the cost does
    not depend on N.  Block tuples are accumulated in lexicographic order.
    """
    start = time.perf_counter()
    p = _check_partition(p, general)
    ops = _check_ops(p, ops, dec.dim)
    N = _check_horizon(N)
    matrix, _ = _tuple_sweep(dec, p, ops, mode="mean", N=N, budget=budget)
    return CesaroResult(matrix, "spectral", N, time.perf_counter() - start)


def cesaro_nested(dec: SpectralDecomposition, p: Partition, ops, N) -> CesaroResult:
    """Entangled mean by collapsing innermost adjacent class pairs.

    Each collapse replaces U^n A U^n (both slots driven by the same index) by
    its plain Cesaro average and merges the neighbors.  Finite sums over
    independent indices factor exactly, so this agrees with ``cesaro_direct``
    up to rounding, but it is only defined for non-crossing pair partitions.
    """
    start = time.perf_counter()
    p = _check_partition(p, general=False)
    if is_crossing(p):
        raise ValueError("nested engine requires a non-crossing pair partition")
    ops = _check_ops(p, ops, dec.dim)
    N = _check_horizon(N)
    u = reconstruct(dec)
    d = dec.dim
    eye = np.eye(d, dtype=np.complex128)
    chain: list[np.ndarray] = [eye, *ops, eye]
    labels = list(p.labels)
    while labels:
        pair_at = next(i for i in range(len(labels) - 1) if labels[i] == labels[i + 1])
        mid = chain[pair_at + 1]
        avg = np.zeros((d, d), dtype=np.complex128)
        power = eye
        for _ in range(N):
            avg += power @ mid @ power
            power = power @ u
        avg /= N
        merged = chain[pair_at] @ avg @ chain[pair_at + 2]
        chain = chain[:pair_at] + [merged] + chain[pair_at + 3 :]
        labels = labels[:pair_at] + labels[pair_at + 2 :]
    return CesaroResult(chain[0], "nested", N, time.perf_counter() - start)


def limit_truncated(dec: SpectralDecomposition, p: Partition, ops, phases,
                    resonance_tol: float | None = None) -> np.ndarray:
    """Partial limit sum restricted to class phases drawn from ``phases``.

    Every element of ``phases`` must lie in the antidiagonal spectrum.  The
    first slot of each class carries the conjugate projection, the second the
    plain one.  With the full antidiagonal spectrum this is the limit
    operator itself.
    """
    structure = require_pair(p)
    ops = _check_ops(p, ops, dec.dim)
    tol = dec.tolerances.resonance if resonance_tol is None else resonance_tol
    partners = resonant_partners(dec, tol)
    index_of = {line.phase: b for b, line in enumerate(dec.entries)}
    chosen = set()
    for ph in phases:
        b = index_of.get(ph)
        if b is None or partners[b] is None:
            raise ValueError(f"phase {ph} is not in the antidiagonal spectrum")
        chosen.add(b)
    chosen = sorted(chosen)
    blocks = _sandwich_blocks(dec, ops)
    matrix = np.zeros((dec.dim, dec.dim), dtype=np.complex128)
    slot_block = [0] * p.m
    for combo in itertools.product(chosen, repeat=p.k):
        for l, b in enumerate(combo):
            i_l, j_l = structure.class_pairs[l]
            slot_block[i_l - 1] = partners[b]
            slot_block[j_l - 1] = b
        chain = blocks[0, slot_block[0], slot_block[1]]
        for j in range(1, p.m - 1):
            chain = chain @ blocks[j, slot_block[j], slot_block[j + 1]]
        matrix += chain
    return matrix


def limit_operator(dec: SpectralDecomposition, p: Partition, ops,
                   resonance_tol: float | None = None, *, general: bool = False,
                   budget: int = SPECTRAL_TUPLE_BUDGET) -> np.ndarray:
    """Limit of the entangled mean: the sum over resonant block tuples."""
    p = _check_partition(p, general)
    if p.is_pair():
        sigma = antidiagonal_spectrum(dec, resonance_tol)
        return limit_truncated(dec, p, ops, sigma, resonance_tol)
    ops = _check_ops(p, ops, dec.dim)
    matrix, _ = _tuple_sweep(dec, p, ops, mode="limit", resonance_tol=resonance_tol, budget=budget)
    return matrix


def form_value(dec: SpectralDecomposition, p: Partition, ops, x, y,
               phases=None, resonance_tol: float | None = None) -> complex:
    """Sesquilinear form <S^F x, y> of the (truncated) limit operator."""
    x = as_vector(x, dec.dim, name="x")
    y = as_vector(y, dec.dim, name="y")
    if phases is None:
        phases = antidiagonal_spectrum(dec, resonance_tol)
    s = limit_truncated(dec, p, ops, phases, resonance_tol)
    return complex(np.vdot(y, s @ x))


def error_bound(dec: SpectralDecomposition, p: Partition, ops, N,
                resonance_tol: float | None = None, *, general: bool = False,
                budget: int = SPECTRAL_TUPLE_BUDGET) -> float:
    """Certified bound on the operator-norm distance of M_N from the limit.

    Sums |kernel product - resonance indicator| times the operator norm of
    the block chain over all tuples; by the triangle inequality this
    dominates the true error of the spectral representation.
    """
    p = _check_partition(p, general)
    ops = _check_ops(p, ops, dec.dim)
    N = _check_horizon(N)
    _, bound = _tuple_sweep(dec, p, ops, mode="bound", N=N,
                            resonance_tol=resonance_tol, budget=budget)
    return bound


def spectral_gap(dec: SpectralDecomposition, resonance_tol: float | None = None) -> float:
    """Smallest |1 - z*w| over non-resonant phase pairs; inf when none exist."""
    tol = dec.tolerances.resonance if resonance_tol is None else resonance_tol
    partners = resonant_partners(dec, tol)
    phases = dec.phases
    gap = float("inf")
    for b in range(len(phases)):
        for c in range(len(phases)):
            if partners[b] == c:
                continue
            gap = min(gap, abs(1.0 - (phases[b] + phases[c]).value()))
    return gap


def convergence_report(dec: SpectralDecomposition, p: Partition, ops, Ns,
                       engine: str = "spectral", resonance_tol: float | None = None, *,
                       general: bool = False) -> ConvergenceReport:
    """Measured error against the limit, with certified bound, per horizon."""
    Ns = [(_check_horizon(n)) for n in Ns]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("horizons must be strictly increasing")
    if engine not in ENGINE_NAMES:
        raise ValueError(f"unknown engine {engine!r}, expected one of {ENGINE_NAMES}")
    p = _check_partition(p, general)
    limit = limit_operator(dec, p, ops, resonance_tol, general=general)
    gap = spectral_gap(dec, resonance_tol)
    source = reconstruct(dec) if engine == "direct" else None
    rows = []
    for n in Ns:
        if engine == "direct":
            result = cesaro_direct(source, p, ops, n, general=general)
        elif engine == "spectral":
            result = cesaro_spectral(dec, p, ops, n, general=general)
        else:
            result = cesaro_nested(dec, p, ops, n)
        diff = result.matrix - limit
        rows.append(ReportRow(
            N=n,
            error_op=operator_norm(diff),
            error_frob=frobenius_norm(diff),
            certified_bound=error_bound(dec, p, ops, n, resonance_tol, general=general),
            engine=engine,
            seconds=result.elapsed,
        ))
    return ConvergenceReport(tuple(rows), gap)
