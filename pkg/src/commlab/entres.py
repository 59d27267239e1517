"""Entanglement experiments: subspace-partition equality testing and
Schmidt-truncation attacks.

For each input i a Haar-random unitary splits C^M into sixteen orthogonal
rank-M/16 blocks.  Sharing M-dimensional maximally entangled halves,
Alice measures her side in her input's block basis and sends the 4-bit
outcome; Bob checks his collapsed half against his own input's block.
Equal inputs always accept, while unequal inputs overlap each block only
~1/16.  Truncating the shared state's Schmidt rank (a low-entanglement
substitute) destroys the equal-input guarantee, which is the point of the
attack report.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .qmath import (
    BipartitePureState,
    DensityMatrix,
    _check_budget,
    entanglement_amount,
    haar_unitary,
    schmidt,
)

BLOCKS = 16
MESSAGE_BITS = 4                # log₂ BLOCKS classical bits per run
CROSS_OVERLAP_BOUND = 0.25      # target for cross-input block overlaps
EQUAL_ACCEPT_THRESHOLD = 13 / 20  # attack flag: equal inputs dropping below
INTRUSION_THRESHOLD = 9 / 16    # per-input overlap a low-rank state must beat
INTRUSION_FRACTION = 0.25       # allowed fraction of inputs beating it


class SubspacePartition:
    """Sixteen-way orthogonal subspace splits of C^M, one per input.

    ``bases[i]`` is a unitary whose consecutive M/16-column blocks span
    the input-i subspaces; Π_{ij} projects onto block j and
    ρ_{ij} = (16/M)·Π_{ij} is the maximally mixed state on it.  Storing
    the unitaries keeps the within-input properties (unit trace,
    cross-block orthogonality, completeness) exact by construction.
    """

    __slots__ = ("dim", "x_size", "rank", "bases", "seed")

    def __init__(self, bases, seed=None) -> None:
        bases = np.asarray(bases, dtype=np.complex128)
        if bases.ndim != 3 or bases.shape[1] != bases.shape[2]:
            raise ValueError("bases must be a stack of square unitaries")
        dim = int(bases.shape[1])
        if dim % BLOCKS != 0:
            raise ValueError(f"dimension {dim} is not divisible by {BLOCKS}")
        _check_budget(dim)
        eye = np.eye(dim)
        for i, u in enumerate(bases):
            dev = float(np.max(np.abs(u.conj().T @ u - eye)))
            if dev > 1e-10:
                raise ValueError(f"bases[{i}] is not unitary (deviation {dev})")
        bases = bases.copy()
        bases.setflags(write=False)
        self.bases = bases
        self.dim = dim
        self.x_size = int(bases.shape[0])
        self.rank = dim // BLOCKS
        self.seed = seed

    def block(self, i: int, j: int) -> np.ndarray:
        """Isometry whose columns span subspace (i, j)."""
        self._check(i, j)
        return self.bases[i][:, j * self.rank:(j + 1) * self.rank]

    def projector(self, i: int, j: int) -> np.ndarray:
        """Rank-M/16 orthogonal projector Π_{ij}."""
        b = self.block(i, j)
        return b @ b.conj().T

    def state(self, i: int, j: int) -> DensityMatrix:
        """Maximally mixed state ρ_{ij} = (16/M)·Π_{ij} on subspace (i, j)."""
        return DensityMatrix(self.projector(i, j) * (BLOCKS / self.dim))

    def _check(self, i: int, j: int) -> None:
        if not 0 <= i < self.x_size:
            raise ValueError(f"input index {i} outside [0, {self.x_size})")
        if not 0 <= j < BLOCKS:
            raise ValueError(f"block index {j} outside [0, {BLOCKS})")

    def __repr__(self) -> str:  # pragma: no cover
        return (f"SubspacePartition(dim={self.dim}, x_size={self.x_size}, "
                f"seed={self.seed!r})")


def build_partition(dim: int, x_size: int, seed: int) -> SubspacePartition:
    """Haar-random partition: one seeded unitary per input, chopped into
    sixteen column blocks.  Within-input structure is exact; cross-input
    overlaps concentrate near 1/16 and are reported, not guaranteed."""
    if dim % BLOCKS != 0:
        raise ValueError(f"dimension {dim} is not divisible by {BLOCKS}")
    if x_size < 1:
        raise ValueError("x_size must be at least 1")
    _check_budget(dim)
    rng = np.random.default_rng(seed)
    bases = np.stack([haar_unitary(dim, rng) for _ in range(x_size)])
    return SubspacePartition(bases, seed=seed)


class PartitionReport(NamedTuple):
    unit_trace_dev: float      # max |Tr(Π_{ij} ρ_{ij}) − 1|
    orthogonality_dev: float   # max Tr(Π_{ij} ρ_{ij'}) over j ≠ j'
    completeness_dev: float    # max entry deviation of Σ_j Π_{ij} from I
    cross_overlap_max: float   # max Tr(Π_{ij} ρ_{i'j'}) over i ≠ i'
    cross_overlap_mean: float  # mean of the same overlaps


def _block_overlaps(partition: SubspacePartition, i: int, ip: int) -> np.ndarray:
    """(BLOCKS, BLOCKS) matrix of Tr(Π_{ij} ρ_{i'j'}) = (16/M)‖B_{ij}†B_{i'j'}‖²."""
    g = partition.bases[i].conj().T @ partition.bases[ip]
    r = partition.rank
    blocks = g.reshape(BLOCKS, r, BLOCKS, r)
    return (BLOCKS / partition.dim) * np.sum(np.abs(blocks) ** 2, axis=(1, 3))


def partition_report(partition: SubspacePartition) -> PartitionReport:
    """Exact deviations for the within-input properties plus the observed
    cross-input overlap statistics (the < 1/4 bound is empirical)."""
    unit_dev = 0.0
    ortho_dev = 0.0
    comp_dev = 0.0
    eye = np.eye(partition.dim)
    for i in range(partition.x_size):
        ov = _block_overlaps(partition, i, i)
        unit_dev = max(unit_dev, float(np.max(np.abs(np.diag(ov) - 1.0))))
        off = ov - np.diag(np.diag(ov))
        ortho_dev = max(ortho_dev, float(np.max(np.abs(off))))
        total = partition.bases[i] @ partition.bases[i].conj().T
        comp_dev = max(comp_dev, float(np.max(np.abs(total - eye))))
    cross_max = 0.0
    cross_sum = 0.0
    cross_n = 0
    for i in range(partition.x_size):
        for ip in range(partition.x_size):
            if i == ip:
                continue
            ov = _block_overlaps(partition, i, ip)
            cross_max = max(cross_max, float(np.max(ov)))
            cross_sum += float(np.sum(ov))
            cross_n += ov.size
    cross_mean = cross_sum / cross_n if cross_n else 0.0
    return PartitionReport(unit_dev, ortho_dev, comp_dev, cross_max, cross_mean)


def epr_state(dim: int) -> BipartitePureState:
    """Maximally entangled state Σ_i |ii⟩/√M on C^M ⊗ C^M."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    _check_budget(dim)
    c = np.eye(dim, dtype=np.complex128) / math.sqrt(dim)
    return BipartitePureState(c.reshape(-1), dim, dim)


def equality_protocol(partition: SubspacePartition, x: int, xp: int) -> float:
    """Exact acceptance probability of the 4-bit entangled equality test.

    Alice measures her halves of the maximally entangled state in her
    input's block basis (conjugated, so Bob's half collapses to exactly
    ρ_{xj}), sends the outcome j, and Bob applies the two-outcome test
    {Π_{x'j}, I − Π_{x'j}}.  Each outcome has probability 1/16, giving
    Σ_j (1/16)·Tr(Π_{x'j} ρ_{xj}).
    """
    partition._check(x, 0)
    partition._check(xp, 0)
    return float(np.sum(_block_overlaps(partition, xp, x).diagonal()) / BLOCKS)


def equality_matrix(partition: SubspacePartition) -> np.ndarray:
    """Acceptance probabilities for every input pair (x, x')."""
    n = partition.x_size
    out = np.zeros((n, n))
    for x in range(n):
        for xp in range(n):
            out[x, xp] = equality_protocol(partition, x, xp)
    return out


class TruncationReport(NamedTuple):
    rank_bound: int            # Schmidt rank the prior state is cut to
    kept_mass: float           # Schmidt weight surviving the cut
    prior_distance: float      # trace distance of the cut prior to the full one
    accept: np.ndarray         # (N, N) acceptance with the truncated prior
    honest: np.ndarray         # (N, N) acceptance with the full prior
    shift_max: float           # max |accept − honest|
    equal_min: float           # worst equal-input acceptance after the cut
    below_threshold: bool      # equal_min < 13/20


def truncation_attack(partition: SubspacePartition,
                      rank_bound: int) -> TruncationReport:
    """Run the honest measurements on a Schmidt-truncated prior state.

    The maximally entangled prior has flat Schmidt weight, so cutting to
    rank r keeps the first r basis pairs at weight 1/r.  Acceptance
    becomes Σ_j Tr(Π_{x'j} P_r Π_{xj} P_r)/r with P_r the kept-coordinate
    projector — computed exactly for every input pair.
    """
    if rank_bound < 1:
        raise ValueError("rank_bound must be at least 1")
    m = partition.dim
    r = min(rank_bound, m)
    n = partition.x_size
    accept = np.zeros((n, n))
    for x in range(n):
        tops = [partition.block(x, j)[:r, :] for j in range(BLOCKS)]
        for xp in range(n):
            total = 0.0
            for j in range(BLOCKS):
                top_p = partition.block(xp, j)[:r, :]
                g = top_p.conj().T @ tops[j]
                total += float(np.sum(np.abs(g) ** 2))
            accept[x, xp] = total / r
    honest = equality_matrix(partition)
    shift = float(np.max(np.abs(accept - honest)))
    equal_min = float(np.min(np.diag(accept)))
    mass = r / m
    return TruncationReport(rank_bound, mass, math.sqrt(1.0 - mass), accept,
                            honest, shift, equal_min,
                            equal_min < EQUAL_ACCEPT_THRESHOLD)


class SchmidtTail(NamedTuple):
    entropy: float       # entanglement of the input state, in bits
    threshold: float     # Schmidt-weight cutoff 2^(−100·entropy)
    rank: int            # number of terms kept (≤ 2^(100·entropy))
    kept_mass: float     # Schmidt weight above the cutoff (≥ 99/100)
    trace_norm: float    # ‖φφ† − φ'φ'†‖₁ to the renormalized kept state


def schmidt_tail_bound(phi: BipartitePureState) -> SchmidtTail:
    """Low-entanglement states are close to low-Schmidt-rank states.

    Keeping the Schmidt terms of weight at least 2^(−100·E) retains mass
    ≥ 99/100 by a Markov argument on the entropy, and the renormalized
    kept state sits at trace norm 2·√(1 − mass) from the original.
    """
    e = entanglement_amount(phi)
    threshold = 2.0 ** (-100.0 * e) if e > 0 else 1.0 - 1e-12
    lam, _, _ = schmidt(phi)
    kept = (lam >= threshold) & (lam > 0.0)
    mass = float(np.sum(lam[kept]))
    rank = int(np.sum(kept))
    norm = 2.0 * math.sqrt(max(0.0, 1.0 - mass))
    return SchmidtTail(e, threshold, rank, mass, norm)


class IntrusionEvidence(NamedTuple):
    rank_w: int          # dimension of the sampled subspaces W
    samples: int
    worst_fraction: float  # max over W of the fraction of inputs beaten
    threshold: float     # overlap a W-supported state must exceed (9/16)
    bound: float         # allowed fraction of beaten inputs (1/4)
    label: str           # "statistical evidence" — W is sampled, not enumerated


def low_rank_intrusion(partition: SubspacePartition, rank_w: int,
                       samples: int, seed: int) -> IntrusionEvidence:
    """Sampled check that low-dimensional subspaces can't impersonate
    many inputs at once.

    For a subspace W, the best W-supported state against block (i, j) is
    the top eigenvector of the compressed projector, so the inner
    maximization is exact; only W itself is sampled (Haar), hence the
    "statistical evidence" label.
    """
    if rank_w < 1 or rank_w > partition.dim:
        raise ValueError("rank_w must lie in [1, dim]")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        w = haar_unitary(partition.dim, rng)[:, :rank_w]
        beaten = 0
        for i in range(partition.x_size):
            compressed = w.conj().T @ partition.bases[i]
            best = 0.0
            for j in range(BLOCKS):
                blk = compressed[:, j * partition.rank:(j + 1) * partition.rank]
                g = blk @ blk.conj().T
                top = float(np.linalg.eigvalsh(g)[-1])
                best = max(best, top)
            if best > INTRUSION_THRESHOLD:
                beaten += 1
        worst = max(worst, beaten / partition.x_size)
    return IntrusionEvidence(rank_w, samples, worst, INTRUSION_THRESHOLD,
                             INTRUSION_FRACTION, "statistical evidence")


__all__ = [
    "BLOCKS",
    "CROSS_OVERLAP_BOUND",
    "EQUAL_ACCEPT_THRESHOLD",
    "INTRUSION_FRACTION",
    "INTRUSION_THRESHOLD",
    "IntrusionEvidence",
    "MESSAGE_BITS",
    "PartitionReport",
    "SchmidtTail",
    "SubspacePartition",
    "TruncationReport",
    "build_partition",
    "epr_state",
    "equality_matrix",
    "equality_protocol",
    "low_rank_intrusion",
    "partition_report",
    "schmidt_tail_bound",
    "truncation_attack",
]
