"""Exact remote state preparation by steering a fixed full-rank reference.

Alice and Bob share copies of one input-independent entangled state whose
Bob-side marginal is a reference σ.  To hand Bob a pure target |φ_x⟩,
Alice rotates her half of each copy and measures a flag qubit; the flag
fires with probability k_x = (⟨φ_x|σ⁻¹|φ_x⟩)⁻¹ and, when it does, Bob's
half collapses to |φ_x⟩ with no fidelity loss.  Alice sends the index of
the first success with a prefix-free integer code, so the expected cost
is governed by log₂ of the inverse success probability.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .cinfo import prefix_length
from .cproto import trial_uniforms
from .qmath import (
    BipartitePureState,
    DensityMatrix,
    canonical_purification,
    max_substate_weight,
    random_pure_state,
    uhlmann_align,
)

SIGMA_MIN_EIG = 1e-12
RESIDUAL_TOL = 1e-9
C_CODE = 4  # additive slack of the prefix code over log₂ + 2 log₂ log₂


class ERSPInstance:
    """Pure targets |φ_x⟩ together with a shared full-rank reference σ.

    ``states`` holds the targets as rows.  σ must have every eigenvalue
    above 1e-12 so that the per-copy success probability
    k_x = (⟨φ_x|σ⁻¹|φ_x⟩)⁻¹ is positive for every target.
    """

    __slots__ = ("states", "sigma", "dim", "x_size", "weights")

    def __init__(self, states, sigma) -> None:
        states = np.array(states, dtype=np.complex128)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError("states must be a nonempty (x_size, dim) array")
        norms = np.linalg.norm(states, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError("target states must be unit vectors")
        if not isinstance(sigma, DensityMatrix):
            sigma = DensityMatrix(sigma)
        if states.shape[1] != sigma.dim:
            raise ValueError(
                f"target dimension {states.shape[1]} does not match the "
                f"reference dimension {sigma.dim}")
        lam, _ = sigma.eigh()
        if float(np.min(lam)) <= SIGMA_MIN_EIG:
            raise ValueError("reference state must have full rank")
        states.setflags(write=False)
        self.states = states
        self.sigma = sigma
        self.dim = int(sigma.dim)
        self.x_size = int(states.shape[0])
        weights = np.array([
            max_substate_weight(DensityMatrix(np.outer(v, v.conj())), sigma)
            for v in states])
        weights.setflags(write=False)
        self.weights = weights

    def weight(self, x: int) -> float:
        """Per-copy success probability k_x = (⟨φ_x|σ⁻¹|φ_x⟩)⁻¹."""
        self._check_index(x)
        return float(self.weights[x])

    def expected_index(self, x: int) -> float:
        """E[J] = 1/k_x = Tr(σ⁻¹ρ_x), the geometric mean waiting time."""
        return 1.0 / self.weight(x)

    def _check_index(self, x: int) -> None:
        if not 0 <= x < self.x_size:
            raise ValueError(f"input index {x} outside [0, {self.x_size})")

    @classmethod
    def uniform_reference(cls, states) -> "ERSPInstance":
        """Instance with σ = I/d, so every target has k_x = 1/d."""
        states = np.asarray(states, dtype=np.complex128)
        d = states.shape[1]
        return cls(states, DensityMatrix(np.eye(d) / d))

    @classmethod
    def random(cls, x_size: int, dim: int, seed: int) -> "ERSPInstance":
        """Haar targets and a Ginibre reference floored away from rank loss."""
        rng = np.random.default_rng(seed)
        states = np.stack([random_pure_state(dim, rng) for _ in range(x_size)])
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw = g @ g.conj().T
        raw = raw / np.trace(raw).real
        mat = 0.95 * raw + 0.05 * np.eye(dim) / dim
        return cls(states, DensityMatrix(mat))

    def __repr__(self) -> str:  # pragma: no cover
        return f"ERSPInstance(x_size={self.x_size}, dim={self.dim})"


def build_psi_rho(instance: ERSPInstance, x: int) -> BipartitePureState:
    """Flag ⊗ ancilla ⊗ target state √k|1⟩|0̄⟩|φ_x⟩ + √(1−k)|0⟩|θ⟩.

    Side A is a flag qubit stacked on a dim-d ancilla, side B is the
    target register.  Tracing out side A leaves exactly σ; conditioning
    on flag = 1 leaves exactly |φ_x⟩.  |θ⟩ purifies the residual
    (σ − kρ_x)/(1 − k), which is positive semidefinite because k is the
    largest weight with σ − kρ_x ⪰ 0.
    """
    instance._check_index(x)
    phi = instance.states[x]
    d = instance.dim
    k = instance.weight(x)
    residual = instance.sigma.mat - k * np.outer(phi, phi.conj())
    lam, vec = np.linalg.eigh(residual)
    if float(lam.min()) < -RESIDUAL_TOL:
        raise ValueError(
            f"residual σ − kρ has negative eigenvalue {float(lam.min()):.3e}")
    lam = np.clip(lam, 0.0, None)
    c = np.zeros((2 * d, d), dtype=np.complex128)
    c[d, :] = math.sqrt(k) * phi          # flag 1, ancilla |0̄⟩
    for i in range(d):                    # flag 0 rows carry √(1−k)|θ⟩
        if lam[i] > 0.0:
            c[i, :] = math.sqrt(lam[i]) * vec[:, i]
    return BipartitePureState(c.reshape(-1), 2 * d, d)


def shared_copy(instance: ERSPInstance) -> BipartitePureState:
    """The input-independent copy both parties hold: a purification of σ
    on the same (flag ⊗ ancilla | target) cut used by ``build_psi_rho``."""
    return canonical_purification(instance.sigma, dim_a=2 * instance.dim)


def alice_unitary(instance: ERSPInstance, x: int) -> np.ndarray:
    """Alice's local rotation taking the shared copy to |ψ⟩_{ρ_x}.

    Both states have B-marginal exactly σ, so the alignment is exact and
    the rotated copy exposes the flag/ancilla structure of
    ``build_psi_rho(instance, x)``.
    """
    return uhlmann_align(shared_copy(instance), build_psi_rho(instance, x)).mat


def _conditional_output(instance: ERSPInstance, x: int):
    """(success probability, Bob's conditional state, fidelity with |φ_x⟩)
    computed from the actually-rotated shared copy, not from the target
    construction, so the fidelity certificate exercises the full path."""
    copy = shared_copy(instance)
    u = alice_unitary(instance, x)
    c = u @ copy.matrix()
    d = instance.dim
    block = c[d:, :]                      # flag-1 rows of side A
    p = float(np.real(np.sum(block.conj() * block)))
    _, s, vh = np.linalg.svd(block)
    bob = vh[0]
    phi = instance.states[x]
    fid = float(np.abs(np.vdot(phi, bob)) ** 2)
    return p, bob, fid


class ERSPRun(NamedTuple):
    index: int                    # first successful copy, 1-based; 0 on abort
    bits: int                     # prefix-code length of the index; 1 on abort
    state: Optional[np.ndarray]   # Bob's register after a success
    success: bool
    fidelity: float               # |⟨φ_x|state⟩|²; 0.0 on abort
    success_prob: float           # per-copy flag probability k_x


def run_ersp(instance: ERSPInstance, x: int, budget: int, seed: int) -> ERSPRun:
    """One protocol run: measure copies in order until the flag fires.

    Copy j succeeds when the j-th position-addressed uniform falls below
    k_x.  On success Alice sends the copy index with the prefix-free
    integer code; if the budget is exhausted first the run aborts with a
    single flag bit.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    p, bob, fid = _conditional_output(instance, x)
    us = trial_uniforms(seed, budget, width=1)[:, 0]
    hits = np.flatnonzero(us < p)
    if hits.size == 0:
        return ERSPRun(0, 1, None, False, 0.0, p)
    j = int(hits[0]) + 1
    return ERSPRun(j, prefix_length(j), bob, True, fid, p)


class ERSPBatch(NamedTuple):
    indices: np.ndarray       # per-trial first-success index, 0 on abort
    bits: np.ndarray          # per-trial code length, 1 on abort
    success: np.ndarray       # boolean mask
    fidelity: float           # conditional output fidelity (copies identical)
    success_prob: float       # per-copy flag probability k_x
    mean_index: float         # average J over successful trials
    mean_bits: float          # average code length over all trials


def simulate_ersp(instance: ERSPInstance, x: int, trials: int, budget: int,
                  seed: int) -> ERSPBatch:
    """Many independent runs, one geometric draw per trial.

    Each trial inverts its own uniform through the geometric law with
    success probability k_x — the same first-success distribution the
    copy-by-copy run realizes, at one draw per trial.  Trial t reads
    counter position t, so results are independent of chunking.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p, _, fid = _conditional_output(instance, x)
    us = trial_uniforms(seed, trials, width=1)[:, 0]
    if p >= 1.0 - 1e-15:
        draws = np.ones(trials, dtype=np.int64)
    else:
        draws = np.floor(np.log1p(-us) / math.log1p(-p)).astype(np.int64) + 1
    success = draws <= budget
    indices = np.where(success, draws, 0)
    bits = np.ones(trials, dtype=np.int64)
    lengths = {int(j): prefix_length(int(j)) for j in np.unique(draws[success])}
    for j, ell in lengths.items():
        bits[indices == j] = ell
    mean_index = float(np.mean(draws[success])) if success.any() else 0.0
    return ERSPBatch(indices, bits, success, fid, p, mean_index,
                     float(np.mean(bits)))


def expected_bits_bound(ratio: float) -> float:
    """Prefix-code budget log₂T + 2·max(log₂log₂T, 0) + 4 at T = E[J].

    The double log is clamped to zero for T ≤ 2, where the inner log
    drops below 1.
    """
    if ratio < 1.0:
        raise ValueError("expected index must be at least 1")
    lg = math.log2(ratio) if ratio > 1.0 else 0.0
    loglog = math.log2(lg) if lg > 1.0 else 0.0
    return lg + 2.0 * loglog + C_CODE


def random_instance_family(count: int, dims, seed: int):
    """Deterministic list of random instances cycling through ``dims``."""
    dims = list(dims)
    return [ERSPInstance.random(x_size=3, dim=dims[i % len(dims)],
                                seed=seed + i) for i in range(count)]


__all__ = [
    "C_CODE",
    "ERSPBatch",
    "ERSPInstance",
    "ERSPRun",
    "alice_unitary",
    "build_psi_rho",
    "expected_bits_bound",
    "random_instance_family",
    "run_ersp",
    "shared_copy",
    "simulate_ersp",
]
