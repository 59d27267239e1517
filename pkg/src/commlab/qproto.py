"""Quantum communication protocols and corrected message compression.

One-way protocols keep the sender's input in a classical register X, send a
quantum message M, and let the receiver measure a per-input POVM.  Multiround
protocols alternate input-controlled unitaries on the register chain
(X, A, M, B, Y), so the global state stays pure and can be cut after any
round.  Compression replaces the message rounds up to a cut with shared
copies of the average state plus a state-correction procedure: each party
applies an input-indexed operation to her side whose success probability is
equalized across inputs and whose success branch restores the cut state
exactly on a well-behaved ("good") set of inputs.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .cinfo import Distribution, JointDistribution
from .cproto import EvalResult, Relation, _sample_joint, index_tradeoff_privacy, trial_uniforms
from .qmath import (
    BipartitePureState,
    DensityMatrix,
    KrausOp,
    _check_budget,
    _substate_weight_supported,
    apply_kraus_a,
    partial_trace_slots,
    relative_entropy,
    steering_kraus,
    trace_distance,
    uhlmann_align,
    von_neumann_entropy,
)

# Unitarity / POVM-completeness tolerance for protocol constructors.
OP_TOL = 1e-10
# Allowed amplitude mass outside an ensemble state's own input sector.
SECTOR_TOL = 1e-9
# Below this the equalized success probability is useless in simulation.
ALPHA_FLOOR = 1e-12


def _unit_rows(arr: np.ndarray, what: str) -> np.ndarray:
    nrm2 = np.real(np.sum(arr.conj() * arr, axis=1))
    if np.max(np.abs(nrm2 - 1.0)) > OP_TOL:
        raise ValueError(f"{what} rows must be unit vectors (worst squared "
                         f"norm deviation {np.max(np.abs(nrm2 - 1.0))})")
    return arr / np.sqrt(nrm2)[:, None]


def _check_unitary_stack(stack: np.ndarray, dim: int, what: str) -> np.ndarray:
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1:] != (dim, dim):
        raise ValueError(f"{what} must have shape (count, {dim}, {dim}), got {stack.shape}")
    eye = np.eye(dim)
    for i, u in enumerate(stack):
        dev = np.max(np.abs(u.conj().T @ u - eye))
        if dev > OP_TOL:
            raise ValueError(f"{what}[{i}] is not unitary (deviation {dev})")
    return stack


def _check_povm_stack(povms: np.ndarray, dim: int, what: str) -> np.ndarray:
    povms = np.asarray(povms, dtype=np.complex128)
    if povms.ndim != 4 or povms.shape[2:] != (dim, dim):
        raise ValueError(f"{what} must have shape (y, z, {dim}, {dim}), got {povms.shape}")
    for y in range(povms.shape[0]):
        herm = np.max(np.abs(povms[y] - povms[y].conj().transpose(0, 2, 1)))
        if herm > OP_TOL:
            raise ValueError(f"{what}[{y}] elements are not Hermitian (deviation {herm})")
        low = min(np.linalg.eigvalsh(e)[0] for e in povms[y])
        if low < -OP_TOL:
            raise ValueError(f"{what}[{y}] has a negative element (eigenvalue {low})")
        dev = np.max(np.abs(povms[y].sum(axis=0) - np.eye(dim)))
        if dev > OP_TOL:
            raise ValueError(f"{what}[{y}] does not sum to the identity (deviation {dev})")
    return povms


def _check_relation(relation: Relation, nx: int, ny: int, nz: int) -> None:
    if relation.accept.shape != (nx, ny, nz):
        raise ValueError(f"relation shape {relation.accept.shape} does not match "
                         f"protocol shape {(nx, ny, nz)}")


# ---------------------------------------------------------------------------
# one-way protocols


class QuantumOneWayProtocol:
    """Single quantum message: Alice keeps (X, W) and sends M.

    ``psis[x]`` is the unit vector on W ⊗ M prepared on input x, so the
    global state is |x⟩|ψ_x⟩ on X ⊗ W ⊗ M.  ``povms[y, z]`` are Bob's
    measurement operators on M, PSD with Σ_z povms[y, z] = I within 1e-10.
    """

    __slots__ = ("psis", "dim_work", "dim_msg", "povms", "x_size", "y_size", "z_size")

    def __init__(self, psis, dim_work: int, dim_msg: int, povms) -> None:
        psis = np.asarray(psis, dtype=np.complex128)
        if psis.ndim != 2 or psis.shape[1] != dim_work * dim_msg:
            raise ValueError(f"psis must have shape (x_size, {dim_work * dim_msg})")
        self.psis = _unit_rows(psis, "psis")
        self.dim_work = int(dim_work)
        self.dim_msg = int(dim_msg)
        self.x_size = psis.shape[0]
        _check_budget(self.x_size * self.dim_work * self.dim_msg)
        self.povms = _check_povm_stack(povms, dim_msg, "povms")
        self.y_size = self.povms.shape[0]
        self.z_size = self.povms.shape[1]

    @property
    def total_dim(self) -> int:
        return self.x_size * self.dim_work * self.dim_msg

    def state_vector(self, x: int) -> np.ndarray:
        """Global vector |x⟩|ψ_x⟩ on X ⊗ W ⊗ M."""
        vec = np.zeros(self.total_dim, dtype=np.complex128)
        block = self.dim_work * self.dim_msg
        vec[x * block:(x + 1) * block] = self.psis[x]
        return vec

    def message_marginal(self, x: int) -> DensityMatrix:
        return BipartitePureState(self.psis[x], self.dim_work, self.dim_msg).marginal_b()

    def outcome_probs(self) -> np.ndarray:
        """Exact outcome law, shape (x_size, y_size, z_size)."""
        rhos = np.stack([self.message_marginal(x).mat for x in range(self.x_size)])
        probs = np.real(np.einsum("yzab,xba->xyz", self.povms, rhos))
        return np.clip(probs, 0.0, None)

    def error_table(self, relation: Relation) -> np.ndarray:
        _check_relation(relation, self.x_size, self.y_size, self.z_size)
        probs = self.outcome_probs()
        return 1.0 - np.einsum("xyz,xyz->xy", probs, relation.accept.astype(float))

    def exact_error(self, relation: Relation, mu: JointDistribution) -> float:
        return float(np.sum(mu.table * self.error_table(relation)))


def average_state(protocol: QuantumOneWayProtocol, mu: Distribution) -> BipartitePureState:
    """Input superposition Σ_x √μ(x)|x⟩|ψ_x⟩ with cut (X ⊗ W | M)."""
    if len(mu) != protocol.x_size:
        raise ValueError("prior size does not match the protocol input set")
    amps = np.sqrt(mu.probs)
    vec = (amps[:, None] * protocol.psis).reshape(-1)
    return BipartitePureState(vec, protocol.x_size * protocol.dim_work, protocol.dim_msg)


def index_one_way(db_bits: int = 4, kept_bits: int = 2):
    """Database protocol: Alice sends the first ``kept_bits`` of x as basis
    states; Bob measures his queried bit if it was sent and guesses otherwise.

    Returns (protocol, relation, uniform product prior).  Bits are MSB-first,
    so query i < kept_bits is answered exactly and the rest err half the time.
    """
    if not 1 <= kept_bits <= db_bits:
        raise ValueError("kept_bits must be in 1..db_bits")
    nx = 1 << db_bits
    dm = 1 << kept_bits
    psis = np.zeros((nx, dm), dtype=np.complex128)
    for x in range(nx):
        psis[x, x >> (db_bits - kept_bits)] = 1.0
    povms = np.zeros((db_bits, 2, dm, dm), dtype=np.complex128)
    for i in range(db_bits):
        if i < kept_bits:
            for m in range(dm):
                povms[i, (m >> (kept_bits - 1 - i)) & 1, m, m] = 1.0
        else:
            povms[i, 0] = np.eye(dm) / 2.0
            povms[i, 1] = np.eye(dm) / 2.0
    protocol = QuantumOneWayProtocol(psis, 1, dm, povms)
    relation = Relation.index(db_bits)
    mu = JointDistribution.product(Distribution.uniform(list(range(nx))),
                                   Distribution.uniform(list(range(db_bits))))
    return protocol, relation, mu


# ---------------------------------------------------------------------------
# state correction


class Corrector:
    """Input-indexed correction maps on side A of a shared pure state.

    Side A is X ⊗ R with the first factor holding the classical input; side
    B is everything else.  ``kraus[x]`` lists operators on A implementing a
    trace-non-increasing map with three guarantees on the average state:
    the success probability equals ``alpha`` for every x, the post-success
    input register reads |x⟩, and for x in ``good`` the post-success state
    is |φ_x⟩ exactly.  Inputs outside the good set (including zero-mass
    ones) get a fallback that just swaps |x⟩ into the input register.
    """

    __slots__ = ("x_size", "dim_rest", "dim_b", "mu", "delta", "rel_ent",
                 "k_info", "threshold", "good", "weights", "alpha", "kraus",
                 "states", "average")

    def __init__(self, x_size, dim_rest, dim_b, mu, delta, rel_ent, k_info,
                 threshold, good, weights, alpha, kraus, states, average):
        self.x_size = x_size
        self.dim_rest = dim_rest
        self.dim_b = dim_b
        self.mu = mu
        self.delta = delta
        self.rel_ent = rel_ent
        self.k_info = k_info
        self.threshold = threshold
        self.good = good
        self.weights = weights
        self.alpha = alpha
        self.kraus = kraus
        self.states = states
        self.average = average

    @property
    def dim_a(self) -> int:
        return self.x_size * self.dim_rest

    def apply(self, x: int, vec: np.ndarray | None = None):
        """Success probability and normalized post-success density on A ⊗ B.

        ``vec`` defaults to the average state; it may be any unit vector on
        the same cut.
        """
        if vec is None:
            vec = self.average.vec
        mat = vec.reshape(self.dim_a, self.dim_b)
        prob = 0.0
        post = np.zeros((vec.size, vec.size), dtype=np.complex128)
        for op in self.kraus[x]:
            branch = (op @ mat).reshape(-1)
            prob += float(np.real(np.vdot(branch, branch)))
            post += np.outer(branch, branch.conj())
        if prob <= 1e-300:
            raise RuntimeError(f"correction of input {x} never succeeds on this state")
        return prob, post / prob

    def post_vector(self, x: int) -> np.ndarray:
        """Pure post-success state on the average input; defined for good x."""
        if not self.good[x]:
            raise ValueError(f"input {x} is outside the good set; its post state is mixed")
        mat = self.average.vec.reshape(self.dim_a, self.dim_b)
        branch = (self.kraus[x][0] @ mat).reshape(-1)
        return branch / np.linalg.norm(branch)

    def audit(self) -> dict:
        """Deviations from the three defining guarantees, on the average state."""
        succ_dev = 0.0
        register_dev = 0.0
        distance = 0.0
        for x in range(self.x_size):
            prob, post = self.apply(x)
            succ_dev = max(succ_dev, abs(prob - self.alpha))
            blocks = post.reshape(self.x_size, self.dim_rest * self.dim_b,
                                  self.x_size, self.dim_rest * self.dim_b)
            register_dev = max(register_dev, abs(1.0 - float(np.real(np.trace(blocks[x, :, x, :])))))
            target = np.outer(self.states[x], self.states[x].conj())
            distance += self.mu.probs[x] * trace_distance(DensityMatrix(post), DensityMatrix(target))
        return {
            "alpha": self.alpha,
            "success_deviation": succ_dev,
            "register_deviation": register_dev,
            "expected_distance": distance,
            "good_mass": float(np.sum(self.mu.probs[self.good])),
        }


def build_corrector(states, x_size: int, dim_rest: int, dim_b: int,
                    mu: Distribution, delta: float) -> Corrector:
    """Construct the correction maps for the ensemble {|φ_x⟩} under prior μ.

    ``states[x]`` is the unit vector on (X ⊗ R) ⊗ B whose input register
    holds |x⟩.  The good set keeps inputs whose B-marginal has relative
    entropy at most 4k/δ against the average (k being the ensemble's mutual
    information with side B), which carries prior mass at least 1 − δ/4.
    Good inputs are steered exactly with equalized success probability
    α = min over the good set of the substate weight; the rest fall back to
    an input-register swap with artificial success α.  Raises RuntimeError
    if α falls below 1e-12, since no simulation budget survives that.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    states = np.asarray(states, dtype=np.complex128)
    dim_a = x_size * dim_rest
    if states.shape != (x_size, dim_a * dim_b):
        raise ValueError(f"states must have shape ({x_size}, {dim_a * dim_b})")
    states = _unit_rows(states, "ensemble states")
    if len(mu) != x_size:
        raise ValueError("prior size does not match the ensemble")
    sectors = states.reshape(x_size, x_size, dim_rest * dim_b)
    for x in range(x_size):
        off = 1.0 - float(np.real(np.vdot(sectors[x, x], sectors[x, x])))
        if off > SECTOR_TOL:
            raise ValueError(f"state {x} has mass {off} outside its input sector")

    amps = np.sqrt(mu.probs)
    avg_vec = (amps[:, None] * states).sum(axis=0)
    avg_vec = avg_vec / np.linalg.norm(avg_vec)
    average = BipartitePureState(avg_vec, dim_a, dim_b)
    rho_bar = average.marginal_b()

    marginals = [BipartitePureState(states[x], dim_a, dim_b).marginal_b()
                 for x in range(x_size)]
    rel_ent = np.array([relative_entropy(marginals[x], rho_bar) for x in range(x_size)])
    mass = mu.probs > 0.0
    k_info = float(np.sum(mu.probs[mass] * rel_ent[mass]))
    if not math.isfinite(k_info):
        raise ValueError("a positive-mass input leaks outside the average support")
    k_info = max(0.0, k_info)
    threshold = 4.0 * k_info / delta
    good = mass & (rel_ent <= threshold + 1e-12)

    weights = np.full(x_size, np.nan)
    for x in np.flatnonzero(good):
        weights[x] = _substate_weight_supported(marginals[x].mat, rho_bar)
    alpha = float(np.nanmin(weights[good]))
    if alpha < ALPHA_FLOOR:
        worst = int(np.nanargmin(np.where(good, weights, np.nan)))
        raise RuntimeError(
            f"equalized success probability {alpha:.3e} underflows 1e-12 "
            f"(input {worst}: substate weight {weights[worst]:.3e}, relative "
            f"entropy {rel_ent[worst]:.3g}); the ensemble is too lopsided to correct")

    kraus: list[list[np.ndarray]] = []
    for x in range(x_size):
        if good[x]:
            steer = steering_kraus(average, marginals[x], weights[x])
            prob, post = apply_kraus_a(average, steer)
            align = uhlmann_align(post, BipartitePureState(states[x], dim_a, dim_b))
            op = math.sqrt(alpha / weights[x]) * (align.mat @ steer.mat)
            check = (op @ average.matrix()).reshape(-1)
            overlap = abs(np.vdot(states[x], check)) ** 2 / alpha
            if overlap < 1.0 - 1e-7:
                raise RuntimeError(f"steering for input {x} misses its target "
                                   f"(fidelity {overlap})")
            kraus.append([KrausOp(op).mat])
        else:
            swaps = []
            root = math.sqrt(alpha)
            for w in range(x_size):
                op = np.zeros((dim_a, dim_a), dtype=np.complex128)
                op[x * dim_rest:(x + 1) * dim_rest, w * dim_rest:(w + 1) * dim_rest] = \
                    root * np.eye(dim_rest)
                swaps.append(KrausOp(op).mat)
            kraus.append(swaps)
    return Corrector(x_size, dim_rest, dim_b, mu, delta, rel_ent, k_info,
                     threshold, good, weights, alpha, kraus, states, average)


# ---------------------------------------------------------------------------
# two-way protocols


class QuantumTwoWayProtocol:
    """Alternating unitary protocol on the register chain (X, A, M, B, Y).

    Round i (1-based) applies Alice's input-controlled unitary
    ``alice_rounds[(i-1)//2][x]`` to (A, M) when i is odd and Bob's
    ``bob_rounds[i//2 - 1][y]`` to (M, B) when i is even.  The round count
    is odd, so the last message lands with Bob, who measures ``povms[y, z]``
    on (M, B).  The input registers X, Y are never touched.
    """

    __slots__ = ("x_size", "y_size", "dim_a", "dim_msg", "dim_b",
                 "alice_rounds", "bob_rounds", "povms", "z_size")

    def __init__(self, x_size, y_size, dim_a, dim_msg, dim_b,
                 alice_rounds, bob_rounds, povms) -> None:
        self.x_size = int(x_size)
        self.y_size = int(y_size)
        self.dim_a = int(dim_a)
        self.dim_msg = int(dim_msg)
        self.dim_b = int(dim_b)
        _check_budget(self.total_dim)
        if len(alice_rounds) != len(bob_rounds) + 1:
            raise ValueError("need one more Alice round than Bob rounds "
                             "(odd total, Alice speaks first and last)")
        self.alice_rounds = [_check_unitary_stack(u, dim_a * dim_msg, f"alice_rounds[{i}]")
                             for i, u in enumerate(alice_rounds)]
        for i, u in enumerate(self.alice_rounds):
            if u.shape[0] != x_size:
                raise ValueError(f"alice_rounds[{i}] must have one unitary per x")
        self.bob_rounds = [_check_unitary_stack(v, dim_msg * dim_b, f"bob_rounds[{i}]")
                           for i, v in enumerate(bob_rounds)]
        for i, v in enumerate(self.bob_rounds):
            if v.shape[0] != y_size:
                raise ValueError(f"bob_rounds[{i}] must have one unitary per y")
        self.povms = _check_povm_stack(povms, dim_msg * dim_b, "povms")
        if self.povms.shape[0] != y_size:
            raise ValueError("povms must have one measurement per y")
        self.z_size = self.povms.shape[1]

    @property
    def rounds(self) -> int:
        return len(self.alice_rounds) + len(self.bob_rounds)

    @property
    def total_dim(self) -> int:
        return self.x_size * self.dim_a * self.dim_msg * self.dim_b * self.y_size

    def speaker(self, i: int) -> str:
        if not 1 <= i <= self.rounds:
            raise ValueError(f"round index {i} out of range 1..{self.rounds}")
        return "alice" if i % 2 == 1 else "bob"

    def run(self, x: int, y: int, upto: int | None = None) -> np.ndarray:
        """State vector on A ⊗ M ⊗ B after round ``upto`` (default: all)."""
        upto = self.rounds if upto is None else upto
        if not 0 <= upto <= self.rounds:
            raise ValueError(f"round index {upto} out of range 0..{self.rounds}")
        vec = np.zeros(self.dim_a * self.dim_msg * self.dim_b, dtype=np.complex128)
        vec[0] = 1.0
        for i in range(1, upto + 1):
            if i % 2 == 1:
                u = self.alice_rounds[(i - 1) // 2][x]
                vec = (u @ vec.reshape(self.dim_a * self.dim_msg, self.dim_b)).reshape(-1)
            else:
                v = self.bob_rounds[i // 2 - 1][y]
                vec = (vec.reshape(self.dim_a, self.dim_msg * self.dim_b) @ v.T).reshape(-1)
        return vec

    def outcome_probs(self) -> np.ndarray:
        """Exact outcome law, shape (x_size, y_size, z_size)."""
        probs = np.zeros((self.x_size, self.y_size, self.z_size))
        for x in range(self.x_size):
            for y in range(self.y_size):
                vec = self.run(x, y)
                mb = partial_trace_slots(np.outer(vec, vec.conj()),
                                         (self.dim_a, self.dim_msg * self.dim_b), (1,))
                probs[x, y] = np.clip(np.real(np.einsum("zab,ba->z", self.povms[y], mb)), 0.0, None)
        return probs

    def error_table(self, relation: Relation) -> np.ndarray:
        _check_relation(relation, self.x_size, self.y_size, self.z_size)
        probs = self.outcome_probs()
        return 1.0 - np.einsum("xyz,xyz->xy", probs, relation.accept.astype(float))

    def exact_error(self, relation: Relation, mu: JointDistribution) -> float:
        return float(np.sum(mu.table * self.error_table(relation)))

    def qubits_per_round(self) -> int:
        return max(1, math.ceil(math.log2(self.dim_msg)))


# global cut states -----------------------------------------------------------


class CutStates(NamedTuple):
    """Pure states at a cut, on the full chain (X, A, M, B, Y)."""
    dims: tuple
    psi: np.ndarray       # (nx, ny, da*dm*db) conditional inner states
    sigma: np.ndarray     # (N,) input-superposed average
    sigma_x: np.ndarray   # (nx, N) conditionals given x
    sigma_y: np.ndarray   # (ny, N) conditionals given y


def cut_states(protocol: QuantumTwoWayProtocol, mu: JointDistribution,
               t_prime: int) -> CutStates:
    """States after round ``t_prime`` with inputs held in superposed registers.

    Requires a product prior (the X and Y registers are loaded with
    independent amplitudes √μ) and an odd cut so the message sits with Bob.
    """
    if t_prime % 2 == 0 or not 1 <= t_prime <= protocol.rounds:
        raise ValueError("the cut must come right after an Alice round")
    if not mu.is_product(1e-10):
        raise ValueError("cut states need a product prior")
    nx, ny = protocol.x_size, protocol.y_size
    da, dm, db = protocol.dim_a, protocol.dim_msg, protocol.dim_b
    dims = (nx, da, dm, db, ny)
    inner = da * dm * db
    px = mu.marginal_x().probs
    py = mu.marginal_y().probs
    psi = np.zeros((nx, ny, inner), dtype=np.complex128)
    for x in range(nx):
        for y in range(ny):
            psi[x, y] = protocol.run(x, y, upto=t_prime)
    ax = np.sqrt(px)
    ay = np.sqrt(py)
    # sigma_x[x] = |x⟩ ⊗ Σ_y √μ_Y(y) ψ_xy ⊗ |y⟩, and sigma = Σ_x √μ_X(x) σ_x
    sigma_x = np.zeros((nx, nx * inner * ny), dtype=np.complex128)
    sigma_y = np.zeros((ny, nx * inner * ny), dtype=np.complex128)
    block = psi.transpose(0, 2, 1)  # (nx, inner, ny)
    for x in range(nx):
        sigma_x[x].reshape(nx, inner, ny)[x] = block[x] * ay[None, :]
    for y in range(ny):
        sigma_y[y].reshape(nx, inner, ny)[:, :, y] = ax[:, None] * psi[:, y, :]
    sigma = (ax[:, None] * sigma_x).sum(axis=0)
    return CutStates(dims, psi, sigma, sigma_x, sigma_y)


def _apply_alice_side(vec: np.ndarray, dims, op: np.ndarray) -> np.ndarray:
    """Apply an operator on (X, A) to a vector on the full chain."""
    nx, da = dims[0], dims[1]
    rest = vec.size // (nx * da)
    return (op @ vec.reshape(nx * da, rest)).reshape(-1)


def _apply_bob_side(vec: np.ndarray, dims, op: np.ndarray) -> np.ndarray:
    """Apply an operator on (Y, M, B) — grouped in that order — to the chain."""
    nx, da, dm, db, ny = dims
    v = vec.reshape(dims).transpose(4, 2, 3, 0, 1).reshape(ny * dm * db, nx * da)
    v = op @ v
    return v.reshape(ny, dm, db, nx, da).transpose(3, 4, 1, 2, 0).reshape(-1)


# privacy ---------------------------------------------------------------------


def quantum_privacy_loss(protocol: QuantumTwoWayProtocol, mu: JointDistribution,
                         round_index: int) -> float:
    """I(X : Bob's registers) after ``round_index`` rounds, in bits.

    X is drawn from μ_X while Bob runs honestly on the coherent input
    Σ_y √μ_Y(y)|y⟩, so his unitaries act as Y-controlled blocks.  Bob's cut
    is (M, B, Y) right after an Alice round and (B, Y) otherwise;
    round_index 0 means nothing has been sent and the loss is zero.
    """
    if not 0 <= round_index <= protocol.rounds:
        raise ValueError(f"round index {round_index} out of range 0..{protocol.rounds}")
    if not mu.is_product(1e-10):
        raise ValueError("the coherent-input semantics needs a product prior")
    px = mu.marginal_x().probs
    py = mu.marginal_y().probs
    da, dm, db, ny = protocol.dim_a, protocol.dim_msg, protocol.dim_b, protocol.y_size
    dims = (da, dm, db, ny)
    if round_index == 0 or protocol.speaker(round_index) == "bob":
        keep = (2, 3)
    else:
        keep = (1, 2, 3)
    mixture = None
    conditional_entropy = 0.0
    for x in np.flatnonzero(px > 0):
        vec = np.zeros(dims, dtype=np.complex128)
        vec[0, 0, 0, :] = np.sqrt(py)
        vec = vec.reshape(-1)
        for i in range(1, round_index + 1):
            if i % 2 == 1:
                u = protocol.alice_rounds[(i - 1) // 2][x]
                vec = (u @ vec.reshape(da * dm, db * ny)).reshape(-1)
            else:
                stack = protocol.bob_rounds[i // 2 - 1]
                v = vec.reshape(da, dm * db, ny)
                vec = np.stack([v[:, :, y] @ stack[y].T for y in range(ny)], axis=2).reshape(-1)
        rho = partial_trace_slots(np.outer(vec, vec.conj()), dims, keep)
        conditional_entropy += px[x] * von_neumann_entropy(DensityMatrix(rho))
        mixture = px[x] * rho if mixture is None else mixture + px[x] * rho
    value = von_neumann_entropy(DensityMatrix(mixture)) - conditional_entropy
    return max(0.0, float(value))


# demo protocol factories -----------------------------------------------------


def _bitflip_perm(dim: int, mask: int) -> np.ndarray:
    mat = np.zeros((dim, dim))
    mat[np.arange(dim) ^ mask, np.arange(dim)] = 1.0
    return mat


def verbatim_two_way(n_bits: int):
    """One round in which Alice simply sends her n-bit input as basis states."""
    nx = 1 << n_bits
    alice = np.stack([_bitflip_perm(nx, x) for x in range(nx)])
    povms = np.zeros((1, nx, nx, nx), dtype=np.complex128)
    for z in range(nx):
        povms[0, z, z, z] = 1.0
    protocol = QuantumTwoWayProtocol(nx, 1, 1, nx, 1, [alice], [], povms)
    relation = Relation.from_predicate(nx, 1, nx, lambda x, y, z: z == x)
    mu = JointDistribution.product(Distribution.uniform(list(range(nx))),
                                   Distribution([0], [1.0]))
    return protocol, relation, mu


def _hadamard(n_bits: int) -> np.ndarray:
    dim = 1 << n_bits
    m = np.arange(dim)
    signs = np.array([bin(i).count("1") for i in (m[:, None] & m[None, :]).reshape(-1)])
    return ((-1.0) ** signs).reshape(dim, dim) / math.sqrt(dim)


def inner_product_two_way(n_bits: int):
    """Three rounds computing x·y mod 2 into Bob's answer qubit.

    Alice sends the phase state H|x⟩; Bob rotates to the computational
    basis, writes m·y into his qubit, rotates back, and returns the message;
    the final Alice round is the identity.  Honest runs are exact, while a
    coherent-input Bob keeps a copy of the answer per branch of |μ_Y⟩.
    """
    nx = 1 << n_bits
    dm = nx
    had = _hadamard(n_bits)
    alice1 = np.stack([had @ _bitflip_perm(dm, x) for x in range(nx)])
    bob = np.zeros((nx, dm * 2, dm * 2))
    h2 = np.kron(had, np.eye(2))
    for y in range(nx):
        c = np.zeros((dm * 2, dm * 2))
        for m in range(dm):
            bit = bin(m & y).count("1") % 2
            c[2 * m + bit, 2 * m] = 1.0
            c[2 * m + (1 - bit), 2 * m + 1] = 1.0
        bob[y] = h2 @ c @ h2
    alice2 = np.stack([np.eye(dm) for _ in range(nx)])
    povms = np.zeros((nx, 2, dm * 2, dm * 2), dtype=np.complex128)
    for y in range(nx):
        for m in range(dm):
            for b in range(2):
                povms[y, b, 2 * m + b, 2 * m + b] = 1.0
    protocol = QuantumTwoWayProtocol(nx, nx, 1, dm, 2, [alice1, alice2], [bob], povms)
    relation = Relation.from_predicate(
        nx, nx, 2, lambda x, y, z: z == bin(x & y).count("1") % 2)
    mu = JointDistribution.product(Distribution.uniform(list(range(nx))),
                                   Distribution.uniform(list(range(nx))))
    return protocol, relation, mu


def forward_two_way():
    """Minimal one-round instance: Alice sends one bit, Bob reads it."""
    alice = np.stack([np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])])
    povms = np.zeros((1, 2, 2, 2), dtype=np.complex128)
    povms[0, 0, 0, 0] = 1.0
    povms[0, 1, 1, 1] = 1.0
    protocol = QuantumTwoWayProtocol(2, 1, 1, 2, 1, [alice], [], povms)
    relation = Relation.from_predicate(2, 1, 2, lambda x, y, z: z == x)
    mu = JointDistribution.product(Distribution.uniform([0, 1]), Distribution([0], [1.0]))
    return protocol, relation, mu


def parity_two_way():
    """Three-round instance mixing both inputs into the message.

    Alice's bits (x₁, x₂) and Bob's bit y end with Bob holding
    M = x₁⊕x₂⊕y and B = x₁; the relation asks for exactly that pair, so the
    protocol is exact and the cut states at rounds 1 and 3 differ.
    """
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    cnot_mb = np.zeros((4, 4))  # |m, b⟩ -> |m, b ⊕ m⟩
    for m in range(2):
        for b in range(2):
            cnot_mb[2 * m + (b ^ m), 2 * m + b] = 1.0
    cnot_ma = np.zeros((4, 4))  # |a, m⟩ -> |a ⊕ m, m⟩
    for a in range(2):
        for m in range(2):
            cnot_ma[2 * (a ^ m) + m, 2 * a + m] = 1.0
    alice1 = np.stack([np.kron(np.eye(2), np.linalg.matrix_power(flip, (x >> 1) & 1))
                       for x in range(4)])
    bob1 = np.stack([np.kron(np.linalg.matrix_power(flip, y), np.eye(2)) @ cnot_mb
                     for y in range(2)])
    alice2 = np.stack([np.kron(np.eye(2), np.linalg.matrix_power(flip, x & 1)) @ cnot_ma
                       for x in range(4)])
    povms = np.zeros((2, 4, 4, 4), dtype=np.complex128)
    for y in range(2):
        for z in range(4):
            povms[y, z, z, z] = 1.0
    protocol = QuantumTwoWayProtocol(4, 2, 2, 2, 2, [alice1, alice2], [bob1], povms)
    relation = Relation.from_predicate(
        4, 2, 4, lambda x, y, z: z == 2 * (((x >> 1) & 1) ^ (x & 1) ^ y) + ((x >> 1) & 1))
    mu = JointDistribution.product(Distribution.uniform(list(range(4))),
                                   Distribution.uniform([0, 1]))
    return protocol, relation, mu


# ---------------------------------------------------------------------------
# one-way compression


class CompressedQuantumOneWay:
    """Entanglement-assisted simulation of a one-way protocol.

    The parties share ``copies`` copies of the average state; Alice applies
    her corrector to each and sends the index of the first success in
    ``beta_bits`` = ⌈log₂ copies⌉ bits (or an abort flag).  Bob measures the
    named copy with the untouched original POVM, so good inputs decode with
    exactly the original error.
    """

    __slots__ = ("base", "relation", "mu", "delta", "corrector", "copies",
                 "beta_bits", "alpha", "abort_prob", "err_table", "base_table")

    def __init__(self, base, relation, mu, delta, corrector, copies,
                 beta_bits, abort_prob, err_table, base_table):
        self.base = base
        self.relation = relation
        self.mu = mu
        self.delta = delta
        self.corrector = corrector
        self.copies = copies
        self.beta_bits = beta_bits
        self.alpha = corrector.alpha
        self.abort_prob = abort_prob
        self.err_table = err_table
        self.base_table = base_table

    def law_error(self) -> float:
        """Exact simulation error, counting aborts as errors."""
        cond = float(np.sum(self.mu.table * self.err_table))
        return self.abort_prob + (1.0 - self.abort_prob) * cond


def compress_one_way(protocol: QuantumOneWayProtocol, relation: Relation,
                     mu: JointDistribution, delta: float) -> CompressedQuantumOneWay:
    """Compress a one-way protocol to ⌈log₂⌈α⁻¹ log₂(2/δ)⌉⌉ classical bits.

    The corrector is built at δ/2 so that correction distance and the abort
    probability (1−α)^copies each stay within δ/2, keeping the total error
    within ε + δ.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    nx = protocol.x_size
    if mu.table.shape != (nx, protocol.y_size):
        raise ValueError("prior shape does not match the protocol")
    base_table = protocol.error_table(relation)
    states = np.stack([protocol.state_vector(x) for x in range(nx)])
    corrector = build_corrector(states, nx, protocol.dim_work, protocol.dim_msg,
                                mu.marginal_x(), delta / 2.0)
    copies = math.ceil(math.log2(2.0 / delta) / corrector.alpha)
    beta_bits = max(1, math.ceil(math.log2(copies)))
    abort_prob = (1.0 - corrector.alpha) ** copies
    if abort_prob > delta / 2.0 + 1e-12:
        raise AssertionError(f"copy block too short: abort probability {abort_prob}")
    err_table = np.array(base_table)
    for x in np.flatnonzero(~corrector.good):
        _, post = corrector.apply(x)
        msg = partial_trace_slots(post, (nx * protocol.dim_work, protocol.dim_msg), (1,))
        probs = np.clip(np.real(np.einsum("yzab,ba->yz", protocol.povms, msg)), 0.0, None)
        err_table[x] = 1.0 - np.einsum("yz,yz->y", probs,
                                       relation.accept[x].astype(float))
    return CompressedQuantumOneWay(protocol, relation, mu, delta, corrector,
                                   copies, beta_bits, abort_prob, err_table, base_table)


# ---------------------------------------------------------------------------
# multiround compression


def _binom_pmf(n: int, p: float) -> np.ndarray:
    if p <= 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p >= 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    s = np.arange(n + 1)
    logc = (math.lgamma(n + 1) - np.array([math.lgamma(k + 1) + math.lgamma(n - k + 1)
                                           for k in s]))
    logp = logc + s * math.log(p) + (n - s) * math.log1p(-p)
    pmf = np.exp(logp)
    return pmf / pmf.sum()


class CompressedTwoWay:
    """Round-block compression of a multiround protocol at an odd cut.

    The parties share K copies of the cut's average state.  Bob's corrector
    (built first, at δ_b = (δ/10)²) has equalized success β; Alice's, at
    δ_a = δ_b·β/2, has success α.  Alice corrects every copy and announces
    her success set Ŝ — aborting if it exceeds ⌈2αK⌉, twice its mean — and
    Bob answers with his first success inside Ŝ; the remaining rounds then
    run on that copy.  On good input pairs both corrections are exact, the
    joint per-copy success is exactly αβ, and the resumed error equals the
    original one.
    """

    __slots__ = ("base", "relation", "mu", "t_prime", "delta", "delta_b",
                 "delta_a", "bob", "alice", "alpha", "beta", "r_table",
                 "r_mean", "K", "cap", "word_bits", "pmf", "alice_abort",
                 "bob_fail", "err_table", "good_pair_fidelity", "dims")

    def __init__(self, **kw):
        for key in self.__slots__:
            setattr(self, key, kw[key])

    def claim_ratio(self) -> float:
        """Average joint success over αβ; 1 exactly when every pair is good."""
        return self.r_mean / (self.alpha * self.beta)

    def claim_tail_mass(self, threshold: float | None = None) -> float:
        """Prior mass of pairs whose joint success deviates from the mean."""
        if threshold is None:
            threshold = 2.0 * math.sqrt(self.delta_b)
        dev = np.abs(self.r_table / self.r_mean - 1.0)
        return float(np.sum(self.mu.table[dev >= threshold]))

    def law_error(self) -> float:
        """Exact simulation error, counting every abort as an error."""
        err = 0.0
        s = np.arange(self.cap + 1)
        head = self.pmf[:self.cap + 1]
        for x in range(self.mu.table.shape[0]):
            for y in range(self.mu.table.shape[1]):
                w = self.mu.table[x, y]
                if w <= 0.0:
                    continue
                q = 1.0 - self.r_table[x, y] / self.alpha
                fail = float(head @ np.power(q, s))
                hit = float(head.sum()) - fail
                err += w * (self.alice_abort + fail + hit * self.err_table[x, y])
        return err

    def abort_rate_law(self) -> float:
        """Probability that either side gives up, averaged over the prior."""
        rate = 0.0
        s = np.arange(self.cap + 1)
        head = self.pmf[:self.cap + 1]
        for x in range(self.mu.table.shape[0]):
            for y in range(self.mu.table.shape[1]):
                w = self.mu.table[x, y]
                if w <= 0.0:
                    continue
                q = 1.0 - self.r_table[x, y] / self.alpha
                rate += w * (self.alice_abort + float(head @ np.power(q, s)))
        return rate

    def expected_bits_law(self) -> float:
        """Mean classical communication: Ŝ as fixed-width indices plus the reply."""
        head = self.pmf[:self.cap + 1]
        mean_s = float(np.arange(self.cap + 1) @ head)
        live = float(head.sum())
        return (mean_s + live) * self.word_bits + (1.0 - live) * 1.0


def compress_multiround_quantum(protocol: QuantumTwoWayProtocol, relation: Relation,
                                mu: JointDistribution, t_prime: int,
                                delta: float) -> CompressedTwoWay:
    """Compress the first ``t_prime`` rounds against shared average states."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    _check_relation(relation, protocol.x_size, protocol.y_size, protocol.z_size)
    if mu.table.shape != (protocol.x_size, protocol.y_size):
        raise ValueError("prior shape does not match the protocol")
    cut = cut_states(protocol, mu, t_prime)
    nx, da, dm, db, ny = cut.dims
    delta_b = (delta / 10.0) ** 2

    perm = lambda v: v.reshape(cut.dims).transpose(4, 2, 3, 0, 1).reshape(-1)
    bob_states = np.stack([perm(cut.sigma_y[y]) for y in range(ny)])
    bob = build_corrector(bob_states, ny, dm * db, nx * da, mu.marginal_y(), delta_b)
    beta = bob.alpha
    delta_a = delta_b * beta / 2.0
    alice = build_corrector(cut.sigma_x, nx, da, dm * db * ny, mu.marginal_x(), delta_a)
    alpha = alice.alpha

    inner = da * dm * db
    r_table = np.zeros((nx, ny))
    err_table = np.zeros((nx, ny))
    fid = []
    for x in range(nx):
        for y in range(ny):
            r = 0.0
            block = np.zeros((inner, inner), dtype=np.complex128)
            for a_op in alice.kraus[x]:
                mid = _apply_alice_side(cut.sigma, cut.dims, a_op)
                for b_op in bob.kraus[y]:
                    vec = _apply_bob_side(mid, cut.dims, b_op)
                    r += float(np.real(np.vdot(vec, vec)))
                    piece = vec.reshape(cut.dims)[x, :, :, :, y].reshape(-1)
                    block += np.outer(piece, piece.conj())
            r_table[x, y] = r
            sector = float(np.real(np.trace(block)))
            if abs(sector - r) > 1e-9 * max(r, 1.0):
                raise AssertionError(f"corrected state for pair {(x, y)} leaks "
                                     f"outside its input sector")
            block /= r
            if alice.good[x] and bob.good[y]:
                fid.append(float(np.real(cut.psi[x, y].conj() @ block @ cut.psi[x, y])))
            for i in range(t_prime + 1, protocol.rounds + 1):
                if i % 2 == 1:
                    w = np.kron(protocol.alice_rounds[(i - 1) // 2][x], np.eye(db))
                else:
                    w = np.kron(np.eye(da), protocol.bob_rounds[i // 2 - 1][y])
                block = w @ block @ w.conj().T
            mb = partial_trace_slots(block, (da, dm * db), (1,))
            probs = np.clip(np.real(np.einsum("zab,ba->z", protocol.povms[y], mb)), 0.0, None)
            err_table[x, y] = 1.0 - float(probs @ relation.accept[x, y].astype(float))

    r_mean = float(np.sum(mu.table * r_table))
    K = math.ceil((10.0 / r_mean) * math.log2(1.0 / delta))
    if K > 10 ** 7:
        raise RuntimeError(f"copy count {K} is beyond any simulation budget")
    cap = min(K, math.ceil(2.0 * alpha * K - 1e-9))
    pmf = _binom_pmf(K, alpha)
    alice_abort = float(pmf[cap + 1:].sum())
    word_bits = max(1, math.ceil(math.log2(K)))
    head = pmf[:cap + 1]
    s = np.arange(cap + 1)
    bob_fail = np.zeros((nx, ny))
    for x in range(nx):
        for y in range(ny):
            q = 1.0 - r_table[x, y] / alpha
            bob_fail[x, y] = float(head @ np.power(q, s))
    return CompressedTwoWay(
        base=protocol, relation=relation, mu=mu, t_prime=t_prime, delta=delta,
        delta_b=delta_b, delta_a=delta_a, bob=bob, alice=alice, alpha=alpha,
        beta=beta, r_table=r_table, r_mean=r_mean, K=K, cap=cap,
        word_bits=word_bits, pmf=pmf, alice_abort=alice_abort, bob_fail=bob_fail,
        err_table=err_table,
        good_pair_fidelity=float(min(fid)) if fid else float("nan"), dims=cut.dims)


# ---------------------------------------------------------------------------
# seeded evaluation


def _mc_from_outcomes(probs: np.ndarray, relation: Relation, mu: JointDistribution,
                      trials: int, seed: int, bits: float, mode: str,
                      exact: float) -> EvalResult:
    u = trial_uniforms(seed, trials, width=4)
    x, y = _sample_joint(mu, u[:, 0])
    cdf = np.cumsum(probs, axis=2)
    cdf[:, :, -1] = 1.0
    z = (u[:, 1][:, None] > cdf[x, y]).sum(axis=1)
    z = np.minimum(z, probs.shape[2] - 1)
    correct = relation.accept[x, y, z]
    return EvalResult(
        error=float(1.0 - correct.mean()),
        expected_bits=bits,
        bits_distribution=Distribution([bits], [1.0]),
        exact_error=exact,
        expected_bits_log2=math.log2(bits) if bits > 0 else -math.inf,
        abort_rate=0.0,
        mode=mode)


def _mc_compressed_one_way(comp: CompressedQuantumOneWay, trials: int,
                           seed: int) -> EvalResult:
    u = trial_uniforms(seed, trials, width=4)
    x, y = _sample_joint(comp.mu, u[:, 0])
    abort = u[:, 1] < comp.abort_prob
    err = abort | (u[:, 2] < comp.err_table[x, y])
    bits = float(comp.beta_bits)
    return EvalResult(
        error=float(err.mean()),
        expected_bits=bits,
        bits_distribution=Distribution([bits], [1.0]),
        exact_error=comp.law_error(),
        expected_bits_log2=math.log2(bits),
        abort_rate=float(abort.mean()),
        mode="compressed-oneway-quantum-mc")


def _mc_compressed_two_way(comp: CompressedTwoWay, trials: int,
                           seed: int) -> EvalResult:
    u = trial_uniforms(seed, trials, width=6)
    x, y = _sample_joint(comp.mu, u[:, 0])
    cdf = np.cumsum(comp.pmf)
    cdf[-1] = 1.0
    s = np.searchsorted(cdf, u[:, 1], side="right")
    over = s > comp.cap
    q = 1.0 - comp.r_table[x, y] / comp.alpha
    with np.errstate(invalid="ignore"):
        fail = ~over & (u[:, 2] < np.power(q, s.astype(float)))
    live = ~over & ~fail
    err = over | fail | (live & (u[:, 3] < comp.err_table[x, y]))
    bits = np.where(over, 1.0, (s + 1.0) * comp.word_bits)
    labels, counts = np.unique(bits, return_counts=True)
    return EvalResult(
        error=float(err.mean()),
        expected_bits=float(bits.mean()),
        bits_distribution=Distribution(list(labels), counts / trials),
        exact_error=comp.law_error(),
        expected_bits_log2=math.log2(float(bits.mean())),
        abort_rate=float((over | fail).mean()),
        mode="compressed-twoway-mc")


def evaluate_quantum(obj, relation: Relation | None = None,
                     mu: JointDistribution | None = None, *,
                     trials: int, seed: int) -> EvalResult:
    """Seeded Monte Carlo evaluation with the exact error attached.

    Base protocols need ``relation`` and ``mu``; compressed artifacts carry
    their own and reject explicit ones.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(obj, (CompressedQuantumOneWay, CompressedTwoWay)):
        if relation is not None or mu is not None:
            raise ValueError("compressed artifacts carry their own relation and prior")
        if isinstance(obj, CompressedQuantumOneWay):
            return _mc_compressed_one_way(obj, trials, seed)
        return _mc_compressed_two_way(obj, trials, seed)
    if relation is None or mu is None:
        raise ValueError("base protocols need an explicit relation and prior")
    if isinstance(obj, QuantumOneWayProtocol):
        bits = float(max(1, math.ceil(math.log2(obj.dim_msg))))
        return _mc_from_outcomes(obj.outcome_probs(), relation, mu, trials, seed,
                                 bits, "quantum-oneway-mc",
                                 obj.exact_error(relation, mu))
    if isinstance(obj, QuantumTwoWayProtocol):
        bits = float(obj.rounds * obj.qubits_per_round())
        return _mc_from_outcomes(obj.outcome_probs(), relation, mu, trials, seed,
                                 bits, "quantum-twoway-mc",
                                 obj.exact_error(relation, mu))
    raise TypeError("unsupported protocol object")


# ---------------------------------------------------------------------------
# trade-off demo


def index_tradeoff_demo(db_bits: int, b: float):
    """(k_a, k_b, correctness) of the grouped classical database protocol.

    Bob reveals b bits naming his query's group; Alice returns that group's
    block, so the answer is always exact and correctness is 1.
    """
    k_a, k_b = index_tradeoff_privacy(db_bits, b)
    return k_a, k_b, 1.0
