"""Dense quantum-information primitives on small Hilbert spaces.

Everything here is explicit linear algebra on numpy arrays: density
matrices, bipartite pure states, partial traces, purifications, Schmidt
decompositions, substate weights and the steering operators built from
them.  All entropies and logarithms are base 2.  Matrices are validated
on construction and frozen (read-only buffers), so values can be shared
across threads.

Dimension budget: operations are dense and intended for total dimension
up to 2**14 (see :func:`dim_budget`); nothing here is sparse or clever.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "DensityMatrix",
    "BipartitePureState",
    "KrausOp",
    "dim_budget",
    "von_neumann_entropy",
    "relative_entropy",
    "mutual_information",
    "partial_trace",
    "partial_trace_slots",
    "purify",
    "canonical_purification",
    "schmidt",
    "entanglement_amount",
    "schmidt_truncate",
    "max_substate_weight",
    "steering_kraus",
    "uhlmann_align",
    "apply_kraus_a",
    "trace_distance",
    "fidelity",
    "state_fidelity",
    "haar_unitary",
    "random_pure_state",
    "random_density_matrix",
]

# Construction tolerances.  These are deliberately tight: states produced
# by composing unitaries/Kraus maps at these dimensions stay well inside.
HERM_TOL = 1e-8
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
KRAUS_TOL = 1e-10
# Eigenvalues below this are treated as exact zeros (support cutoffs).
SUPPORT_CUTOFF = 1e-12
# Eigenvalues below this are dropped from entropy sums.
ENTROPY_CUTOFF = 1e-14

_DEFAULT_DIM_BUDGET = 2 ** 14


def dim_budget() -> int:
    """Largest total Hilbert-space dimension accepted by constructors.

    Reads ``COMMLAB_DIM_BUDGET`` from the environment, defaulting to 2**14.
    """
    raw = os.environ.get("COMMLAB_DIM_BUDGET", "")
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"COMMLAB_DIM_BUDGET must be an integer, got {raw!r}") from exc
        if value < 2:
            raise ValueError("COMMLAB_DIM_BUDGET must be at least 2")
        return value
    return _DEFAULT_DIM_BUDGET


def _check_budget(dim: int) -> None:
    budget = dim_budget()
    if dim > budget:
        raise ValueError(f"dimension {dim} exceeds budget {budget} (COMMLAB_DIM_BUDGET)")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class DensityMatrix:
    """Hermitian, PSD, trace-one operator.

    The input is symmetrized via (M + M†)/2; if that correction moves any
    entry by more than 1e-8 the input is rejected rather than repaired.
    """

    __slots__ = ("mat", "dim")

    def __init__(self, mat) -> None:
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        _check_budget(mat.shape[0])
        sym = (mat + mat.conj().T) / 2.0
        if np.max(np.abs(sym - mat)) > HERM_TOL:
            raise ValueError("matrix is not Hermitian within 1e-8")
        tr = np.real(np.trace(sym))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr}, not 1 within 1e-10")
        eigs = np.linalg.eigvalsh(sym)
        if eigs[0] < -PSD_TOL:
            raise ValueError(f"matrix has negative eigenvalue {eigs[0]}")
        self.mat = _freeze(sym)
        self.dim = sym.shape[0]

    def eigh(self):
        """Eigenvalues (ascending) and eigenvectors of the matrix."""
        return np.linalg.eigh(self.mat)

    def __repr__(self) -> str:  # pragma: no cover
        return f"DensityMatrix(dim={self.dim})"


class BipartitePureState:
    """Unit vector on A ⊗ B with declared cut (dim_a, dim_b).

    ``vec`` is indexed as vec[a * dim_b + b].  The amplitude matrix
    C = vec.reshape(dim_a, dim_b) gives the marginals as
    ρ_A = C C† and ρ_B = (C† C)ᵀ.
    """

    __slots__ = ("vec", "dim_a", "dim_b")

    def __init__(self, vec, dim_a: int, dim_b: int) -> None:
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        if dim_a < 1 or dim_b < 1 or vec.size != dim_a * dim_b:
            raise ValueError(
                f"vector of length {vec.size} does not match cut {dim_a}x{dim_b}"
            )
        _check_budget(dim_a * dim_b)
        nrm2 = float(np.real(np.vdot(vec, vec)))
        if abs(nrm2 - 1.0) > NORM_TOL:
            raise ValueError(f"squared norm is {nrm2}, not 1 within 1e-12")
        self.vec = _freeze(vec / np.sqrt(nrm2))
        self.dim_a = int(dim_a)
        self.dim_b = int(dim_b)

    def matrix(self) -> np.ndarray:
        """Amplitude matrix of shape (dim_a, dim_b)."""
        return self.vec.reshape(self.dim_a, self.dim_b)

    def density(self) -> np.ndarray:
        return np.outer(self.vec, self.vec.conj())

    def marginal_a(self) -> DensityMatrix:
        c = self.matrix()
        return DensityMatrix(c @ c.conj().T)

    def marginal_b(self) -> DensityMatrix:
        c = self.matrix()
        return DensityMatrix((c.conj().T @ c).T)

    def __repr__(self) -> str:  # pragma: no cover
        return f"BipartitePureState(dim_a={self.dim_a}, dim_b={self.dim_b})"


class KrausOp:
    """Single Kraus operator M with M†M ≤ I (within 1e-10)."""

    __slots__ = ("mat", "dim")

    def __init__(self, mat) -> None:
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"Kraus operator must be square, got shape {mat.shape}")
        gram = mat.conj().T @ mat
        excess = np.linalg.eigvalsh(gram)[-1] - 1.0
        if excess > KRAUS_TOL:
            raise ValueError(f"M†M exceeds identity by {excess}")
        self.mat = _freeze(mat)
        self.dim = mat.shape[0]

    def __repr__(self) -> str:  # pragma: no cover
        return f"KrausOp(dim={self.dim})"


# ---------------------------------------------------------------------------
# entropies


def _spectrum(mat: np.ndarray) -> np.ndarray:
    eigs = np.linalg.eigvalsh(mat)
    return eigs[eigs > ENTROPY_CUTOFF]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(ρ) = −Tr ρ log₂ ρ, ignoring eigenvalues below 1e-14."""
    lam = _spectrum(rho.mat)
    return float(-np.sum(lam * np.log2(lam)))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ); +inf if supp(ρ) ⊄ supp(σ)."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    lam_r, vec_r = rho.eigh()
    lam_s, vec_s = sigma.eigh()
    keep_r = lam_r > ENTROPY_CUTOFF
    out_s = lam_s <= SUPPORT_CUTOFF
    if np.any(out_s):
        # mass of rho outside the support of sigma
        proj = vec_s[:, out_s]
        leak = float(np.real(np.sum((proj.conj().T @ rho.mat) * proj.T)))
        if leak > 1e-10:
            return float("inf")
    lr = lam_r[keep_r]
    vr = vec_r[:, keep_r]
    term1 = float(np.sum(lr * np.log2(lr)))
    in_s = lam_s > SUPPORT_CUTOFF
    overlap = np.abs(vr.conj().T @ vec_s[:, in_s]) ** 2  # |<r_i|s_j>|^2
    term2 = float(lr @ overlap @ np.log2(lam_s[in_s]))
    return term1 - term2


def partial_trace_slots(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace of a square matrix over tensor slots not in ``keep``.

    ``dims`` is the list of factor dimensions; ``keep`` the slot indices
    retained, in their original order.
    """
    dims = list(dims)
    keep = sorted(keep)
    n = len(dims)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError("matrix shape does not match dims")
    t = mat.reshape(dims + dims)
    # trace out dropped slots from the back so earlier axis numbers stay valid
    dropped = [i for i in range(n) if i not in keep]
    for i in sorted(dropped, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    kept = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(kept, kept)


def partial_trace(state, keep: str, dims=None) -> DensityMatrix:
    """Reduced state on side ``keep`` ("A" or "B") of a bipartite state.

    For a :class:`DensityMatrix` the cut must be supplied as
    ``dims=(dim_a, dim_b)``; a :class:`BipartitePureState` carries its own.
    """
    if keep not in ("A", "B"):
        raise ValueError("keep must be 'A' or 'B'")
    if isinstance(state, BipartitePureState):
        return state.marginal_a() if keep == "A" else state.marginal_b()
    if isinstance(state, DensityMatrix):
        if dims is None:
            raise ValueError("partial_trace of a DensityMatrix needs dims=(dim_a, dim_b)")
        da, db = dims
        if da * db != state.dim:
            raise ValueError("dims do not multiply to the state dimension")
        kept = partial_trace_slots(state.mat, [da, db], [0 if keep == "A" else 1])
        return DensityMatrix(kept)
    raise TypeError(f"unsupported state type {type(state)!r}")


def mutual_information(rho: DensityMatrix, dims_a, dims_b) -> float:
    """I(A:B) = S(A) + S(B) − S(AB) for the declared contiguous cut.

    ``dims_a`` and ``dims_b`` may be ints or iterables of factor dims; the
    A factors come first in the tensor order.
    """
    da = int(np.prod(dims_a)) if np.iterable(dims_a) else int(dims_a)
    db = int(np.prod(dims_b)) if np.iterable(dims_b) else int(dims_b)
    if da * db != rho.dim:
        raise ValueError("cut dims do not multiply to the state dimension")
    rho_a = partial_trace(rho, "A", (da, db))
    rho_b = partial_trace(rho, "B", (da, db))
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho)


# ---------------------------------------------------------------------------
# purification and Schmidt structure


def purify(rho: DensityMatrix) -> BipartitePureState:
    """Purification of ρ with a fresh register on side B.

    Returns |φ⟩ = Σ_i √λ_i |e_i⟩_A |i⟩_B, so tracing out B recovers ρ and
    the Schmidt rank equals rank(ρ).
    """
    lam, vec = rho.eigh()
    c = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
    for i in range(rho.dim):
        if lam[i] > SUPPORT_CUTOFF:
            c[:, i] = np.sqrt(lam[i]) * vec[:, i]
    return BipartitePureState(c.reshape(-1), rho.dim, rho.dim)


def canonical_purification(sigma: DensityMatrix, dim_a: int | None = None) -> BipartitePureState:
    """Purification of σ *on side B*, with ancilla rows on side A.

    Amplitude matrix rows are √λ_i v_iᵀ over the eigenpairs of σ, which
    gives B-marginal exactly σ.  ``dim_a`` defaults to dim(σ) and may be
    any value ≥ rank(σ); extra rows are zero.
    """
    lam, vec = sigma.eigh()
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    rank = int(np.sum(lam > SUPPORT_CUTOFF))
    d = sigma.dim
    if dim_a is None:
        dim_a = d
    if dim_a < rank:
        raise ValueError(f"dim_a={dim_a} below rank {rank}")
    c = np.zeros((dim_a, d), dtype=np.complex128)
    for i in range(rank):
        c[i, :] = np.sqrt(lam[i]) * vec[:, i]
    return BipartitePureState(c.reshape(-1), dim_a, d)


def schmidt(phi: BipartitePureState):
    """Schmidt decomposition of |φ⟩.

    Returns (coeffs, left, right): squared Schmidt coefficients in
    descending order, left vectors as columns of ``left`` and right
    vectors as rows of ``right``, so that
    C = Σ_i √coeffs[i] · left[:, i] ⊗ right[i, :].
    """
    u, s, vh = np.linalg.svd(phi.matrix(), full_matrices=False)
    return s ** 2, u, vh


def entanglement_amount(phi: BipartitePureState) -> float:
    """Entropy of entanglement E(φ) = S(Tr_B φ), in bits."""
    lam, _, _ = schmidt(phi)
    lam = lam[lam > ENTROPY_CUTOFF]
    return float(-np.sum(lam * np.log2(lam)))


def schmidt_truncate(phi: BipartitePureState, rank_bound: int):
    """Keep the top ``rank_bound`` Schmidt terms and renormalize.

    Returns (truncated_state, kept_mass, distance) where ``kept_mass`` is
    the Schmidt weight retained and ``distance`` the trace distance
    ½‖φφ† − φ'φ'†‖₁ = sqrt(1 − kept_mass) to the original state.
    """
    if rank_bound < 1:
        raise ValueError("rank_bound must be at least 1")
    lam, left, right = schmidt(phi)
    r = min(rank_bound, int(np.sum(lam > 0)))
    mass = float(np.sum(lam[:r]))
    coeff = np.sqrt(lam[:r] / mass)
    c = (left[:, :r] * coeff) @ right[:r, :]
    out = BipartitePureState(c.reshape(-1), phi.dim_a, phi.dim_b)
    return out, mass, float(np.sqrt(max(0.0, 1.0 - mass)))


# ---------------------------------------------------------------------------
# substate weight and steering


def max_substate_weight(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Largest k ≥ 0 with σ − kρ PSD, for full-rank σ.

    Equals 1 / λ_max(σ^{-1/2} ρ σ^{-1/2}); for pure ρ = |φ⟩⟨φ| this is
    (⟨φ|σ^{-1}|φ⟩)^{-1}.
    """
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    lam, _ = sigma.eigh()
    if lam[0] <= SUPPORT_CUTOFF:
        raise ValueError(f"sigma is singular (min eigenvalue {lam[0]})")
    return _substate_weight_supported(rho.mat, sigma)


def _substate_weight_supported(rho_mat: np.ndarray, sigma: DensityMatrix) -> float:
    """Substate weight restricted to supp(σ); requires supp(ρ) ⊆ supp(σ)."""
    lam, vec = sigma.eigh()
    inside = lam > SUPPORT_CUTOFF
    leak = float(np.real(np.trace(rho_mat))) - float(
        np.real(np.sum((vec[:, inside].conj().T @ rho_mat) * vec[:, inside].T))
    )
    if leak > 1e-9:
        raise ValueError(f"rho has mass {leak} outside supp(sigma)")
    v = vec[:, inside]
    scale = 1.0 / np.sqrt(lam[inside])
    m = (scale[:, None] * (v.conj().T @ rho_mat @ v)) * scale[None, :]
    top = np.linalg.eigvalsh((m + m.conj().T) / 2.0)[-1]
    if top <= 0:
        return float("inf")
    return float(1.0 / top)


def _sqrt_psd(mat: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    lam = np.clip(lam, 0.0, None)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def apply_kraus_a(phi: BipartitePureState, kraus: KrausOp):
    """Apply M ⊗ I to |φ⟩.  Returns (success_prob, normalized post state)."""
    if kraus.dim != phi.dim_a:
        raise ValueError("Kraus dimension does not match side A")
    t = kraus.mat @ phi.matrix()
    p = float(np.real(np.sum(t.conj() * t)))
    if p <= 1e-300:
        return 0.0, None
    return p, BipartitePureState(t.reshape(-1) / np.sqrt(p), phi.dim_a, phi.dim_b)


def steering_kraus(phi: BipartitePureState, target: DensityMatrix, weight: float) -> KrausOp:
    """Kraus operator on side A that steers |φ⟩'s B-marginal onto ``target``.

    Given σ = Tr_A φ and k = ``weight`` ≤ max substate weight of target in
    σ, returns M with (M ⊗ I)|φ⟩ of squared norm exactly k whose
    post-success B-marginal equals ``target``.  Built in σ's eigenbasis:
    M†M = k · conj(σ^{-1/2} τ σ^{-1/2}) there, composed with the alignment
    unitary from |φ⟩ to the canonical purification.
    """
    sigma = phi.marginal_b()
    if target.dim != sigma.dim:
        raise ValueError("target dimension does not match side B")
    lam, vec = sigma.eigh()
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    rank = int(np.sum(lam > SUPPORT_CUTOFF))
    if phi.dim_a < rank:
        raise ValueError("side A too small to carry the purification")
    v = vec[:, :rank]
    scale = 1.0 / np.sqrt(lam[:rank])
    tau_tilde = (scale[:, None] * (v.conj().T @ target.mat @ v)) * scale[None, :]
    gram = weight * tau_tilde.conj()
    top = np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)[-1]
    if top > 1.0 + KRAUS_TOL:
        raise ValueError(f"weight {weight} too large: M†M would exceed identity by {top - 1.0}")
    m_small = _sqrt_psd(gram)  # conj of sqrt(k σ^{-1/2} τ σ^{-1/2}) in eigencoords
    m_canon = np.zeros((phi.dim_a, phi.dim_a), dtype=np.complex128)
    m_canon[:rank, :rank] = m_small
    omega = canonical_purification(sigma, dim_a=phi.dim_a)
    u = uhlmann_align(phi, omega)
    return KrausOp(m_canon @ u.mat)


class _Unitary:
    """Thin wrapper so alignment results can assert unitarity once."""

    __slots__ = ("mat", "dim")

    def __init__(self, mat: np.ndarray) -> None:
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > 1e-8:
            raise ValueError(f"matrix is not unitary (deviation {dev})")
        self.mat = _freeze(mat)
        self.dim = mat.shape[0]


def uhlmann_align(phi1: BipartitePureState, phi2: BipartitePureState) -> _Unitary:
    """Unitary U on side A with (U ⊗ I)|φ₁⟩ = |φ₂⟩ (up to global phase).

    Both states must share the B-marginal within trace distance 1e-9.
    Solved as an orthogonal Procrustes problem on C₁C₂†, which maximizes
    the overlap ⟨φ₂|(U ⊗ I)|φ₁⟩ and makes it real non-negative.
    """
    if phi1.dim_a != phi2.dim_a or phi1.dim_b != phi2.dim_b:
        raise ValueError("cut mismatch between the purifications")
    d1 = trace_distance(phi1.marginal_b(), phi2.marginal_b())
    if d1 > 1e-9:
        raise ValueError(f"B-marginals differ by trace distance {d1}")
    k = phi1.matrix() @ phi2.matrix().conj().T
    u_l, _, v_h = np.linalg.svd(k)
    return _Unitary((u_l @ v_h).conj().T)


# ---------------------------------------------------------------------------
# distances


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """½‖a − b‖₁."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    eigs = np.linalg.eigvalsh(a.mat - b.mat)
    return float(0.5 * np.sum(np.abs(eigs)))


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity Tr|√a √b| (not squared)."""
    sa = _sqrt_psd(a.mat)
    s = np.linalg.svd(sa @ _sqrt_psd(b.mat), compute_uv=False)
    return float(np.sum(s))

def state_fidelity(vec: np.ndarray, rho: DensityMatrix) -> float:
    """⟨ψ|ρ|ψ⟩ for a unit vector against a density matrix."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return float(np.real(v.conj() @ rho.mat @ v))


# ---------------------------------------------------------------------------
# random sampling


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """ρ = GG†/Tr(GG†) for a dim × rank Ginibre block (rank defaults to dim)."""
    if rank is None:
        rank = dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))
