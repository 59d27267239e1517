"""Classical private-coin protocol trees and one-message compression.

A protocol tree alternates rounds between Alice (odd rounds) and Bob
(even rounds); each round's symbol is drawn from a finite alphabet with
probabilities depending on the speaker's input and the transcript so far,
and Bob maps (his input, full transcript) to an answer.  The module
computes exact transcript laws and privacy loss (mutual information
between an input and the transcript), compresses any tree to a single
expected-short message from Alice under a product prior via rejection
sampling against the average transcript law, and finds exact one-way
optima by exhaustive search on tiny instances.

Compression runs in two interchangeable engines.  The mechanical engine
walks shared sample arrays column by column exactly as specified; it is
only feasible when the acceptance thresholds are overridden to small
exponents, because the true thresholds 2^((k+1)/delta^2) make expected
column counts astronomically large.  The law engine samples from the
exact per-input laws of the same process (index lengths, abort events,
accepted transcript), agrees with the mechanical engine where both run,
and works at the true thresholds by carrying log2-scale quantities.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .cinfo import Distribution, JointDistribution, prefix_length

PROB_TOL = 1e-12
IDENTITY_TOL = 1e-10
MIN_AVG_PROB = 1e-300
ROW_SAMPLE_CAP = 2 ** 24
TRIAL_SLOTS = 16
LOG2_FLOAT_MAX = 1000.0
_LN2 = math.log(2.0)

# salts separating the shared / Alice-private / Bob-private streams
_TAG_SHARED, _TAG_ALICE, _TAG_BOB = 0x736872, 0x616C69, 0x626F62


def trial_uniforms(seed: int, trials: int, width: int = TRIAL_SLOTS,
                   start: int = 0) -> np.ndarray:
    """Uniforms laid out as (trials, width), position-addressed.

    Trial t always reads counter positions [t*width, (t+1)*width), so a
    run split into chunks (or across threads) reproduces the single-run
    stream bit for bit.
    """
    bg = np.random.Philox(key=np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    pos = start * width
    bg.advance(pos // 4)  # counter blocks hold four 64-bit draws
    gen = np.random.Generator(bg)
    if pos % 4:
        gen.random(pos % 4)
    return gen.random((trials, width))


def _keyed_stream(seed: int, trial: int, row: int, tag: int) -> np.random.Generator:
    """Independent stream for one (trial, row) cell of the shared array."""
    key = np.array([np.uint64((seed ^ tag) & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(((trial << 24) ^ row) & 0xFFFFFFFFFFFFFFFF)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class Relation:
    """Total relation on X x Y x Z: accept[x, y, z] says z answers (x, y)."""

    def __init__(self, accept) -> None:
        accept = np.asarray(accept, dtype=bool)
        if accept.ndim != 3:
            raise ValueError("accept table must be 3-dimensional")
        if not accept.any(axis=2).all():
            raise ValueError("relation is not total: some (x, y) has no answer")
        self.accept = accept
        self.x_size, self.y_size, self.z_size = accept.shape

    @classmethod
    def from_predicate(cls, x_size: int, y_size: int, z_size: int, fn) -> "Relation":
        acc = np.fromfunction(
            np.vectorize(lambda x, y, z: bool(fn(int(x), int(y), int(z)))),
            (x_size, y_size, z_size), dtype=int)
        return cls(acc)

    @classmethod
    def equality(cls, n_bits: int) -> "Relation":
        n = 1 << n_bits
        x = np.arange(n)
        eq = (x[:, None] == x[None, :]).astype(int)
        acc = np.zeros((n, n, 2), dtype=bool)
        acc[np.arange(n)[:, None], np.arange(n)[None, :], eq] = True
        return cls(acc)

    @classmethod
    def index(cls, db_bits: int) -> "Relation":
        """Alice holds a db_bits-bit database, Bob an index; answer that bit."""
        x = np.arange(1 << db_bits)
        y = np.arange(db_bits)
        bit = (x[:, None] >> (db_bits - 1 - y)[None, :]) & 1
        acc = np.zeros((1 << db_bits, db_bits, 2), dtype=bool)
        acc[np.arange(1 << db_bits)[:, None], y[None, :], bit] = True
        return cls(acc)

    @classmethod
    def copy_y(cls, x_size: int, y_size: int) -> "Relation":
        acc = np.zeros((x_size, y_size, y_size), dtype=bool)
        acc[:, np.arange(y_size), np.arange(y_size)] = True
        return cls(acc)

    @classmethod
    def and_first_bits(cls, x_bits: int = 2, y_bits: int = 2) -> "Relation":
        nx, ny = 1 << x_bits, 1 << y_bits
        x1 = np.arange(nx) >> (x_bits - 1)
        y1 = np.arange(ny) >> (y_bits - 1)
        val = x1[:, None] & y1[None, :]
        acc = np.zeros((nx, ny, 2), dtype=bool)
        acc[np.arange(nx)[:, None], np.arange(ny)[None, :], val] = True
        return cls(acc)

    def direct_sum(self, copies: int) -> "Relation":
        """copies independent instances; an answer tuple must solve each."""
        acc = self.accept
        for _ in range(copies - 1):
            acc = np.einsum("xyz,uvw->xuyvzw", acc, self.accept).reshape(
                acc.shape[0] * self.x_size,
                acc.shape[1] * self.y_size,
                acc.shape[2] * self.z_size)
        return Relation(acc)


class ClassicalProtocolTree:
    """Finite alternating-message tree; Alice speaks in odd rounds.

    kernels[i] has shape (n_inputs_i, prefix_count_i, alphabet_i) where
    n_inputs_i is x_size for Alice rounds and y_size for Bob rounds, and
    prefix_count_i is the number of length-i transcript prefixes (mixed
    radix, earlier symbols most significant).  output[y, s] is Bob's
    answer for full transcript index s.
    """

    def __init__(self, x_size, y_size, alphabets, kernels, output, z_size) -> None:
        self.x_size = int(x_size)
        self.y_size = int(y_size)
        self.alphabets = tuple(int(m) for m in alphabets)
        if any(m < 1 for m in self.alphabets):
            raise ValueError("alphabet sizes must be >= 1")
        self.rounds = len(self.alphabets)
        self.z_size = int(z_size)
        self.prefix_counts = [1]
        for m in self.alphabets:
            self.prefix_counts.append(self.prefix_counts[-1] * m)
        self.n_transcripts = self.prefix_counts[-1]
        if len(kernels) != self.rounds:
            raise ValueError("one kernel per round required")
        self.kernels = []
        for i, k in enumerate(kernels):
            k = np.asarray(k, dtype=float)
            n_in = self.x_size if self.speaker(i) == "alice" else self.y_size
            want = (n_in, self.prefix_counts[i], self.alphabets[i])
            if k.shape != want:
                raise ValueError(f"kernel {i} has shape {k.shape}, expected {want}")
            if k.min() < -1e-15:
                raise ValueError(f"kernel {i} has negative entries")
            rows = k.sum(axis=2)
            if np.abs(rows - 1.0).max() > PROB_TOL:
                raise ValueError(f"kernel {i} rows are not normalized")
            self.kernels.append(np.clip(k, 0.0, None))
        output = np.asarray(output, dtype=int)
        if output.shape != (self.y_size, self.n_transcripts):
            raise ValueError("output map has wrong shape")
        if output.min() < 0 or output.max() >= self.z_size:
            raise ValueError("output map value out of range")
        self.output = output
        self._tmat = None

    def speaker(self, round_index: int) -> str:
        return "alice" if round_index % 2 == 0 else "bob"

    @property
    def bits_per_transcript(self) -> int:
        return sum(max(1, m - 1).bit_length() if m > 1 else 0
                   for m in self.alphabets)

    def transcript_matrix(self) -> np.ndarray:
        """p^{x,y}(s) for all inputs, shape (x_size, y_size, n_transcripts)."""
        if self._tmat is None:
            p = np.ones((self.x_size, self.y_size, 1))
            for i, k in enumerate(self.kernels):
                step = k[:, None] if self.speaker(i) == "alice" else k[None, :]
                p = (p[:, :, :, None] * step).reshape(self.x_size, self.y_size, -1)
            self._tmat = p
        return self._tmat

    def symbols(self, transcript_index: int):
        """Decode a flat transcript index into its per-round symbols."""
        syms = []
        for m in reversed(self.alphabets):
            transcript_index, s = divmod(transcript_index, m)
            syms.append(s)
        return tuple(reversed(syms))

    @classmethod
    def random(cls, rng: np.random.Generator, x_size, y_size, alphabets,
               z_size) -> "ClassicalProtocolTree":
        kernels, prefix = [], 1
        for i, m in enumerate(alphabets):
            n_in = x_size if i % 2 == 0 else y_size
            kernels.append(rng.dirichlet(np.ones(m), size=(n_in, prefix)))
            prefix *= m
        output = rng.integers(z_size, size=(y_size, prefix))
        return cls(x_size, y_size, alphabets, kernels, output, z_size)

    @classmethod
    def deterministic(cls, x_size, y_size, alphabets, round_maps, output,
                      z_size) -> "ClassicalProtocolTree":
        """Build from per-round symbol maps (n_inputs_i, prefix_count_i)."""
        kernels = []
        for i, m in enumerate(alphabets):
            mp = np.asarray(round_maps[i], dtype=int)
            k = np.zeros(mp.shape + (m,))
            np.put_along_axis(k, mp[..., None], 1.0, axis=-1)
            kernels.append(k)
        return cls(x_size, y_size, alphabets, kernels, output, z_size)


def constant_tree(x_size: int, y_size: int, z_value: int = 0,
                  z_size: int = 2) -> ClassicalProtocolTree:
    """Two silent rounds (alphabet 1) and a constant answer."""
    maps = [np.zeros((x_size, 1), dtype=int), np.zeros((y_size, 1), dtype=int)]
    output = np.full((y_size, 1), z_value, dtype=int)
    return ClassicalProtocolTree.deterministic(
        x_size, y_size, (1, 1), maps, output, z_size)


def and_of_first_bits_tree(x_bits: int = 2, y_bits: int = 2) -> ClassicalProtocolTree:
    """Alice announces her first bit; Bob answers its AND with his."""
    nx, ny = 1 << x_bits, 1 << y_bits
    m1 = (np.arange(nx) >> (x_bits - 1)).reshape(nx, 1)
    prefix_bit = np.arange(2)[None, :]
    m2 = (np.arange(ny) >> (y_bits - 1))[:, None] & prefix_bit
    m2 = np.broadcast_to(m2, (ny, 2))
    # transcript index s = 2*s1 + s2; the answer is s2
    output = np.tile(np.array([0, 1, 0, 1]), (ny, 1))
    return ClassicalProtocolTree.deterministic(
        nx, ny, (2, 2), [m1, m2], output, 2)


def index_tree(db_bits: int, b: int) -> ClassicalProtocolTree:
    """Bob reveals the top b bits of his index; Alice sends that block.

    db_bits must be a power of two.  Round one is a silent placeholder so
    Bob's announcement lands in an even round.  Dense kernels, so this
    constructor is capped at db_bits <= 8; use index_tradeoff_privacy for
    the larger instances.
    """
    if db_bits & (db_bits - 1) or db_bits < 1:
        raise ValueError("db_bits must be a power of two")
    if db_bits > 8:
        raise ValueError("dense index tree capped at db_bits <= 8")
    idx_bits = db_bits.bit_length() - 1
    if not 0 <= b <= idx_bits:
        raise ValueError("b out of range")
    nx, ny = 1 << db_bits, db_bits
    groups, gsize = 1 << b, db_bits >> b
    x = np.arange(nx)
    y = np.arange(ny)
    group_of_y = y >> (idx_bits - b) if b else np.zeros(ny, dtype=int)
    offset_of_y = y & ((1 << (idx_bits - b)) - 1)
    # block g of x, packed most-significant-first
    pos = np.arange(gsize)
    bit = (x[:, None, None] >> (db_bits - 1 - (np.arange(groups)[None, :, None]
                                               * gsize + pos[None, None, :]))) & 1
    block = (bit << (gsize - 1 - pos)[None, None, :]).sum(axis=2)  # (nx, groups)
    maps = [np.zeros((nx, 1), dtype=int),
            group_of_y.reshape(ny, 1),
            block]
    s = np.arange(groups * (1 << gsize))
    r = s % (1 << gsize)
    output = (r[None, :] >> (gsize - 1 - offset_of_y)[:, None]) & 1
    return ClassicalProtocolTree.deterministic(
        nx, ny, (1, groups, 1 << gsize), maps, output, 2)


def index_tradeoff_privacy(db_bits: int, b: int):
    """(k_a, k_b) of the block-exchange index protocol under uniform inputs.

    Computed by enumerating the exact joint law of (input, transcript)
    over all database/index pairs; feasible up to db_bits = 16 because
    the transcript is a deterministic function of (x, Bob's group).
    """
    if db_bits & (db_bits - 1) or db_bits < 1:
        raise ValueError("db_bits must be a power of two")
    idx_bits = db_bits.bit_length() - 1
    if not 0 <= b <= idx_bits:
        raise ValueError("b out of range")
    nx, ny = 1 << db_bits, db_bits
    groups, gsize = 1 << b, db_bits >> b
    x = np.arange(nx)
    pos = np.arange(gsize)
    bit = (x[:, None, None] >> (db_bits - 1 - (np.arange(groups)[None, :, None]
                                               * gsize + pos[None, None, :]))) & 1
    block = (bit << (gsize - 1 - pos)[None, None, :]).sum(axis=2)
    m = np.arange(groups)[None, :] * (1 << gsize) + block  # (nx, groups)

    def _entropy(counts, total):
        p = counts[counts > 0] / total
        return float(-(p * np.log2(p)).sum())

    # uniform x, uniform index; each group has equal index mass 1/groups
    h_m = _entropy(np.bincount(m.ravel()), nx * groups)
    h_m_given_x = np.mean([_entropy(np.bincount(row), groups) for row in m])
    h_m_given_y = np.mean([_entropy(np.bincount(m[:, g]), nx)
                           for g in range(groups)])
    return h_m - h_m_given_x, h_m - h_m_given_y


def transcript_distribution(tree: ClassicalProtocolTree, x: int, y: int) -> Distribution:
    """Exact law of the full transcript for one input pair."""
    if not (0 <= x < tree.x_size and 0 <= y < tree.y_size):
        raise ValueError("input out of range")
    p = tree.transcript_matrix()[x, y]
    labels = [tree.symbols(s) for s in range(tree.n_transcripts)]
    return Distribution(labels, p)


def average_transcripts(tree: ClassicalProtocolTree, mu: JointDistribution):
    """Per-input average transcript laws (P_x, P_y) and the pooled law.

    Requires a product prior: the averages are over one marginal at a
    time and feed the privacy-loss and compression formulas, which are
    stated for independent inputs.
    """
    if mu.table.shape != (tree.x_size, tree.y_size):
        raise ValueError("prior shape does not match tree inputs")
    if not mu.is_product(1e-10):
        raise ValueError("prior must be a product distribution")
    pm = tree.transcript_matrix()
    mux = mu.marginal_x().probs
    muy = mu.marginal_y().probs
    p_x = np.einsum("y,xys->xs", muy, pm)
    p_y = np.einsum("x,xys->ys", mux, pm)
    p_bar = mux @ p_x
    if np.abs(muy @ p_y - p_bar).max() > PROB_TOL:
        raise ValueError("inconsistent averages; malformed tree")
    return p_x, p_y, p_bar


def product_identity_check(tree: ClassicalProtocolTree, mu: JointDistribution,
                           x: int | None = None, y: int | None = None) -> float:
    """Max deviation of p^x(s) p^y(s) - p(s) p^{x,y}(s) over transcripts.

    Alternating rounds factor every transcript probability into an
    x-part and a y-part, which forces this identity; it should hold to
    numerical precision on any well-formed tree.
    """
    p_x, p_y, p_bar = average_transcripts(tree, mu)
    pm = tree.transcript_matrix()
    xs = range(tree.x_size) if x is None else [x]
    ys = range(tree.y_size) if y is None else [y]
    dev = 0.0
    for xi in xs:
        d = np.abs(p_x[xi][None, :] * p_y - p_bar[None, :] * pm[xi])
        dev = max(dev, float(d[list(ys)].max()))
    return dev


def _kl_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise KL in bits; rows of p must be dominated by q."""
    p = np.atleast_2d(p)
    out = np.zeros(p.shape[0])
    for i, row in enumerate(p):
        mask = row > 0
        if (q[mask] <= 0).any():
            out[i] = math.inf
        else:
            out[i] = float((row[mask] * np.log2(row[mask] / q[mask])).sum())
    return out


def privacy_loss_classical(tree: ClassicalProtocolTree, mu: JointDistribution):
    """(k_a, k_b): mutual information of each input with the transcript."""
    p_x, p_y, p_bar = average_transcripts(tree, mu)
    mux = mu.marginal_x().probs
    muy = mu.marginal_y().probs
    k_a = float(mux @ _kl_rows(p_x, p_bar))
    k_b = float(muy @ _kl_rows(p_y, p_bar))
    return max(k_a, 0.0), max(k_b, 0.0)


class EvalResult(NamedTuple):
    error: float
    expected_bits: float
    bits_distribution: Distribution
    exact_error: float | None = None
    expected_bits_log2: float | None = None
    abort_rate: float | None = None
    mode: str = ""


def exact_tree_error(tree: ClassicalProtocolTree, relation: Relation,
                     mu: JointDistribution) -> float:
    """Average error of the tree's output map, by full enumeration."""
    pm = tree.transcript_matrix()
    nx, ny = tree.x_size, tree.y_size
    z = tree.output[None, :, :]
    acc = relation.accept[np.arange(nx)[:, None, None],
                          np.arange(ny)[None, :, None],
                          np.broadcast_to(z, (nx, ny, tree.n_transcripts))]
    return float(np.sum(mu.table[:, :, None] * pm * ~acc))


def _sample_joint(mu: JointDistribution, u: np.ndarray):
    flat = np.cumsum(mu.table.ravel())
    flat[-1] = 1.0
    idx = np.searchsorted(flat, u, side="right")
    return idx // mu.table.shape[1], idx % mu.table.shape[1]


def _mc_tree(tree: ClassicalProtocolTree, relation: Relation,
             mu: JointDistribution, trials: int, seed: int) -> EvalResult:
    u = trial_uniforms(seed, trials)
    x, y = _sample_joint(mu, u[:, 0])
    prefix = np.zeros(trials, dtype=int)
    for i, k in enumerate(tree.kernels):
        inp = x if tree.speaker(i) == "alice" else y
        rows = k[inp, prefix]
        sym = (u[:, 1 + i][:, None] > np.cumsum(rows, axis=1)).sum(axis=1)
        sym = np.minimum(sym, tree.alphabets[i] - 1)
        prefix = prefix * tree.alphabets[i] + sym
    z = tree.output[y, prefix]
    correct = relation.accept[x, y, z]
    bits = float(tree.bits_per_transcript)
    exact = None
    if tree.x_size * tree.y_size * tree.n_transcripts <= 1 << 24:
        exact = exact_tree_error(tree, relation, mu)
    return EvalResult(
        error=float(1.0 - correct.mean()),
        expected_bits=bits,
        bits_distribution=Distribution([bits], [1.0]),
        exact_error=exact,
        expected_bits_log2=math.log2(bits) if bits > 0 else -math.inf,
        abort_rate=0.0,
        mode="tree-mc")


def _geom_bucket_stats(log2_accept: float):
    """Mean/variance of the prefix-code length of a geometric index.

    The index J is the first success of a Bernoulli(a) column walk with
    a = 2**log2_accept; the encoded length depends only on floor(log2 J),
    whose law has the closed form surv(2^l - 1) - surv(2^(l+1) - 1) with
    surv(n) = (1-a)^n, so the moments are exact bucket sums.
    """
    if log2_accept >= -1e-12:
        ln = prefix_length(1)
        return float(ln), 0.0
    a = 2.0 ** log2_accept if log2_accept > -1000 else 0.0
    corr = (-math.log1p(-a) / a) if a > 1e-280 else 1.0

    def surv(level: int) -> float:
        n = 2.0 ** level - 1.0 if a > 0 else None
        t = n * a * corr if a > 0 else 2.0 ** (level + log2_accept) * corr
        return math.exp(-t) if t < 745 else 0.0

    mean = mean_sq = 0.0
    level, s_lo = 0, 1.0
    while True:
        s_hi = surv(level + 1)
        p = s_lo - s_hi
        ln = float(prefix_length(1 << level))
        mean += p * ln
        mean_sq += p * ln * ln
        if s_hi < 1e-20 and level > -log2_accept:
            break
        level += 1
        s_lo = s_hi
        if level > 1100:  # pragma: no cover - unreachable for valid inputs
            break
    return mean, max(mean_sq - mean * mean, 0.0)


def _pow2(l: float) -> float:
    return 2.0 ** l if l < LOG2_FLOAT_MAX else math.inf


class CompressedOneWay:
    """One-message simulator of a tree via shared-sample rejection.

    Alice and Bob share an array of transcripts drawn from the pooled law
    (keyed by master_seed, trial, row).  Alice scans each of the K rows
    for the first column she accepts — with probability ratio/2**ea on
    her good set — and sends the prefix-coded column indices; Bob scans
    the indicated samples and keeps the first he accepts at his own
    threshold 2**eb, then answers through the tree's output map.  Alice
    aborts up front on atypical inputs, and additionally the moment her
    emitted bits exceed the recorded cut (a pre-pass estimate of the
    expected cost divided by delta).

    All per-input laws of this process are exact and stored here in
    log2 scale; see the module docstring for the two engines.
    """

    def __init__(self, tree, relation, mu, delta_tilde, *,
                 exponent_override=None, master_seed=0,
                 prepass_trials=10 ** 4):
        if not 0.0 < delta_tilde < 0.5:
            raise ValueError("delta_tilde must lie in (0, 1/2)")
        if not mu.is_product(1e-10):
            raise ValueError("prior must be a product distribution")
        self.tree = tree
        self.relation = relation
        self.mu = mu
        self.delta_tilde = float(delta_tilde)
        self.delta = self.delta_tilde / 5.0
        self.master_seed = int(master_seed)
        eps = exact_tree_error(tree, relation, mu)
        if eps + delta_tilde >= 0.5:
            raise ValueError("tree error too large for this delta_tilde")
        self.base_error = eps

        d = self.delta
        self.mux = mu.marginal_x().probs
        self.muy = mu.marginal_y().probs
        p_x, p_y, p_bar = average_transcripts(tree, mu)
        if ((p_bar > 0) & (p_bar < MIN_AVG_PROB)).any():
            raise ValueError("pooled transcript probabilities underflow")
        self.p_x, self.p_y, self.p_bar = p_x, p_y, p_bar
        self.k_a, self.k_b = privacy_loss_classical(tree, mu)

        if exponent_override is None:
            self.ea = (self.k_a + 1.0) / d ** 2
            self.eb = (self.k_b + 1.0) / d ** 2
        else:
            self.ea, self.eb = (float(e) for e in exponent_override)
        self.exponent_override = exponent_override

        kl_x = _kl_rows(p_x, p_bar)
        kl_y = _kl_rows(p_y, p_bar)
        self.good_x = kl_x <= self.k_a / d + 1e-12
        self.good_y = kl_y <= self.k_b / d + 1e-12
        sup = p_bar > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio_x = np.where(sup, p_x / np.where(sup, p_bar, 1.0), 0.0)
            ratio_y = np.where(sup, p_y / np.where(sup, p_bar, 1.0), 0.0)
        self.ratio_x, self.ratio_y = ratio_x, ratio_y
        ta, tb = _pow2(self.ea), _pow2(self.eb)
        self.good_tx = sup[None, :] & (ratio_x <= ta * (1 + 1e-12))
        self.good_ty = sup[None, :] & (ratio_y <= tb * (1 + 1e-12))

        self.mass_x = np.einsum("xs,xs->x", p_x, self.good_tx)
        pm = tree.transcript_matrix()
        kept = pm * self.good_tx[:, None, :] * self.good_ty[None, :, :]
        self.joint_mass = kept.sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.cond_law = np.where(self.joint_mass[:, :, None] > 0,
                                     kept / np.where(self.joint_mass[:, :, None] > 0,
                                                     self.joint_mass[:, :, None], 1.0),
                                     0.0)
        z = np.broadcast_to(tree.output[None, :, :],
                            (tree.x_size, tree.y_size, tree.n_transcripts))
        acc = relation.accept[np.arange(tree.x_size)[:, None, None],
                              np.arange(tree.y_size)[None, :, None], z]
        self.cond_error = np.einsum("xys,xys->xy", self.cond_law, (~acc).astype(float))

        # per-column acceptance for Alice, per-row acceptance for Bob (log2)
        with np.errstate(divide="ignore"):
            self.log2_col_accept = -self.ea + np.log2(self.mass_x)
            self.log2_row_accept = (-self.eb
                                    + np.log2(self.joint_mass)
                                    - np.log2(self.mass_x)[:, None])

        k_real = (1.0 / (1.0 - d)) * math.log(1.0 / d)
        self.log2_K = math.log2(k_real) + self.eb
        self.K = math.ceil(k_real * 2.0 ** self.eb) if self.log2_K < 62 else None
        lK = math.log2(self.K) if self.K is not None else self.log2_K

        self.bob_abort = np.ones((tree.x_size, tree.y_size))
        for xi in range(tree.x_size):
            if not self.good_x[xi]:
                continue
            for yi in range(tree.y_size):
                if not self.good_y[yi]:
                    continue
                lr = self.log2_row_accept[xi, yi]
                if lr == -math.inf:
                    continue
                rho = 2.0 ** lr if lr > -1000 else 0.0
                if rho >= 1.0 - 1e-12:
                    self.bob_abort[xi, yi] = 0.0
                    continue
                corr = (-math.log1p(-rho) / rho) if rho > 1e-280 else 1.0
                t = 2.0 ** (lK + lr) * corr
                self.bob_abort[xi, yi] = math.exp(-t) if t < 745 else 0.0

        self.len_mean = np.zeros(tree.x_size)
        self.len_var = np.zeros(tree.x_size)
        self.log2_bits_mean = np.full(tree.x_size, -math.inf)
        self.log2_bits_sd = np.full(tree.x_size, -math.inf)
        for xi in range(tree.x_size):
            if not self.good_x[xi] or self.mux[xi] <= 0:
                continue
            m, v = _geom_bucket_stats(self.log2_col_accept[xi])
            self.len_mean[xi], self.len_var[xi] = m, v
            self.log2_bits_mean[xi] = lK + math.log2(m)
            if v > 0:
                self.log2_bits_sd[xi] = 0.5 * (lK + math.log2(v))

        # pre-pass estimate of the expected cost, then the abort cut
        u = trial_uniforms(self.master_seed ^ 0x5EED, prepass_trials, width=1)
        cum = np.cumsum(self.mux)
        cum[-1] = 1.0
        xs = np.searchsorted(cum, u[:, 0], side="right")
        logs = np.where(self.good_x[xs], self.log2_bits_mean[xs], 0.0)
        mx = logs.max()
        self.log2_c = mx + math.log2(np.mean(2.0 ** (logs - mx)))
        self.c = _pow2(self.log2_c)
        self.log2_cut = self.log2_c - math.log2(d)
        self.cut = _pow2(self.log2_cut)

        self.trunc_prob = np.zeros(tree.x_size)
        for xi in range(tree.x_size):
            if not self.good_x[xi] or self.mux[xi] <= 0:
                continue
            lm, ls = self.log2_bits_mean[xi], self.log2_bits_sd[xi]
            if ls == -math.inf:
                self.trunc_prob[xi] = 0.0 if self.log2_cut >= lm else 1.0
                continue
            gap = math.expm1((self.log2_cut - lm) * _LN2)
            zscore = gap * 2.0 ** min(lm - ls, 11.0)
            zscore = min(max(zscore, -40.0), 40.0)
            self.trunc_prob[xi] = 0.5 * math.erfc(zscore / math.sqrt(2.0))

        self.literal_feasible = (self.K is not None and self.K <= 1 << 20
                                 and lK + self.ea <= 26)

    def law_error(self) -> float:
        """Exact average error of the compressed protocol (aborts count 1)."""
        err = 0.0
        for xi in range(self.tree.x_size):
            if self.mux[xi] <= 0:
                continue
            if not self.good_x[xi]:
                err += self.mux[xi]
                continue
            tp = self.trunc_prob[xi]
            inner = 0.0
            for yi in range(self.tree.y_size):
                if self.muy[yi] <= 0:
                    continue
                a = self.bob_abort[xi, yi]
                inner += self.muy[yi] * (a + (1 - a) * self.cond_error[xi, yi])
            err += self.mux[xi] * (tp + (1 - tp) * inner)
        return err

    def abort_rate_law(self) -> float:
        tot = 0.0
        for xi in range(self.tree.x_size):
            if self.mux[xi] <= 0:
                continue
            if not self.good_x[xi]:
                tot += self.mux[xi]
                continue
            tp = self.trunc_prob[xi]
            inner = sum(self.muy[yi] * self.bob_abort[xi, yi]
                        for yi in range(self.tree.y_size) if self.muy[yi] > 0)
            tot += self.mux[xi] * (tp + (1 - tp) * inner)
        return tot

    def expected_bits_log2(self) -> float:
        """log2 of the exact expected emitted bits (abort message = 1 bit)."""
        logs, weights = [], []
        for xi in range(self.tree.x_size):
            if self.mux[xi] <= 0:
                continue
            logs.append(self.log2_bits_mean[xi] if self.good_x[xi] else 0.0)
            weights.append(self.mux[xi])
        mx = max(logs)
        acc = sum(w * 2.0 ** (l - mx) for l, w in zip(logs, weights))
        return mx + math.log2(acc)


def compress_multiround_classical(tree: ClassicalProtocolTree, relation: Relation,
                                  mu: JointDistribution, delta_tilde: float, *,
                                  exponent_override=None, master_seed=0,
                                  prepass_trials=10 ** 4) -> CompressedOneWay:
    """Turn a multi-round tree into a one-message rejection simulator."""
    return CompressedOneWay(tree, relation, mu, delta_tilde,
                            exponent_override=exponent_override,
                            master_seed=master_seed,
                            prepass_trials=prepass_trials)


def _mc_compressed(comp: CompressedOneWay, relation: Relation,
                   mu: JointDistribution, trials: int, seed: int) -> EvalResult:
    tree = comp.tree
    u = trial_uniforms(seed, trials)
    x, y = _sample_joint(mu, u[:, 0])
    err = np.zeros(trials, dtype=bool)
    abort = np.zeros(trials, dtype=bool)
    bits_log2 = np.zeros(trials)

    alice_ok = comp.good_x[x]
    bits_log2[~alice_ok] = 0.0  # one-bit abort message
    err[~alice_ok] = True
    abort[~alice_ok] = True

    # emitted-length draw (normal in the exact mean/sd of the row sums)
    n01 = np.sqrt(-2.0 * np.log(1.0 - u[:, 5])) * np.cos(2.0 * math.pi * u[:, 6])
    with np.errstate(invalid="ignore", over="ignore"):
        lm = comp.log2_bits_mean[x]
        ls = comp.log2_bits_sd[x]
        rel_sd = np.where(ls > -math.inf, 2.0 ** np.clip(ls - lm, -60.0, 0.0), 0.0)
        factor = np.clip(1.0 + rel_sd * n01, 2.0 ** -20, None)
        bits_log2[alice_ok] = (lm + np.log2(factor))[alice_ok]

    trunc = alice_ok & (u[:, 1] < comp.trunc_prob[x])
    bits_log2[trunc] = comp.log2_cut
    err[trunc] = True
    abort[trunc] = True

    live = alice_ok & ~trunc
    bob_quit = live & (~comp.good_y[y] | (u[:, 2] < comp.bob_abort[x, y]))
    err[bob_quit] = True
    abort[bob_quit] = True

    ok = live & ~bob_quit
    if ok.any():
        rows = comp.cond_law[x[ok], y[ok]]
        cum = np.cumsum(rows, axis=1)
        s = (u[ok, 3][:, None] > cum).sum(axis=1)
        s = np.minimum(s, tree.n_transcripts - 1)
        z = tree.output[y[ok], s]
        err[ok] = ~relation.accept[x[ok], y[ok], z]

    bits = 2.0 ** np.minimum(bits_log2, LOG2_FLOAT_MAX)
    bits = np.where(bits_log2 >= LOG2_FLOAT_MAX, math.inf, np.round(bits))
    vals, counts = np.unique(bits, return_counts=True)
    dist = Distribution(list(vals), counts / trials)
    mean_log2 = None
    mx = bits_log2.max()
    mean_log2 = mx + math.log2(np.mean(2.0 ** (bits_log2 - mx)))
    return EvalResult(
        error=float(err.mean()),
        expected_bits=_pow2(mean_log2),
        bits_distribution=dist,
        exact_error=comp.law_error(),
        expected_bits_log2=mean_log2,
        abort_rate=float(abort.mean()),
        mode="law-mc")


def evaluate_protocol(protocol, relation: Relation, mu: JointDistribution,
                      trials: int, seed: int) -> EvalResult:
    """Seeded Monte Carlo evaluation; exact error attached when enumerable."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(protocol, ClassicalProtocolTree):
        return _mc_tree(protocol, relation, mu, trials, seed)
    if isinstance(protocol, CompressedOneWay):
        return _mc_compressed(protocol, relation, mu, trials, seed)
    raise TypeError("unsupported protocol object")


class LiteralRun(NamedTuple):
    error: float
    abort_rate: float
    bits: np.ndarray
    accepted: list  # (trial, x, y, transcript) for accepted runs
    indices: list   # per successful trial, the list of column indices


def simulate_literal(comp: CompressedOneWay, trials: int, seed: int,
                     collect_indices: bool = False,
                     inputs: tuple | None = None) -> LiteralRun:
    """Walk the shared sample arrays mechanically, column by column.

    Requires small thresholds (override exponents), since the expected
    column count per row is 2**ea; rows are capped at ROW_SAMPLE_CAP
    columns as a diagnostic guard.  Pass inputs=(x, y) to hold the input
    pair fixed instead of sampling it from the prior.
    """
    if not comp.literal_feasible:
        raise RuntimeError("thresholds too large for the mechanical engine; "
                           "use evaluate_protocol's law engine")
    tree = comp.tree
    K = comp.K
    cum_bar = np.cumsum(comp.p_bar)
    cum_bar[-1] = 1.0
    u = trial_uniforms(seed, trials)
    if inputs is None:
        xs, ys = _sample_joint(comp.mu, u[:, 0])
    else:
        xs = np.full(trials, inputs[0], dtype=int)
        ys = np.full(trials, inputs[1], dtype=int)
    errs = np.zeros(trials, dtype=bool)
    aborts = np.zeros(trials, dtype=bool)
    bits = np.zeros(trials)
    accepted, indices = [], []
    base = comp.master_seed ^ seed
    cut = comp.cut
    for t in range(trials):
        x, y = int(xs[t]), int(ys[t])
        if not comp.good_x[x]:
            bits[t] = 1.0
            errs[t] = aborts[t] = True
            continue
        cols = []
        total = 0.0
        truncated = False
        for row in range(1, K + 1):
            shared = _keyed_stream(base, t, row, _TAG_SHARED)
            coins = _keyed_stream(base, t, row, _TAG_ALICE)
            j = 0
            found = None
            while found is None:
                block = min(512, ROW_SAMPLE_CAP - j)
                if block <= 0:
                    raise RuntimeError("row exceeded the column sample cap")
                sym = np.searchsorted(cum_bar, shared.random(block), side="right")
                pacc = (2.0 ** -comp.ea) * comp.ratio_x[x, sym] \
                    * comp.good_tx[x, sym]
                hit = np.nonzero(coins.random(block) < pacc)[0]
                if hit.size:
                    found = j + int(hit[0]) + 1
                j += block
            cols.append(found)
            total += prefix_length(found)
            if total > cut:
                truncated = True
                break
        if truncated:
            bits[t] = total
            errs[t] = aborts[t] = True
            continue
        bits[t] = total
        if collect_indices:
            indices.append(cols)
        if not comp.good_y[y]:
            errs[t] = aborts[t] = True
            continue
        chosen = None
        for row in range(1, K + 1):
            shared = _keyed_stream(base, t, row, _TAG_SHARED)
            sym = int(np.searchsorted(cum_bar, shared.random(cols[row - 1]),
                                      side="right")[-1])
            pacc = (2.0 ** -comp.eb) * comp.ratio_y[y, sym] \
                * comp.good_ty[y, sym]
            if _keyed_stream(base, t, row, _TAG_BOB).random() < pacc:
                chosen = sym
                break
        if chosen is None:
            errs[t] = aborts[t] = True
            continue
        accepted.append((t, x, y, chosen))
        z = int(tree.output[y, chosen])
        errs[t] = not comp.relation.accept[x, y, z]
    return LiteralRun(error=float(errs.mean()), abort_rate=float(aborts.mean()),
                      bits=bits, accepted=accepted, indices=indices)


class BruteForceOneWay(NamedTuple):
    messages: int
    bits: int
    error: float
    curve: tuple


def brute_force_error_curve(relation: Relation, mu: JointDistribution,
                            max_messages: int | None = None) -> np.ndarray:
    """err[m-1] = least average error of any m-message one-way protocol.

    Alice's deterministic message induces a partition of X; Bob answers
    each (message, y) with the error-minimizing z.  Exact subset-DP over
    partition blocks; feasible for |X| <= 16.
    """
    nx, ny, nz = relation.accept.shape
    if nx > 16:
        raise ValueError("instance too large for exhaustive search")
    if mu.table.shape != (nx, ny):
        raise ValueError("prior shape mismatch")
    limit = nx if max_messages is None else min(max_messages, nx)
    size = 1 << nx
    member = ((np.arange(size, dtype=np.uint32)[:, None]
               >> np.arange(nx, dtype=np.uint32)) & 1).astype(float)
    cost = np.zeros(size)
    for yi in range(ny):
        w = mu.table[:, yi]
        gain = member @ (w[:, None] * relation.accept[:, yi, :])
        cost += member @ w - gain.max(axis=1)
    cost[0] = 0.0
    full = size - 1
    dp = cost.copy()
    curve = [dp[full]]
    shifts = np.arange(nx, dtype=np.uint32)
    while len(curve) < limit and curve[-1] > 1e-15:
        new = np.full(size, np.inf)
        new[0] = 0.0
        for b in range(1, size):
            low = b & -b
            free = full & ~b & ~((low << 1) - 1)
            pos = np.nonzero((free >> shifts) & 1)[0]
            if pos.size:
                sub = np.arange(1 << pos.size, dtype=np.uint32)
                u = ((sub[:, None] >> np.arange(pos.size, dtype=np.uint32)) & 1) \
                    @ (np.uint32(1) << pos.astype(np.uint32))
                np.minimum.at(new, b | u, cost[b] + dp[u])
            else:
                new[b] = min(new[b], cost[b] + dp[0])
        dp = np.minimum(dp, new)
        curve.append(dp[full])
    return np.array(curve)


def brute_force_one_way(relation: Relation, mu: JointDistribution,
                        epsilon: float) -> BruteForceOneWay:
    """Fewest messages (and bits) any deterministic one-way protocol needs."""
    curve = brute_force_error_curve(relation, mu)
    feasible = np.nonzero(curve <= epsilon + 1e-12)[0]
    if feasible.size == 0:
        raise ValueError("epsilon unattainable by any one-way protocol")
    m = int(feasible[0]) + 1
    return BruteForceOneWay(messages=m, bits=max(m - 1, 0).bit_length(),
                            error=float(curve[m - 1]), curve=tuple(curve))
