"""Classical information utilities: distributions, divergences, typical
("good") sets, and the prefix-free integer code used by every protocol
that transmits an unbounded index.

Logs are base 2 throughout; KL terms with P(x) = 0 contribute 0, and
P(x) > 0 = Q(x) makes the divergence +inf.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Distribution",
    "JointDistribution",
    "kl_divergence",
    "mutual_information_classical",
    "good_set",
    "prefix_encode",
    "prefix_decode",
    "prefix_length",
]

PROB_TOL = 1e-12


class Distribution:
    """Finite probability distribution over hashable labels."""

    __slots__ = ("labels", "probs", "_index")

    def __init__(self, labels, probs) -> None:
        labels = tuple(labels)
        probs = np.asarray(probs, dtype=float).reshape(-1)
        if len(labels) != probs.size or probs.size == 0:
            raise ValueError("labels and probs must be equal-length and non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        if np.min(probs) < -1e-15:
            raise ValueError(f"negative probability {np.min(probs)}")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
        self.labels = labels
        self.probs = probs
        self.probs.setflags(write=False)
        self._index = {lab: i for i, lab in enumerate(labels)}

    @classmethod
    def uniform(cls, labels) -> "Distribution":
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    def prob(self, label) -> float:
        return float(self.probs[self._index[label]])

    def support(self):
        return tuple(lab for lab, p in zip(self.labels, self.probs) if p > 0.0)

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-np.sum(p * np.log2(p)))

    def sample(self, rng: np.random.Generator, size=None):
        idx = rng.choice(len(self.labels), size=size, p=self.probs)
        if size is None:
            return self.labels[int(idx)]
        return [self.labels[int(i)] for i in np.atleast_1d(idx)]

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Distribution({len(self.labels)} outcomes)"


class JointDistribution:
    """Joint distribution over X × Y stored as a table."""

    __slots__ = ("labels_x", "labels_y", "table")

    def __init__(self, labels_x, labels_y, table) -> None:
        table = np.asarray(table, dtype=float)
        labels_x, labels_y = tuple(labels_x), tuple(labels_y)
        if table.shape != (len(labels_x), len(labels_y)):
            raise ValueError("table shape does not match labels")
        if np.min(table) < -1e-15:
            raise ValueError("negative probability in table")
        table = np.clip(table, 0.0, None)
        if abs(table.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"table sums to {table.sum()}, not 1")
        self.labels_x, self.labels_y = labels_x, labels_y
        self.table = table
        self.table.setflags(write=False)

    @classmethod
    def product(cls, px: Distribution, py: Distribution) -> "JointDistribution":
        return cls(px.labels, py.labels, np.outer(px.probs, py.probs))

    def marginal_x(self) -> Distribution:
        return Distribution(self.labels_x, self.table.sum(axis=1))

    def marginal_y(self) -> Distribution:
        return Distribution(self.labels_y, self.table.sum(axis=0))

    def is_product(self, tol: float = 1e-10) -> bool:
        outer = np.outer(self.table.sum(axis=1), self.table.sum(axis=0))
        return bool(np.max(np.abs(outer - self.table)) <= tol)

    def __repr__(self) -> str:  # pragma: no cover
        return f"JointDistribution({len(self.labels_x)}x{len(self.labels_y)})"


def _aligned(p: Distribution, q: Distribution):
    if p.labels != q.labels:
        raise ValueError("distributions are over different label sets")
    return p.probs, q.probs


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """S(P‖Q) = Σ P(x) log₂(P(x)/Q(x)); +inf on support violation."""
    pp, qq = _aligned(p, q)
    mask = pp > 0
    if np.any(qq[mask] <= 0):
        return float("inf")
    return float(np.sum(pp[mask] * np.log2(pp[mask] / qq[mask])))


def mutual_information_classical(joint: JointDistribution) -> float:
    """I(X:Y) of a joint table, in bits."""
    px = joint.table.sum(axis=1)
    py = joint.table.sum(axis=0)
    t = joint.table
    mask = t > 0
    outer = np.outer(px, py)
    return float(np.sum(t[mask] * np.log2(t[mask] / outer[mask])))


def good_set(p: Distribution, q: Distribution, c: float, delta: float):
    """Labels in supp(P) whose likelihood ratio is at most 2^((c+1)/δ).

    For S(P‖Q) ≤ c this set carries P-mass at least 1 − δ; the
    constructor asserts that bound and returns (labels, p_mass).
    """
    if not (0 < delta < 1):
        raise ValueError("delta must be in (0, 1)")
    pp, qq = _aligned(p, q)
    thresh = 2.0 ** ((c + 1.0) / delta)
    keep = []
    mass = 0.0
    for lab, pi, qi in zip(p.labels, pp, qq):
        if pi <= 0:
            continue
        ratio = float("inf") if qi <= 0 else pi / qi
        if ratio <= thresh:
            keep.append(lab)
            mass += pi
    if kl_divergence(p, q) <= c + 1e-12 and mass < 1.0 - delta - 1e-9:
        raise AssertionError(
            f"good set mass {mass} below 1-delta={1 - delta} despite S(P||Q) <= c"
        )
    return tuple(keep), mass


# ---------------------------------------------------------------------------
# prefix-free integer code (length-of-length framing)


def prefix_encode(n: int) -> str:
    """Prefix-free code for n ≥ 1: unary length of the length field,
    then the length field, then the binary digits of n below its leading 1.

    len(n) = ⌊log₂n⌋ + 2⌊log₂(⌊log₂n⌋ + 1)⌋ + 1, within the
    ⌊log₂n⌋ + 2⌊log₂(⌊log₂n⌋ + 1)⌋ + 4 budget.
    """
    if n < 1:
        raise ValueError("prefix code is defined for integers >= 1")
    body = bin(n)[3:]          # digits of n past the leading 1
    length = len(body) + 1     # = floor(log2 n) + 1
    lenbits = bin(length)[3:]  # digits of the length past its leading 1
    return "0" * len(lenbits) + "1" + lenbits + body


def prefix_length(n: int) -> int:
    """Codeword length of ``prefix_encode(n)`` without building it."""
    if n < 1:
        raise ValueError("prefix code is defined for integers >= 1")
    ell = n.bit_length() - 1          # floor(log2 n)
    return ell + 2 * ((ell + 1).bit_length() - 1) + 1


def prefix_decode(bits: str, start: int = 0):
    """Decode one codeword from ``bits`` at ``start``; returns (n, next_index)."""
    i = start
    zeros = 0
    while i < len(bits) and bits[i] == "0":
        zeros += 1
        i += 1
    if i >= len(bits):
        raise ValueError("truncated codeword (length-of-length field)")
    i += 1  # the terminating '1'
    if i + zeros > len(bits):
        raise ValueError("truncated codeword (length field)")
    length = int("1" + bits[i : i + zeros], 2)
    i += zeros
    body_len = length - 1
    if i + body_len > len(bits):
        raise ValueError("truncated codeword (body)")
    value = int("1" + bits[i : i + body_len], 2) if body_len else 1
    return value, i + body_len
