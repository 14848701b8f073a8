"""Partition quality indices for multi-layer graphs.

All logarithms are natural. Modularity functions take an assignment that is
shared by every layer.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import EmptyLayer, InputError, LengthMismatch, NegativeFeature


class Attitude(IntEnum):
    POSITIVE = 0
    NEUTRAL = 1
    NEGATIVE = 2

    @classmethod
    def parse(cls, value) -> "Attitude":
        """Accept an enum, its integer code, or a name such as ``"neg"``."""
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            name = member.name.lower()
            if text in (name, name[:3], str(int(member))):
                return member
        raise InputError(f"unknown attitude {value!r}")


ATTITUDE_NAMES = ("positive", "neutral", "negative")


@dataclass(frozen=True)
class CommunityAssignment:
    """Dense community ids ``0..k-1``, one per node."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise InputError("an assignment needs a non-empty label vector")
        uniq = np.unique(labels)
        if uniq[0] != 0 or uniq[-1] != uniq.size - 1:
            raise InputError("community ids must be dense in 0..k-1")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels) -> "CommunityAssignment":
        """Densify arbitrary labels, numbering communities by first appearance."""
        labels = np.asarray(labels).reshape(-1)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=int)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        return cls(rank[inverse.reshape(-1)])

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    def __len__(self):
        return self.labels.size

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.labels == community)


def _as_assignment(x) -> CommunityAssignment:
    if isinstance(x, CommunityAssignment):
        return x
    return CommunityAssignment.from_labels(x)


def _check_len(assignment, n):
    if len(assignment) != n:
        raise LengthMismatch(f"assignment has {len(assignment)} labels for {n} nodes")


def confusion_matrix(a, b) -> np.ndarray:
    a, b = _as_assignment(a), _as_assignment(b)
    if len(a) != len(b):
        raise LengthMismatch("partitions have different lengths")
    m = np.zeros((a.k, b.k))
    np.add.at(m, (a.labels, b.labels), 1.0)
    return m


def nmi(a, b) -> float:
    """Normalised mutual information ``2 I(A;B) / (H(A) + H(B))``.

    Two single-community partitions count as identical (NMI 1).
    """
    m = confusion_matrix(a, b)
    n = m.sum()
    row, col = m.sum(axis=1), m.sum(axis=0)
    h_a = -np.sum(row / n * np.log(row / n))
    h_b = -np.sum(col / n * np.log(col / n))
    if h_a + h_b == 0:
        return 1.0
    nz = m > 0
    mi = np.sum(m[nz] / n * np.log(n * m[nz] / np.outer(row, col)[nz]))
    return float(np.clip(2.0 * mi / (h_a + h_b), 0.0, 1.0))


def _same(labels) -> np.ndarray:
    return (labels[:, None] == labels[None, :]).astype(float)


def _within(adj, z: CommunityAssignment) -> float:
    """Total edge weight inside communities, counting both directions."""
    return float(np.sum(adj * _same(z.labels)))


def _community_sums(values, z: CommunityAssignment) -> np.ndarray:
    return np.bincount(z.labels, weights=values, minlength=z.k)


def newman_q(adj, assignment) -> float:
    """``(1/2m) sum_ij (A_ij - k_i k_j / 2m) [z_i = z_j]``.

    Evaluated as ``(within - sum_c K_c^2 / 2m) / 2m`` with community degree
    sums ``K_c``, which is exact for integer graphs.
    """
    adj = np.asarray(adj, dtype=float)
    z = _as_assignment(assignment)
    _check_len(z, adj.shape[0])
    k = adj.sum(axis=1)
    two_m = k.sum()
    if two_m == 0:
        raise EmptyLayer("graph has no edges")
    kc = _community_sums(k, z)
    return float((_within(adj, z) - np.sum(kc * kc) / two_m) / two_m)


def q_coupled(g, assignment, gamma_s=None, omega: float = 0.0) -> float:
    """Modularity with uniform inter-layer coupling ``omega``.

    Every node is coupled to its own copy in every other layer. Because the
    assignment is shared across layers, all coupling terms fall within a
    community.
    """
    z = _as_assignment(assignment)
    _check_len(z, g.n_nodes)
    n_layers = g.n_layers
    gammas = np.ones(n_layers) if gamma_s is None else np.broadcast_to(
        np.asarray(gamma_s, dtype=float), (n_layers,))
    intra = 0.0
    total = 0.0
    for a, gamma in zip(g.layers, gammas):
        k = a.sum(axis=1)
        two_m = k.sum()
        if two_m == 0:
            raise EmptyLayer("a layer has no edges")
        kc = _community_sums(k, z)
        intra += _within(a, z) - gamma * np.sum(kc * kc) / two_m
        total += two_m
    coupling = omega * g.n_nodes * n_layers * (n_layers - 1)
    return float((intra + coupling) / (total + coupling))


def q_nm(g, assignment) -> float:
    """Layer-averaged Newman-Girvan modularity (multi-normalised average)."""
    z = _as_assignment(assignment)
    _check_len(z, g.n_nodes)
    return float(np.mean([newman_q(a, z) for a in g.layers]))


def q_sd(g, assignment) -> float:
    """Layer-averaged modularity with a shared-degree null model."""
    z = _as_assignment(assignment)
    _check_len(z, g.n_nodes)
    degs = g.degrees()
    counts = g.edge_counts()
    if np.any(counts == 0):
        raise EmptyLayer("a layer has no edges")
    sc = _community_sums(degs.sum(axis=0), z)
    total = counts.sum()
    expected = np.sum(sc * sc) / (2.0 * total**2)
    vals = [
        (_within(a, z) - m_s * expected) / (2.0 * m_s)
        for a, m_s in zip(g.layers, counts)
    ]
    return float(np.mean(vals))


def _check_features(features, n):
    h = np.asarray(features, dtype=float)
    if h.ndim != 2 or h.shape[0] != n:
        raise LengthMismatch(f"features must have {n} rows")
    if np.any(h < 0):
        raise NegativeFeature("similarity indices need non-negative features")
    return h


def kl_pair_matrix(h) -> np.ndarray:
    """``sim[i, j] = sum_k h_ik log((h_ik + 1) / (h_jk + 1))``."""
    logs = np.log1p(h)
    return np.sum(h * logs, axis=1)[:, None] - h @ logs.T


def js_pair_matrix(h) -> np.ndarray:
    """``KL(H_i || M_ij) + KL(H_j || M_ij)`` for the midpoint ``M_ij``."""
    n = h.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        mid = np.log(h[i] + h + 2.0)
        term_i = np.sum(h[i] * (np.log(2.0) + np.log1p(h[i]) - mid), axis=1)
        term_j = np.sum(h * (np.log(2.0) + np.log1p(h) - mid), axis=1)
        out[i] = term_i + term_j
    return out


def _community_average(pairs, z: CommunityAssignment) -> float:
    scores = []
    for c in range(z.k):
        idx = z.members(c)
        scores.append(pairs[np.ix_(idx, idx)].sum() / idx.size**2)
    return float(np.mean(scores))


def kl_similarity_index(features, assignment) -> float:
    """Mean within-community pairwise KL-style divergence (lower is tighter)."""
    z = _as_assignment(assignment)
    h = _check_features(features, len(z))
    return _community_average(kl_pair_matrix(h), z)


def js_similarity_index(features, assignment) -> float:
    """Mean within-community pairwise JS-style divergence (lower is tighter)."""
    z = _as_assignment(assignment)
    h = _check_features(features, len(z))
    return 0.5 * _community_average(js_pair_matrix(h), z)


def attitude_shares(assignment, attitudes) -> np.ndarray:
    """Rows: communities. Columns: positive, neutral, negative fractions."""
    z = _as_assignment(assignment)
    att = np.array([int(Attitude.parse(a)) for a in attitudes])
    _check_len(z, att.size)
    table = np.zeros((z.k, 3))
    np.add.at(table, (z.labels, att), 1.0)
    return table / table.sum(axis=1, keepdims=True)


def evaluate(g, assignment, truth=None) -> dict:
    """The index bundle written by the ``metrics`` and ``detect`` commands."""
    out = {}
    if truth is not None:
        out["nmi"] = nmi(truth, assignment)
    out["q_nm"] = q_nm(g, assignment)
    out["q_sd"] = q_sd(g, assignment)
    if g.features is not None:
        out["kl_index"] = kl_similarity_index(g.features, assignment)
        out["js_index"] = js_similarity_index(g.features, assignment)
    else:
        out["kl_index"] = None
        out["js_index"] = None
    return out
