"""Damped eigenvector-centrality influence scores on a multi-layer graph."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .netcore import MultiLayerGraph

log = logging.getLogger(__name__)


@dataclass
class InfluenceScores:
    scores: np.ndarray
    iterations_used: int
    converged: bool
    isolated: int = 0


def transition_matrix(g: MultiLayerGraph, degree_diagonal: bool = True):
    """Row-normalised union matrix ``M = D~^-1 A~``.

    Each layer contributes ``diag(k) + A`` (or plain ``A`` when
    ``degree_diagonal`` is false); layers are merged by elementwise maximum.
    Rows of nodes with no edges in any layer stay zero. Returns ``(M, n_zero_rows)``.
    """
    merged = np.zeros((g.n_nodes, g.n_nodes))
    for a in g.layers:
        layer = a + np.diag(a.sum(axis=1)) if degree_diagonal else a
        np.maximum(merged, layer, out=merged)
    rowsum = merged.sum(axis=1)
    zero = rowsum == 0
    inv = np.divide(1.0, rowsum, out=np.zeros_like(rowsum), where=~zero)
    return merged * inv[:, None], int(zero.sum())


def degree_centrality(g: MultiLayerGraph) -> np.ndarray:
    dc = g.degrees().sum(axis=0) / max(g.n_nodes - 1, 1)
    total = dc.sum()
    return dc / total if total > 0 else dc


def eigen_influence(g: MultiLayerGraph, damping: float = 0.85, eps: float = 1e-8,
                    max_iter: int = 1000, degree_diagonal: bool = True) -> InfluenceScores:
    """Iterate ``EC <- damping * M^T EC + (1 - damping) * EC`` from degree centrality.

    A node collects the share ``m_ji`` of each neighbour's score, so the
    fixed point is the stationary distribution of the random walk on ``M``
    and total score is conserved on connected nodes. Stops once the
    max-norm update drops below ``eps``.
    """
    if all(a.sum() == 0 for a in g.layers):
        raise InputError("influence needs at least one edge")
    m, isolated = transition_matrix(g, degree_diagonal)
    if isolated:
        log.warning("%d nodes have no edges; their scores decay to zero", isolated)
    mt = m.T
    ec = degree_centrality(g)
    converged = False
    it = 0
    while it < max_iter:
        nxt = damping * (mt @ ec) + (1.0 - damping) * ec
        it += 1
        delta = np.max(np.abs(nxt - ec))
        ec = nxt
        if delta < eps:
            converged = True
            break
    return InfluenceScores(ec, it, converged, isolated)


def rank_order(scores) -> np.ndarray:
    """Node ids by descending score, ties to the lower id."""
    s = np.asarray(getattr(scores, "scores", scores), dtype=float)
    return np.lexsort((np.arange(s.size), -s))


def top_count(fraction: float, n: int) -> int:
    if not 0.0 <= fraction <= 1.0:
        raise InputError(f"fraction must lie in [0, 1], got {fraction}")
    # guard against 0.2 * 775 = 155.00000000000003
    return min(n, math.ceil(round(fraction * n, 9)))


def top_influencers(scores, fraction: float, n: int | None = None, candidates=None) -> np.ndarray:
    """The ``ceil(fraction * n)`` highest-scoring nodes in descending order.

    With ``candidates`` the ranking is restricted to those node ids and ``n``
    defaults to their number.
    """
    s = np.asarray(getattr(scores, "scores", scores), dtype=float)
    order = rank_order(s)
    if candidates is not None:
        keep = np.zeros(s.size, dtype=bool)
        keep[np.asarray(candidates, dtype=int)] = True
        order = order[keep[order]]
    n = order.size if n is None else n
    return order[: top_count(fraction, n)]


def max_neighbor_counts(g: MultiLayerGraph) -> np.ndarray:
    """Size of each node's neighbourhood union over all layers."""
    union = np.zeros((g.n_nodes, g.n_nodes), dtype=bool)
    for a in g.layers:
        union |= a > 0
    return union.sum(axis=1)
