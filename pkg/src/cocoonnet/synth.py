"""Multi-layer mixture stochastic block model generators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .metrics import Attitude
from .netcore import MultiLayerGraph


@dataclass
class MLSBMConfig:
    """Each layer picks a partition ``psi_l ~ pi``; edges are Bernoulli with
    probability ``P_psi[z_i, z_j]`` under that partition's memberships."""

    n_nodes: int
    n_layers: int
    block_matrices: list
    partition_probs: list | None = None
    membership_probs: list | None = None
    rng_seed: int = 0

    @property
    def n_partitions(self) -> int:
        return len(self.block_matrices)

    @property
    def communities_per_partition(self) -> list:
        return [np.asarray(p).shape[0] for p in self.block_matrices]

    def validate(self) -> None:
        problems = []
        if self.n_nodes < 2:
            problems.append("n_nodes must be at least 2")
        if self.n_layers < 1:
            problems.append("n_layers must be at least 1")
        if not self.block_matrices:
            problems.append("at least one block matrix is required")
        for m, p in enumerate(self.block_matrices):
            p = np.asarray(p, dtype=float)
            if p.ndim != 2 or p.shape[0] != p.shape[1]:
                problems.append(f"block matrix {m} is not square")
            elif not np.allclose(p, p.T, atol=0):
                problems.append(f"block matrix {m} is not symmetric")
            elif np.any(p < 0) or np.any(p > 1):
                problems.append(f"block matrix {m} has entries outside [0, 1]")
        pi = self.pi()
        if pi.shape != (self.n_partitions,):
            problems.append("partition_probs needs one entry per block matrix")
        elif np.any(pi < 0) or abs(pi.sum() - 1) > 1e-12:
            problems.append("partition_probs must be non-negative and sum to 1")
        for m, rho in enumerate(self.rhos()):
            if rho.shape != (self.communities_per_partition[m],):
                problems.append(f"membership_probs[{m}] has the wrong length")
            elif np.any(rho < 0) or abs(rho.sum() - 1) > 1e-12:
                problems.append(f"membership_probs[{m}] must be non-negative and sum to 1")
        if problems:
            raise InvalidConfig("; ".join(problems))

    def pi(self) -> np.ndarray:
        if self.partition_probs is None:
            return np.full(self.n_partitions, 1.0 / max(self.n_partitions, 1))
        return np.asarray(self.partition_probs, dtype=float)

    def rhos(self) -> list:
        if self.membership_probs is None:
            return [np.full(k, 1.0 / k) for k in self.communities_per_partition]
        return [np.asarray(r, dtype=float) for r in self.membership_probs]

    def expected_mean_degree(self, partition: int = 0) -> float:
        """``(N - 1) rho^T P rho`` for layers drawn from ``partition``."""
        p = np.asarray(self.block_matrices[partition], dtype=float)
        rho = self.rhos()[partition]
        return float((self.n_nodes - 1) * rho @ p @ rho)


@dataclass
class MLSBMSample:
    graph: MultiLayerGraph
    layer_partitions: np.ndarray
    memberships: list = field(default_factory=list)


def sample_layer(z, p, rng) -> np.ndarray:
    """One symmetric Bernoulli layer for memberships ``z`` and block matrix ``p``."""
    prob = np.asarray(p, dtype=float)[np.ix_(z, z)]
    n = z.size
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    return (upper | upper.T).astype(float)


def generate_mlsbm(cfg: MLSBMConfig) -> MLSBMSample:
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    pi = cfg.pi()
    psi = rng.choice(cfg.n_partitions, size=cfg.n_layers, p=pi)
    memberships = [
        rng.choice(rho.size, size=cfg.n_nodes, p=rho) for rho in cfg.rhos()
    ]
    layers = [
        sample_layer(memberships[m], cfg.block_matrices[m], rng) for m in psi
    ]
    graph = MultiLayerGraph(layers, labels=memberships[0].copy())
    return MLSBMSample(graph, psi, memberships)


def planted_block_matrix(n_nodes, k=2, mean_degree=10.0, ratio=6.0) -> np.ndarray:
    """Assortative ``k``-block matrix with ``p_in = ratio * p_out`` tuned so the
    expected mean degree under equal community priors is ``mean_degree``."""
    # (N-1) rho^T P rho = (N-1)/k * (p_in + (k-1) p_out)
    p_out = mean_degree * k / ((n_nodes - 1) * (ratio + k - 1))
    p = np.full((k, k), p_out)
    np.fill_diagonal(p, ratio * p_out)
    if p.max() > 1:
        raise InvalidConfig("mean degree too large for the requested ratio")
    return p


def planted_config(n_nodes, n_layers=3, k=2, mean_degree=10.0, ratio=6.0, seed=0) -> MLSBMConfig:
    return MLSBMConfig(
        n_nodes=n_nodes,
        n_layers=n_layers,
        block_matrices=[planted_block_matrix(n_nodes, k, mean_degree, ratio)],
        rng_seed=seed,
    )


SUITE_SIZES = (300, 400, 500)


def paper_benchmark_suite(seed: int = 0) -> list:
    """Three planted graphs: N in {300, 400, 500}, 3 layers, 2 communities,
    mean layer degree about 10."""
    out = []
    for idx, n in enumerate(SUITE_SIZES):
        cfg = planted_config(n, seed=int(np.random.SeedSequence([seed, idx]).generate_state(1)[0]))
        out.append((generate_mlsbm(cfg).graph, f"sim{n}"))
    return out


# --- cocoon demo network ---------------------------------------------------

#: per-community attitude mix (positive, neutral, negative); community 0 is
#: the negative cocoon, 1 is mixed, 2 leans positive
COCOON_MIX = ((0.15, 0.0737, 0.7763), (1 / 3, 1 / 3, 1 / 3), (0.66, 0.17, 0.17))


@dataclass
class CocoonNetwork:
    graph: MultiLayerGraph
    communities: np.ndarray
    attitudes: np.ndarray


def cocoon_network(n_nodes=775, sizes=(0.4, 0.3, 0.3), relation_degree=4.0,
                   similarity_degree=4.0, ratio=30.0, mix=COCOON_MIX, seed=0) -> CocoonNetwork:
    """Two-layer network shaped like a reply + similarity comment graph.

    Layer 0 (relations) and layer 1 (similarity) are drawn from the same
    planted partition; attitudes are assigned per community in the
    proportions of ``mix``.
    """
    rng = np.random.default_rng(seed)
    sizes = np.asarray(sizes, dtype=float)
    counts = np.floor(sizes / sizes.sum() * n_nodes).astype(int)
    counts[0] += n_nodes - counts.sum()
    z = np.repeat(np.arange(counts.size), counts)
    k = counts.size
    layers = []
    for degree in (relation_degree, similarity_degree):
        p = planted_block_matrix(n_nodes, k, degree, ratio)
        layers.append(sample_layer(z, p, rng))
    att = np.empty(n_nodes, dtype=int)
    for c in range(k):
        idx = np.flatnonzero(z == c)
        shares = np.asarray(mix[c], dtype=float)
        n_c = idx.size
        n_pos = int(round(shares[0] * n_c))
        n_neu = int(round(shares[1] * n_c))
        codes = np.full(n_c, int(Attitude.NEGATIVE))
        codes[:n_pos] = int(Attitude.POSITIVE)
        codes[n_pos:n_pos + n_neu] = int(Attitude.NEUTRAL)
        att[idx] = rng.permutation(codes)
    graph = MultiLayerGraph(layers, labels=z.copy())
    return CocoonNetwork(graph, z, att)
