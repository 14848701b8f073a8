"""Two-layer Markov simulation of attitude spread under intervention.

Layer 0 of the graph carries attitudes (positive / neutral / negative);
layer 1 carries susceptibility (susceptible / insusceptible). One step
updates every node synchronously from the previous state:

relation layer
    positive -> neutral with ``beta * lambda_N``; negative -> neutral with
    ``beta * lambda_P``; neutral -> positive with ``r1 * lambda_P`` or ->
    negative with ``r1 * lambda_N`` (one uniform draw, so ``r1 < 0.5``
    keeps the pair a valid distribution).
similarity layer
    susceptible -> insusceptible with ``r2``; insusceptible -> susceptible
    with ``lambda_S``; afterwards every node toggles with ``s_rate``.

Exposure: ``lambda_P = 1 - prod_j (1 - g1 * alpha * a_ij [j positive])`` with
``g1 = gamma1`` for susceptible nodes and 1 otherwise (``lambda_N``
likewise); ``lambda_S = 1 - prod_j (1 - g2 * diff_rate * a_ij [j
susceptible])`` on the similarity layer with ``g2 = gamma2`` for neutral
nodes and 1 otherwise.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import _backend
from .errors import InputError, InvalidConfig, LengthMismatch
from .influence import top_influencers
from .metrics import Attitude

POS, NEU, NEG = int(Attitude.POSITIVE), int(Attitude.NEUTRAL), int(Attitude.NEGATIVE)
STATE_COLUMNS = ("pos", "neu", "neg", "susceptible", "insusceptible")


@dataclass
class SimParams:
    """Rates default to the values used for the 775-node comment network."""

    alpha: float = 0.3
    beta: float = 0.2
    r1: float = 0.3
    gamma1: float = 1.5
    diff_rate: float = 0.3
    s_rate: float = 0.2
    r2: float = 0.2
    gamma2: float = 1.5
    theta: float = 0.1
    eta: float = 0.0
    epochs: int = 50
    rng_seed: int = 0
    intervention_attitude: int = POS
    freeze_intervened: bool = False

    def validate(self) -> None:
        bad = []
        for name in ("alpha", "beta", "diff_rate", "r2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                bad.append(f"{name}={v} must lie in [0, 1]")
        if not 0.0 <= self.r1 < 0.5:
            bad.append(f"r1={self.r1} must lie in [0, 0.5)")
        if not 0.0 <= self.s_rate < 1.0:
            bad.append(f"s_rate={self.s_rate} must lie in [0, 1)")
        for name in ("theta", "eta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                bad.append(f"{name}={v} must lie in [0, 1]")
        if self.gamma1 < 1 or self.gamma1 * self.alpha > 1 + 1e-12:
            bad.append(f"gamma1={self.gamma1} must lie in [1, 1/alpha]")
        if self.gamma2 < 1 or self.gamma2 * self.diff_rate > 1 + 1e-12:
            bad.append(f"gamma2={self.gamma2} must lie in [1, 1/diff_rate]")
        if self.epochs < 0:
            bad.append("epochs must be non-negative")
        if self.intervention_attitude not in (POS, NEU, NEG):
            bad.append("intervention_attitude must be an attitude code")
        if bad:
            raise InvalidConfig("; ".join(bad))

    def rates(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in ("alpha", "beta", "r1", "gamma1", "diff_rate",
                                  "s_rate", "r2", "gamma2")}


@dataclass
class SimulationState:
    attitudes: np.ndarray
    susceptible: np.ndarray
    step: int = 0
    intervened: np.ndarray | None = None

    def fractions(self) -> np.ndarray:
        n = self.attitudes.size
        att = np.bincount(self.attitudes, minlength=3) / n
        sus = self.susceptible.sum() / n
        return np.array([att[POS], att[NEU], att[NEG], sus, 1.0 - sus])


@dataclass
class Trajectory:
    records: np.ndarray
    final: SimulationState

    def column(self, name: str) -> np.ndarray:
        return self.records[:, STATE_COLUMNS.index(name)]


@dataclass
class Network:
    """CSR neighbour lists of the relation and similarity layers."""

    indptr1: np.ndarray
    indices1: np.ndarray
    indptr2: np.ndarray
    indices2: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.indptr1.size - 1

    @classmethod
    def from_graph(cls, g) -> "Network":
        if isinstance(g, cls):
            return g
        if g.n_layers < 2:
            raise InputError("the simulation needs a relation layer and a similarity layer")
        return cls(*_csr(g.layers[0]), *_csr(g.layers[1]))


def _csr(adj):
    rows, cols = np.nonzero(adj)
    indptr = np.zeros(adj.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=adj.shape[0]), out=indptr[1:])
    return indptr, cols.astype(np.int64)


def parse_attitudes(values) -> np.ndarray:
    return np.array([int(Attitude.parse(v)) for v in values], dtype=np.int8)


def init_states(attitudes, influence, params: SimParams, rng=None, targets=None,
                n_nodes: int | None = None) -> SimulationState:
    """Apply the intervention and draw initial susceptibility.

    The ``ceil(eta * n)`` most influential nodes among ``targets`` (all nodes
    when omitted) take ``params.intervention_attitude``; a uniformly drawn
    ``round(theta * N)`` nodes start insusceptible.
    """
    att = parse_attitudes(attitudes)
    n = att.size
    if n_nodes is not None and n_nodes != n:
        raise LengthMismatch(f"{n} attitudes for {n_nodes} nodes")
    scores = np.asarray(getattr(influence, "scores", influence), dtype=float)
    if scores.size != n:
        raise LengthMismatch(f"{scores.size} influence scores for {n} nodes")
    rng = rng if rng is not None else np.random.default_rng(params.rng_seed)
    chosen = top_influencers(scores, params.eta, candidates=targets)
    intervened = np.zeros(n, dtype=bool)
    intervened[chosen] = True
    att = att.copy()
    att[chosen] = params.intervention_attitude
    sus = np.ones(n, dtype=np.int8)
    n_insus = int(round(params.theta * n))
    sus[rng.choice(n, size=n_insus, replace=False)] = 0
    return SimulationState(att, sus, 0, intervened)


def exposure(state: SimulationState, g, params: SimParams, kernels=None):
    """``(lambda_P, lambda_N, lambda_S)`` for every node."""
    net = Network.from_graph(g)
    k = kernels or _backend.kernels
    return k.transition_rates(net.indptr1, net.indices1, net.indptr2, net.indices2,
                              state.attitudes, state.susceptible, params.alpha,
                              params.gamma1, params.diff_rate, params.gamma2)


def lambda_p(node: int, state, g, params, kernels=None) -> float:
    return float(exposure(state, g, params, kernels)[0][node])


def lambda_n(node: int, state, g, params, kernels=None) -> float:
    return float(exposure(state, g, params, kernels)[1][node])


def lambda_s(node: int, state, g, params, kernels=None) -> float:
    return float(exposure(state, g, params, kernels)[2][node])


def step(state: SimulationState, g, params: SimParams, rng, kernels=None) -> SimulationState:
    net = Network.from_graph(g)
    k = kernels or _backend.kernels
    n = state.attitudes.size
    u = rng.random((3, n))
    frozen = (state.intervened if params.freeze_intervened and state.intervened is not None
              else np.zeros(n, dtype=bool))
    att, sus = k.sim_step(net.indptr1, net.indices1, net.indptr2, net.indices2,
                          state.attitudes, state.susceptible, frozen.astype(np.uint8),
                          u[0], u[1], u[2], **params.rates())
    return SimulationState(np.asarray(att, dtype=np.int8), np.asarray(sus, dtype=np.int8),
                           state.step + 1, state.intervened)


def run(g, attitudes, influence, params: SimParams, targets=None, kernels=None) -> Trajectory:
    """Initialise, then take ``params.epochs`` synchronous steps."""
    params.validate()
    net = Network.from_graph(g)
    rng = np.random.default_rng(params.rng_seed)
    state = init_states(attitudes, influence, params, rng, targets, net.n_nodes)
    records = [state.fractions()]
    for _ in range(params.epochs):
        state = step(state, net, params, rng, kernels)
        records.append(state.fractions())
    return Trajectory(np.array(records), state)


def replicate_seed(master: int, replicate: int) -> int:
    """Seed for one replicate; shared by every grid cell (common random numbers)."""
    return int(np.random.SeedSequence([master, replicate]).generate_state(1)[0])


def _sweep_cell(args):
    net, attitudes, scores, params, targets, communities, n_comm = args
    final = run(net, attitudes, scores, params, targets).final.attitudes
    out = np.zeros((n_comm, 3))
    for c in range(n_comm):
        members = final[communities == c]
        out[c] = np.bincount(members, minlength=3)[:3] / max(members.size, 1)
    return out


def intervention_sweep(g, attitudes, influence, base_params: SimParams, etas, thetas,
                       seeds: int, communities, target_community: int | None = None,
                       workers: int = 1) -> list:
    """Grid over intervention ratio and initial insusceptible fraction.

    Returns one dict per ``(eta, theta, community)`` holding the mean and
    population std over ``seeds`` replicates of the final attitude shares.
    Only ``target_community`` members are intervened on (all nodes when
    ``None``).
    """
    etas, thetas = list(etas), list(thetas)
    if not etas or not thetas or seeds < 1:
        raise InputError("sweep grids must be non-empty and seeds >= 1")
    net = Network.from_graph(g)
    comm = np.asarray(communities, dtype=int)
    if comm.size != net.n_nodes:
        raise LengthMismatch("community labels do not match the node count")
    n_comm = int(comm.max()) + 1
    targets = None if target_community is None else np.flatnonzero(comm == target_community)
    scores = np.asarray(getattr(influence, "scores", influence), dtype=float)
    att = parse_attitudes(attitudes)
    tasks = []
    for eta in etas:
        for theta in thetas:
            for r in range(seeds):
                p = replace(base_params, eta=float(eta), theta=float(theta),
                            rng_seed=replicate_seed(base_params.rng_seed, r))
                p.validate()
                tasks.append((net, att, scores, p, targets, comm, n_comm))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_sweep_cell(t) for t in tasks]
    shares = np.array(results).reshape(len(etas), len(thetas), seeds, n_comm, 3)
    rows = []
    for i, eta in enumerate(etas):
        for j, theta in enumerate(thetas):
            mean = shares[i, j].mean(axis=0)
            std = shares[i, j].std(axis=0)
            for c in range(n_comm):
                rows.append({
                    "eta": float(eta), "theta": float(theta), "community": c,
                    "pos_mean": mean[c, POS], "pos_std": std[c, POS],
                    "neg_mean": mean[c, NEG], "neg_std": std[c, NEG],
                    "neu_mean": mean[c, NEU], "neu_std": std[c, NEU],
                })
    return rows
