"""Graph auto-encoders that reconstruct the modularity tensor.

Encoder (shared by both variants)::

    h0_m = tanh(A_m B_m W1_m)            one GCN per layer, input B_m
    h    = [h0_1 ... h0_L]               fused first-stage features
    h_m  = tanh(A_m h W2_m)              second GCN stage per layer

Decoders:

* ``ige`` reconstructs every layer from its own embedding,
  ``B_m ~ h_m h_m^T``; loss ``sum_m ||h_m h_m^T - B_m||_F^2``.
* ``mge`` reconstructs every layer from the single fused matrix
  ``H = [h_1 ... h_L]``, ``B_m ~ tanh(H H^T)``; loss
  ``sum_m ||B_m - tanh(H H^T)||_F^2``.

Gradients are derived by hand (reverse mode) and checked against central
finite differences by :func:`gradient_check`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidConfig, NonFiniteLoss, ShapeMismatch
from .metrics import CommunityAssignment, q_nm
from .netcore import ModularityTensor, MultiLayerGraph, build_modularity_tensor
from .numerics import kmeans_fit

VARIANTS = ("ige", "mge")
DEFAULT_DECODER = {"ige": "linear", "mge": "tanh"}


@dataclass
class TrainConfig:
    variant: str = "mge"
    hidden_dim: int = 32
    embed_dim: int = 16
    epochs: int = 400
    learning_rate: float = 1e-3
    layer_weights: tuple | None = None
    rng_seed: int = 0
    decoder: str | None = None
    optimizer: str = "adam"
    init_scale: float = 0.03

    def validate(self, n_layers: int | None = None) -> None:
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.decoder not in (None, "linear", "tanh"):
            raise InvalidConfig(f"decoder must be 'linear' or 'tanh', got {self.decoder!r}")
        if self.optimizer not in ("gd", "adam"):
            raise InvalidConfig(f"optimizer must be 'gd' or 'adam', got {self.optimizer!r}")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be at least 1")
        if self.hidden_dim < 1 or self.embed_dim < 1:
            raise InvalidConfig("hidden_dim and embed_dim must be positive")
        if not self.learning_rate > 0:
            raise InvalidConfig("learning_rate must be positive")
        if self.layer_weights is not None:
            w = np.asarray(self.layer_weights, dtype=float)
            if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
                raise InvalidConfig("layer_weights must be positive and sum to 1")
            if n_layers is not None and w.size != n_layers:
                raise InvalidConfig(f"layer_weights needs {n_layers} entries")

    @property
    def decoder_kind(self) -> str:
        return self.decoder or DEFAULT_DECODER[self.variant]

    def loss_weights(self, n_layers: int) -> np.ndarray:
        """Per-layer loss multipliers ``L * alpha_l`` (all ones when uniform)."""
        if self.layer_weights is None:
            return np.ones(n_layers)
        return n_layers * np.asarray(self.layer_weights, dtype=float)


@dataclass
class GaeWeights:
    w1: list
    w2: list
    seed: int | None = None

    def copy(self) -> "GaeWeights":
        return GaeWeights([w.copy() for w in self.w1], [w.copy() for w in self.w2], self.seed)

    def flat(self) -> list:
        return self.w1 + self.w2


@dataclass
class EmbeddingSet:
    per_layer: list
    fused: np.ndarray
    loss_history: list = field(default_factory=list)
    weights: GaeWeights | None = None

    @property
    def features(self) -> np.ndarray:
        """Node features handed to the clustering step, ``N x (L * d2)``."""
        return self.fused


def init_weights(n_in: int, n_layers: int, hidden_dim: int, embed_dim: int,
                 seed: int = 0, scale: float = 0.1) -> GaeWeights:
    rng = np.random.default_rng(seed)
    w1 = [rng.uniform(-scale, scale, (n_in, hidden_dim)) for _ in range(n_layers)]
    w2 = [rng.uniform(-scale, scale, (n_layers * hidden_dim, embed_dim)) for _ in range(n_layers)]
    return GaeWeights(w1, w2, seed)


def gcn_layer(a, x, w) -> np.ndarray:
    """``tanh(A X W)``."""
    a, x, w = (np.asarray(m, dtype=float) for m in (a, x, w))
    if a.shape[1] != x.shape[0] or x.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} x {x.shape} x {w.shape}")
    return np.tanh(a @ x @ w)


def _check_weights(w: GaeWeights, n_layers, n_in):
    if len(w.w1) != n_layers or len(w.w2) != n_layers:
        raise ShapeMismatch(f"weights are for {len(w.w1)} layers, graph has {n_layers}")
    d1 = w.w1[0].shape[1]
    for w1, w2 in zip(w.w1, w.w2):
        if w1.shape != (n_in, d1) or w2.shape[0] != n_layers * d1:
            raise ShapeMismatch("inconsistent weight shapes")


def _forward(adjs, xs, w: GaeWeights):
    h0 = [np.tanh(x @ w1) for x, w1 in zip(xs, w.w1)]
    h = np.concatenate(h0, axis=1)
    ys = [a @ h for a in adjs]
    hs = [np.tanh(y @ w2) for y, w2 in zip(ys, w.w2)]
    return h0, h, ys, hs


def _stage_inputs(g: MultiLayerGraph, bt: ModularityTensor):
    if bt.n_layers != g.n_layers:
        raise ShapeMismatch("modularity tensor and graph disagree on layer count")
    return [a @ b for a, b in zip(g.layers, bt.mats)]


def encode(g: MultiLayerGraph, bt: ModularityTensor, w: GaeWeights, variant: str = "mge",
           xs=None) -> EmbeddingSet:
    """Run the two-stage encoder; ``variant`` only affects documentation of
    which output the decoder consumes (both are returned)."""
    if variant not in VARIANTS:
        raise InvalidConfig(f"unknown variant {variant!r}")
    _check_weights(w, g.n_layers, g.n_nodes)
    xs = _stage_inputs(g, bt) if xs is None else xs
    _, _, _, hs = _forward(g.layers, xs, w)
    return EmbeddingSet(hs, np.concatenate(hs, axis=1), weights=w)


def _decode(s, decoder):
    return np.tanh(s) if decoder == "tanh" else s


def loss_ige(bt: ModularityTensor, per_layer, decoder: str = "linear", weights=None) -> float:
    """``sum_l w_l ||dec(Phi_l Phi_l^T) - B_l||_F^2``."""
    if len(per_layer) != bt.n_layers:
        raise ShapeMismatch("one embedding per layer is required")
    weights = np.ones(bt.n_layers) if weights is None else weights
    total = 0.0
    for b, phi, wl in zip(bt.mats, per_layer, weights):
        if phi.shape[0] != b.shape[0]:
            raise ShapeMismatch("embedding rows must match node count")
        r = _decode(phi @ phi.T, decoder) - b
        total += wl * np.sum(r * r)
    return float(total)


def loss_mge(bt: ModularityTensor, fused, decoder: str = "tanh", weights=None) -> float:
    """``sum_l w_l ||B_l - dec(H H^T)||_F^2``."""
    if fused.shape[0] != bt.mats[0].shape[0]:
        raise ShapeMismatch("embedding rows must match node count")
    weights = np.ones(bt.n_layers) if weights is None else weights
    rec = _decode(fused @ fused.T, decoder)
    return float(sum(wl * np.sum((b - rec) ** 2) for b, wl in zip(bt.mats, weights)))


def loss_and_grads(adjs, xs, bmats, w: GaeWeights, variant, decoder, lw):
    """Loss and its gradient with respect to every weight matrix."""
    n_layers = len(adjs)
    h0, h, ys, hs = _forward(adjs, xs, w)
    d2 = hs[0].shape[1]

    if variant == "ige":
        loss = 0.0
        d_hs = []
        for b, phi, wl in zip(bmats, hs, lw):
            s = phi @ phi.T
            rec = _decode(s, decoder)
            r = rec - b
            loss += wl * np.sum(r * r)
            g_s = 2.0 * wl * r
            if decoder == "tanh":
                g_s = g_s * (1.0 - rec * rec)
            # d/dPhi of <G, Phi Phi^T> for symmetric G is 2 G Phi
            d_hs.append(2.0 * g_s @ phi)
    else:
        fused = np.concatenate(hs, axis=1)
        s = fused @ fused.T
        rec = _decode(s, decoder)
        loss = 0.0
        g_s = np.zeros_like(s)
        for b, wl in zip(bmats, lw):
            r = rec - b
            loss += wl * np.sum(r * r)
            g_s += 2.0 * wl * r
        if decoder == "tanh":
            g_s *= 1.0 - rec * rec
        d_fused = 2.0 * g_s @ fused
        d_hs = [d_fused[:, m * d2:(m + 1) * d2] for m in range(n_layers)]

    g2 = []
    d_h = np.zeros_like(h)
    for a, y, hm, dhm, w2 in zip(adjs, ys, hs, d_hs, w.w2):
        dz = dhm * (1.0 - hm * hm)
        g2.append(y.T @ dz)
        d_h += a.T @ (dz @ w2.T)
    d1 = h0[0].shape[1]
    g1 = []
    for m, (x, h0m) in enumerate(zip(xs, h0)):
        dz = d_h[:, m * d1:(m + 1) * d1] * (1.0 - h0m * h0m)
        g1.append(x.T @ dz)
    return float(loss), GaeWeights(g1, g2), hs


class _Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(g: MultiLayerGraph, bt: ModularityTensor | None = None, cfg: TrainConfig | None = None,
          init: GaeWeights | None = None) -> EmbeddingSet:
    """Fit encoder weights by full-batch gradient descent on the variant's loss.

    ``loss_history[e]`` is the loss at the weights used in epoch ``e``
    (before that epoch's update); the returned embedding uses the final
    weights.

    Raises
    ------
    NonFiniteLoss
        When the loss overflows, usually because the learning rate is too high.
    """
    cfg = cfg or TrainConfig()
    cfg.validate(g.n_layers)
    bt = bt or build_modularity_tensor(g)
    xs = _stage_inputs(g, bt)
    w = init.copy() if init is not None else init_weights(
        g.n_nodes, g.n_layers, cfg.hidden_dim, cfg.embed_dim, cfg.rng_seed, cfg.init_scale)
    _check_weights(w, g.n_layers, g.n_nodes)
    lw = cfg.loss_weights(g.n_layers)
    decoder = cfg.decoder_kind
    params = w.flat()
    adam = _Adam(params, cfg.learning_rate) if cfg.optimizer == "adam" else None
    history = []
    for epoch in range(cfg.epochs):
        loss, grads, _ = loss_and_grads(g.layers, xs, bt.mats, w, cfg.variant, decoder, lw)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(gr)) for gr in grads.flat()):
            raise NonFiniteLoss(epoch, cfg.learning_rate)
        history.append(loss)
        if adam is not None:
            adam.step(params, grads.flat())
        else:
            for p, gr in zip(params, grads.flat()):
                p -= cfg.learning_rate * gr
    emb = encode(g, bt, w, cfg.variant, xs=xs)
    emb.loss_history = history
    return emb


def gradient_check(cfg: TrainConfig | None = None, instance_size: int = 6, n_layers: int = 2,
                   seed: int = 0, step: float = 1e-5, graph: MultiLayerGraph | None = None,
                   weights: GaeWeights | None = None) -> float:
    """Largest entrywise relative error between analytic and central
    finite-difference gradients over every weight entry.

    A random graph of ``instance_size`` nodes is drawn unless ``graph`` is
    given. Relative error is ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    cfg = cfg or TrainConfig(hidden_dim=3, embed_dim=2)
    rng = np.random.default_rng(seed)
    if graph is None:
        layers = []
        for _ in range(n_layers):
            while True:
                upper = np.triu(rng.random((instance_size, instance_size)) < 0.5, k=1)
                a = (upper | upper.T).astype(float)
                if a.sum() > 0:
                    break
            layers.append(a)
        graph = MultiLayerGraph(layers)
    cfg.validate(graph.n_layers)
    bt = build_modularity_tensor(graph)
    xs = _stage_inputs(graph, bt)
    w = weights or init_weights(graph.n_nodes, graph.n_layers, cfg.hidden_dim,
                                cfg.embed_dim, int(rng.integers(2**31)), scale=0.5)
    lw = cfg.loss_weights(graph.n_layers)
    decoder = cfg.decoder_kind

    def f(wt):
        return loss_and_grads(graph.layers, xs, bt.mats, wt, cfg.variant, decoder, lw)[0]

    _, grads, _ = loss_and_grads(graph.layers, xs, bt.mats, w, cfg.variant, decoder, lw)
    worst = 0.0
    for p, gp in zip(w.flat(), grads.flat()):
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up = f(w)
            p[idx] = orig - step
            down = f(w)
            p[idx] = orig
            num = (up - down) / (2 * step)
            ana = gp[idx]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-8)
            worst = max(worst, err)
    return worst


def cluster_embedding(emb: EmbeddingSet, k: int, seed: int = 0, restarts: int = 10) -> CommunityAssignment:
    return kmeans_fit(emb.features, k, seed, restarts).assignment


def detect_communities(g: MultiLayerGraph, cfg: TrainConfig | None = None, k: int = 2,
                       restarts: int = 10, bt: ModularityTensor | None = None) -> CommunityAssignment:
    """Train the auto-encoder, then k-means the node embeddings into ``k`` groups."""
    if k < 2:
        raise InvalidConfig("k must be at least 2")
    cfg = cfg or TrainConfig()
    emb = train(g, bt, cfg)
    return cluster_embedding(emb, k, cfg.rng_seed, restarts)


@dataclass
class SelectKResult:
    best_k: int
    curve: list
    assignments: dict
    embedding: EmbeddingSet


def select_k(g: MultiLayerGraph, cfg: TrainConfig | None = None, k_min: int = 2, k_max: int = 16,
             restarts: int = 10, emb: EmbeddingSet | None = None) -> SelectKResult:
    """Pick the community count maximising layer-averaged modularity.

    The embedding does not depend on ``k``, so it is trained once and
    re-clustered for each candidate. Ties go to the smaller ``k``.
    """
    if not 2 <= k_min <= k_max:
        raise InvalidConfig("need 2 <= k_min <= k_max")
    cfg = cfg or TrainConfig()
    emb = emb or train(g, None, cfg)
    curve = []
    assignments = {}
    best_k, best_q = None, -np.inf
    for k in range(k_min, k_max + 1):
        z = cluster_embedding(emb, k, cfg.rng_seed, restarts)
        q = q_nm(g, z)
        curve.append((k, q))
        assignments[k] = z
        if q > best_q:
            best_k, best_q = k, q
    return SelectKResult(best_k, curve, assignments, emb)


def with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return replace(cfg, rng_seed=seed)
