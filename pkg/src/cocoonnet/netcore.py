"""Multi-layer graph container, modularity tensor and layer construction.

File formats
------------
edge list
    UTF-8, one undirected edge per line as ``u<TAB>v`` with 0-based dense ids.
features
    CSV without header, row ``i`` holds the feature vector of node ``i``.
labels
    CSV with header ``node_id,label``.
graph directory
    ``graph.json`` manifest (``n_nodes`` and the layer file names) next to the
    edge lists and the optional ``labels.csv`` / ``features.csv``.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadK,
    BadNodeId,
    DuplicateNodeId,
    EmptyLayer,
    InputError,
    LengthMismatch,
    ParseError,
    ZeroFeatureRow,
)

log = logging.getLogger(__name__)


@dataclass
class MultiLayerGraph:
    """``L`` aligned, undirected, binary adjacency layers over ``N`` nodes."""

    layers: list
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.layers):
            raise InputError("a graph needs at least one layer")
        layers = []
        n = None
        for idx, a in enumerate(self.layers):
            a = np.asarray(a, dtype=float)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise InputError(f"layer {idx} is not a square matrix")
            if n is None:
                n = a.shape[0]
            elif a.shape[0] != n:
                raise InputError(f"layer {idx} has {a.shape[0]} nodes, expected {n}")
            if not np.array_equal(a, a.T):
                raise InputError(f"layer {idx} is not symmetric")
            if np.any(np.diag(a) != 0):
                raise InputError(f"layer {idx} has self-loops")
            if not np.all((a == 0) | (a == 1)):
                raise InputError(f"layer {idx} is not binary")
            layers.append(a)
        self.layers = layers
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=float)
            if self.features.ndim != 2 or self.features.shape[0] != n:
                raise LengthMismatch(f"features must have {n} rows")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (n,):
                raise LengthMismatch(f"labels must have length {n}")

    @property
    def n_nodes(self) -> int:
        return self.layers[0].shape[0]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def degrees(self) -> np.ndarray:
        """Per-layer degree matrix of shape ``(L, N)``."""
        return np.stack([a.sum(axis=1) for a in self.layers])

    def edge_counts(self) -> np.ndarray:
        return np.array([a.sum() / 2 for a in self.layers])

    def with_layer(self, adj) -> "MultiLayerGraph":
        """Copy of the graph with one more layer appended."""
        return MultiLayerGraph(
            self.layers + [adj], self.features, self.labels, dict(self.meta)
        )


@dataclass
class ModularityTensor:
    mats: list
    degrees: np.ndarray
    edge_counts: np.ndarray
    denominator: str = "2m"

    @property
    def n_layers(self) -> int:
        return len(self.mats)


def build_modularity_tensor(g: MultiLayerGraph, denominator: str = "2m") -> ModularityTensor:
    """Stack of per-layer modularity matrices ``b_ij = a_ij - k_i k_j / 2m``.

    ``denominator="m"`` switches to ``k_i k_j / m``; rows then no longer sum
    to zero.
    """
    if denominator not in ("2m", "m"):
        raise InputError(f"modularity_denominator must be '2m' or 'm', got {denominator!r}")
    mats = []
    degs = g.degrees()
    counts = g.edge_counts()
    for idx, (a, k, m) in enumerate(zip(g.layers, degs, counts)):
        if m == 0:
            raise EmptyLayer(f"layer {idx} has no edges; modularity is undefined")
        scale = 2 * m if denominator == "2m" else m
        mats.append(a - np.outer(k, k) / scale)
    return ModularityTensor(mats, degs, counts, denominator)


def _cosine_matrix(features) -> np.ndarray:
    z = np.asarray(features, dtype=float)
    norms = np.linalg.norm(z, axis=1)
    bad = np.flatnonzero(norms == 0)
    if bad.size:
        raise ZeroFeatureRow(f"node {bad[0]} has an all-zero feature vector")
    zn = z / norms[:, None]
    return zn @ zn.T


def similarity_layer(features, rng_seed: int) -> np.ndarray:
    """Random layer with ``P(edge i-j) = clip(cos(z_i, z_j), 0, 1)``."""
    p = np.clip(_cosine_matrix(features), 0.0, 1.0)
    n = p.shape[0]
    u = np.random.default_rng(rng_seed).random((n, n))
    upper = np.triu(u < p, k=1)
    adj = (upper | upper.T).astype(float)
    np.fill_diagonal(adj, 0.0)
    return adj


def knn_layer(features, k: int) -> np.ndarray:
    """Symmetric k-nearest-neighbour layer under cosine similarity.

    Edge ``i-j`` exists when either endpoint is among the other's ``k``
    most similar nodes. Equal similarities (to 12 decimals) go to the lower
    node index.
    """
    sim = np.round(_cosine_matrix(features), 12)
    n = sim.shape[0]
    if not 1 <= k < n:
        raise BadK(f"k must satisfy 1 <= k < {n}, got {k}")
    adj = np.zeros((n, n))
    for i in range(n):
        s = -sim[i]
        s[i] = np.inf
        nbrs = np.argsort(s, kind="stable")[:k]
        adj[i, nbrs] = 1.0
    adj = np.maximum(adj, adj.T)
    np.fill_diagonal(adj, 0.0)
    return adj


def load_citation_dataset(content_path, cites_path, classes=None) -> MultiLayerGraph:
    """Read a Cora/Citeseer style ``.content`` / ``.cites`` pair.

    Content rows are ``id f_1 ... f_F label``; cites rows are two ids. Papers
    whose label is not in ``classes`` (when given) are dropped, as are cite
    rows that mention unknown ids; the count of skipped cite rows is stored
    in ``meta["skipped_cites"]``. Layer 0 is the undirected citation graph.
    """
    content_path, cites_path = Path(content_path), Path(cites_path)
    ids, feats, names = [], [], []
    seen = set()
    width = None
    with open(content_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise ParseError(content_path, line_no, "expected id, features and label")
            node, label, vals = parts[0], parts[-1], parts[1:-1]
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(
                    content_path, line_no, f"expected {width} features, got {len(vals)}"
                )
            try:
                row = [float(v) for v in vals]
            except ValueError as exc:
                raise ParseError(content_path, line_no, str(exc)) from None
            if node in seen:
                raise DuplicateNodeId(f"{content_path}:{line_no}: duplicate node id {node!r}")
            seen.add(node)
            if classes is not None and label not in classes:
                continue
            ids.append(node)
            feats.append(row)
            names.append(label)
    if not ids:
        raise InputError(f"{content_path}: no nodes loaded")
    index = {node: i for i, node in enumerate(ids)}
    n = len(ids)
    adj = np.zeros((n, n))
    skipped = 0
    with open(cites_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(cites_path, line_no, "expected two node ids")
            u, v = parts
            if u not in index or v not in index:
                skipped += 1
                continue
            i, j = index[u], index[v]
            if i != j:
                adj[i, j] = adj[j, i] = 1.0
    if skipped:
        log.warning("skipped %d cite rows referencing unknown ids", skipped)
    label_names = sorted(set(names))
    code = {name: c for c, name in enumerate(label_names)}
    labels = np.array([code[name] for name in names])
    meta = {"node_ids": ids, "label_names": label_names, "skipped_cites": skipped}
    return MultiLayerGraph([adj], np.array(feats), labels, meta)


def subgraph(g: MultiLayerGraph, node_ids):
    """Induced subgraph on ``node_ids`` (in the given order).

    Returns the subgraph and the array mapping new index -> original index.
    """
    ids = np.asarray(node_ids, dtype=int).reshape(-1)
    if ids.size != np.unique(ids).size:
        raise BadNodeId("node ids must be unique")
    if ids.size and (ids.min() < 0 or ids.max() >= g.n_nodes):
        raise BadNodeId(f"node ids must lie in [0, {g.n_nodes})")
    if not ids.size:
        raise BadNodeId("cannot take a subgraph on zero nodes")
    layers = [a[np.ix_(ids, ids)] for a in g.layers]
    feats = None if g.features is None else g.features[ids]
    labels = None if g.labels is None else g.labels[ids]
    return MultiLayerGraph(layers, feats, labels, dict(g.meta)), ids


# --- file IO ---------------------------------------------------------------


def write_edge_list(path, adj) -> None:
    iu, ju = np.nonzero(np.triu(adj, k=1))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j in zip(iu, ju):
            fh.write(f"{i}\t{j}\n")


def read_edge_list(path, n_nodes: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"edge list not found: {path}")
    adj = np.zeros((n_nodes, n_nodes))
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected 'u<TAB>v'")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, line_no, "node ids must be integers") from None
            if not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise ParseError(path, line_no, f"node id outside [0, {n_nodes})")
            if i != j:
                adj[i, j] = adj[j, i] = 1.0
    return adj


def write_labels(path, labels, header="label") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", header])
        for i, lab in enumerate(labels):
            w.writerow([i, lab])


def read_labels(path, n_nodes: int | None = None, dtype=int) -> np.ndarray:
    """Read a ``node_id,<value>`` CSV into a dense vector ordered by id."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"label file not found: {path}")
    rows = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, 1):
            if not row:
                continue
            if line_no == 1 and row[0] == "node_id":
                continue
            if len(row) != 2:
                raise ParseError(path, line_no, "expected 'node_id,value'")
            try:
                node = int(row[0])
                value = dtype(row[1].strip())
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            if node in rows:
                raise DuplicateNodeId(f"{path}:{line_no}: duplicate node id {node}")
            rows[node] = value
    n = len(rows) if n_nodes is None else n_nodes
    if sorted(rows) != list(range(n)):
        raise InputError(f"{path}: node ids must cover 0..{n - 1} exactly")
    return np.array([rows[i] for i in range(n)])


def write_features(path, features) -> None:
    np.savetxt(path, np.asarray(features), delimiter=",", fmt="%.17g")


def read_features(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"feature file not found: {path}")
    try:
        return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_graph(g: MultiLayerGraph, directory) -> None:
    """Write ``g`` as a graph directory (see module docstring)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, a in enumerate(g.layers):
        name = f"layer_{idx}.tsv"
        write_edge_list(d / name, a)
        names.append(name)
    manifest = {"n_nodes": g.n_nodes, "layers": names}
    if g.labels is not None:
        write_labels(d / "labels.csv", g.labels)
        manifest["labels"] = "labels.csv"
    if g.features is not None:
        write_features(d / "features.csv", g.features)
        manifest["features"] = "features.csv"
    with open(d / "graph.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph(directory) -> MultiLayerGraph:
    d = Path(directory)
    manifest_path = d / "graph.json"
    if not manifest_path.is_file():
        raise InputError(f"graph manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    n = int(manifest["n_nodes"])
    layers = [read_edge_list(d / name, n) for name in manifest["layers"]]
    labels = read_labels(d / manifest["labels"], n) if "labels" in manifest else None
    feats = read_features(d / manifest["features"]) if "features" in manifest else None
    return MultiLayerGraph(layers, feats, labels)
