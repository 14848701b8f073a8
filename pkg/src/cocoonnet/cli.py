"""Command-line entry point: ``cocoonnet <subcommand> [options]``.

Subcommands
-----------
gen       write synthetic graph directories (MLSBM, benchmark suite, cocoon demo)
detect    train an auto-encoder, cluster, write labels / metrics / loss curves
metrics   score an existing partition
rank      damped eigenvector-centrality influence scores
simulate  one attitude-diffusion trajectory
sweep     intervention grid over ``eta`` x ``theta``

Every subcommand accepts ``--config FILE``. The file is INI-style: either
flat ``key = value`` lines or a ``[<subcommand>]`` section (a ``[common]``
section applies to all). Keys are the long option names with ``-`` or ``_``.
Command-line flags override the file, which overrides built-in defaults.

Exit status is 0 on success, 1 on a computation failure and 2 on bad input.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComputationError, InputError, InvalidConfig
from .metrics import Attitude, CommunityAssignment, evaluate, nmi, q_nm
from .netcore import (MultiLayerGraph, knn_layer, load_graph, read_features, read_labels,
                      save_graph, similarity_layer, write_labels)

log = logging.getLogger("cocoonnet")

MANIFEST = "run-manifest.json"
# keys kept out of the manifest so reruns into another directory match byte-for-byte
_NOT_RECORDED = {"out", "config", "func", "command", "verbose"}


# --- small parsers -----------------------------------------------------------

def parse_grid(text: str) -> list:
    """``a:b:step`` (inclusive) or a comma list of floats."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, stepsize = parts
            count = int(np.floor((stop - start) / stepsize + 1e-9)) + 1
            return [round(start + i * stepsize, 10) for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InvalidConfig(f"bad grid {text!r}; use start:stop:step or a comma list") from None


def parse_k_range(text: str) -> tuple:
    try:
        lo, hi = (int(p) for p in str(text).split(":"))
    except ValueError:
        raise InvalidConfig(f"bad k range {text!r}; use kmin:kmax") from None
    return lo, hi


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise InvalidConfig(f"expected a boolean, got {text!r}")


# --- config handling ---------------------------------------------------------

def read_config(path, command: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {p}")
    text = p.read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        if text.lstrip().startswith("["):
            cp.read_string(text, source=str(p))
        else:
            cp.read_string("[common]\n" + text, source=str(p))
    except configparser.Error as exc:
        raise InputError(f"{p}: {exc}") from None
    known = set(_COMMANDS) | {"common"}
    stray = [s for s in cp.sections() if s not in known]
    if stray:
        raise InvalidConfig(f"{p}: unknown config section {stray[0]!r}")
    out = {}
    for section in ("common", command):
        if cp.has_section(section):
            out.update({k.replace("-", "_"): v for k, v in cp.items(section)})
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict, origin) -> None:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in values.items():
        if key not in actions:
            raise InvalidConfig(f"{origin}: unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = _bool(raw)
        elif act.type is not None:
            try:
                defaults[key] = act.type(raw)
            except (TypeError, ValueError):
                raise InvalidConfig(f"{origin}: bad value {raw!r} for {key!r}") from None
        else:
            defaults[key] = raw
        if act.choices is not None and defaults[key] not in act.choices:
            raise InvalidConfig(f"{origin}: {key!r} must be one of {sorted(act.choices)}")
    sub.set_defaults(**defaults)


# --- output helpers ----------------------------------------------------------

def _out_dir(path) -> Path:
    d = Path(path)
    if d.exists() and not d.is_dir():
        raise InputError(f"output path is not a directory: {d}")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Path):
        return str(x)
    return x


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: Path, args, outputs) -> None:
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_RECORDED}
    _write_json(out / MANIFEST, {
        "command": args.command,
        "config": cfg,
        "seed": args.seed,
        "outputs": sorted(outputs),
        "version": __version__,
    })


def _load_graph(args) -> MultiLayerGraph:
    g = load_graph(args.graph)
    feats_path = getattr(args, "features", None)
    if feats_path:
        g = MultiLayerGraph(g.layers, read_features(feats_path), g.labels, dict(g.meta))
    if getattr(args, "add_similarity_layer", False):
        if g.features is None:
            raise InputError("--add-similarity-layer needs node features")
        if args.knn > 0:
            g = g.with_layer(knn_layer(g.features, args.knn))
        else:
            g = g.with_layer(similarity_layer(g.features, args.seed))
    return g


# --- subcommands -------------------------------------------------------------

def cmd_gen(args) -> list:
    from .synth import cocoon_network, generate_mlsbm, paper_benchmark_suite, planted_config

    out = _out_dir(args.out)
    written = []
    if args.paper_suite:
        for g, name in paper_benchmark_suite(args.seed):
            save_graph(g, out / name)
            written.append(name)
    elif args.preset == "cocoon":
        net = cocoon_network(n_nodes=args.n_nodes or 775, seed=args.seed)
        save_graph(net.graph, out / "graph")
        names = [Attitude(int(a)).name.lower() for a in net.attitudes]
        write_labels(out / "attitudes.csv", names, header="attitude")
        write_labels(out / "communities.csv", net.communities, header="community")
        written += ["graph", "attitudes.csv", "communities.csv"]
    else:
        cfg = planted_config(args.n_nodes or 300, args.n_layers, args.k, args.mean_degree,
                             args.ratio, args.seed)
        save_graph(generate_mlsbm(cfg).graph, out / "graph")
        written.append("graph")
    return written


def _train_config(args):
    from .embed import TrainConfig

    cfg = TrainConfig(variant=args.variant, hidden_dim=args.hidden_dim,
                      embed_dim=args.embed_dim, epochs=args.epochs,
                      learning_rate=args.lr, rng_seed=args.seed,
                      optimizer=args.optimizer, init_scale=args.init_scale)
    cfg.validate()
    return cfg


def cmd_detect(args) -> list:
    from .embed import cluster_embedding, select_k, train, with_seed
    from .netcore import build_modularity_tensor

    g = _load_graph(args)
    truth = read_labels(args.truth, g.n_nodes) if args.truth else g.labels
    base = _train_config(args)
    k_range = parse_k_range(args.select_k) if args.select_k else None
    if k_range is None and args.k < 2:
        raise InvalidConfig("k must be at least 2")
    out = _out_dir(args.out)
    bt = build_modularity_tensor(g, args.denominator)

    # several seeds: keep the run with the best modularity (no ground truth used)
    runs = []
    for r in range(args.n_seeds):
        cfg = with_seed(base, args.seed + r)
        emb = train(g, bt, cfg)
        if k_range is not None:
            sel = select_k(g, cfg, k_range[0], k_range[1], args.restarts, emb=emb)
            z, curve = sel.assignments[sel.best_k], sel.curve
        else:
            z, curve = cluster_embedding(emb, args.k, cfg.rng_seed, args.restarts), None
        runs.append((q_nm(g, z), r, cfg.rng_seed, emb, z, curve))
    best = max(runs, key=lambda t: (t[0], -t[1]))
    _, _, seed_used, emb, z, curve = best

    write_labels(out / "labels.csv", z.labels, header="community")
    _write_csv(out / "loss.csv", ["epoch", "loss"], enumerate(emb.loss_history))
    feats = emb.features
    _write_csv(out / "embedding.csv", ["node_id"] + [f"h{j}" for j in range(feats.shape[1])],
               ([i, *row] for i, row in enumerate(feats)))
    written = ["labels.csv", "loss.csv", "embedding.csv", "metrics.json"]
    if curve is not None:
        _write_csv(out / "q_curve.csv", ["k", "q_nm"], curve)
        written.append("q_curve.csv")
    report = evaluate(g, z, truth)
    report.update(variant=base.variant, k=z.k, seed_used=seed_used,
                  final_loss=emb.loss_history[-1] if emb.loss_history else None)
    report["per_seed"] = [
        {"seed": s, "q_nm": q, **({"nmi": nmi(truth, zz)} if truth is not None else {})}
        for q, _, s, _, zz, _ in runs
    ]
    _write_json(out / "metrics.json", report)
    return written


def cmd_metrics(args) -> list:
    g = _load_graph(args)
    z = CommunityAssignment.from_labels(read_labels(args.labels, g.n_nodes))
    truth = read_labels(args.truth, g.n_nodes) if args.truth else None
    out = _out_dir(args.out)
    report = evaluate(g, z, truth)
    report["k"] = z.k
    _write_json(out / "metrics.json", report)
    return ["metrics.json"]


def cmd_rank(args) -> list:
    from .influence import eigen_influence, rank_order, top_count

    g = _load_graph(args)
    res = eigen_influence(g, args.damping, args.eps, args.max_iter)
    if not res.converged:
        log.warning("influence iteration stopped after %d steps without converging",
                    res.iterations_used)
    order = rank_order(res.scores)
    if args.top is not None:
        order = order[: top_count(args.top, g.n_nodes)]
    out = _out_dir(args.out)
    _write_csv(out / "influence.csv", ["node_id", "score", "rank"],
               ([int(i), res.scores[i], r + 1] for r, i in enumerate(order)))
    return ["influence.csv"]


def _sim_inputs(args):
    from .cocoonsim import SimParams, parse_attitudes
    from .influence import eigen_influence

    g = _load_graph(args)
    att = parse_attitudes(read_labels(args.attitudes, g.n_nodes, dtype=str))
    if args.communities:
        comm = read_labels(args.communities, g.n_nodes)
    elif g.labels is not None:
        comm = np.asarray(g.labels, dtype=int)
    else:
        comm = np.zeros(g.n_nodes, dtype=int)
    if args.community is not None and not np.any(comm == args.community):
        raise InputError(f"community {args.community} has no members")
    params = SimParams(**{f.name: getattr(args, f.name) for f in fields(SimParams)
                          if f.name not in ("rng_seed", "intervention_attitude")},
                       rng_seed=args.seed,
                       intervention_attitude=int(Attitude.parse(args.intervention_attitude)))
    params.validate()
    influence = eigen_influence(g)
    return g, att, comm, params, influence


def cmd_simulate(args) -> list:
    from .cocoonsim import STATE_COLUMNS, run

    g, att, comm, params, influence = _sim_inputs(args)
    targets = None if args.community is None else np.flatnonzero(comm == args.community)
    traj = run(g, att, influence, params, targets)
    out = _out_dir(args.out)
    _write_csv(out / "trajectory.csv", ["step", *STATE_COLUMNS],
               ([t, *row] for t, row in enumerate(traj.records)))
    return ["trajectory.csv"]


def cmd_sweep(args) -> list:
    from .cocoonsim import intervention_sweep

    g, att, comm, params, influence = _sim_inputs(args)
    rows = intervention_sweep(g, att, influence, params, parse_grid(args.eta_grid),
                              parse_grid(args.theta_grid), args.seeds, comm,
                              args.community, args.workers)
    cols = ["eta", "theta", "community", "pos_mean", "pos_std", "neg_mean", "neg_std",
            "neu_mean", "neu_std"]
    out = _out_dir(args.out)
    _write_csv(out / "sweep.csv", cols, ([r[c] for c in cols] for r in rows))
    return ["sweep.csv"]


_COMMANDS = {
    "gen": cmd_gen, "detect": cmd_detect, "metrics": cmd_metrics,
    "rank": cmd_rank, "simulate": cmd_simulate, "sweep": cmd_sweep,
}


# --- argument parser ---------------------------------------------------------

def _common(p, out_default):
    p.add_argument("--config", help="INI config file (flags override it)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=out_default, help="output directory (created if absent)")
    p.add_argument("-v", "--verbose", action="store_true")


def _graph_inputs(p, similarity=False):
    p.add_argument("--graph", required=True, help="graph directory with graph.json")
    p.add_argument("--features", help="node feature CSV (overrides the graph's)")
    if similarity:
        p.add_argument("--add-similarity-layer", action="store_true",
                       help="append a feature-similarity layer built from the features")
        p.add_argument("--knn", type=int, default=0,
                       help="k-NN similarity layer with this k (0: Bernoulli on cosine)")


def _sim_options(p):
    from .cocoonsim import SimParams

    d = SimParams()
    p.add_argument("--attitudes", required=True, help="node_id,attitude CSV")
    p.add_argument("--communities", help="node_id,community CSV (default: graph labels)")
    p.add_argument("--community", type=int, help="intervene only inside this community")
    for name in ("alpha", "beta", "r1", "gamma1", "diff_rate", "s_rate", "r2", "gamma2",
                 "theta", "eta"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float,
                       default=getattr(d, name))
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--intervention-attitude", default="positive")
    p.add_argument("--freeze-intervened", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cocoonnet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic graphs")
    _common(p, "data")
    p.add_argument("--paper-suite", action="store_true",
                   help="the three planted benchmark graphs (N = 300, 400, 500)")
    p.add_argument("--preset", choices=("mlsbm", "cocoon"), default="mlsbm")
    p.add_argument("--n-nodes", type=int, help="default 300 (mlsbm) or 775 (cocoon)")
    p.add_argument("--n-layers", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--mean-degree", type=float, default=10.0)
    p.add_argument("--ratio", type=float, default=6.0)

    p = sub.add_parser("detect", help="community detection")
    _common(p, "detect")
    _graph_inputs(p, similarity=True)
    p.add_argument("--truth", help="ground-truth node_id,label CSV (default: graph labels)")
    p.add_argument("--variant", choices=("ige", "mge"), default="mge")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--select-k", help="kmin:kmax, choose k by modularity")
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden-dim", type=int, default=32)
    p.add_argument("--embed-dim", type=int, default=16)
    p.add_argument("--optimizer", choices=("adam", "gd"), default="adam")
    p.add_argument("--init-scale", type=float, default=0.03)
    p.add_argument("--denominator", choices=("2m", "m"), default="2m")
    p.add_argument("--restarts", type=int, default=10, help="k-means restarts")
    p.add_argument("--n-seeds", type=int, default=1,
                   help="train this many seeds and keep the highest-modularity run")

    p = sub.add_parser("metrics", help="score a partition")
    _common(p, "metrics")
    _graph_inputs(p)
    p.add_argument("--labels", required=True, help="node_id,community CSV")
    p.add_argument("--truth", help="ground-truth CSV for NMI")

    p = sub.add_parser("rank", help="influence scores")
    _common(p, "rank")
    _graph_inputs(p)
    p.add_argument("--top", type=float, help="keep the top fraction of nodes")
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)

    p = sub.add_parser("simulate", help="one diffusion trajectory")
    _common(p, "simulate")
    _graph_inputs(p)
    _sim_options(p)

    p = sub.add_parser("sweep", help="intervention grid")
    _common(p, "sweep")
    _graph_inputs(p)
    _sim_options(p)
    p.add_argument("--eta-grid", "--eta-values", dest="eta_grid", default="0:0.25:0.05")
    p.add_argument("--theta-grid", dest="theta_grid", default="0.1")
    p.add_argument("--seeds", type=int, default=20, help="replicates per cell")
    p.add_argument("--workers", type=int, default=1)
    return ap


def _normalise_argv(argv):
    # `sweep --eta 0:0.25:0.05` reads naturally; route it to the grid option
    out = []
    sweep = "sweep" in argv[:1]
    for a in argv:
        if sweep and (a == "--eta" or a.startswith("--eta=")):
            a = a.replace("--eta", "--eta-grid", 1)
        elif sweep and (a == "--theta" or a.startswith("--theta=")):
            a = a.replace("--theta", "--theta-grid", 1)
        out.append(a)
    return out


def main(argv=None) -> int:
    argv = _normalise_argv(list(sys.argv[1:] if argv is None else argv))
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.config:
            sub = ap._subparsers._group_actions[0].choices[args.command]
            _apply_config(sub, read_config(args.config, args.command), args.config)
            args = ap.parse_args(argv)
        written = _COMMANDS[args.command](args)
        _write_manifest(Path(args.out), args, written + [MANIFEST])
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
