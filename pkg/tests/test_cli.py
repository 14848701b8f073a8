import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cocoonnet.cli import main, parse_grid, parse_k_range
from cocoonnet.errors import InvalidConfig

ENV = {**os.environ, "OPENBLAS_NUM_THREADS": "1", "OMP_NUM_THREADS": "1"}


def cli(*args):
    return main([str(a) for a in args])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    assert cli("gen", "--preset", "cocoon", "--seed", 3, "--out", root / "cocoon") == 0
    assert cli("gen", "--n-nodes", 80, "--mean-degree", 12, "--ratio", 10, "--seed", 1,
               "--out", root / "small") == 0
    return root


def test_parse_grid():
    assert parse_grid("0:0.25:0.05") == [0.0, 0.05, 0.1, 0.15, 0.2, 0.25]
    assert parse_grid("0.1,0.3") == [0.1, 0.3]
    with pytest.raises(InvalidConfig):
        parse_grid("0:1")
    assert parse_k_range("2:16") == (2, 16)


def test_gen_paper_suite(tmp_path):
    assert cli("gen", "--paper-suite", "--seed", 1, "--out", tmp_path) == 0
    for name in ("sim300", "sim400", "sim500"):
        assert (tmp_path / name / "graph.json").is_file()
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["command"] == "gen"


def test_gen_rerun_identical(tmp_path):
    cli("gen", "--paper-suite", "--seed", 1, "--out", tmp_path / "a")
    cli("gen", "--paper-suite", "--seed", 1, "--out", tmp_path / "b")
    for name in ("sim300", "sim400", "sim500"):
        for f in (tmp_path / "a" / name).iterdir():
            assert f.read_bytes() == (tmp_path / "b" / name / f.name).read_bytes()


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("n_nodes = 50\nwidth = 3\n")
    assert cli("gen", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "'width'" in capsys.readouterr().err


def test_config_sections_and_precedence(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[common]\nseed = 5\n[gen]\nn-nodes = 40\nn_layers = 2\n")
    assert cli("gen", "--config", cfg, "--n-layers", 1, "--out", tmp_path / "o") == 0
    man = json.loads((tmp_path / "o" / "run-manifest.json").read_text())
    assert man["config"]["n_nodes"] == 40       # from the file
    assert man["config"]["n_layers"] == 1       # flag wins
    assert man["seed"] == 5
    g = json.loads((tmp_path / "o" / "graph" / "graph.json").read_text())
    assert g["n_nodes"] == 40 and len(g["layers"]) == 1


def test_config_bad_section(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[trainer]\nepochs = 3\n")
    assert cli("gen", "--config", cfg, "--out", tmp_path / "o") == 2


def test_missing_graph_exit_2(tmp_path, capsys):
    assert cli("detect", "--graph", tmp_path / "nowhere", "--out", tmp_path / "o") == 2
    assert "nowhere" in capsys.readouterr().err


def test_missing_edge_file(tmp_path, data, capsys):
    import shutil

    g = tmp_path / "g"
    shutil.copytree(data / "small" / "graph", g)
    (g / "layer_1.tsv").unlink()
    assert cli("detect", "--graph", g, "--out", tmp_path / "o") == 2
    assert "layer_1.tsv" in capsys.readouterr().err


def test_detect_outputs(tmp_path, data):
    out = tmp_path / "d"
    assert cli("detect", "--graph", data / "small" / "graph", "--k", 2, "--epochs", 40,
               "--out", out) == 0
    m = json.loads((out / "metrics.json").read_text())
    assert m["nmi"] == 1.0 and m["k"] == 2
    assert rows(out / "loss.csv")[0] == ["epoch", "loss"] and len(rows(out / "loss.csv")) == 41
    assert len(rows(out / "labels.csv")) == 81
    assert len(rows(out / "embedding.csv")[1]) == 1 + 3 * 16


def test_detect_select_k_curve(tmp_path, data):
    out = tmp_path / "d"
    assert cli("detect", "--graph", data / "small" / "graph", "--select-k", "2:5",
               "--epochs", 20, "--out", out) == 0
    curve = rows(out / "q_curve.csv")
    assert curve[0] == ["k", "q_nm"] and [r[0] for r in curve[1:]] == ["2", "3", "4", "5"]


def test_detect_multiple_seeds(tmp_path, data):
    out = tmp_path / "d"
    assert cli("detect", "--graph", data / "small" / "graph", "--epochs", 10,
               "--n-seeds", 3, "--out", out) == 0
    assert len(json.loads((out / "metrics.json").read_text())["per_seed"]) == 3


def test_detect_with_similarity_layer(tmp_path, data):
    feats = np.random.default_rng(0).random((80, 6))
    np.savetxt(tmp_path / "f.csv", feats, delimiter=",")
    out = tmp_path / "d"
    assert cli("detect", "--graph", data / "small" / "graph", "--features", tmp_path / "f.csv",
               "--add-similarity-layer", "--knn", 5, "--epochs", 5, "--out", out) == 0
    m = json.loads((out / "metrics.json").read_text())
    assert m["kl_index"] is not None


def test_metrics_command(tmp_path, data):
    g = data / "small" / "graph"
    out = tmp_path / "m"
    assert cli("metrics", "--graph", g, "--labels", g / "labels.csv", "--truth",
               g / "labels.csv", "--out", out) == 0
    m = json.loads((out / "metrics.json").read_text())
    assert m["nmi"] == 1.0 and set(m) >= {"q_nm", "q_sd", "kl_index", "js_index"}


def test_rank_top(tmp_path, data):
    out = tmp_path / "r"
    assert cli("rank", "--graph", data / "cocoon" / "graph", "--top", 0.02, "--out", out) == 0
    r = rows(out / "influence.csv")
    assert r[0] == ["node_id", "score", "rank"] and len(r) == 1 + 16
    scores = [float(x[1]) for x in r[1:]]
    assert scores == sorted(scores, reverse=True)


def test_rank_regular_graph(tmp_path):
    g = tmp_path / "ring"
    g.mkdir()
    (g / "layer_0.tsv").write_text("".join(f"{i}\t{(i + 1) % 8}\n" for i in range(8)))
    (g / "graph.json").write_text(json.dumps({"n_nodes": 8, "layers": ["layer_0.tsv"]}))
    assert cli("rank", "--graph", g, "--out", tmp_path / "r") == 0
    assert len({x[1] for x in rows(tmp_path / "r" / "influence.csv")[1:]}) == 1


def test_simulate_51_rows(tmp_path, data):
    c = data / "cocoon"
    out = tmp_path / "new" / "nested"
    assert cli("simulate", "--graph", c / "graph", "--attitudes", c / "attitudes.csv",
               "--epochs", 50, "--out", out) == 0
    r = rows(out / "trajectory.csv")
    assert r[0] == ["step", "pos", "neu", "neg", "susceptible", "insusceptible"]
    assert len(r) == 52


def test_sweep_six_eta(tmp_path, data):
    c = data / "cocoon"
    out = tmp_path / "s"
    assert cli("sweep", "--graph", c / "graph", "--attitudes", c / "attitudes.csv",
               "--communities", c / "communities.csv", "--community", 0,
               "--eta", "0:0.25:0.05", "--seeds", 2, "--epochs", 5, "--out", out) == 0
    r = rows(out / "sweep.csv")
    assert r[0] == ["eta", "theta", "community", "pos_mean", "pos_std", "neg_mean",
                    "neg_std", "neu_mean", "neu_std"]
    assert len({x[0] for x in r[1:]}) == 6 and len(r) == 1 + 6 * 3


def test_sweep_bad_community(tmp_path, data):
    c = data / "cocoon"
    assert cli("sweep", "--graph", c / "graph", "--attitudes", c / "attitudes.csv",
               "--community", 9, "--seeds", 1, "--out", tmp_path / "s") == 2


def test_bad_sim_params_exit_2(tmp_path, data):
    c = data / "cocoon"
    assert cli("simulate", "--graph", c / "graph", "--attitudes", c / "attitudes.csv",
               "--r1", 0.6, "--out", tmp_path / "s") == 2


def test_computation_error_exit_1(tmp_path, data, monkeypatch):
    import cocoonnet.embed as embed_mod
    from cocoonnet.errors import NonFiniteLoss

    def boom(*a, **k):
        raise NonFiniteLoss(0, 1.0)

    monkeypatch.setattr(embed_mod, "train", boom)
    assert cli("detect", "--graph", data / "small" / "graph", "--out", tmp_path / "o") == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cocoonnet.cli", "gen", "--n-nodes", "30",
                           "--out", str(tmp_path)], env=ENV, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
