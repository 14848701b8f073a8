import os
import sys

import numpy as np
import pytest

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
sys.path.insert(0, os.path.dirname(__file__))

from cocoonnet import _backend  # noqa: E402
from cocoonnet.netcore import MultiLayerGraph  # noqa: E402


@pytest.fixture(params=_backend.available())
def kernels(request):
    return _backend.get(request.param)


def random_adj(rng, n, p):
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return (upper | upper.T).astype(float)


def random_graph(rng, n, n_layers, p=0.3, min_edges=1):
    layers = []
    for _ in range(n_layers):
        a = random_adj(rng, n, p)
        while a.sum() / 2 < min_edges:
            a = random_adj(rng, n, p)
        layers.append(a)
    return MultiLayerGraph(layers)


def two_triangles():
    a = np.zeros((6, 6))
    for block in ((0, 1, 2), (3, 4, 5)):
        for i in block:
            for j in block:
                if i != j:
                    a[i, j] = 1.0
    return a


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
