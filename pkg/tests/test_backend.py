import os
import subprocess
import sys

import numpy as np
import pytest

from cocoonnet import _backend

PROBE = "from cocoonnet import _backend; print(_backend.BACKEND)"


def probe(**env):
    full = {k: v for k, v in os.environ.items() if k != "COCOONNET_PURE_PYTHON"}
    full.update(env)
    out = subprocess.run([sys.executable, "-c", PROBE], env=full, capture_output=True, text=True)
    return out.stdout.strip()


def test_env_forces_fallback():
    assert probe(COCOONNET_PURE_PYTHON="1") == "python"


def test_default_prefers_compiled():
    want = "cython" if "cython" in _backend.available() else "python"
    assert probe() == want


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")


@pytest.mark.skipif("cython" not in _backend.available(), reason="extension not built")
def test_backends_agree_on_eigenvalues():
    a = np.random.default_rng(0).normal(size=(12, 12))
    a = a + a.T
    vals = [np.sort(_backend.get(n).jacobi_eigh(a.copy(), 1e-12, 100)[0]) for n in ("python", "cython")]
    assert np.allclose(vals[0], vals[1], atol=1e-10)
