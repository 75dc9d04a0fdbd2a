import importlib

import numpy as np
import pytest

from formbeam import kernels
from formbeam.geometry import euler_zyx

BACKENDS = ["formbeam._kernels_py"]
try:
    importlib.import_module("formbeam._kernels")
    BACKENDS.append("formbeam._kernels")
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def backend(request):
    return importlib.import_module(request.param)


def random_case(seed, ns=5, rows=3, cols=4, m=300):
    rng = np.random.default_rng(seed)
    t = rng.normal(scale=3.0, size=(ns, 3))
    r = np.array([euler_zyx(*rng.uniform(-0.5, 0.5, 3)) for _ in range(ns)])
    coef = rng.normal(size=(ns, rows, cols)) + 1j * rng.normal(size=(ns, rows, cols))
    k = rng.normal(size=(m, 3)) * 20.0
    x0, dx, y0, dy = -0.15, 0.15, -0.2, 0.13
    d = np.array([[x0 + i * dx, y0 + j * dy, 0.0] for i in range(rows) for j in range(cols)])
    pos = (t[:, None, :] + np.einsum("nij,ej->nei", r, d)).reshape(-1, 3)
    return k, t, r, (x0, dx, y0, dy), coef, pos


def test_flat_matches_direct_sum(backend):
    k, _, _, _, coef, pos = random_case(0)
    ref = np.exp(1j * k @ pos.T) @ coef.ravel()
    np.testing.assert_allclose(backend.array_factor(k, pos, coef.ravel()), ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(backend.array_factor_power(k, pos, coef.ravel()), np.abs(ref) ** 2,
                               rtol=1e-11)


def test_grid_matches_flat(backend):
    k, t, r, (x0, dx, y0, dy), coef, pos = random_case(1)
    flat = backend.array_factor(k, pos, coef.ravel())
    grid = backend.grid_array_factor(k, t, r, x0, dx, y0, dy, coef)
    np.testing.assert_allclose(grid, flat, rtol=1e-11, atol=1e-11)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    py, cy = (importlib.import_module(b) for b in BACKENDS)
    k, t, r, (x0, dx, y0, dy), coef, pos = random_case(2, m=2000)
    np.testing.assert_allclose(cy.grid_array_factor(k, t, r, x0, dx, y0, dy, coef),
                               py.grid_array_factor(k, t, r, x0, dx, y0, dy, coef), rtol=1e-12, atol=1e-11)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, FORMBEAM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from formbeam import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
