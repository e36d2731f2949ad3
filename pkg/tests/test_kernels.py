import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticeid import _kernels, _pycore
from oracles import charfn, log_series

core = pytest.importorskip("latticeid._core")
BACKENDS = [pytest.param(_pycore, id="python"), pytest.param(core, id="cython")]


def test_compiled_backend_selected():
    assert _kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    env = dict(os.environ, LATTICEID_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import latticeid; print(latticeid.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("mod", BACKENDS)
def test_katti_poisson(mod):
    from scipy import stats

    p = stats.poisson.pmf(np.arange(30), 1.7)
    q = mod.katti_recursion(p, 20)
    assert q[0] == 0.0 and q[1] == pytest.approx(1.7, abs=1e-12)
    assert np.max(np.abs(q[2:])) < 1e-12


@pytest.mark.parametrize("mod", BACKENDS)
def test_katti_against_log_series(mod):
    p = np.array([0.5, 0.2, 0.0, 0.3])
    want = log_series({(i,): x for i, x in enumerate(p)}, (9,))
    got = mod.katti_recursion(p, 8)
    for n in range(1, 9):
        assert got[n] == pytest.approx(want.get((n,), 0.0), abs=1e-13)


@pytest.mark.parametrize("mod", BACKENDS)
def test_series_quotient_inverts_product(mod, rng):
    shape = (4, 5, 3)
    den = rng.random(shape)
    den[0, 0, 0] = 1.5
    ratio = rng.random(shape)
    num = np.zeros(shape)
    for idx in np.ndindex(shape):
        for jdx in np.ndindex(shape):
            if all(j <= i for i, j in zip(idx, jdx)):
                num[idx] += den[jdx] * ratio[tuple(i - j for i, j in zip(idx, jdx))]
    got = mod.series_quotient(num.ravel(), den.ravel(), shape).reshape(shape)
    np.testing.assert_allclose(got, ratio, atol=1e-10)


@pytest.mark.parametrize("mod", BACKENDS)
def test_charfn_direct_against_cmath(mod, rng):
    pts = rng.integers(-5, 6, size=(7, 2))
    w = rng.random(7)
    z = rng.uniform(-4, 4, size=(11, 2))
    atoms = {}
    for n, x in zip(map(tuple, pts), w):
        atoms[n] = atoms.get(n, 0.0) + x
    got = mod.charfn_direct(pts.astype(float), w, z)
    want = [charfn(atoms, zz) for zz in z]
    np.testing.assert_allclose(got, want, atol=1e-13)


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12), st.integers(1, 30))
def test_backends_agree_katti(p, degree):
    p = np.array([0.2 + p[0]] + p[1:])
    a = _pycore.katti_recursion(p, degree)
    b = core.katti_recursion(p, degree)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(a)))


@given(st.integers(1, 3).flatmap(lambda d: st.lists(st.integers(1, 4), min_size=d, max_size=d)),
       st.integers(0, 2**31))
def test_backends_agree_series_quotient(shape, seed):
    r = np.random.default_rng(seed)
    num = r.standard_normal(shape)
    den = r.standard_normal(shape)
    den.flat[0] = 2.0
    a = _pycore.series_quotient(num.ravel(), den.ravel(), shape)
    b = core.series_quotient(num.ravel(), den.ravel(), shape)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_backends_agree_charfn(seed, d):
    r = np.random.default_rng(seed)
    pts = r.integers(-8, 9, size=(6, d)).astype(float)
    w = r.random(6)
    z = r.uniform(-7, 7, size=(5, d))
    np.testing.assert_allclose(_pycore.charfn_direct(pts, w, z), core.charfn_direct(pts, w, z), atol=1e-13)
