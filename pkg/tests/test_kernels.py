import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nwss import _backend, _kernels_py

BACKENDS = [_backend.load(n) for n in _backend.available()]


def random_psd(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T / n


@pytest.mark.parametrize("kern", BACKENDS, ids=lambda k: k.NAME)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_minor_dets_match_numpy(kern, n, seed):
    rng = np.random.default_rng(seed)
    R = random_psd(rng, n)
    k = int(rng.integers(1, n + 1))
    subsets = np.array([np.sort(rng.choice(n, k, replace=False)) for _ in range(5)], dtype=np.intp)
    ref = np.array([np.linalg.det(R[np.ix_(s, s)]).real for s in subsets])
    np.testing.assert_allclose(kern.minor_dets(R, subsets), ref, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("kern", BACKENDS, ids=lambda k: k.NAME)
def test_minor_dets_singular(kern):
    R = np.ones((3, 3), dtype=complex)
    np.testing.assert_allclose(kern.minor_dets(R, np.array([[0, 1], [0, 2]])), 0.0, atol=1e-15)


@pytest.mark.parametrize("kern", BACKENDS, ids=lambda k: k.NAME)
@given(st.integers(1, 5), st.integers(1, 5), st.floats(0.0, 1e4), st.integers(0, 2**32 - 1))
def test_gram_logdet_matches_slogdet(kern, M, K, mu, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((4, M, K)) + 1j * rng.standard_normal((4, M, K))
    ref = np.linalg.slogdet(np.eye(M) + mu * G @ G.conj().transpose(0, 2, 1))[1]
    np.testing.assert_allclose(kern.gram_logdet(G, mu), ref, rtol=1e-10, atol=1e-12)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(1)
    R = random_psd(rng, 8)
    subsets = np.array([np.sort(rng.choice(8, 4, replace=False)) for _ in range(200)], dtype=np.intp)
    a, b = (k.minor_dets(R, subsets) for k in BACKENDS)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    G = rng.standard_normal((300, 6, 4)) + 1j * rng.standard_normal((300, 6, 4))
    a, b = (k.gram_logdet(G, 31.6) for k in BACKENDS)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_wrapper_empty_subsets_and_errors():
    np.testing.assert_array_equal(_backend.minor_dets(np.eye(2), np.zeros((3, 0))), np.ones(3))
    with pytest.raises(ValueError):
        _backend.minor_dets(np.eye(2), np.zeros(3))
    with pytest.raises(ValueError):
        _backend.load("fortran")
    with pytest.raises(np.linalg.LinAlgError):
        _backend.gram_logdet(np.ones((1, 2, 2)), -10.0)


def test_environment_forces_python_backend():
    env = dict(os.environ, NWSS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import nwss; print(nwss.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == _kernels_py.NAME
