import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qhdlab import kernels, oracle
from qhdlab.linear import _kernel_args
from qhdlab.model import Regime

BACKENDS = kernels.available_backends()
py = BACKENDS["python"]
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def test_backend_name_is_consistent():
    assert kernels.BACKEND in BACKENDS
    assert kernels.propagator is BACKENDS[kernels.BACKEND].propagator


@pytest.mark.parametrize("flag,expected", [("1", "python"), ("", None)])
def test_environment_selects_backend(flag, expected):
    env = dict(os.environ, QHDLAB_PURE_PYTHON=flag)
    out = subprocess.run([sys.executable, "-c", "import qhdlab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == (expected or ("cython" if "cython" in BACKENDS else "python"))


@needs_cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 20), st.booleans())
def test_propagator_backends_agree(seed, t, supersonic):
    rng = np.random.default_rng(seed)
    eq = oracle.draw_equilibrium(rng, Regime.SUPERSONIC if supersonic else Regime.SUBSONIC)
    xi = np.concatenate([[0.0], rng.normal(scale=5.0, size=64)])
    a = py.propagator(xi, t, *_kernel_args(eq))
    b = BACKENDS["cython"].propagator(xi, t, *_kernel_args(eq))
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13 * max(1.0, np.abs(a).max()))


@needs_cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_dispersion_roots_backends_agree(seed):
    rng = np.random.default_rng(seed)
    eq = oracle.draw_equilibrium(rng)
    xi = rng.normal(scale=10.0, size=50)
    c = BACKENDS["cython"]
    kw = (eq.mu, eq.k, eq.u_star, eq.p_prime_star, eq.alpha_star)
    for a, b in zip(py.dispersion_roots(xi, *kw), c.dispersion_roots(xi, *kw)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@needs_cython
@pytest.mark.parametrize("amp", [1e-6, 1e-3, 0.5])
def test_remainder_backends_agree(amp):
    rng = np.random.default_rng(4)
    rho = amp * rng.uniform(-1, 1, 300)
    m = amp * rng.normal(size=300)
    rx = amp * rng.normal(size=300)
    a = py.remainder_n2(rho, m, rx, 1.0, 1.0, 2.0, 1.0)
    b = BACKENDS["cython"].remainder_n2(rho, m, rx, 1.0, 1.0, 2.0, 1.0)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


@needs_cython
def test_mode_weights_backends_agree():
    eq = oracle.draw_equilibrium(np.random.default_rng(9))
    for xi, t, ell in ((0.3, 2.0, 0), (1.7, 10.0, 1), (4.0, 0.5, 2)):
        data = (0.4 + 0.1j, -0.2j, 0.4 - 0.1j, 0.2j)
        a = py.mode_weights(xi, t, ell, *data, *_kernel_args(eq))
        b = BACKENDS["cython"].mode_weights(xi, t, ell, *data, *_kernel_args(eq))
        np.testing.assert_allclose(a, b, rtol=1e-13)


def test_remainder_series_branch_is_continuous():
    # the small-amplitude series and the closed form meet at |rho/rho*| = 1e-3
    rho = np.array([0.999999e-3, 1.000001e-3])
    z = np.zeros(2)
    out = py.remainder_n2(rho, z, z, 1.0, 0.0, 1.7, 1.0) / rho ** 2
    assert abs(out[0] - out[1]) <= 1e-8 * abs(out[1])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_eigenprojector_branch_matches_expm(name):
    # t Re(s) is past the cosh/sinh overflow guard, entries are ~1e150
    eq = oracle.draw_equilibrium(np.random.default_rng(2), Regime.SUPERSONIC)
    xi, t = 0.5, 4000.0
    M = BACKENDS[name].propagator(np.array([xi]), t, *_kernel_args(eq))[0]
    ref = expm(t * oracle.mode_generator(eq, xi))
    assert np.abs(ref).max() > 1e100
    assert np.abs(M - ref).max() <= 1e-9 * np.abs(ref).max()
