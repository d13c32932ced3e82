"""Reference implementations against frozen hand-derived values, then the cross-checks."""
import math

import numpy as np
import pytest

from qhdlab import oracle
from qhdlab.model import equilibrium


def test_companion_roots_frozen_cases():
    r = sorted(oracle.polynomial_roots_companion(-1.0, 0.0), key=lambda z: z.real)
    assert r == [pytest.approx(-1.0), pytest.approx(1.0)]
    r = sorted(oracle.polynomial_roots_companion(2.0, -3.0), key=lambda z: z.real)
    assert r == [pytest.approx(1.0), pytest.approx(2.0)]


def test_companion_roots_avoid_cancellation():
    # lam^2 + 1e8 lam + 1 : small root is -1e-8 to full relative precision
    big, small = oracle.polynomial_roots_companion(1.0, 1e8)
    assert abs(small + 1e-8) <= 1e-22
    assert big == pytest.approx(-1e8)


def test_rk4_trivial_cases():
    eq = equilibrium()
    U0 = np.array([1.0 + 2j, -0.5j])
    assert np.array_equal(oracle.rk4_mode_reference(eq, 1.3, U0, 0.0), U0)
    np.testing.assert_array_equal(oracle.rk4_mode_reference(eq, 0.0, U0, 0.5, dt=1e-3), U0)


def test_rk4_rejects_coarse_or_misaligned_steps():
    eq = equilibrium()
    with pytest.raises(ValueError):
        oracle.rk4_mode_reference(eq, 1.0, [1, 0], 1.0, dt=1e-2)
    with pytest.raises(ValueError):
        oracle.rk4_mode_reference(eq, 1.0, [1, 0], 1.00005, dt=1e-3)


def test_rk4_matches_scalar_exponential():
    # m* = 0, xi = 1: compare against a 40-term Taylor series of the exponential
    eq = equilibrium(m_star=0.0)
    xi = 1.0
    G = oracle.mode_generator(eq, xi)
    t = 0.3
    series = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for n in range(1, 40):
        term = term @ (t * G) / n
        series = series + term
    got = oracle.rk4_mode_reference(eq, xi, [1.0, 0.0], t, dt=1e-4)
    np.testing.assert_allclose(got, series[:, 0], atol=1e-12)


def test_finite_differences_constant_and_sine():
    h = 2 * math.pi / 128
    x = np.arange(128) * h
    assert np.all(oracle.finite_difference_reference(np.full(128, 3.0), 1, h) == 0)
    err = np.abs(oracle.finite_difference_reference(np.sin(x), 1, h) - np.cos(x)).max()
    assert err <= h ** 4 / 30 * 1.01
    err2 = np.abs(oracle.finite_difference_reference(np.sin(x), 2, h) + np.sin(x)).max()
    assert err2 <= h ** 4 / 90 * 1.01
    err3 = np.abs(oracle.finite_difference_reference(np.sin(x), 3, h) + np.cos(x)).max()
    assert err3 <= h ** 2 / 4 * 1.01


def test_finite_difference_fourth_order_slope():
    errs = []
    for n in (32, 64, 128):
        h = 2 * math.pi / n
        x = np.arange(n) * h
        errs.append(np.abs(oracle.finite_difference_reference(np.sin(2 * x), 1, h) - 2 * np.cos(2 * x)).max())
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(3.8 < r < 4.2 for r in rates)


def test_min_eig_sampling_frozen():
    assert oracle.min_eig_sampling_reference(np.eye(2)) == pytest.approx(1.0)
    assert oracle.min_eig_sampling_reference(np.diag([2.0, 5.0])) == pytest.approx(2.0)
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert oracle.min_eig_sampling_reference(M) == pytest.approx(1.0, abs=1e-6)


def test_min_eig_batch_matches_scalar():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 50))
    batch = oracle.min_eig_sampling_batch(a[0], a[1], a[2])
    single = [oracle.min_eig_sampling_reference([[p, q], [q, r]]) for p, q, r in a.T]
    np.testing.assert_allclose(batch, single, rtol=0, atol=1e-14)


def test_certify_roots_and_min_eig():
    for rep in (oracle.certify_roots(), oracle.certify_min_eig()):
        assert rep.passed, rep.row()


def test_certify_propagator():
    rep = oracle.certify_propagator(draws=30)
    assert rep.passed, rep.row()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_certify_spectral_derivative(n):
    rep = oracle.certify_spectral_derivative(n)
    assert rep.passed, rep.row()


def test_report_passed_flag_follows_tolerance():
    assert oracle.OracleReport("x", 1e-9, 1e-8, 1).passed
    assert not oracle.OracleReport("x", 2e-8, 1e-8, 1).passed
    assert not oracle.OracleReport("x", float("nan"), 1e-8, 1).passed
    assert oracle.OracleReport("x", 1e-9, 1e-8, 4).row().endswith("PASS")
