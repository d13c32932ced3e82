import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import expm

from qhdlab import linear, oracle
from qhdlab.errors import AccuracyError, DomainError, UnsupportedRegimeError
from qhdlab.model import equilibrium

SUB = equilibrium()


def test_propagator_trivial_cases():
    np.testing.assert_array_equal(linear.mode_propagator(SUB, 1.7, 0.0).M, np.eye(2))
    np.testing.assert_array_equal(linear.mode_propagator(SUB, 0.0, 3.0).M, np.eye(2))
    with pytest.raises(DomainError):
        linear.mode_propagator(SUB, 1.0, -0.1)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-30, 30), st.floats(0, 10))
def test_propagator_matches_matrix_exponential(seed, xi, t):
    eq = oracle.draw_equilibrium(np.random.default_rng(seed))
    M = linear.mode_propagator(eq, xi, t).M
    ref = expm(t * oracle.mode_generator(eq, xi))
    assert np.abs(M - ref).max() <= 1e-11 * max(1.0, np.abs(ref).max())


def test_propagator_near_coalescing_roots():
    # m* = 0, mu = 3: roots coincide at xi^2 = 8/7; probe on both sides
    eq = equilibrium(m_star=0.0, mu=3.0)
    x0 = math.sqrt(8.0 / 7.0)
    for d in (0.0, 1e-12, 1e-9, 1e-6, -1e-9):
        xi = x0 + d
        M = linear.mode_propagator(eq, xi, 2.0).M
        ref = expm(2.0 * oracle.mode_generator(eq, xi))
        assert np.abs(M - ref).max() <= 1e-10


def test_propagator_long_time_is_finite():
    for eq in (SUB, equilibrium(m_star=2.0)):
        M = linear.mode_propagator(eq, 0.5, 5e3).M
        assert np.all(np.isfinite(M))


def test_supersonic_mode_grows():
    sup = equilibrium(m_star=2.0)
    a = np.abs(linear.mode_propagator(sup, 0.5, 50.0).M).max()
    assert a > 1.0


def test_evolve_mode_composition():
    mode = linear.ModeState(0.8, [1.0, 0.5j])
    one = linear.evolve_mode(SUB, mode, 3.0)
    two = linear.evolve_mode(SUB, linear.evolve_mode(SUB, mode, 1.0), 2.0)
    np.testing.assert_allclose(one.U_hat, two.U_hat, atol=1e-14)
    with pytest.raises(DomainError):
        linear.ModeState(1.0, [np.nan, 0])


def test_energy_equivalence_bounds():
    d_equiv, d_decay = linear.lembee_delta_bounds(SUB)
    assert d_decay <= d_equiv
    rng = np.random.default_rng(5)
    for xi in np.concatenate([-np.geomspace(1e-3, 1e3, 30), np.geomspace(1e-3, 1e3, 30)]):
        V = rng.normal(size=2) + 1j * rng.normal(size=2)
        E = linear.lembee_energy(SUB, xi, V, d_equiv)
        n2 = float(np.vdot(V, V).real)
        assert 0.5 * n2 - 1e-12 <= E <= 1.5 * n2 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 20), st.floats(0.05, 10))
def test_energy_is_non_increasing(seed, xi, t_end):
    rng = np.random.default_rng(seed)
    eq = oracle.draw_equilibrium(rng)
    _, delta = linear.lembee_delta_bounds(eq)
    U = rng.normal(size=2) + 1j * rng.normal(size=2)
    ts = np.linspace(0.0, t_end, 60)
    E = [linear.lembee_energy(eq, xi, linear.rescale_to_V(eq, xi, linear.mode_propagator(eq, xi, t).M @ U), delta)
         for t in ts]
    assert np.all(np.diff(E) <= 1e-12 * E[0])


def test_pointwise_report_and_determinism():
    a = linear.pointwise_bound_check(SUB, trials=200, seed=3)
    b = linear.pointwise_bound_check(SUB, trials=200, seed=3)
    assert a == b
    assert a.generator == "PCG64" and a.trials == 200 and a.violations == 0
    assert a.omega0_used == pytest.approx(0.99 * linear.scan_omega0(SUB))
    text = a.as_text()
    for key in ("c_fitted", "omega0_used", "trials", "violations"):
        assert f'"{key}"' in text


def test_pointwise_flags_violations_when_rate_is_too_fast():
    rep = linear.pointwise_bound_check(SUB, trials=300, seed=1, safety=3.0)
    assert rep.violations > 0 and rep.worst["ratio"] > 100


@pytest.mark.parametrize("shape", linear.FourierProfile.SHAPES)
def test_profile_transforms_match_quadrature(shape):
    prof = linear.FourierProfile(shape, width=1.3)
    g = {
        "gaussian": lambda x: math.exp(-0.5 * (x / 1.3) ** 2),
        "sech2": lambda x: 1.0 / math.cosh(x / 1.3) ** 2,
        "box": lambda x: 1.0 if abs(x) <= 1.3 else 0.0,
    }[shape]
    lim = 1.3 if shape == "box" else 40.0
    for xi in (0.0, 0.4, 2.1):
        val, _ = quad(lambda x: g(x) * math.cos(xi * x), -lim, lim, limit=400, epsabs=1e-13)
        assert prof.g_hat(xi) == pytest.approx(val / math.sqrt(2 * math.pi), abs=1e-10)
    l1, _ = quad(lambda x: abs(g(x)), -lim, lim, limit=400)
    assert prof.l1_norm() == pytest.approx(l1, rel=1e-8)


def test_semigroup_norm_at_zero_time_is_data_norm():
    w = 1.0
    n1, n0 = linear.semigroup_norms(SUB, linear.FourierProfile("gaussian", w, 1.0, 0.0), 0.0)
    assert n1 == pytest.approx(math.sqrt(math.sqrt(math.pi) * w + math.sqrt(math.pi) / (2 * w)), rel=1e-9)
    assert n0 == 0.0
    with pytest.raises(AccuracyError):
        linear.semigroup_norms(SUB, linear.FourierProfile("box"), 0.0)
    # box data is fine once the semigroup has smoothed it
    n1, n0 = linear.semigroup_norms(SUB, linear.FourierProfile("box"), 1.0)
    assert n1 > 0 and n0 > 0


def test_semigroup_norm_errors():
    prof = linear.FourierProfile()
    with pytest.raises(DomainError):
        linear.semigroup_norms(SUB, prof, 1.0, ell=-1)
    with pytest.raises(UnsupportedRegimeError):
        linear.semigroup_norms(equilibrium(m_star=2.0), prof, 1.0)
    with pytest.raises(DomainError):
        linear.FourierProfile("triangle")


def test_semigroup_norms_are_non_increasing_in_time():
    prof = linear.FourierProfile("sech2", 2.0, 1.0, 0.3)
    vals = [linear.semigroup_total_norm(SUB, prof, t) for t in (0.0, 1.0, 10.0, 100.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_decay_fit_recovers_exact_power_law():
    t = np.geomspace(100, 1000, 15)
    fit = linear.decay_rate_fit(t, 3.0 * (1 + t) ** -0.6)
    assert fit.exponent == pytest.approx(0.6, abs=1e-12)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-10)
    assert fit.residual < 1e-12


def test_decay_fit_refusals():
    t = np.geomspace(100, 1000, 5)
    with pytest.raises(DomainError):
        linear.decay_rate_fit(t, t ** -0.5)
    t = np.geomspace(100, 1000, 12)
    with pytest.raises(DomainError):
        linear.decay_rate_fit(t, np.where(t > 500, 0.0, 1.0))


def test_decay_rate_for_ell_two():
    prof = linear.FourierProfile()
    t = np.geomspace(100, 1000, 12)
    vals = linear.decay_curve(SUB, prof, t, ells=(2,))[2]
    fit = linear.decay_rate_fit(t, vals, ell=2)
    assert fit.exponent == pytest.approx(1.25, abs=0.05)
