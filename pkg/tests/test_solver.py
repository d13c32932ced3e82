import math

import numpy as np
import pytest
from scipy.linalg import expm

from qhdlab import linear, oracle, solver
from qhdlab.errors import DomainError, SolverAbort, UnsupportedRegimeError
from qhdlab.model import equilibrium

SUB = equilibrium()


@pytest.fixture(scope="module")
def grid():
    return solver.Grid1D(512, 100.0)


def pulse(grid, eps):
    x = grid.x
    c = grid.L / 2
    rho = eps * np.exp(-0.5 * ((x - c) / 5.0) ** 2)
    m = 0.5 * eps * np.exp(-0.5 * ((x - c - 3.0) / 4.0) ** 2)
    return solver.FieldState(grid, rho, m)


@pytest.mark.parametrize("N,L", [(32, 10.0), (100, 10.0), (128, 0.0)])
def test_grid_validation(N, L):
    with pytest.raises(DomainError):
        solver.Grid1D(N, L)


def test_grid_wavenumbers():
    g = solver.Grid1D(64, 2 * math.pi)
    assert g.xi[32] == -32 and g.xi[1] == 1 and g.xi_half[-1] == 32


def test_spectral_derivative_examples(grid):
    assert np.all(solver.spectral_derivative(grid, np.full(grid.N, 2.5), 1) == 0)
    q = 2 * math.pi / grid.L
    s = np.sin(q * grid.x)
    np.testing.assert_allclose(solver.spectral_derivative(grid, s, 2), -q * q * s, atol=1e-12)
    nyq = np.cos(math.pi * np.arange(grid.N))
    assert np.abs(solver.spectral_derivative(grid, nyq, 1)).max() < 1e-12
    assert np.abs(solver.spectral_derivative(grid, nyq, 2)).max() > 1.0


def test_zero_perturbation_is_an_equilibrium(grid):
    z = solver.FieldState(grid, np.zeros(grid.N), np.zeros(grid.N))
    for dealias in (False, True):
        a, b = solver.rhs_conservative(SUB, z, dealias)
        assert np.all(a == 0) and np.all(b == 0)
        assert np.all(solver.nonlinear_remainder_N2(SUB, z, dealias) == 0)
    cfg = solver.SolverConfig(dt=0.05, t_end=1.0)
    out = solver.step(SUB, z, cfg)
    assert np.all(out.rho_pert == 0) and np.all(out.m_pert == 0) and out.t == 0.05


def test_rhs_integrates_to_zero(grid):
    st = pulse(grid, 0.05)
    a, b = solver.rhs_conservative(SUB, st, dealias=True)
    assert abs(a.sum() * grid.dx) < 1e-12
    assert abs(b.sum() * grid.dx) < 1e-12


def test_rhs_minus_linear_is_quadratic(grid):
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        st = pulse(grid, eps)
        full = solver.rhs_conservative(SUB, st)[1]
        lin = solver.linear_rhs(SUB, st)[1]
        ratios.append(np.abs(full - lin).max() / eps ** 2)
    assert abs(ratios[1] - ratios[2]) / ratios[2] < 0.01
    assert abs(ratios[0] - ratios[1]) / ratios[1] < 0.05


@pytest.mark.parametrize("dealias", [False, True])
def test_remainder_identity(grid, dealias):
    for eps in (1e-1, 1e-2, 1e-3):
        st = pulse(grid, eps)
        full = solver.rhs_conservative(SUB, st, dealias)
        lin = solver.linear_rhs(SUB, st, dealias)
        dn2 = solver.spectral_derivative(grid, solver.nonlinear_remainder_N2(SUB, st, dealias), 1)
        assert np.abs(full[0] - lin[0]).max() <= 1e-10
        assert np.abs(full[1] - lin[1] - dn2).max() <= 1e-10


def test_remainder_for_pure_density_bump(grid):
    eq = equilibrium(m_star=0.0, gamma=1.7, rho_star=1.3, k=0.8)
    st = pulse(grid, 0.2)
    st.m_pert[:] = 0.0
    rho = st.rho_pert
    rs = eq.rho_star
    rx = solver.spectral_derivative(grid, rho, 1)
    expected = (-((rs + rho) ** 1.7 - rs ** 1.7 - 1.7 * rs ** 0.7 * rho)
                - 0.5 * 0.64 * rx ** 2 / (rs + rho))
    np.testing.assert_allclose(solver.nonlinear_remainder_N2(eq, st), expected, atol=1e-15)


def test_remainder_quadratic_scaling(grid):
    n = [np.linalg.norm(solver.nonlinear_remainder_N2(SUB, pulse(grid, e))) / e ** 2 for e in (1e-2, 1e-3)]
    assert abs(n[0] - n[1]) / n[1] < 0.05


def test_positivity_abort(grid):
    st = pulse(grid, -1.5)
    with pytest.raises(SolverAbort) as info:
        solver.rhs_conservative(SUB, st)
    assert info.value.snapshot is st
    with pytest.raises(SolverAbort):
        solver.step(SUB, st, solver.SolverConfig(dt=0.01, t_end=1.0))


def test_non_finite_abort(grid):
    st = pulse(grid, 0.01)
    st.m_pert[3] = np.nan
    with pytest.raises(SolverAbort):
        solver.nonlinear_remainder_N2(SUB, st)


def test_config_validation():
    for bad in (dict(dt=0.0), dict(t_end=-1.0), dict(s=2.0), dict(output_stride=0)):
        kw = dict(dt=0.01, t_end=1.0) | bad
        with pytest.raises(DomainError):
            solver.SolverConfig(**kw)


def test_phi_functions(grid):
    h = 0.03
    xi = grid.xi_half[:200:7]
    E, p1, p2 = solver.phi_functions(SUB, xi, h)
    for j, x in enumerate(xi):
        G = oracle.mode_generator(SUB, x)
        np.testing.assert_allclose(E[j], expm(h * G), atol=1e-14)
        series1 = sum(np.linalg.matrix_power(h * G, n) / math.factorial(n + 1) for n in range(25))
        series2 = sum(np.linalg.matrix_power(h * G, n) / math.factorial(n + 2) for n in range(25))
        np.testing.assert_allclose(p1[j], series1, atol=1e-13)
        np.testing.assert_allclose(p2[j], series2, atol=1e-13)
    E0, a, b = solver.phi_functions(SUB, [0.0], h)
    np.testing.assert_allclose(a[0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(b[0], 0.5 * np.eye(2), atol=1e-15)


def test_temporal_self_convergence_is_second_order():
    g = solver.Grid1D(256, 60.0)
    init = solver.gaussian_state(g, 0.1, 3.0, 0.05, 3.0)
    res = []
    for dt in (0.04, 0.02, 0.01):
        stp = solver.ExponentialStepper(SUB, g, solver.SolverConfig(dt=dt, t_end=1.0))
        U = stp.to_spectral(init)
        for n in range(round(1 / dt)):
            U = stp.advance(U, n * dt)
        res.append(stp.to_physical(U, 1.0))
    e = [max(np.abs(a.rho_pert - b.rho_pert).max(), np.abs(a.m_pert - b.m_pert).max())
         for a, b in zip(res, res[1:])]
    assert 3.6 < e[0] / e[1] < 4.4


def one_step_linear_gap(amplitude):
    g = solver.Grid1D(4096, 400.0)
    init = solver.gaussian_state(g, amplitude, 10.0)
    stp = solver.ExponentialStepper(SUB, g, solver.SolverConfig(dt=0.02, t_end=1.0))
    U0 = stp.to_spectral(init)
    U1 = stp.advance(U0, 0.0)
    lin = np.einsum("kij,kj->ki", linear.propagator_matrices(SUB, g.xi_half, 0.02), U0)
    lin[-1] = 0.0
    return float(np.abs(U1 - lin).max() / np.abs(lin).max())


@pytest.mark.xfail(strict=True, reason="the quadratic forcing shifts one step by ~2.4e-3 x amplitude "
                                       "relative to the linear flow; 1e-12 needs amplitude below ~4e-10")
def test_one_step_linear_regime_at_1e_12():
    assert one_step_linear_gap(1e-8) <= 1e-12


def test_linear_regime_gap_is_first_order_in_amplitude():
    # the relative gap is the quadratic forcing measured against a linear
    # solution, so it is proportional to the amplitude
    a, b = one_step_linear_gap(1e-8), one_step_linear_gap(1e-6)
    assert b / a == pytest.approx(100.0, rel=1e-3)


def test_sobolev_norm_parseval_and_monotone(grid):
    rng = np.random.default_rng(0)
    f = rng.normal(size=grid.N)
    l2 = math.sqrt(np.sum(f * f) * grid.dx)
    assert solver.sobolev_norm(grid, f, 0) == pytest.approx(l2, rel=1e-12)
    vals = [solver.sobolev_norm(grid, f, s) for s in (0, 0.5, 1, 2, 3)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_sobolev_norm_gaussian_h1():
    g = solver.Grid1D(4096, 200.0)
    w = 2.0
    f = solver.gaussian(g, 1.0, w)
    exact = math.sqrt(math.sqrt(math.pi) * w + math.sqrt(math.pi) / (2 * w))
    assert solver.sobolev_norm(g, f, 1) == pytest.approx(exact, rel=1e-6)


def test_run_zero_data_gives_zero_history(grid):
    z = solver.FieldState(grid, np.zeros(grid.N), np.zeros(grid.N))
    h = solver.run_simulation(SUB, z, solver.SolverConfig(dt=0.05, t_end=2.0, output_stride=4))
    cols = h.columns()
    for name, col in cols.items():
        if name != "t":
            assert np.all(col == 0), name
    assert cols["t"][-1] == pytest.approx(2.0)


def test_run_bookkeeping(grid):
    st = pulse(grid, 1e-2)
    h = solver.run_simulation(SUB, st, solver.SolverConfig(dt=0.05, t_end=5.0, output_stride=5))
    c = h.columns()
    assert not h.aborted
    assert np.all(np.diff(c["F_s"]) >= 0) and np.all(np.diff(c["E_s"]) >= 0)
    assert np.all(np.diff(c["G_s"]) >= 0)
    np.testing.assert_array_equal(c["Q_s"], c["E_s"] + c["F_s"])
    assert np.abs(c["mass_defect"]).max() <= 1e-10
    assert np.abs(c["momentum_defect"]).max() <= 1e-10
    assert tuple(c) == solver.HISTORY_COLUMNS


def test_run_regime_guard_and_abort(grid):
    sup = equilibrium(m_star=2.0)
    st = pulse(grid, 1e-3)
    cfg = solver.SolverConfig(dt=0.05, t_end=1.0)
    with pytest.raises(UnsupportedRegimeError):
        solver.run_simulation(sup, st, cfg)
    assert not solver.run_simulation(sup, st, cfg, allow_supersonic=True).aborted
    # a strong diverging flow empties the centre: the run ends early and says so
    y = grid.x - 50.0
    burst = solver.FieldState(grid, np.zeros(grid.N), 2.0 * y * np.exp(-0.5 * (y / 2.0) ** 2))
    h = solver.run_simulation(SUB, burst, solver.SolverConfig(dt=0.01, t_end=10.0, output_stride=1,
                                                              rho_floor=0.1))
    assert h.aborted and "floor" in h.abort_reason
    assert h.times[-1] < 10.0 and h.final_state is not None
    # data that already violates the floor is rejected outright
    with pytest.raises(SolverAbort):
        solver.run_simulation(SUB, pulse(grid, -1.5), cfg)


def test_resolution_doubling_changes_diagnostics_little():
    out = []
    for N in (512, 1024):
        g = solver.Grid1D(N, 100.0)
        h = solver.run_simulation(SUB, solver.gaussian_state(g, 1e-3, 5.0),
                                  solver.SolverConfig(dt=0.02, t_end=5.0, output_stride=50))
        out.append(np.array([h.sobolev_rho, h.sobolev_m, h.G_s]))
    assert np.abs(out[0] - out[1]).max() / np.abs(out[1]).max() < 1e-8


def test_snapshot_round_trip(tmp_path, grid):
    st = pulse(grid, 1e-3)
    st.t = 1.25
    path = tmp_path / "snap.txt"
    solver.write_snapshot(path, SUB, st)
    eq2, st2, s = solver.read_snapshot(path)
    assert eq2 == SUB and s == 3.0 and st2.t == 1.25
    np.testing.assert_array_equal(st2.rho_pert, st.rho_pert)
    np.testing.assert_array_equal(st2.m_pert, st.m_pert)


def test_max_stable_dt(grid):
    dt = solver.max_stable_dt(SUB, pulse(grid, 0.0))
    assert dt == pytest.approx(0.5 * grid.dx / (1 + math.sqrt(2)))


def riemann_h2_at_one(n):
    # midpoint rule for 2^(1/4) int_0^1 (2 - z)^(-3/4) (1 + z)^(-1/2) dz
    z = (np.arange(n) + 0.5) / n
    return 2 ** 0.25 * np.sum((2 - z) ** -0.75 * (1 + z) ** -0.5) / n


def test_h2_kernel_at_one_matches_riemann_reference():
    r1, r2 = riemann_h2_at_one(200_000), riemann_h2_at_one(400_000)
    ref = r2 + (r2 - r1) / 3.0
    assert solver._h2(1.0, 1e-12) == pytest.approx(ref, abs=1e-8)


def test_h_functions_vanish_at_zero():
    h1, h2 = solver.h1h2_profiles(1.0, np.array([0.0]))
    assert h1[0] == 0.0 and h2[0] == 0.0


def test_h_suprema_finite_and_stable():
    rep = solver.h1h2_boundedness(1.0)
    assert math.isfinite(rep.sup_h1) and math.isfinite(rep.sup_h2)
    assert rep.refinement_change < 0.01
    assert rep.h1_plateau
    # H1 is essentially saturated by t = 10
    i = np.searchsorted(rep.t_grid, 10.0)
    assert rep.h1[i] >= 0.99 * rep.sup_h1
    # H2 stays below its large-time limit B(1/2, 1/4)
    assert rep.sup_h2 < solver.H2_LIMIT
    with pytest.raises(DomainError):
        solver.h1h2_boundedness(0.0)
    with pytest.raises(DomainError):
        solver.h1h2_boundedness(1.0, [0.0, 2e4])


@pytest.mark.xfail(strict=True, reason="H2 still grows by ~8% between t=1e3 and 1e4; it approaches "
                                       "B(1/2,1/4) only like t^(-1/4)")
def test_h2_flat_beyond_1e3():
    assert solver.h1h2_boundedness(1.0).h2_plateau
