"""Acceptance suite: twelve numbered pass/fail checks across all modules.

Each check returns a :class:`CriterionResult`. ``run_acceptance`` executes
them in order, optionally restricted to one module tag, and the CLI prints
the resulting table. Expensive shared inputs (the default nonlinear run)
are computed once per process.
"""
from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linear, oracle, solver, symbol
from .model import Regime, equilibrium

MODULE_TAGS = ("symbol", "linear", "solver", "oracle")
DEFAULT_SEED = 20240607


@dataclass
class CriterionResult:
    number: int
    title: str
    modules: tuple
    passed: bool
    detail: str
    seconds: float = 0.0

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d}. {self.title}: {self.detail}"


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    modules: tuple
    check: Callable[[], tuple]


def default_subsonic():
    return equilibrium(gamma=2.0, rho_star=1.0, m_star=1.0, mu=1.0, k=1.0)


def default_supersonic():
    return equilibrium(gamma=2.0, rho_star=1.0, m_star=2.0, mu=1.0, k=1.0)


def check_subsonic_dissipativity():
    eq = default_subsonic()
    rep = symbol.dissipativity_scan(eq)
    lp, lm = symbol.dispersion_roots(eq, rep.xi_grid)
    worst_re = float(max(lp.real.max(), lm.real.max()))
    w0 = rep.omega0_estimate
    ok = (rep.verdict == symbol.Verdict.STRICTLY_DISSIPATIVE and w0 is not None
          and w0 > 0.01 and worst_re <= symbol.SIGN_TOL)
    return ok, f"omega0={w0:.6g}, max Re lambda on grid={worst_re:.3e}"


SUPERSONIC_MARGIN = 0.05


def check_supersonic_instability():
    eq = default_supersonic()
    rep = symbol.dissipativity_scan(eq)
    xi = rep.xi_grid
    lp, _ = symbol.dispersion_roots(eq, xi)
    ax = np.abs(xi)
    low = (ax > 0) & (ax <= 1.0)
    found = bool(np.any(lp.real[low] > 0))
    edge2 = 2.0 * eq.beta_star / eq.k ** 2
    high = xi * xi > edge2 + SUPERSONIC_MARGIN
    stable_high = bool(np.all(lp.real[high] < 0))
    ok = found and stable_high and rep.verdict == symbol.Verdict.UNSTABLE_MODES_FOUND
    return ok, (f"unstable in (0,1]: {found}; window={rep.unstable_window}; "
                f"stable for xi^2 > {edge2:g}+{SUPERSONIC_MARGIN:g}: {stable_high}")


def check_quadratic_form(seed=DEFAULT_SEED, draws=20, points=10_000):
    rng = np.random.Generator(np.random.PCG64(seed))
    half = np.geomspace(1e-4, 1e3, points // 2 - 1)
    xi = np.concatenate([-half[::-1], [0.0], half, [1e4]])
    worst_gap = math.inf
    worst_oracle = 0.0
    for _ in range(draws):
        eq = oracle.draw_equilibrium(rng)
        _, theta = symbol.compensating_constants(eq)
        lam = symbol.quadratic_form_min_eig(eq, xi, check=False)
        worst_gap = min(worst_gap, float(np.min(lam - theta)))
        a11, a12, a22 = symbol.quadratic_form_matrix(eq, xi)
        ref = oracle.min_eig_sampling_batch(a11, a12, a22)
        worst_oracle = max(worst_oracle, float(np.max(np.abs(ref - lam))))
    ok = worst_gap >= -symbol.MIN_EIG_TOL and worst_oracle <= 1e-6
    return ok, (f"min(lambda_min - theta)={worst_gap:.3e} over {draws}x{xi.size} points; "
                f"sampling oracle max diff={worst_oracle:.2e}")


def check_vieta():
    worst = 0.0
    for eq in (default_subsonic(), default_supersonic()):
        xi = symbol.default_scan_grid()
        lp, lm = symbol.dispersion_roots(eq, xi)
        prod = xi * xi * symbol.alpha(eq, xi)
        scale = np.maximum(1.0, np.abs(prod))
        e1 = np.abs(lp * lm - prod) / scale
        e2 = np.abs(lp + lm + eq.mu * xi * xi + 2j * xi * eq.u_star) / scale
        worst = max(worst, float(e1.max()), float(e2.max()))
    return worst <= 1e-10, f"max scaled Vieta defect={worst:.3e} (tol 1e-10)"


def check_propagator(seed=DEFAULT_SEED):
    rep = oracle.certify_propagator(seed=seed)
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    comp = 0.0
    for _ in range(100):
        eq = oracle.draw_equilibrium(rng)
        xi = rng.uniform(-20.0, 20.0)
        t1, t2 = rng.uniform(0.0, 5.0, size=2)
        a = linear.mode_propagator(eq, xi, t1 + t2).M
        b = linear.mode_propagator(eq, xi, t1).M @ linear.mode_propagator(eq, xi, t2).M
        comp = max(comp, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
    ok = rep.passed and comp <= 1e-10
    return ok, (f"RK4 max-entry error={rep.max_error:.3e} (tol 1e-8); "
                f"composition defect={comp:.3e} (tol 1e-10)")


def check_pointwise_bound(seed=DEFAULT_SEED):
    rep = linear.pointwise_bound_check(default_subsonic(), trials=1000, seed=seed)
    ok = rep.c_fitted < 100 and rep.violations == 0
    return ok, f"C={rep.c_fitted:.4g}, violations={rep.violations}, trials={rep.trials}"


def decay_times():
    return np.geomspace(100.0, 1000.0, 20)


def check_semigroup_rates():
    eq = default_subsonic()
    prof = linear.FourierProfile("gaussian", 1.0, 1.0, 0.0)
    times = decay_times()
    curves = linear.decay_curve(eq, prof, times, ells=(0, 1))
    fits = {ell: linear.decay_rate_fit(times, curves[ell], ell=ell) for ell in (0, 1)}
    target = {0: 0.25, 1: 0.75}
    ok = all(abs(fits[e].exponent - target[e]) <= 0.05 and fits[e].residual < 0.02 for e in (0, 1))
    detail = "; ".join(f"ell={e}: p={fits[e].exponent:.4f} (target {target[e]}), "
                       f"residual={fits[e].residual:.2e}" for e in (0, 1))
    return ok, detail


def check_h1h2():
    rep = solver.h1h2_boundedness(1.0)
    finite = math.isfinite(rep.sup_h1) and math.isfinite(rep.sup_h2)
    ok = finite and rep.refinement_change <= 0.01
    return ok, (f"sup H1={rep.sup_h1:.6g}, sup H2={rep.sup_h2:.6g}, "
                f"refinement change={rep.refinement_change:.2e}")


def default_grid():
    return solver.Grid1D(4096, 400.0)


@functools.lru_cache(maxsize=1)
def default_run():
    """The small-pulse reference run: L=400, N=4096, amplitude 1e-3, width 10, t=50."""
    eq = default_subsonic()
    grid = default_grid()
    init = solver.gaussian_state(grid, 1e-3, 10.0)
    dt = solver.max_stable_dt(eq, init)
    dt = 50.0 / math.ceil(50.0 / dt)
    cfg = solver.SolverConfig(dt=dt, t_end=50.0, output_stride=10)
    return solver.run_simulation(eq, init, cfg)


def check_conservation():
    h = default_run()
    defect = max(float(np.max(np.abs(h.mass_defect))), float(np.max(np.abs(h.momentum_defect))))
    eq = default_subsonic()
    grid = default_grid()
    zero = solver.FieldState(grid, np.zeros(grid.N), np.zeros(grid.N))
    cfg = solver.SolverConfig(dt=0.02, t_end=200.0)
    stepper = solver.ExponentialStepper(eq, grid, cfg)
    U = stepper.to_spectral(zero)
    for n in range(10_000):
        U = stepper.advance(U, n * cfg.dt)
    zmax = float(np.max(np.abs(U)))
    ok = (not h.aborted) and defect <= 1e-10 and zmax == 0.0
    return ok, f"max defect={defect:.3e} (tol 1e-10); zero data after 1e4 steps: max |u|={zmax:g}"


def linear_consistency_error(amplitude=1e-8, t_end=10.0, dt=0.02):
    """Relative sup-norm gap between the solver and exact per-mode linear evolution."""
    eq = default_subsonic()
    grid = default_grid()
    init = solver.gaussian_state(grid, amplitude, 10.0)
    cfg = solver.SolverConfig(dt=dt, t_end=t_end)
    stepper = solver.ExponentialStepper(eq, grid, cfg)
    U0 = stepper.to_spectral(init)
    U = U0
    n = round(t_end / dt)
    for j in range(n):
        U = stepper.advance(U, j * dt)
    P = linear.propagator_matrices(eq, grid.xi_half, n * dt)
    lin = np.einsum("kij,kj->ki", P, U0)
    lin[-1] = 0.0
    a = stepper.to_physical(U, t_end)
    b = stepper.to_physical(lin, t_end)
    gap = max(np.max(np.abs(a.rho_pert - b.rho_pert)), np.max(np.abs(a.m_pert - b.m_pert)))
    ref = max(np.max(np.abs(b.rho_pert)), np.max(np.abs(b.m_pert)))
    return float(gap / ref)


def check_linear_consistency():
    err = linear_consistency_error()
    return err <= 1e-10, f"relative gap at t=10 for amplitude 1e-8: {err:.3e} (tol 1e-10)"


def check_remainder():
    eq = default_subsonic()
    grid = default_grid()
    x = grid.x
    c = grid.L / 2.0
    rho1 = np.exp(-0.5 * ((x - c) / 10.0) ** 2)
    m1 = 0.5 * np.exp(-0.5 * ((x - c - 5.0) / 8.0) ** 2)
    ident = 0.0
    norms = {}
    for eps in (1e-2, 1e-3):
        st = solver.FieldState(grid, eps * rho1, eps * m1)
        full = solver.rhs_conservative(eq, st)
        lin = solver.linear_rhs(eq, st)
        n2 = solver.nonlinear_remainder_N2(eq, st)
        dn2 = solver.spectral_derivative(grid, n2, 1)
        ident = max(ident, float(np.max(np.abs(full[0] - lin[0]))),
                    float(np.max(np.abs(full[1] - lin[1] - dn2))))
        norms[eps] = float(np.sqrt(np.sum(n2 * n2) * grid.dx)) / eps ** 2
    spread = abs(norms[1e-2] - norms[1e-3]) / norms[1e-3]
    ok = ident <= 1e-10 and spread <= 0.05
    return ok, (f"identity defect={ident:.3e} (tol 1e-10); "
                f"||N2(eps u)||/eps^2 spread={spread:.3%} (tol 5%)")


def check_global_envelope():
    h = default_run()
    c1 = solver.envelope_constant(h)
    t = np.asarray(h.times)
    G = np.asarray(h.G_s)
    g5 = float(np.interp(5.0, t, G))
    ratio = float(G[-1] / g5)
    ok = (not h.aborted) and c1 < 50 and ratio <= 2.0
    return ok, f"C1={c1:.4g} (tol < 50); G_s(50)/G_s(5)={ratio:.4f} (tol 2)"


CRITERIA = (
    Criterion(1, "subsonic strict dissipativity", ("symbol",), check_subsonic_dissipativity),
    Criterion(2, "supersonic low-wavenumber instability", ("symbol",), check_supersonic_instability),
    Criterion(3, "compensating quadratic form positivity", ("symbol", "oracle"), check_quadratic_form),
    Criterion(4, "Vieta identities on the scan grid", ("symbol",), check_vieta),
    Criterion(5, "closed-form propagator vs RK4 and composition", ("linear", "oracle"), check_propagator),
    Criterion(6, "pointwise weighted decay bound", ("linear",), check_pointwise_bound),
    Criterion(7, "algebraic semigroup decay rates", ("linear",), check_semigroup_rates),
    Criterion(8, "H1/H2 weight integrals bounded", ("solver",), check_h1h2),
    Criterion(9, "conservation and equilibrium fixed point", ("solver",), check_conservation),
    Criterion(10, "linear-regime consistency", ("solver", "linear"), check_linear_consistency),
    Criterion(11, "N2 identity and quadratic scaling", ("solver",), check_remainder),
    Criterion(12, "global decay envelope and bounded G_s", ("solver",), check_global_envelope),
)


def run_criterion(c: Criterion) -> CriterionResult:
    start = time.perf_counter()
    try:
        ok, detail = c.check()
    except Exception as exc:  # a crash is a failure, reported with its message
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(c.number, c.title, c.modules, bool(ok), detail,
                           time.perf_counter() - start)


def run_acceptance(module_filter: Optional[str] = None, report: Optional[Callable] = None):
    """Run every criterion (or those tagged ``module_filter``) in order."""
    if module_filter is not None and module_filter not in MODULE_TAGS:
        raise ValueError(f"unknown module filter {module_filter!r}; choose from {MODULE_TAGS}")
    results = []
    for c in CRITERIA:
        if module_filter is not None and module_filter not in c.modules:
            continue
        res = run_criterion(c)
        results.append(res)
        if report is not None:
            report(res)
    return results
