"""Independent reference computations used to certify the fast paths.

Each reference reaches the same quantity by a different route: time
stepping instead of a closed form, a companion quadratic instead of the
centered root formula, stencils instead of FFTs, angular sampling instead
of an eigenvalue formula. The ``certify_*`` functions compare the two on
random draws and return an :class:`OracleReport`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import ModelParams, classify_equilibrium, Regime
from .symbol import constant_matrices, dispersion_roots, quadratic_form_matrix, quadratic_form_min_eig


@dataclass
class OracleReport:
    name: str
    max_error: float
    tolerance: float
    cases: int
    worst_case: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error) and self.max_error <= self.tolerance)

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{self.name}, {self.cases}, {self.max_error:.3e}, {self.tolerance:.1e}, {flag}"


def draw_equilibrium(rng, regime=Regime.SUBSONIC, gamma=(1.2, 3.0), rho=(0.5, 2.0),
                     mu=(0.5, 1.5), k=(0.5, 1.5), mach=(0.0, 0.9)):
    """Random equilibrium; ``mach`` bounds ``|u*| / sqrt(p'(rho*))``."""
    g = rng.uniform(*gamma)
    r = rng.uniform(*rho)
    params = ModelParams(g, rng.uniform(*mu), rng.uniform(*k))
    c = math.sqrt(g * r ** (g - 1.0))
    if regime == Regime.SUPERSONIC:
        ma = rng.uniform(1.1, 2.0)
    else:
        ma = rng.uniform(*mach)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return classify_equilibrium(params, r, sign * ma * c * r)


def mode_generator(eq, xi):
    """``-(i xi (A* + xi^2 C*) + xi^2 B*)`` assembled from the constant matrices."""
    cm = constant_matrices(eq)
    return -(1j * xi * (cm.A_star + xi * xi * cm.C_star) + xi * xi * cm.B_star)


def rk4_batch(G, U0, nsteps, dt):
    """Classical RK4 for ``U' = G U`` on a batch; row ``j`` takes ``nsteps[j]`` steps."""
    G = np.asarray(G, dtype=np.complex128)
    U = np.array(U0, dtype=np.complex128)
    nsteps = np.asarray(nsteps, dtype=np.int64)

    def f(V):
        return np.einsum("nij,nj->ni", G, V)

    for step in range(int(nsteps.max(initial=0))):
        live = (step < nsteps)[:, None]
        k1 = f(U)
        k2 = f(U + 0.5 * dt * k1)
        k3 = f(U + 0.5 * dt * k2)
        k4 = f(U + dt * k3)
        U = np.where(live, U + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), U)
    return U


def _step_count(t, dt):
    if dt > 1e-3 or dt <= 0:
        raise DomainError("reference step must satisfy 0 < dt <= 1e-3")
    n = round(t / dt)
    if abs(n * dt - t) > 1e-9 * max(t, 1.0):
        raise DomainError(f"t={t} is not an integer multiple of dt={dt}")
    return n


def rk4_mode_reference(eq, xi, U0, t, dt=1e-4):
    """Mode ``U0`` advanced to time ``t`` by classical RK4."""
    n = _step_count(t, dt)
    U0 = np.asarray(U0, dtype=np.complex128).reshape(1, 2)
    return rk4_batch(mode_generator(eq, xi)[None], U0, [n], dt)[0]


def polynomial_roots_companion(c0, c1):
    """Roots of ``lam^2 + c1 lam + c0`` without cancellation.

    The larger root comes from ``-(c1 + s sqrt(c1^2 - 4 c0)) / 2`` with the
    sign ``s`` that avoids subtraction; the other is ``c0`` over it.
    """
    c0 = complex(c0)
    c1 = complex(c1)
    d = np.sqrt(c1 * c1 - 4.0 * c0)
    s = 1.0 if (c1.conjugate() * d).real >= 0 else -1.0
    q = -0.5 * (c1 + s * d)
    if q == 0:
        return 0j, 0j
    return complex(q), complex(c0 / q)


def finite_difference_reference(f, n, h):
    """Periodic stencil derivative of order ``n`` (1, 2 fourth-order; 3 second-order)."""
    f = np.asarray(f)
    p1, m1 = np.roll(f, -1), np.roll(f, 1)
    p2, m2 = np.roll(f, -2), np.roll(f, 2)
    if n == 1:
        return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
    if n == 2:
        return (-p2 + 16.0 * p1 - 30.0 * f + 16.0 * m1 - m2) / (12.0 * h * h)
    if n == 3:
        return (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h ** 3)
    raise DomainError("finite differences are provided for n = 1, 2, 3")


def min_eig_sampling_reference(M, samples=10_000):
    """Minimum of ``y^T M y`` over unit vectors ``y = (cos phi, sin phi)``."""
    M = np.asarray(M, dtype=float)
    phi = np.linspace(0.0, math.pi, samples, endpoint=False)
    c, s = np.cos(phi), np.sin(phi)
    q = M[0, 0] * c * c + 2.0 * M[0, 1] * c * s + M[1, 1] * s * s
    return float(q.min())


def min_eig_sampling_batch(a11, a12, a22, samples=10_000, chunk=256):
    """Vectorized :func:`min_eig_sampling_reference` over arrays of entries."""
    a11, a12, a22 = np.broadcast_arrays(*(np.asarray(a, dtype=float).ravel() for a in (a11, a12, a22)))
    phi = np.linspace(0.0, math.pi, samples, endpoint=False)
    cc, cs, ss = np.cos(phi) ** 2, 2.0 * np.cos(phi) * np.sin(phi), np.sin(phi) ** 2
    out = np.empty(a11.size)
    for i in range(0, a11.size, chunk):
        j = slice(i, i + chunk)
        q = a11[j, None] * cc + a12[j, None] * cs + a22[j, None] * ss
        out[j] = q.min(axis=1)
    return out


def certify_propagator(draws=100, seed=7, dt=1e-4, tol=1e-8, xi_max=20.0, t_max=5.0):
    """Closed-form propagator against RK4 on random ``(state, xi, t)``."""
    from .linear import mode_propagator

    rng = np.random.Generator(np.random.PCG64(seed))
    eqs, xis, ts = [], [], []
    for _ in range(draws):
        eqs.append(draw_equilibrium(rng))
        xis.append(rng.uniform(-xi_max, xi_max))
        ts.append(round(rng.uniform(0.0, t_max) / dt) * dt)
    steps = [round(t / dt) for t in ts]
    G = np.array([mode_generator(e, x) for e, x in zip(eqs, xis)])
    # two batches of unit vectors give both columns of each propagator
    c0 = rk4_batch(G, np.tile([1.0, 0.0], (draws, 1)), steps, dt)
    c1 = rk4_batch(G, np.tile([0.0, 1.0], (draws, 1)), steps, dt)
    worst, info = 0.0, {}
    for j in range(draws):
        ref = np.column_stack([c0[j], c1[j]])
        M = mode_propagator(eqs[j], xis[j], ts[j]).M
        err = float(np.max(np.abs(M - ref)))
        if err > worst or not np.isfinite(err):
            worst = err
            info = {"xi": xis[j], "t": ts[j], "rho_star": eqs[j].rho_star, "m_star": eqs[j].m_star}
    return OracleReport("propagator vs RK4", worst, tol, draws, info)


def certify_roots(draws=1000, seed=11, tol=1e-10, xi_max=20.0):
    """Centered-formula dispersion roots against the companion quadratic."""
    rng = np.random.Generator(np.random.PCG64(seed))
    worst, info = 0.0, {}
    for _ in range(draws):
        eq = draw_equilibrium(rng, regime=Regime.SUPERSONIC if rng.random() < 0.3 else Regime.SUBSONIC)
        xi = rng.uniform(-xi_max, xi_max)
        c1 = eq.mu * xi * xi + 2j * xi * eq.u_star
        c0 = xi * xi * (eq.alpha_star + 0.5 * eq.k ** 2 * xi * xi)
        ref = sorted(polynomial_roots_companion(c0, c1), key=lambda z: (z.real, z.imag))
        got = sorted(dispersion_roots(eq, xi), key=lambda z: (z.real, z.imag))
        # pair by nearest neighbour in case the sort key ties
        e1 = max(abs(ref[0] - got[0]), abs(ref[1] - got[1]))
        e2 = max(abs(ref[0] - got[1]), abs(ref[1] - got[0]))
        err = min(e1, e2)
        if err > worst:
            worst, info = err, {"xi": xi, "rho_star": eq.rho_star, "m_star": eq.m_star}
    return OracleReport("dispersion roots vs companion", worst, tol, draws, info)


def certify_min_eig(draws=200, seed=13, tol=1e-6, xi_max=50.0):
    """Quadratic-form minimum eigenvalue against angular sampling."""
    rng = np.random.Generator(np.random.PCG64(seed))
    worst, info = 0.0, {}
    for _ in range(draws):
        eq = draw_equilibrium(rng)
        xi = rng.uniform(-xi_max, xi_max)
        a11, a12, a22 = quadratic_form_matrix(eq, xi)
        ref = min_eig_sampling_reference([[a11, a12], [a12, a22]])
        err = abs(quadratic_form_min_eig(eq, xi) - ref)
        if err > worst:
            worst, info = err, {"xi": xi, "rho_star": eq.rho_star, "m_star": eq.m_star}
    return OracleReport("quadratic form min eigenvalue vs sampling", worst, tol, draws, info)


def certify_spectral_derivative(n=1, N=256, L=2.0 * math.pi * 8, tol=None):
    """Spectral derivative of a smooth periodic field against stencils.

    The leading stencil error for a wave ``sin(q x)`` is ``q^n (qh)^4 / 30``,
    ``q^n (qh)^4 / 90`` and ``q^n (qh)^2 / 4`` for ``n = 1, 2, 3``; the
    tolerance is ten times that estimate at the highest wavenumber present.
    """
    from .solver import Grid1D, spectral_derivative

    grid = Grid1D(N, L)
    x = grid.x
    kappa = 2.0 * math.pi / L
    f = np.sin(3 * kappa * x) + 0.5 * np.cos(5 * kappa * x) + 0.2 * np.sin(kappa * x)
    ref = finite_difference_reference(f, n, grid.dx)
    got = spectral_derivative(grid, f, n)
    if tol is None:
        q = 5 * kappa
        qh = q * grid.dx
        trunc = q ** n * {1: qh ** 4 / 30.0, 2: qh ** 4 / 90.0, 3: qh ** 2 / 4.0}[n]
        tol = 10.0 * trunc
    err = float(np.max(np.abs(got - ref)))
    return OracleReport(f"spectral derivative order {n} vs stencil", err, tol, N, {"N": N, "L": L})
