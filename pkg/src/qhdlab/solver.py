"""Periodic pseudo-spectral solver for the nonlinear system and its diagnostics.

The perturbation ``(rho, m)`` about a constant state lives on a torus of
length ``L``. Time stepping is a second-order exponential integrator: the
linearization is advanced exactly mode by mode and only the quadratic flux
remainder ``d_x (0, N2)`` is explicit. During a run the state is kept in
Fourier space, so the zero mode (total mass and momentum) is never touched
by a transform.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import beta as beta_fn

from . import kernels
from .errors import AccuracyError, DomainError, SolverAbort, UnsupportedRegimeError
from .model import EquilibriumState, ModelParams, classify_equilibrium, pressure

CFL = 0.5


@dataclass(frozen=True)
class Grid1D:
    N: int
    L: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 64 or self.N & (self.N - 1):
            raise DomainError(f"N must be a power of two >= 64, got {self.N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise DomainError(f"L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def xi(self) -> np.ndarray:
        """Wavenumbers of the full transform, in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.N, d=self.dx)

    @property
    def xi_half(self) -> np.ndarray:
        """Non-negative wavenumbers of the real transform (last entry is Nyquist)."""
        return 2.0 * math.pi * np.fft.rfftfreq(self.N, d=self.dx)

    def dealias_mask(self) -> np.ndarray:
        """True for real-transform modes kept by the 2/3 rule."""
        return np.arange(self.N // 2 + 1) <= self.N // 3


@dataclass
class FieldState:
    grid: Grid1D
    rho_pert: np.ndarray
    m_pert: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.rho_pert = np.asarray(self.rho_pert, dtype=float)
        self.m_pert = np.asarray(self.m_pert, dtype=float)
        if self.rho_pert.shape != (self.grid.N,) or self.m_pert.shape != (self.grid.N,):
            raise DomainError("field arrays must have length N")

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.rho_pert.copy(), self.m_pert.copy(), self.t)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: bool = True
    rho_floor: Optional[float] = None
    s: float = 3.0
    output_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not self.t_end >= 0:
            raise DomainError("t_end must be non-negative")
        if not self.s >= 3:
            raise DomainError("Sobolev index s must be at least 3")
        if self.output_stride < 1:
            raise DomainError("output_stride must be at least 1")

    def floor_for(self, eq: EquilibriumState) -> float:
        return 1e-6 * eq.rho_star if self.rho_floor is None else self.rho_floor


def _deriv_factor(xi_half, n):
    d = (1j * xi_half) ** n
    if n % 2 == 1:
        d[-1] = 0.0
    return d


def spectral_derivative(grid: Grid1D, f, n: int) -> np.ndarray:
    """``n``-th derivative by the discrete Fourier transform.

    The Nyquist coefficient is dropped for odd ``n`` so that the result is
    the derivative of a real trigonometric interpolant.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N,):
        raise DomainError("field length must equal N")
    if n == 0:
        return f.copy()
    return np.fft.irfft(_deriv_factor(grid.xi_half, n) * np.fft.rfft(f), n=grid.N)


def _filtered(grid, f):
    fh = np.fft.rfft(f)
    fh[~grid.dealias_mask()] = 0.0
    return np.fft.irfft(fh, n=grid.N)


def _check_state(eq, rho, m, floor, t=None, snapshot=None):
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(m))):
        raise SolverAbort("non-finite values in the state", t=t, snapshot=snapshot)
    rmin = float(np.min(eq.rho_star + rho))
    if rmin < floor:
        raise SolverAbort(
            f"total density {rmin:.3e} fell below the floor {floor:.3e}", t=t, snapshot=snapshot
        )


def _prepare(eq, state, dealias, floor):
    rho, m = state.rho_pert, state.m_pert
    if dealias:
        rho, m = _filtered(state.grid, rho), _filtered(state.grid, m)
    _check_state(eq, rho, m, floor, state.t, state)
    return rho, m


def rhs_conservative(eq: EquilibriumState, state: FieldState, dealias: bool = False,
                     rho_floor: Optional[float] = None):
    """Time derivatives of the perturbation from the full conservative fluxes.

    With ``dealias`` the input fields are 2/3-filtered before any product
    is formed.
    """
    floor = 1e-6 * eq.rho_star if rho_floor is None else rho_floor
    g = state.grid
    rho, m = _prepare(eq, state, dealias, floor)
    r = eq.rho_star + rho
    M = eq.m_star + m
    p = eq.params
    # subtract the constant equilibrium flux; it has zero derivative anyway
    flux0 = eq.m_star ** 2 / eq.rho_star + float(pressure(p, eq.rho_star))
    flux = M * M / r + pressure(p, r) - flux0
    bohm = r * spectral_derivative(g, np.log(r), 2)
    drho = -spectral_derivative(g, m, 1)
    dm = (-spectral_derivative(g, flux, 1) + p.mu * spectral_derivative(g, m, 2)
          + 0.5 * p.k ** 2 * spectral_derivative(g, bohm, 1))
    return drho, dm


def linear_rhs(eq: EquilibriumState, state: FieldState, dealias: bool = False):
    """``-A* u_x + B* u_xx + C* u_xxx`` applied spectrally."""
    g = state.grid
    rho, m = state.rho_pert, state.m_pert
    if dealias:
        rho, m = _filtered(g, rho), _filtered(g, m)
    rx = spectral_derivative(g, rho, 1)
    mx = spectral_derivative(g, m, 1)
    drho = -mx
    dm = (-eq.alpha_star * rx - 2.0 * eq.u_star * mx + eq.mu * spectral_derivative(g, m, 2)
          + 0.5 * eq.k ** 2 * spectral_derivative(g, rho, 3))
    return drho, dm


def nonlinear_remainder_N2(eq: EquilibriumState, state: FieldState, dealias: bool = False,
                           rho_floor: Optional[float] = None) -> np.ndarray:
    """Quadratic flux remainder ``N2`` so that full rhs = linear rhs + ``d_x (0, N2)``."""
    floor = 1e-6 * eq.rho_star if rho_floor is None else rho_floor
    rho, m = _prepare(eq, state, dealias, floor)
    rx = spectral_derivative(state.grid, rho, 1)
    return kernels.remainder_n2(rho, m, rx, eq.rho_star, eq.m_star, eq.gamma, eq.k)


def phi_functions(eq: EquilibriumState, xi, h):
    """``exp(hR)``, ``phi1(hR)`` and ``phi2(hR)`` per mode, each shape (n, 2, 2).

    ``phi1`` and ``phi2`` are read off the exponential of the block matrix
    ``[[hR, I, 0], [0, 0, I], [0, 0, 0]]``.
    """
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    R = np.zeros((n, 2, 2), dtype=np.complex128)
    alpha = eq.alpha_star + 0.5 * eq.k ** 2 * xi * xi
    R[:, 0, 1] = -1j * xi
    R[:, 1, 0] = -1j * xi * alpha
    R[:, 1, 1] = -2j * xi * eq.u_star - eq.mu * xi * xi
    big = np.zeros((n, 6, 6), dtype=np.complex128)
    big[:, 0:2, 0:2] = h * R
    big[:, 0:2, 2:4] = np.eye(2)
    big[:, 2:4, 4:6] = np.eye(2)
    ex = expm(big)
    E = kernels.propagator(xi, h, eq.mu, eq.k, eq.u_star, eq.alpha_star, eq.p_prime_star)
    return E, ex[:, 0:2, 2:4], ex[:, 0:2, 4:6]


class ExponentialStepper:
    """ETD-RK2 stepper on the real-transform coefficients of ``(rho, m)``."""

    def __init__(self, eq: EquilibriumState, grid: Grid1D, config: SolverConfig):
        self.eq = eq
        self.grid = grid
        self.config = config
        self.h = config.dt
        self.floor = config.floor_for(eq)
        xi = grid.xi_half
        self.E, phi1, phi2 = phi_functions(eq, xi, self.h)
        self.hphi1 = self.h * phi1
        self.hphi2 = self.h * phi2
        self.dx1 = _deriv_factor(xi, 1)
        self.keep = grid.dealias_mask() if config.dealias else np.ones(xi.size, bool)
        self.keep = self.keep.copy()
        self.keep[-1] = False

    def to_spectral(self, state: FieldState) -> np.ndarray:
        U = np.stack([np.fft.rfft(state.rho_pert), np.fft.rfft(state.m_pert)], axis=1)
        U[-1] = 0.0
        return U

    def to_physical(self, U, t) -> FieldState:
        N = self.grid.N
        return FieldState(self.grid, np.fft.irfft(U[:, 0], n=N), np.fft.irfft(U[:, 1], n=N), t)

    def forcing(self, U, t) -> np.ndarray:
        """Transform of ``(0, d_x N2)`` with the 2/3 filter applied to inputs and output."""
        N = self.grid.N
        Uf = U * self.keep[:, None]
        rho = np.fft.irfft(Uf[:, 0], n=N)
        m = np.fft.irfft(Uf[:, 1], n=N)
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(m))):
            raise SolverAbort("non-finite values in the state", t=t,
                              snapshot=self.to_physical(U, t))
        rmin = float(np.min(self.eq.rho_star + rho))
        if rmin < self.floor:
            raise SolverAbort(f"total density {rmin:.3e} fell below the floor {self.floor:.3e}",
                              t=t, snapshot=self.to_physical(U, t))
        rx = np.fft.irfft(self.dx1 * Uf[:, 0], n=N)
        n2 = kernels.remainder_n2(rho, m, rx, self.eq.rho_star, self.eq.m_star,
                                  self.eq.gamma, self.eq.k)
        F = np.zeros_like(U)
        F[:, 1] = self.dx1 * np.fft.rfft(n2) * self.keep
        return F

    def advance(self, U, t):
        Fn = self.forcing(U, t)
        a = np.einsum("kij,kj->ki", self.E, U) + np.einsum("kij,kj->ki", self.hphi1, Fn)
        Fa = self.forcing(a, t + self.h)
        out = a + np.einsum("kij,kj->ki", self.hphi2, Fa - Fn)
        out[-1] = 0.0
        return out


def step(eq: EquilibriumState, state: FieldState, config: SolverConfig) -> FieldState:
    """One exponential-integrator step of size ``config.dt``."""
    stepper = ExponentialStepper(eq, state.grid, config)
    U = stepper.advance(stepper.to_spectral(state), state.t)
    out = stepper.to_physical(U, state.t + config.dt)
    _check_state(eq, out.rho_pert, out.m_pert, stepper.floor, out.t, out)
    return out


def sobolev_norm(grid: Grid1D, f, s: float) -> float:
    """Discrete ``H^s`` norm ``(sum_k (1 + xi_k^2)^s |f_k|^2 L)^(1/2)``, ``f_k = fft(f)/N``."""
    fh = np.fft.rfft(np.asarray(f, dtype=float)) / grid.N
    return _sobolev_from_rfft(grid, fh, s)


def _sobolev_from_rfft(grid, fh, s):
    xi = grid.xi_half
    w = np.full(xi.size, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return math.sqrt(float(np.sum(w * (1.0 + xi * xi) ** s * np.abs(fh) ** 2)) * grid.L)


def max_stable_dt(eq: EquilibriumState, state: FieldState) -> float:
    """Explicit-forcing step bound from the largest characteristic speed."""
    r = eq.rho_star + state.rho_pert
    if np.min(r) <= 0:
        raise DomainError("density must be positive")
    u = (eq.m_star + state.m_pert) / r
    c = np.sqrt(eq.gamma * r ** (eq.gamma - 1.0))
    speed = float(np.max(np.abs(u) + c))
    return min(CFL * state.grid.dx / speed, 0.1 / eq.mu)


def gaussian(grid: Grid1D, amplitude: float, width: float, center: Optional[float] = None):
    """``amplitude exp(-(x - center)^2 / (2 width^2))`` on the periodic grid."""
    if not width > 0:
        raise DomainError("width must be positive")
    c = grid.L / 2.0 if center is None else center
    d = (grid.x - c + grid.L / 2.0) % grid.L - grid.L / 2.0
    return amplitude * np.exp(-0.5 * (d / width) ** 2)


def gaussian_state(grid, rho_amp=1e-3, rho_width=10.0, m_amp=0.0, m_width=10.0, center=None):
    return FieldState(grid, gaussian(grid, rho_amp, rho_width, center),
                      gaussian(grid, m_amp, m_width, center))


HISTORY_COLUMNS = ("t", "sobolev_rho_sp1", "sobolev_m_s", "E_s", "F_s", "Q_s", "G_s",
                   "mass_defect", "momentum_defect")


@dataclass
class EnergyHistory:
    s: float
    times: list = field(default_factory=list)
    sobolev_rho: list = field(default_factory=list)
    sobolev_m: list = field(default_factory=list)
    E_s: list = field(default_factory=list)
    F_s: list = field(default_factory=list)
    Q_s: list = field(default_factory=list)
    G_s: list = field(default_factory=list)
    mass_defect: list = field(default_factory=list)
    momentum_defect: list = field(default_factory=list)
    envelope: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: Optional[str] = None
    final_state: Optional[FieldState] = None

    def columns(self):
        return {
            "t": np.array(self.times),
            "sobolev_rho_sp1": np.array(self.sobolev_rho),
            "sobolev_m_s": np.array(self.sobolev_m),
            "E_s": np.array(self.E_s),
            "F_s": np.array(self.F_s),
            "Q_s": np.array(self.Q_s),
            "G_s": np.array(self.G_s),
            "mass_defect": np.array(self.mass_defect),
            "momentum_defect": np.array(self.momentum_defect),
        }


class _Diagnostics:
    def __init__(self, grid, s, U0):
        self.grid = grid
        self.s = s
        self.h = EnergyHistory(s)
        N = grid.N
        self.mass0 = U0[0, 0].real / N * grid.L
        self.mom0 = U0[0, 1].real / N * grid.L
        self.dx1 = _deriv_factor(grid.xi_half, 1)
        self._prev_diss = None
        self._E = 0.0
        self._F = 0.0
        self._G = 0.0

    def record(self, U, t):
        g, s, N = self.grid, self.s, self.grid.N
        rh, mh = U[:, 0] / N, U[:, 1] / N
        n_rho_sp1 = _sobolev_from_rfft(g, rh, s + 1)
        n_m_s = _sobolev_from_rfft(g, mh, s)
        n_rho_s = _sobolev_from_rfft(g, rh, s)
        n_m_sm1 = _sobolev_from_rfft(g, mh, s - 1)
        diss = (_sobolev_from_rfft(g, self.dx1 * rh, s + 1) ** 2
                + _sobolev_from_rfft(g, self.dx1 * mh, s) ** 2)
        h = self.h
        if self._prev_diss is not None:
            self._F += 0.5 * (t - h.times[-1]) * (diss + self._prev_diss)
        self._prev_diss = diss
        self._E = max(self._E, n_rho_sp1 ** 2 + n_m_s ** 2)
        env = n_rho_s + n_m_sm1
        self._G = max(self._G, (1.0 + t) ** 0.25 * env)
        h.times.append(t)
        h.sobolev_rho.append(n_rho_sp1)
        h.sobolev_m.append(n_m_s)
        h.E_s.append(self._E)
        h.F_s.append(self._F)
        h.Q_s.append(self._E + self._F)
        h.G_s.append(self._G)
        h.envelope.append(env)
        h.mass_defect.append(U[0, 0].real / N * g.L - self.mass0)
        h.momentum_defect.append(U[0, 1].real / N * g.L - self.mom0)


def run_simulation(eq: EquilibriumState, initial: FieldState, config: SolverConfig,
                   allow_supersonic: bool = False, progress=None) -> EnergyHistory:
    """Advance ``initial`` to ``config.t_end`` and record the energy bookkeeping.

    Diagnostics are taken every ``output_stride`` steps and at the final
    time. A positivity or finiteness failure ends the run early; the partial
    history is returned with ``aborted`` set.
    """
    if not eq.is_subsonic and not allow_supersonic:
        raise UnsupportedRegimeError(
            f"run_simulation needs a subsonic state (got {eq.regime.value}); "
            "pass allow_supersonic to run it anyway"
        )
    grid = initial.grid
    floor = config.floor_for(eq)
    _check_state(eq, initial.rho_pert, initial.m_pert, floor, initial.t, initial)
    stepper = ExponentialStepper(eq, grid, config)
    U = stepper.to_spectral(initial)
    diag = _Diagnostics(grid, config.s, U)
    nsteps = int(math.ceil(config.t_end / config.dt - 1e-9))
    t = initial.t
    diag.record(U, t)
    try:
        for n in range(1, nsteps + 1):
            U = stepper.advance(U, t)
            t = initial.t + n * config.dt
            if n % config.output_stride == 0 or n == nsteps:
                diag.record(U, t)
                if progress is not None:
                    progress(t)
        # positivity and finiteness of the final state
        final = stepper.to_physical(U, t)
        _check_state(eq, final.rho_pert, final.m_pert, floor, t, final)
    except SolverAbort as exc:
        diag.h.aborted = True
        diag.h.abort_reason = str(exc)
        diag.h.final_state = exc.snapshot
        return diag.h
    diag.h.final_state = final
    return diag.h


def envelope_constant(history: EnergyHistory) -> float:
    """Smallest ``C1`` with ``||rho||_s + ||m||_(s-1) <= C1 (1+t)^(-1/4)`` times the initial sum."""
    t = np.asarray(history.times)
    env = np.asarray(history.envelope)
    if env[0] == 0:
        return 0.0
    return float(np.max(env * (1.0 + t) ** 0.25) / env[0])


# Boundedness of the time-weight integrals in the nonlinear bookkeeping

def _h1_parts(c1, tau, epsrel):
    if tau == 0:
        return 0.0, 0.0
    w = (1.0 + tau) ** 0.25
    # substitute s = tau - z; the exponential kernel is negligible past 60/c
    top1 = min(tau, 60.0 / c1)
    top2 = min(tau, 30.0 / c1)
    i1, e1 = quad(lambda s: math.exp(-c1 * s) * (1.0 + tau - s) ** -0.25, 0.0, top1,
                  epsabs=0.0, epsrel=epsrel, limit=200)
    i2, e2 = quad(lambda s: math.exp(-2.0 * c1 * s) * (1.0 + tau - s) ** -0.5, 0.0, top2,
                  epsabs=0.0, epsrel=epsrel, limit=200)
    if e1 > 1e3 * epsrel * abs(i1) or e2 > 1e3 * epsrel * abs(i2):
        raise AccuracyError(f"H1 quadrature did not converge at t={tau}")
    return w * i1, w * math.sqrt(i2)


def _h2(tau, epsrel):
    if tau == 0:
        return 0.0
    pts = [p for p in (1.0, tau - 1.0) if 0.0 < p < tau]
    val, err = quad(lambda z: (1.0 + tau - z) ** -0.75 * (1.0 + z) ** -0.5, 0.0, tau,
                    points=pts or None, epsabs=0.0, epsrel=epsrel, limit=400)
    if err > 1e3 * epsrel * abs(val):
        raise AccuracyError(f"H2 quadrature did not converge at t={tau}")
    return (1.0 + tau) ** 0.25 * val


H2_LIMIT = float(beta_fn(0.5, 0.25))


@dataclass(frozen=True)
class BoundednessReport:
    t_grid: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    sup_h1: float
    sup_h2: float
    refined_sup_h1: float
    refined_sup_h2: float
    h1_plateau: bool
    h2_plateau: bool

    @property
    def refinement_change(self) -> float:
        return max(abs(self.refined_sup_h1 - self.sup_h1) / self.sup_h1,
                   abs(self.refined_sup_h2 - self.sup_h2) / self.sup_h2)


def h1h2_profiles(c1, t_grid, epsrel=1e-10):
    """Running suprema ``H1(t)`` and ``H2(t)`` on ``t_grid`` (sorted ascending)."""
    a = np.array([_h1_parts(c1, t, epsrel) for t in t_grid])
    b = np.array([_h2(t, epsrel) for t in t_grid])
    h1 = np.maximum.accumulate(a[:, 0]) + np.maximum.accumulate(a[:, 1])
    h2 = np.maximum.accumulate(b)
    return h1, h2


def h1h2_boundedness(c1: float, t_grid=None, plateau_from=1e3, plateau_rtol=0.01):
    """Evaluate ``H1``, ``H2`` on a time grid and their suprema.

    The suprema are recomputed on a time grid with a midpoint inserted in
    every interval and at a tighter quadrature tolerance to measure their
    stability. ``h1_plateau``/``h2_plateau`` record whether each
    function grows by less than ``plateau_rtol`` beyond ``plateau_from``.
    ``H2`` approaches ``B(1/2, 1/4)`` from below only logarithmically slowly,
    so its plateau flag is expected to be false on ``[0, 1e4]``.
    """
    if not c1 > 0:
        raise DomainError("c1 must be positive")
    if t_grid is None:
        t_grid = np.concatenate([[0.0], np.geomspace(1e-2, 1e4, 121)])
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    if t_grid[0] < 0 or t_grid[-1] > 1e4:
        raise DomainError("t_grid must lie in [0, 1e4]")
    h1, h2 = h1h2_profiles(c1, t_grid, 1e-10)
    fine = np.sort(np.concatenate([t_grid, 0.5 * (t_grid[1:] + t_grid[:-1])]))
    r1, r2 = h1h2_profiles(c1, fine, 1e-13)
    if not (np.all(np.isfinite(h1)) and np.all(np.isfinite(h2))):
        raise AccuracyError("non-finite H1/H2 values")
    late = t_grid >= plateau_from

    def plateau(h):
        if np.count_nonzero(late) < 2:
            return True
        seg = h[late]
        return bool(seg[-1] <= seg[0] * (1.0 + plateau_rtol))

    return BoundednessReport(t_grid, h1, h2, float(h1[-1]), float(h2[-1]),
                             float(r1[-1]), float(r2[-1]), plateau(h1), plateau(h2))


# Snapshots

def write_snapshot(path, eq: EquilibriumState, state: FieldState, s: float = 3.0):
    """Plain-text snapshot: ``key value`` header lines then ``x rho_pert m_pert`` rows."""
    g = state.grid
    lines = [
        f"# L {g.L:.17g}", f"# N {g.N}", f"# t {state.t:.17g}",
        f"# gamma {eq.gamma:.17g}", f"# mu {eq.mu:.17g}", f"# k {eq.k:.17g}",
        f"# rho_star {eq.rho_star:.17g}", f"# m_star {eq.m_star:.17g}", f"# s {s:.17g}",
    ]
    body = [f"{x:.17g} {r:.17g} {m:.17g}" for x, r, m in zip(g.x, state.rho_pert, state.m_pert)]
    atomic_write_text(path, "\n".join(lines + body) + "\n")


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns ``(eq, state, s)``."""
    header = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, val = line[1:].split()
                header[key] = val
            elif line.strip():
                rows.append([float(v) for v in line.split()])
    try:
        grid = Grid1D(int(header["N"]), float(header["L"]))
        params = ModelParams(float(header["gamma"]), float(header["mu"]), float(header["k"]))
        eq = classify_equilibrium(params, float(header["rho_star"]), float(header["m_star"]))
    except KeyError as exc:
        raise DomainError(f"snapshot header is missing {exc}") from None
    data = np.array(rows)
    if data.shape != (grid.N, 3):
        raise DomainError("snapshot body does not match N")
    return eq, FieldState(grid, data[:, 1], data[:, 2], float(header["t"])), float(header["s"])


def atomic_write_text(path, text):
    """Write ``text`` to a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
