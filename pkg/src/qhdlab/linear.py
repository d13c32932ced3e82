"""Exact evolution of Fourier modes of the linearized system and decay rates.

A mode ``U_hat(xi)`` obeys ``U_hat' = R(xi) U_hat`` with
``R(xi) = -(i xi A(xi) + xi^2 B*)``; its propagator ``exp(t R)`` is a 2x2
matrix available in closed form. Decay of the semigroup on the whole line
is measured by Plancherel: the weighted norms are integrals over ``xi`` of
propagated closed-form data transforms, so no periodization is involved.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from . import kernels
from .errors import AccuracyError, DomainError
from .model import EquilibriumState
from .symbol import (
    alpha,
    compensating_constants,
    compensating_symbol,
    default_scan_grid,
    dissipativity_scan,
    _require_subsonic,
)

QUAD_RTOL = 1e-8
TAIL_EXPONENT = 30.0


@dataclass(frozen=True)
class ModeState:
    xi: float
    U_hat: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U_hat, dtype=np.complex128).reshape(2)
        if not np.all(np.isfinite(U)):
            raise DomainError("mode amplitudes must be finite")
        object.__setattr__(self, "U_hat", U)


@dataclass(frozen=True)
class Propagator:
    xi: float
    t: float
    M: np.ndarray


def _kernel_args(eq):
    return eq.mu, eq.k, eq.u_star, eq.alpha_star, eq.p_prime_star


def propagator_matrices(eq: EquilibriumState, xi, t):
    """``exp(t R(xi))`` for an array of wavenumbers, shape (n, 2, 2)."""
    if not t >= 0:
        raise DomainError(f"t must be non-negative, got {t!r}")
    return kernels.propagator(np.asarray(xi, dtype=float), float(t), *_kernel_args(eq))


def mode_propagator(eq: EquilibriumState, xi: float, t: float) -> Propagator:
    """Closed-form ``exp(-t (i xi A(xi) + B(xi)))``.

    With ``lam_bar`` the mean of the two roots and ``N = R - lam_bar I``
    (so ``N^2 = Delta/4 I``) this is
    ``exp(t lam_bar) [cosh(z) I + t sinh(z)/z N]``, ``z = t sqrt(Delta)/2``;
    for coalescing roots it reduces to ``exp(t lam)(I + t N)``.
    """
    M = propagator_matrices(eq, [xi], t)[0]
    return Propagator(float(xi), float(t), M)


def evolve_mode(eq: EquilibriumState, mode: ModeState, t: float) -> ModeState:
    P = mode_propagator(eq, mode.xi, t)
    return ModeState(mode.xi, P.M @ mode.U_hat)


def lembee_energy(eq: EquilibriumState, xi: float, V_hat, delta: float) -> float:
    """Energy ``|V|^2 - delta xi <V, i K_hat(xi) V>`` of a rescaled mode.

    ``V_hat = S(xi)^(1/2) U_hat``. The inner product is conjugate-linear in
    its first slot; ``i K_hat`` is Hermitian so the value is real.
    """
    V = np.asarray(V_hat, dtype=np.complex128).reshape(2)
    K = compensating_symbol(eq, xi).K_hat
    cross = np.vdot(V, 1j * (K @ V))
    return float(np.vdot(V, V).real - delta * xi * cross.real)


def lembee_delta_bounds(eq: EquilibriumState):
    """Return ``(delta_equiv, delta_decay)``.

    ``delta <= delta_equiv`` keeps ``delta |xi K_hat| <= 1/2`` for all xi, so
    the energy stays within ``[1/2, 3/2] |V|^2``. ``delta <= delta_decay``
    additionally makes ``-dE/dt / xi^2`` a positive semi-definite form, i.e.
    the energy is non-increasing along every trajectory.
    """
    eps, _ = compensating_constants(eq)
    delta_equiv = eq.k / (2.0 * math.sqrt(2.0) * eps)
    # sup over xi of (4 u*^2 + mu^2 xi^2) / alpha(xi)
    g = max(4.0 * eq.u_star ** 2 / eq.alpha_star, 2.0 * eq.mu ** 2 / eq.k ** 2)
    delta_decay = min(delta_equiv, 4.0 * eq.mu / (eps * (4.0 + g)))
    return delta_equiv, delta_decay


def rescale_to_V(eq: EquilibriumState, xi: float, U_hat):
    """``S(xi)^(1/2) U_hat``."""
    U = np.asarray(U_hat, dtype=np.complex128)
    return np.array([math.sqrt(float(alpha(eq, xi))) * U[0], U[1]])


@functools.lru_cache(maxsize=64)
def scan_omega0(eq: EquilibriumState) -> float:
    """Decay constant ``omega0`` from the default dissipativity scan."""
    report = dissipativity_scan(eq)
    if report.omega0_estimate is None:
        raise DomainError(f"state is not strictly dissipative ({report.verdict})")
    return report.omega0_estimate


@dataclass(frozen=True)
class PointwiseReport:
    c_fitted: float
    omega0_used: float
    trials: int
    violations: int
    seed: int
    generator: str = "PCG64"
    c_max: float = 100.0
    worst: Optional[dict] = None

    def as_text(self):
        return (
            "{\n"
            f'  "c_fitted": {self.c_fitted:.17g},\n'
            f'  "omega0_used": {self.omega0_used:.17g},\n'
            f'  "trials": {self.trials},\n'
            f'  "violations": {self.violations},\n'
            f'  "seed": {self.seed},\n'
            f'  "generator": "{self.generator}"\n'
            "}"
        )


def default_pointwise_grids():
    xi = np.concatenate([default_scan_grid(200), np.linspace(-5.0, 5.0, 101)])
    t = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 200)])
    return xi, t


def weighted_mode_norm(eq, xi, U):
    """``(1 + xi^2)|U1|^2 + |U2|^2`` for arrays of modes (rows of U)."""
    return (1.0 + xi * xi) * np.abs(U[..., 0]) ** 2 + np.abs(U[..., 1]) ** 2


def pointwise_bound_check(
    eq: EquilibriumState,
    xi_grid=None,
    t_grid=None,
    trials: int = 1000,
    seed: int = 20240607,
    safety: float = 0.99,
    c_max: float = 100.0,
    omega0: Optional[float] = None,
) -> PointwiseReport:
    """Monte-Carlo check of the weighted pointwise decay bound.

    Draws ``(xi, t)`` from the grids and a random complex unit vector per
    trial, and records ``W(t) exp(2 safety omega0 xi^2 t) / W(0)`` with
    ``W = (1 + xi^2)|U1|^2 + |U2|^2``. The fitted constant is the largest
    ratio; a trial violates the bound when its ratio exceeds ``c_max`` or
    is not finite.
    """
    _require_subsonic(eq, "pointwise_bound_check")
    if xi_grid is None or t_grid is None:
        dx, dt = default_pointwise_grids()
        xi_grid = dx if xi_grid is None else xi_grid
        t_grid = dt if t_grid is None else t_grid
    xi_grid = np.asarray(xi_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if xi_grid.size == 0 or t_grid.size == 0:
        raise DomainError("grids must be non-empty")
    if np.any(t_grid < 0):
        raise DomainError("times must be non-negative")
    w0 = scan_omega0(eq) if omega0 is None else float(omega0)
    w = safety * w0
    rng = np.random.Generator(np.random.PCG64(seed))
    xi = rng.choice(xi_grid, size=trials)
    t = rng.choice(t_grid, size=trials)
    U0 = rng.normal(size=(trials, 2)) + 1j * rng.normal(size=(trials, 2))
    U0 /= np.linalg.norm(U0, axis=1, keepdims=True)
    ratios = np.empty(trials)
    for j in range(trials):
        M = propagator_matrices(eq, [xi[j]], t[j])[0]
        Ut = M @ U0[j]
        Wt = float(weighted_mode_norm(eq, xi[j], Ut))
        W0 = float(weighted_mode_norm(eq, xi[j], U0[j]))
        if Wt == 0.0:
            ratios[j] = 0.0
        else:
            expo = math.log(Wt) - math.log(W0) + 2.0 * w * xi[j] ** 2 * t[j]
            ratios[j] = math.exp(expo) if expo < 700.0 else math.inf
    bad = ~np.isfinite(ratios) | (ratios > c_max)
    j = int(np.argmax(np.nan_to_num(ratios, nan=np.inf)))
    worst = {"xi": float(xi[j]), "t": float(t[j]), "U0": U0[j].tolist(), "ratio": float(ratios[j])}
    return PointwiseReport(
        c_fitted=float(np.max(ratios)),
        omega0_used=w,
        trials=int(trials),
        violations=int(np.count_nonzero(bad)),
        seed=int(seed),
        c_max=c_max,
        worst=worst,
    )


_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class FourierProfile:
    """Initial data ``f = (rho_amp g, m_amp g)`` with a closed-form transform.

    ``shape`` selects ``g``: ``"gaussian"`` is ``exp(-x^2 / (2 w^2))``,
    ``"sech2"`` is ``sech(x / w)^2``, ``"box"`` is the indicator of
    ``|x| <= w``. Transforms use ``(2 pi)^(-1/2) int f e^(-i x xi) dx``.
    """

    shape: str = "gaussian"
    width: float = 1.0
    rho_amp: float = 1.0
    m_amp: float = 0.0

    SHAPES = ("gaussian", "sech2", "box")

    def __post_init__(self):
        if self.shape not in self.SHAPES:
            raise DomainError(f"unknown profile {self.shape!r}; choose from {self.SHAPES}")
        if not self.width > 0:
            raise DomainError("profile width must be positive")

    def g_hat(self, xi: float) -> float:
        w = self.width
        if self.shape == "gaussian":
            return w * math.exp(-0.5 * (w * xi) ** 2)
        if self.shape == "sech2":
            y = 0.5 * math.pi * w * xi
            if abs(y) < 1e-8:
                return 2.0 * w / _SQRT_2PI
            if abs(y) > 700.0:
                return 0.0
            return 2.0 * w * y / math.sinh(y) / _SQRT_2PI
        if xi == 0.0:
            return 2.0 * w / _SQRT_2PI
        return 2.0 * math.sin(w * xi) / xi / _SQRT_2PI

    def hat(self, xi: float):
        g = self.g_hat(xi)
        return self.rho_amp * g, self.m_amp * g

    def hat_at_zero(self):
        return self.hat(0.0)

    def l1_norm(self) -> float:
        """``||f_1||_L1 + ||f_2||_L1``."""
        w = self.width
        g1 = {"gaussian": w * _SQRT_2PI, "sech2": 2.0 * w, "box": 2.0 * w}[self.shape]
        return (abs(self.rho_amp) + abs(self.m_amp)) * g1

    def tail_radius(self, ell: int) -> float:
        """Radius beyond which the weighted ``|f_hat|^2`` is below 1e-16 of its scale."""
        w = self.width
        if self.shape == "gaussian":
            return (9.0 + 2.0 * ell) / w
        if self.shape == "sech2":
            return (40.0 + 6.0 * ell) / (math.pi * w)
        return math.inf


def truncation_radius(omega0: float, t: float) -> float:
    """``max(10, sqrt(30 / (omega0 t)))``; infinite at ``t = 0``."""
    if t <= 0:
        return math.inf
    return max(10.0, math.sqrt(TAIL_EXPONENT / (omega0 * t)))


def semigroup_norms(eq: EquilibriumState, profile: FourierProfile, t: float, ell: int = 0,
                    omega0: Optional[float] = None, rtol: float = QUAD_RTOL):
    """Weighted norms of ``d_x^ell (e^(tA) f)`` on the whole line.

    Returns ``(norm1, norm0)``, the H^1 norm of the density component and
    the L^2 norm of the momentum component, each via Plancherel as
    ``int xi^(2 ell) (1 + xi^2) |U1|^2`` resp. ``int xi^(2 ell) |U2|^2``
    (square roots taken). The integral over ``|xi| <= Xi(t)`` is done on the
    positive half-line with ``+xi`` and ``-xi`` evaluated together.
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError("ell must be a non-negative integer")
    if not t >= 0:
        raise DomainError("t must be non-negative")
    _require_subsonic(eq, "semigroup_norms")
    ell = int(ell)
    w0 = scan_omega0(eq) if omega0 is None else omega0
    radius = min(truncation_radius(w0, t), profile.tail_radius(ell))
    if not math.isfinite(radius):
        raise AccuracyError(
            f"no finite truncation radius for profile {profile.shape!r} at t={t}"
        )
    args = _kernel_args(eq)
    mw = kernels.mode_weights

    def integrand(x):
        f1, f2 = profile.hat(x)
        # real data: f_hat(-xi) = conj(f_hat(xi)); the profiles are even and real
        return np.array(mw(x, t, ell, f1, f2, f1, f2, *args))

    # breakpoints on the scale of the heat-like low-frequency peak
    scales = []
    if t > 0:
        sigma = 1.0 / math.sqrt(2.0 * w0 * t)
        scales += [sigma * c for c in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
    scales += [c / profile.width for c in (0.5, 1.0, 2.0, 4.0)]
    points = sorted({p for p in scales if 0 < p < radius})
    val, err = quad_vec(integrand, 0.0, radius, epsabs=0.0, epsrel=1e-2 * rtol,
                        points=points or None, limit=20000, norm="max")
    scale = float(np.max(np.abs(val)))
    if not np.all(np.isfinite(val)) or (scale > 0 and err > rtol * scale):
        raise AccuracyError(
            f"quadrature error estimate {err:.3g} exceeds {rtol:g} relative (value {scale:.3g})"
        )
    val = np.maximum(val, 0.0)
    return math.sqrt(val[0]), math.sqrt(val[1])


def semigroup_total_norm(eq, profile, t, ell=0, omega0=None):
    n1, n0 = semigroup_norms(eq, profile, t, ell, omega0)
    return math.hypot(n1, n0)


@dataclass(frozen=True)
class DecayFit:
    ell: Optional[int]
    times: np.ndarray
    values: np.ndarray
    exponent: float
    prefactor: float
    residual: float
    window: tuple = field(default=(100.0, 1000.0))

    def model(self, t):
        return self.prefactor * (1.0 + np.asarray(t)) ** (-self.exponent)


def decay_rate_fit(times, values, window=(100.0, 1000.0), ell=None) -> DecayFit:
    """Least-squares fit of ``v = C (1 + t)^(-p)`` in log-log coordinates.

    Only samples with ``window[0] <= t <= window[1]`` enter; at least 10 are
    required. ``residual`` is the largest relative deviation of the fitted
    model from the samples inside the window.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise DomainError("times and values must have the same shape")
    if np.any(~(v > 0)):
        raise DomainError("decay fit needs strictly positive values")
    sel = (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(sel) < 10:
        raise DomainError(
            f"decay fit needs at least 10 samples in window {window}, got {np.count_nonzero(sel)}"
        )
    x = np.log1p(t[sel])
    y = np.log(v[sel])
    X = np.column_stack([np.ones_like(x), -x])
    (logc, p), *_ = np.linalg.lstsq(X, y, rcond=None)
    c = math.exp(logc)
    fit = c * (1.0 + t[sel]) ** (-p)
    resid = float(np.max(np.abs(fit - v[sel]) / v[sel]))
    return DecayFit(ell, t, v, float(p), c, resid, tuple(window))


def decay_curve(eq, profile, times, ells=(0, 1)):
    """Total weighted norms at each time for each derivative order."""
    w0 = scan_omega0(eq)
    return {ell: np.array([semigroup_total_norm(eq, profile, t, ell, w0) for t in times])
            for ell in ells}
