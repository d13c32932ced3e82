"""Fourier-symbol analysis of the linearized system.

The linearization about ``(rho*, m*)`` reads
``U_t + A* U_x = B* U_xx + C* U_xxx``; in Fourier variables
``U_t + (i xi A(xi) + B(xi)) U = 0`` with the odd symbol
``A(xi) = A* + xi^2 C*`` and the even symbol ``B(xi) = xi^2 B*``.

Everything here is a pure function of an :class:`EquilibriumState` and a
wavenumber. Scalar and array ``xi`` are both accepted where noted.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import DomainError, UnsupportedRegimeError
from .model import EquilibriumState, Regime

SIGN_TOL = 1e-12
MIN_EIG_TOL = 1e-12


@dataclass(frozen=True)
class ConstantMatrices:
    A_star: np.ndarray
    B_star: np.ndarray
    C_star: np.ndarray


def constant_matrices(eq: EquilibriumState) -> ConstantMatrices:
    """Coefficient matrices of the linearized system."""
    A = np.array([[0.0, 1.0], [eq.alpha_star, 2.0 * eq.u_star]])
    B = np.array([[0.0, 0.0], [0.0, eq.mu]])
    C = np.array([[0.0, 0.0], [0.5 * eq.k ** 2, 0.0]])
    return ConstantMatrices(A, B, C)


def alpha(eq: EquilibriumState, xi):
    """Symmetrizer weight ``alpha(xi) = alpha* + k^2 xi^2 / 2`` (array-aware)."""
    return eq.alpha_star + 0.5 * eq.k ** 2 * np.square(xi)


def _require_subsonic(eq, what):
    if eq.regime is not Regime.SUBSONIC:
        raise UnsupportedRegimeError(
            f"{what} requires a subsonic equilibrium; state is {eq.regime} "
            f"(alpha*={eq.alpha_star!r})"
        )


def dispersion_roots(eq: EquilibriumState, xi):
    """Roots ``(lambda_plus, lambda_minus)`` of the dispersion relation.

    ``lambda^2 + (mu xi^2 + 2 i xi u*) lambda + xi^2 alpha(xi) = 0``, valid in
    every regime. The roots come from the principal square root of the
    discriminant; ``lambda_plus`` has the larger real part. Scalar in, scalar
    out; arrays are mapped elementwise.
    """
    lp, lm = kernels.dispersion_roots(
        np.asarray(xi, dtype=float), eq.mu, eq.k, eq.u_star, eq.p_prime_star, eq.alpha_star
    )
    if np.ndim(xi) == 0:
        return complex(lp), complex(lm)
    return lp, lm


@dataclass(frozen=True)
class SymbolEval:
    """Every xi-dependent matrix of the symbol analysis at one wavenumber."""

    xi: float
    alpha: float
    A_xi: np.ndarray
    B_xi: np.ndarray
    S: np.ndarray
    A_tilde: np.ndarray
    B_tilde: np.ndarray
    A_hat: np.ndarray
    B_hat: np.ndarray
    K_hat: np.ndarray
    lambda_plus: complex
    lambda_minus: complex


def symbol_eval(eq: EquilibriumState, xi: float) -> SymbolEval:
    _require_subsonic(eq, "symbol_eval")
    xi = float(xi)
    cm = constant_matrices(eq)
    a = float(alpha(eq, xi))
    A_xi = cm.A_star + xi * xi * cm.C_star
    B_xi = xi * xi * cm.B_star
    S = np.diag([a, 1.0])
    ra = math.sqrt(a)
    A_hat = np.array([[0.0, ra], [ra, 2.0 * eq.u_star]])
    lp, lm = dispersion_roots(eq, xi)
    return SymbolEval(
        xi=xi,
        alpha=a,
        A_xi=A_xi,
        B_xi=B_xi,
        S=S,
        A_tilde=S @ A_xi,
        B_tilde=S @ B_xi,
        A_hat=A_hat,
        B_hat=B_xi.copy(),
        K_hat=compensating_symbol(eq, xi).K_hat,
        lambda_plus=lp,
        lambda_minus=lm,
    )


def transport_eigenvalues(eq: EquilibriumState, xi):
    """Eigenvalues ``(nu_minus, nu_plus)`` of the symmetrized odd symbol."""
    _require_subsonic(eq, "transport_eigenvalues")
    a = alpha(eq, xi)
    u = eq.u_star
    root = np.sqrt(u * u + a * a)
    return u - root, u + root


def genuine_coupling_check(eq: EquilibriumState, xi: float) -> bool:
    """Certify genuine coupling and constant multiplicity at ``xi != 0``.

    The kernel of the dissipation symbol is spanned by ``(1, 0)``, which is
    mapped by ``rho S + A_tilde`` to ``(rho alpha, alpha)``; this never
    vanishes iff ``alpha(xi) > 0``. The eigenvalues of ``A_tilde`` must also
    be real and distinct.
    """
    if xi == 0:
        raise DomainError("genuine coupling is only defined for xi != 0")
    _require_subsonic(eq, "genuine_coupling_check")
    a = float(alpha(eq, xi))
    nu_m, nu_p = transport_eigenvalues(eq, xi)
    return bool(a > 0 and math.isfinite(nu_m) and math.isfinite(nu_p) and nu_m < nu_p)


def _theta_from_epsilon(eps):
    # the completed-square bound gives min(eps/2, mu/2) at eps = eps*, and eps* <= mu/2
    return 0.5 * eps


class CompensatingSymbol(NamedTuple):
    K_hat: np.ndarray
    epsilon_star: float
    theta: float


def compensating_constants(eq: EquilibriumState):
    """Return ``(epsilon_star, theta)`` for a subsonic equilibrium."""
    _require_subsonic(eq, "compensating_symbol")
    ar2 = eq.alpha_star * eq.rho_star ** 2
    eps = 0.5 * eq.mu * ar2 / (ar2 + 2.0 * eq.m_star ** 2)
    return eps, _theta_from_epsilon(eps)


def compensating_symbol(eq: EquilibriumState, xi: float) -> CompensatingSymbol:
    """Skew-symmetric ``K_hat(xi) = eps*/sqrt(alpha(xi)) [[0, 1], [-1, 0]]``."""
    eps, theta = compensating_constants(eq)
    c = eps / math.sqrt(float(alpha(eq, xi)))
    K = np.array([[0.0, c], [-c, 0.0]])
    return CompensatingSymbol(K, eps, theta)


def quadratic_form_matrix(eq: EquilibriumState, xi):
    """Entries ``(a11, a12, a22)`` of ``[K_hat A_hat]^s + B*`` (array-aware)."""
    eps, _ = compensating_constants(eq)
    off = eps * eq.u_star / np.sqrt(alpha(eq, xi))
    a11 = np.full(np.shape(off), eps)
    a22 = np.full(np.shape(off), eq.mu - eps)
    return a11, off, a22


def _min_eig_sym2(a11, a12, a22):
    # smaller eigenvalue of [[a11, a12], [a12, a22]], cancellation-free
    mean = 0.5 * (a11 + a22)
    rad = np.hypot(0.5 * (a11 - a22), a12)
    big = mean + rad
    det = a11 * a22 - a12 * a12
    with np.errstate(divide="ignore", invalid="ignore"):
        via_det = det / big
    return np.where(mean > 0, via_det, mean - rad)


def quadratic_form_min_eig(eq: EquilibriumState, xi, check: bool = True):
    """Smallest eigenvalue of ``[K_hat(xi) A_hat(xi)]^s + B*``.

    With ``check`` set, raises AssertionError when the value falls below
    ``theta - 1e-12``; that can only happen through an error in the constants.
    """
    a11, a12, a22 = quadratic_form_matrix(eq, xi)
    lam = _min_eig_sym2(a11, a12, a22)
    _, theta = compensating_constants(eq)
    if check and np.any(lam < theta - MIN_EIG_TOL):
        worst = float(np.min(lam))
        raise AssertionError(f"quadratic form min eigenvalue {worst!r} < theta={theta!r}")
    return float(lam) if np.ndim(lam) == 0 else lam


class Verdict(str, enum.Enum):
    STRICTLY_DISSIPATIVE = "StrictlyDissipative"
    UNSTABLE_MODES_FOUND = "UnstableModesFound"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DissipativityReport:
    xi_grid: np.ndarray
    max_real_part_ratio: float
    omega0_estimate: Optional[float]
    verdict: Verdict
    unstable_window: Optional[tuple]
    max_real_part: float


def default_scan_grid(n_per_sign=2000, lo=1e-3, hi=50.0):
    """Log-spaced ``|xi|`` in ``[lo, hi]`` with both signs, sorted."""
    pos = np.geomspace(lo, hi, n_per_sign)
    return np.concatenate([-pos[::-1], pos])


def _re_lambda_plus(eq, xi):
    return dispersion_roots(eq, float(xi))[0].real


def _bisect_edge(eq, inside, outside, iters=200):
    # inside: Re lambda_+ > 0, outside: Re lambda_+ <= 0
    for _ in range(iters):
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        if _re_lambda_plus(eq, mid) > 0:
            inside = mid
        else:
            outside = mid
    return inside, outside


def dissipativity_scan(eq: EquilibriumState, xi_grid=None) -> DissipativityReport:
    """Scan ``Re lambda(xi) / xi^2`` over a grid that must exclude zero.

    A subsonic state yields ``StrictlyDissipative`` with
    ``omega0_estimate = -sup Re lambda / xi^2``. When a root with positive
    real part shows up, the first unstable run of positive wavenumbers is
    located and its upper edge refined by bisection on ``Re lambda_+``.
    """
    xi = default_scan_grid() if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if xi.size == 0:
        raise DomainError("empty wavenumber grid")
    if np.any(xi == 0):
        raise DomainError("dissipativity scan grid must exclude xi = 0")
    lp, _ = dispersion_roots(eq, xi)
    re = lp.real
    ratio = re / (xi * xi)
    max_ratio = float(np.max(ratio))
    max_re = float(np.max(re))
    if max_re <= SIGN_TOL and max_ratio < 0 and np.all(re <= SIGN_TOL):
        return DissipativityReport(
            xi_grid=xi,
            max_real_part_ratio=max_ratio,
            omega0_estimate=-max_ratio,
            verdict=Verdict.STRICTLY_DISSIPATIVE,
            unstable_window=None,
            max_real_part=max_re,
        )
    # positive side, ascending from the smallest |xi|; Re lambda is even in xi
    order = np.argsort(np.abs(xi))
    ax = np.abs(xi[order])
    are = re[order]
    window = None
    hits = np.flatnonzero(are > SIGN_TOL)
    if hits.size:
        i0 = hits[0]
        lo = ax[i0]
        if i0 > 0:
            _, lo = _bisect_edge(eq, ax[i0], ax[i0 - 1])
        after = np.flatnonzero(are[i0:] <= 0)
        if after.size:
            j = i0 + after[0]
            hi, _ = _bisect_edge(eq, ax[j - 1], ax[j])
        else:
            hi = ax[-1]
        window = (float(lo), float(hi))
    return DissipativityReport(
        xi_grid=xi,
        max_real_part_ratio=max_ratio,
        omega0_estimate=-max_ratio if max_ratio < 0 else None,
        verdict=Verdict.UNSTABLE_MODES_FOUND,
        unstable_window=window,
        max_real_part=max_re,
    )


SYMBOL_CSV_COLUMNS = (
    "xi",
    "alpha",
    "re_lambda_plus",
    "im_lambda_plus",
    "re_lambda_minus",
    "im_lambda_minus",
    "min_eig_quadform",
    "ratio_re_lambda_over_xi2",
)


def symbol_table(eq: EquilibriumState, xi_grid):
    """Column arrays for the symbol CSV.

    ``min_eig_quadform`` is NaN for non-subsonic states and the ratio is NaN
    at ``xi = 0``.
    """
    xi = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    lp, lm = dispersion_roots(eq, xi)
    if eq.is_subsonic:
        mineig = quadratic_form_min_eig(eq, xi)
    else:
        mineig = np.full(xi.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xi == 0, np.nan, np.maximum(lp.real, lm.real) / (xi * xi))
    return {
        "xi": xi,
        "alpha": alpha(eq, xi),
        "re_lambda_plus": lp.real,
        "im_lambda_plus": lp.imag,
        "re_lambda_minus": lm.real,
        "im_lambda_minus": lm.imag,
        "min_eig_quadform": mineig,
        "ratio_re_lambda_over_xi2": ratio,
    }
