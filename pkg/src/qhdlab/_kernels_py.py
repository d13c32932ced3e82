"""NumPy reference implementation of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` extension; used
when the extension is not built or ``QHDLAB_PURE_PYTHON`` is set.

Shared conventions: ``u`` is m*/rho*, ``pp`` is p'(rho*), ``alpha_star`` is
pp - u**2. The mode generator is ``R(xi) = -(i xi A(xi) + xi^2 B*)`` with
``A(xi) = A* + xi^2 C*``.
"""
import cmath

import numpy as np

# |z| below which sinh(z)/z is replaced by its two-term series
_SINHC_SERIES = 1e-4
# |Re z| above which cosh/sinh would overflow; use the eigenprojector form
_COSH_LIMIT = 300.0
CONFLUENT_RTOL = 1e-8
DEGENERATE_RTOL = 1e-14


def dispersion_roots(xi, mu, k, u, pp, alpha_star):
    """Roots of ``lam^2 + (mu xi^2 + 2 i xi u) lam + xi^2 alpha(xi) = 0``.

    Returns ``(lam_plus, lam_minus)`` with ``Re lam_plus >= Re lam_minus``
    (ties broken by the larger imaginary part).
    """
    xi = np.asarray(xi, dtype=np.float64)
    x2 = xi * xi
    a = x2 * (x2 * (mu * mu - 2.0 * k * k) - 4.0 * pp)
    b = 4.0 * mu * x2 * xi * u
    delta = a + 1j * b
    sq = np.sqrt(delta)
    center = -0.5 * mu * x2 - 1j * xi * u
    c1 = mu * x2 + 2j * xi * u
    c0 = x2 * (alpha_star + 0.5 * k * k * x2)
    scale = np.maximum(np.abs(c1) ** 2, 4.0 * np.abs(c0))
    degenerate = np.abs(delta) <= DEGENERATE_RTOL * scale
    sq = np.where(degenerate, 0.0, sq)
    # principal root has Re >= 0; on Re == 0 keep the root with larger Im
    flip = (sq.real == 0.0) & (sq.imag < 0.0)
    sq = np.where(flip, -sq, sq)
    return center + 0.5 * sq, center - 0.5 * sq


def _propagator_scalar(xi, t, mu, k, u, alpha_star, pp):
    x2 = xi * xi
    lam_bar = complex(-0.5 * mu * x2, -xi * u)
    alpha = alpha_star + 0.5 * k * k * x2
    # N = R - lam_bar I, traceless with N^2 = (Delta/4) I
    n00 = complex(0.5 * mu * x2, xi * u)
    n01 = complex(0.0, -xi)
    n10 = complex(0.0, -xi * alpha)
    n11 = -n00
    delta = complex(x2 * (x2 * (mu * mu - 2.0 * k * k) - 4.0 * pp), 4.0 * mu * x2 * xi * u)
    s = 0.5 * cmath.sqrt(delta)
    lp = lam_bar + s
    lm = lam_bar - s
    if abs(2.0 * s) <= CONFLUENT_RTOL * max(abs(lp), abs(lm), 1.0):
        e = cmath.exp(t * lam_bar)
        return (e * (1.0 + t * n00), e * t * n01, e * t * n10, e * (1.0 + t * n11))
    z = t * s
    if abs(z.real) <= _COSH_LIMIT:
        e = cmath.exp(t * lam_bar)
        ch = cmath.cosh(z)
        if abs(z) < _SINHC_SERIES:
            sh = 1.0 + z * z / 6.0
        else:
            sh = cmath.sinh(z) / z
        f = e * t * sh
        e_ch = e * ch
        return (e_ch + f * n00, f * n01, f * n10, e_ch + f * n11)
    ep = cmath.exp(t * lp)
    em = cmath.exp(t * lm)
    inv = 1.0 / (2.0 * s)
    d = (ep - em) * inv
    c = 0.5 * (ep + em)
    return (c + d * n00, d * n01, d * n10, c + d * n11)


def propagator(xi, t, mu, k, u, alpha_star, pp):
    """Matrices ``exp(t R(xi))`` for every entry of ``xi``; shape (n, 2, 2)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64)).ravel()
    t = float(t)
    x2 = xi * xi
    lam_bar = -0.5 * mu * x2 - 1j * xi * u
    alpha = alpha_star + 0.5 * k * k * x2
    n00 = 0.5 * mu * x2 + 1j * xi * u
    n01 = -1j * xi
    n10 = -1j * xi * alpha
    delta = x2 * (x2 * (mu * mu - 2.0 * k * k) - 4.0 * pp) + 4j * mu * x2 * xi * u
    s = 0.5 * np.sqrt(delta)
    lp = lam_bar + s
    lm = lam_bar - s
    conf = np.abs(2.0 * s) <= CONFLUENT_RTOL * np.maximum(np.maximum(np.abs(lp), np.abs(lm)), 1.0)
    z = t * s
    mean = ~conf & (np.abs(z.real) <= _COSH_LIMIT)
    eig = ~conf & ~mean
    with np.errstate(all="ignore"):
        e = np.exp(t * lam_bar)
        zm = np.where(mean, z, 0.0)
        ch = np.where(conf, 1.0, np.cosh(zm))
        small = np.abs(zm) < _SINHC_SERIES
        sh = np.where(small, 1.0 + zm * zm / 6.0, np.sinh(zm) / np.where(small, 1.0, zm))
        coef_i = e * ch
        coef_n = e * t * np.where(conf, 1.0, sh)
        if eig.any():
            se = np.where(eig, s, 1.0)
            ep = np.exp(t * np.where(eig, lp, 0.0))
            em = np.exp(t * np.where(eig, lm, 0.0))
            coef_i = np.where(eig, 0.5 * (ep + em), coef_i)
            coef_n = np.where(eig, (ep - em) / (2.0 * se), coef_n)
    out = np.empty((xi.size, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = coef_i + coef_n * n00
    out[:, 0, 1] = coef_n * n01
    out[:, 1, 0] = coef_n * n10
    out[:, 1, 1] = coef_i - coef_n * n00
    return out


def remainder_n2(rho, m, rho_x, rho_star, m_star, gamma, k):
    """Pointwise nonlinear flux remainder ``N2`` of the perturbation system.

    Written without cancellation: the convective part is
    ``(m - u* rho)^2 / (rho* + rho)``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    rho_x = np.asarray(rho_x, dtype=np.float64)
    u = m_star / rho_star
    r = rho_star + rho
    conv = (m - u * rho) ** 2 / r
    x = rho / rho_star
    small = np.abs(x) < 1e-3
    pres = np.empty_like(x)
    xs = x[small]
    c = gamma * (gamma - 1.0) / 2.0
    term = c * xs * xs
    acc = term.copy()
    for n in range(3, 9):
        term = term * ((gamma - n + 1.0) / n) * xs
        acc += term
    pres[small] = acc
    xl = x[~small]
    pres[~small] = np.expm1(gamma * np.log1p(xl)) - gamma * xl
    pres *= rho_star ** gamma
    bohm = 0.5 * k * k * rho_x * rho_x / r
    return -conv - pres - bohm


def mode_weights(xi, t, ell, f1p, f2p, f1m, f2m, mu, k, u, alpha_star, pp):
    """Weighted mode energies at ``+xi`` and ``-xi`` after time ``t``.

    ``f1p, f2p`` are the data transforms at ``+xi``, ``f1m, f2m`` at ``-xi``.
    Returns ``(w1, w0)``: ``xi^(2 ell) (1 + xi^2) |U1|^2`` and
    ``xi^(2 ell) |U2|^2`` summed over the pair.
    """
    xi = float(xi)
    w1 = 0.0
    w0 = 0.0
    for x, f1, f2 in ((xi, f1p, f2p), (-xi, f1m, f2m)):
        m00, m01, m10, m11 = _propagator_scalar(x, t, mu, k, u, alpha_star, pp)
        a = m00 * f1 + m01 * f2
        b = m10 * f1 + m11 * f2
        w1 += a.real * a.real + a.imag * a.imag
        w0 += b.real * b.real + b.imag * b.imag
    x2 = xi * xi
    wl = x2 ** ell
    return wl * (1.0 + x2) * w1, wl * w0
