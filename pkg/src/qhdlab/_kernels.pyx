# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; mirror of ``_kernels_py`` (see there for semantics)."""
import numpy as np

from libc.math cimport fabs, sqrt, log1p, expm1, pow
from libc.complex cimport cexp, csqrt, ccosh, csinh, cabs, creal, cimag

cdef double _SINHC_SERIES = 1e-4
cdef double _COSH_LIMIT = 300.0
CONFLUENT_RTOL = 1e-8
DEGENERATE_RTOL = 1e-14
cdef double _CONF = 1e-8
cdef double _DEGEN = 1e-14


cdef inline double _dmax(double a, double b) nogil:
    return a if a > b else b


def dispersion_roots(xi, double mu, double k, double u, double pp, double alpha_star):
    cdef double[::1] x = np.ascontiguousarray(xi, dtype=np.float64).ravel()
    cdef Py_ssize_t n = x.shape[0], j
    lp_arr = np.empty(n, dtype=np.complex128)
    lm_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] lp = lp_arr
    cdef double complex[::1] lm = lm_arr
    cdef double xv, x2, a, b, scale, c1abs2
    cdef double complex sq, center, c0
    with nogil:
        for j in range(n):
            xv = x[j]
            x2 = xv * xv
            a = x2 * (x2 * (mu * mu - 2.0 * k * k) - 4.0 * pp)
            b = 4.0 * mu * x2 * xv * u
            sq = csqrt(a + 1j * b)
            center = -0.5 * mu * x2 - 1j * xv * u
            c1abs2 = (mu * x2) * (mu * x2) + 4.0 * x2 * u * u
            scale = _dmax(c1abs2, 4.0 * fabs(x2 * (alpha_star + 0.5 * k * k * x2)))
            if sqrt(a * a + b * b) <= _DEGEN * scale:
                sq = 0.0
            if creal(sq) == 0.0 and cimag(sq) < 0.0:
                sq = -sq
            lp[j] = center + 0.5 * sq
            lm[j] = center - 0.5 * sq
    shape = np.shape(xi)
    return lp_arr.reshape(shape), lm_arr.reshape(shape)


cdef inline void _prop(double xv, double t, double mu, double k, double u,
                       double alpha_star, double pp, double complex* out) noexcept nogil:
    cdef double x2 = xv * xv
    cdef double complex lam_bar = -0.5 * mu * x2 - 1j * xv * u
    cdef double alpha = alpha_star + 0.5 * k * k * x2
    cdef double complex n00 = 0.5 * mu * x2 + 1j * xv * u
    cdef double complex n01 = -1j * xv
    cdef double complex n10 = -1j * xv * alpha
    cdef double complex delta = x2 * (x2 * (mu * mu - 2.0 * k * k) - 4.0 * pp) + 4j * mu * x2 * xv * u
    cdef double complex s = 0.5 * csqrt(delta)
    cdef double complex lp = lam_bar + s
    cdef double complex lm = lam_bar - s
    cdef double complex e, z, ch, sh, ci, cn, ep, em
    cdef double big = _dmax(_dmax(cabs(lp), cabs(lm)), 1.0)
    if cabs(2.0 * s) <= _CONF * big:
        e = cexp(t * lam_bar)
        ci = e
        cn = e * t
    else:
        z = t * s
        if fabs(creal(z)) <= _COSH_LIMIT:
            e = cexp(t * lam_bar)
            ch = ccosh(z)
            if cabs(z) < _SINHC_SERIES:
                sh = 1.0 + z * z / 6.0
            else:
                sh = csinh(z) / z
            ci = e * ch
            cn = e * t * sh
        else:
            ep = cexp(t * lp)
            em = cexp(t * lm)
            ci = 0.5 * (ep + em)
            cn = (ep - em) / (2.0 * s)
    out[0] = ci + cn * n00
    out[1] = cn * n01
    out[2] = cn * n10
    out[3] = ci - cn * n00


def propagator(xi, double t, double mu, double k, double u, double alpha_star, double pp):
    cdef double[::1] x = np.ascontiguousarray(np.atleast_1d(xi), dtype=np.float64).ravel()
    cdef Py_ssize_t n = x.shape[0], j
    out_arr = np.empty((n, 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double complex buf[4]
    with nogil:
        for j in range(n):
            _prop(x[j], t, mu, k, u, alpha_star, pp, buf)
            out[j, 0, 0] = buf[0]
            out[j, 0, 1] = buf[1]
            out[j, 1, 0] = buf[2]
            out[j, 1, 1] = buf[3]
    return out_arr


def remainder_n2(rho, m, rho_x, double rho_star, double m_star, double gamma, double k):
    cdef double[::1] r_ = np.ascontiguousarray(rho, dtype=np.float64).ravel()
    cdef double[::1] m_ = np.ascontiguousarray(m, dtype=np.float64).ravel()
    cdef double[::1] rx = np.ascontiguousarray(rho_x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = r_.shape[0], j, p
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double u = m_star / rho_star
    cdef double scale = pow(rho_star, gamma)
    cdef double c2 = gamma * (gamma - 1.0) / 2.0
    cdef double half_k2 = 0.5 * k * k
    cdef double rv, tot, w, x, term, acc
    with nogil:
        for j in range(n):
            rv = r_[j]
            tot = rho_star + rv
            w = m_[j] - u * rv
            x = rv / rho_star
            if fabs(x) < 1e-3:
                term = c2 * x * x
                acc = term
                for p in range(3, 9):
                    term = term * ((gamma - p + 1.0) / p) * x
                    acc += term
            else:
                acc = expm1(gamma * log1p(x)) - gamma * x
            out[j] = -w * w / tot - scale * acc - half_k2 * rx[j] * rx[j] / tot
    return out_arr.reshape(np.shape(rho))


def mode_weights(double xi, double t, int ell, double complex f1p, double complex f2p,
                 double complex f1m, double complex f2m, double mu, double k, double u,
                 double alpha_star, double pp):
    cdef double complex buf[4]
    cdef double complex a, b
    cdef double w1 = 0.0, w0 = 0.0
    _prop(xi, t, mu, k, u, alpha_star, pp, buf)
    a = buf[0] * f1p + buf[1] * f2p
    b = buf[2] * f1p + buf[3] * f2p
    w1 += creal(a) * creal(a) + cimag(a) * cimag(a)
    w0 += creal(b) * creal(b) + cimag(b) * cimag(b)
    _prop(-xi, t, mu, k, u, alpha_star, pp, buf)
    a = buf[0] * f1m + buf[1] * f2m
    b = buf[2] * f1m + buf[3] * f2m
    w1 += creal(a) * creal(a) + cimag(a) * cimag(a)
    w0 += creal(b) * creal(b) + cimag(b) * cimag(b)
    cdef double x2 = xi * xi
    cdef double wl = pow(x2, ell)
    return wl * (1.0 + x2) * w1, wl * w0
