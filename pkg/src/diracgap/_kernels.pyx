# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Sturm negative-eigenvalue counts, weighted
tridiagonal assembly, and the adaptive radial integrator.

Mirrors diracgap._fallback one to one; keep stepping logic and pivot
conventions identical so both backends pass the same contract tests.
"""

from libc.math cimport fabs, sqrt, exp, log, pow as cpow

import numpy as np

BACKEND_NAME = "compiled"

cdef double ETA_PIVOT = 1e-14
cdef long MAX_STEPS = 2000000


def negcount(double[::1] diag, double[::1] off):
    """Count eigenvalues < 0 of the symmetric tridiagonal (diag, off).

    Returns (count, number of perturbed pivots); see the python backend
    for the pivot convention.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double tnorm = 0.0, row, d, eta
    cdef int count = 0, perturbed = 0
    if n == 0:
        return 0, 0
    for i in range(n):
        row = fabs(diag[i])
        if i > 0:
            row += fabs(off[i - 1])
        if i < n - 1:
            row += fabs(off[i])
        if row > tnorm:
            tnorm = row
    if tnorm == 0.0:
        return 0, 0
    eta = ETA_PIVOT * tnorm
    d = diag[0]
    if fabs(d) < eta:
        d = eta if d > 0.0 else -eta
        perturbed += 1
    if d < 0.0:
        count += 1
    for i in range(1, n):
        d = diag[i] - off[i - 1] * off[i - 1] / d
        if fabs(d) < eta:
            d = eta if d > 0.0 else -eta
            perturbed += 1
        if d < 0.0:
            count += 1
    return count, perturbed


def weighted_tridiag(double[:, ::1] vq, double[:, ::1] waa,
                     double[:, ::1] wdd, double[:, ::1] wad,
                     double energy, int power):
    """Assemble the tridiagonal of sum_q wxx[k,q] / (1 + E - V[k,q])^power."""
    cdef Py_ssize_t nel = vq.shape[0]
    cdef Py_ssize_t nq = vq.shape[1]
    cdef Py_ssize_t ndof = nel - 1
    cdef Py_ssize_t k, q
    cdef double w, s_aa, s_dd, s_ad
    diag_arr = np.zeros(ndof)
    off_arr = np.zeros(ndof - 1 if ndof > 1 else 0)
    cdef double[::1] diag = diag_arr
    cdef double[::1] off = off_arr
    for k in range(nel):
        s_aa = 0.0
        s_dd = 0.0
        s_ad = 0.0
        for q in range(nq):
            w = 1.0 / (1.0 + energy - vq[k, q])
            if power == 2:
                w = w * w
            s_aa += waa[k, q] * w
            s_dd += wdd[k, q] * w
            s_ad += wad[k, q] * w
        if k < ndof:
            diag[k] += s_aa
        if k >= 1:
            diag[k - 1] += s_dd
            if k < ndof:
                off[k - 1] = s_ad
    return diag_arr, off_arr


cdef inline void _rhs(bint log_var, double kappa, double nu, double energy,
                      double tt, double u, double v,
                      double* fu, double* fv) nogil:
    cdef double r, inv_r
    if log_var:
        r = exp(tt)
        fu[0] = -kappa * u + ((1.0 + energy) * r + nu) * v
        fv[0] = kappa * v + ((1.0 - energy) * r - nu) * u
    else:
        inv_r = 1.0 / tt
        fu[0] = -kappa * inv_r * u + (1.0 + energy + nu * inv_r) * v
        fv[0] = kappa * inv_r * v + (1.0 - energy - nu * inv_r) * u


def shoot(double kappa, double nu, double energy, double r_from, double r_to,
          double u0, double v0, double rtol, double atol, bint log_var):
    """Integrate the radial eigen-system from r_from to r_to (see the
    python backend docstring for the system and conventions)."""
    cdef double t, t_end, direction, h, u, v, u_new, v_new
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v
    cdef double k5u, k5v, k6u, k6v, k7u, k7v
    cdef double au, av, err_u, err_v, sc_u, sc_v, err, factor, mag
    cdef long steps = 0
    if log_var:
        if r_from <= 0.0 or r_to <= 0.0:
            raise ValueError("log-radius integration needs positive radii")
        t = log(r_from)
        t_end = log(r_to)
    else:
        t = r_from
        t_end = r_to
    if t == t_end:
        return u0, v0, 0
    direction = 1.0 if t_end > t else -1.0
    h = 1e-4 * fabs(t_end - t)
    if h > 1e-4:
        h = 1e-4
    h *= direction
    u = u0
    v = v0
    _rhs(log_var, kappa, nu, energy, t, u, v, &k1u, &k1v)
    while (t_end - t) * direction > 0.0:
        if steps > MAX_STEPS:
            raise RuntimeError("step count exceeded in radial integration")
        if fabs(h) < 2.3e-16 * max(1.0, fabs(t)):
            raise RuntimeError("step size underflow in radial integration")
        if (t + h - t_end) * direction > 0.0:
            h = t_end - t
        au = u + h * 0.2 * k1u
        av = v + h * 0.2 * k1v
        _rhs(log_var, kappa, nu, energy, t + 0.2 * h, au, av, &k2u, &k2v)
        au = u + h * (3.0 / 40.0 * k1u + 9.0 / 40.0 * k2u)
        av = v + h * (3.0 / 40.0 * k1v + 9.0 / 40.0 * k2v)
        _rhs(log_var, kappa, nu, energy, t + 0.3 * h, au, av, &k3u, &k3v)
        au = u + h * (44.0 / 45.0 * k1u - 56.0 / 15.0 * k2u + 32.0 / 9.0 * k3u)
        av = v + h * (44.0 / 45.0 * k1v - 56.0 / 15.0 * k2v + 32.0 / 9.0 * k3v)
        _rhs(log_var, kappa, nu, energy, t + 0.8 * h, au, av, &k4u, &k4v)
        au = u + h * (19372.0 / 6561.0 * k1u - 25360.0 / 2187.0 * k2u
                      + 64448.0 / 6561.0 * k3u - 212.0 / 729.0 * k4u)
        av = v + h * (19372.0 / 6561.0 * k1v - 25360.0 / 2187.0 * k2v
                      + 64448.0 / 6561.0 * k3v - 212.0 / 729.0 * k4v)
        _rhs(log_var, kappa, nu, energy, t + (8.0 / 9.0) * h, au, av,
             &k5u, &k5v)
        au = u + h * (9017.0 / 3168.0 * k1u - 355.0 / 33.0 * k2u
                      + 46732.0 / 5247.0 * k3u + 49.0 / 176.0 * k4u
                      - 5103.0 / 18656.0 * k5u)
        av = v + h * (9017.0 / 3168.0 * k1v - 355.0 / 33.0 * k2v
                      + 46732.0 / 5247.0 * k3v + 49.0 / 176.0 * k4v
                      - 5103.0 / 18656.0 * k5v)
        _rhs(log_var, kappa, nu, energy, t + h, au, av, &k6u, &k6v)
        u_new = u + h * (35.0 / 384.0 * k1u + 500.0 / 1113.0 * k3u
                         + 125.0 / 192.0 * k4u - 2187.0 / 6784.0 * k5u
                         + 11.0 / 84.0 * k6u)
        v_new = v + h * (35.0 / 384.0 * k1v + 500.0 / 1113.0 * k3v
                         + 125.0 / 192.0 * k4v - 2187.0 / 6784.0 * k5v
                         + 11.0 / 84.0 * k6v)
        _rhs(log_var, kappa, nu, energy, t + h, u_new, v_new, &k7u, &k7v)
        err_u = h * (71.0 / 57600.0 * k1u - 71.0 / 16695.0 * k3u
                     + 71.0 / 1920.0 * k4u - 17253.0 / 339200.0 * k5u
                     + 22.0 / 525.0 * k6u - 1.0 / 40.0 * k7u)
        err_v = h * (71.0 / 57600.0 * k1v - 71.0 / 16695.0 * k3v
                     + 71.0 / 1920.0 * k4v - 17253.0 / 339200.0 * k5v
                     + 22.0 / 525.0 * k6v - 1.0 / 40.0 * k7v)
        sc_u = atol + rtol * max(fabs(u), fabs(u_new))
        sc_v = atol + rtol * max(fabs(v), fabs(v_new))
        err = sqrt(0.5 * ((err_u / sc_u) * (err_u / sc_u)
                          + (err_v / sc_v) * (err_v / sc_v)))
        steps += 1
        if err <= 1.0:
            t += h
            u = u_new
            v = v_new
            k1u = k7u
            k1v = k7v
            mag = max(fabs(u), fabs(v))
            if mag > 1e200:
                u /= mag
                v /= mag
                _rhs(log_var, kappa, nu, energy, t, u, v, &k1u, &k1v)
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * cpow(err, -0.2))
        else:
            factor = max(0.2, 0.9 * cpow(err, -0.2))
        h *= max(0.2, factor)
    return u, v, steps
