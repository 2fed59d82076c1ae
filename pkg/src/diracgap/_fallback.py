"""Pure numpy/python implementations of the hot kernels.

This module mirrors the compiled extension `diracgap._kernels` one to one;
`diracgap._backend` picks whichever is importable (set DIRAC_GAP_PURE=1 to
force this module). Keep the two in sync: the test suite runs the kernel
contract tests against every available backend.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

BACKEND_NAME = "python"

ETA_PIVOT = 1e-14

# Dormand-Prince 5(4) pair. The fifth-order weights B double as the
# propagation weights; E holds B minus the embedded fourth-order weights.
DP_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0)
DP_A = (
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
)
DP_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
        11.0 / 84.0)
DP_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
        -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

MAX_STEPS = 2_000_000


def negcount(diag: np.ndarray, off: np.ndarray) -> Tuple[int, int]:
    """Count eigenvalues < 0 of the symmetric tridiagonal (diag, off).

    Sturm style LDL^T pivot signs; pivots smaller than eta*||T||_inf are
    replaced by +-eta*||T||_inf keeping their sign (exact zeros count as
    negative). Returns (count, number of perturbed pivots).
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = len(diag)
    if n == 0:
        return 0, 0
    pad = np.zeros(n)
    pad[:-1] += np.abs(off)
    pad[1:] += np.abs(off)
    tnorm = float(np.max(np.abs(diag) + pad))
    if tnorm == 0.0:
        return 0, 0
    eta = ETA_PIVOT * tnorm
    count = 0
    perturbed = 0
    d = float(diag[0])
    if abs(d) < eta:
        d = eta if d > 0.0 else -eta
        perturbed += 1
    if d < 0.0:
        count += 1
    for i in range(1, n):
        d = float(diag[i]) - float(off[i - 1]) * float(off[i - 1]) / d
        if abs(d) < eta:
            d = eta if d > 0.0 else -eta
            perturbed += 1
        if d < 0.0:
            count += 1
    return count, perturbed


def weighted_tridiag(vq: np.ndarray, waa: np.ndarray, wdd: np.ndarray,
                     wad: np.ndarray, energy: float,
                     power: int) -> Tuple[np.ndarray, np.ndarray]:
    """Assemble the tridiagonal of sum_q wxx[k,q] / (1 + E - V[k,q])^power.

    Element k contributes its ascending hat to dof k and its descending hat
    to dof k-1; the slices drop the two boundary functions.
    """
    u = 1.0 / (1.0 + energy - vq)
    if power == 2:
        u = u * u
    s_aa = np.einsum("kq,kq->k", waa, u)
    s_dd = np.einsum("kq,kq->k", wdd, u)
    s_ad = np.einsum("kq,kq->k", wad, u)
    ndof = vq.shape[0] - 1
    diag = s_aa[:ndof] + s_dd[1:]
    off = s_ad[1:ndof]
    return diag, off


def shoot(kappa: float, nu: float, energy: float, r_from: float, r_to: float,
          u0: float, v0: float, rtol: float, atol: float,
          log_var: bool) -> Tuple[float, float, int]:
    """Integrate the radial eigen-system from r_from to r_to.

        u' = -(kappa/r) u + (1 + E + nu/r) v
        v' = +(kappa/r) v + (1 - E - nu/r) u

    With log_var the independent variable is tau = ln r (both radii must be
    positive), which turns the origin-singular coefficients into smooth ones;
    otherwise plain r is used (appropriate for the outer, exponential leg).
    Returns (u, v, steps). The overall scale of (u, v) is meaningless: the
    state is rescaled whenever it grows past 1e200.
    """
    if log_var:
        if r_from <= 0.0 or r_to <= 0.0:
            raise ValueError("log-radius integration needs positive radii")
        t = math.log(r_from)
        t_end = math.log(r_to)
    else:
        t = r_from
        t_end = r_to
    if t == t_end:
        return u0, v0, 0

    def rhs(tt: float, u: float, v: float) -> Tuple[float, float]:
        if log_var:
            r = math.exp(tt)
            return (-kappa * u + ((1.0 + energy) * r + nu) * v,
                    kappa * v + ((1.0 - energy) * r - nu) * u)
        inv_r = 1.0 / tt
        return (-kappa * inv_r * u + (1.0 + energy + nu * inv_r) * v,
                kappa * inv_r * v + (1.0 - energy - nu * inv_r) * u)

    direction = 1.0 if t_end > t else -1.0
    h = direction * min(1e-4 * abs(t_end - t), 1e-4)
    u, v = u0, v0
    k1u, k1v = rhs(t, u, v)
    steps = 0
    while (t_end - t) * direction > 0.0:
        if steps > MAX_STEPS:
            raise RuntimeError("step count exceeded in radial integration")
        if abs(h) < 2.3e-16 * max(1.0, abs(t)):
            raise RuntimeError("step size underflow in radial integration")
        if (t + h - t_end) * direction > 0.0:
            h = t_end - t
        ku = [k1u, 0.0, 0.0, 0.0, 0.0, 0.0]
        kv = [k1v, 0.0, 0.0, 0.0, 0.0, 0.0]
        for stage in range(5):
            au = u
            av = v
            for j, a in enumerate(DP_A[stage]):
                au += h * a * ku[j]
                av += h * a * kv[j]
            ku[stage + 1], kv[stage + 1] = rhs(t + DP_C[stage] * h, au, av)
        u_new = u
        v_new = v
        for j in range(6):
            u_new += h * DP_B[j] * ku[j]
            v_new += h * DP_B[j] * kv[j]
        k7u, k7v = rhs(t + h, u_new, v_new)
        err_u = h * (DP_E[0] * ku[0] + DP_E[2] * ku[2] + DP_E[3] * ku[3]
                     + DP_E[4] * ku[4] + DP_E[5] * ku[5] + DP_E[6] * k7u)
        err_v = h * (DP_E[0] * kv[0] + DP_E[2] * kv[2] + DP_E[3] * kv[3]
                     + DP_E[4] * kv[4] + DP_E[5] * kv[5] + DP_E[6] * k7v)
        sc_u = atol + rtol * max(abs(u), abs(u_new))
        sc_v = atol + rtol * max(abs(v), abs(v_new))
        err = math.sqrt(0.5 * ((err_u / sc_u) ** 2 + (err_v / sc_v) ** 2))
        steps += 1
        if err <= 1.0:
            t += h
            u, v = u_new, v_new
            k1u, k1v = k7u, k7v
            mag = max(abs(u), abs(v))
            if mag > 1e200:
                u /= mag
                v /= mag
                k1u, k1v = rhs(t, u, v)
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= max(0.2, factor)
    return u, v, steps
