# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Euler-Maruyama kernel for one reduced-model trajectory.

Arithmetic mirrors qherald._reduced_py.em_run_batch step for step; the two
backends agree to floating-point reassociation (~1e-13 relative).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from .exceptions import NumericalAbort

DEF CHECK_EVERY = 256


def em_run_single(
    cnp.complex128_t[:, ::1] rho0,
    cnp.complex128_t[:, :, ::1] coef,
    cnp.complex128_t[:, ::1] c_i,
    cnp.complex128_t[:, ::1] c_q,
    cnp.float64_t[:, ::1] dw,
    double dt,
    Py_ssize_t stride,
    double gamma1=0.0,
    double gamma2=0.0,
    bint relaxation=False,
):
    """Single-trajectory counterpart of the batched numpy kernel.

    rho0: (4, 4); coef: (n, 4, 4); c_i, c_q: (n, 4); dw: (2, n).
    Returns (snaps (n//stride + 1, 4, 4), di (n,), dq (n,)).
    """
    cdef Py_ssize_t n = coef.shape[0]
    if n % stride != 0:
        raise ValueError("n must be divisible by the snapshot stride")

    snaps_arr = np.empty((n // stride + 1, 4, 4), dtype=np.complex128)
    di_arr = np.empty(n, dtype=np.float64)
    dq_arr = np.empty(n, dtype=np.float64)
    cdef cnp.complex128_t[:, :, ::1] snaps = snaps_arr
    cdef cnp.float64_t[::1] di = di_arr
    cdef cnp.float64_t[::1] dq = dq_arr

    cdef double complex rho[4][4]
    cdef double complex new[4][4]
    cdef double complex hi_f, hq_f, cim, cqm, cin_c, cqn_c
    cdef double tr_i, tr_q, tr, dwi, dwq
    cdef Py_ssize_t k, m, mm

    for m in range(4):
        for mm in range(4):
            rho[m][mm] = rho0[m, mm]

    for k in range(n):
        if k % stride == 0:
            for m in range(4):
                for mm in range(4):
                    snaps[k // stride, m, mm] = rho[m][mm]

        tr_i = 0.0
        tr_q = 0.0
        for m in range(4):
            tr_i += 2.0 * c_i[k, m].real * rho[m][m].real
            tr_q += 2.0 * c_q[k, m].real * rho[m][m].real
        dwi = dw[0, k]
        dwq = dw[1, k]
        di[k] = tr_i * dt + dwi
        dq[k] = tr_q * dt + dwq

        for m in range(4):
            cim = c_i[k, m]
            cqm = c_q[k, m]
            for mm in range(4):
                cin_c = c_i[k, mm].conjugate()
                cqn_c = c_q[k, mm].conjugate()
                hi_f = cim + cin_c - tr_i
                hq_f = cqm + cqn_c - tr_q
                new[m][mm] = rho[m][mm] + coef[k, m, mm] * rho[m][mm] * dt \
                    + hi_f * rho[m][mm] * dwi + hq_f * rho[m][mm] * dwq

        if relaxation:
            if gamma1 != 0.0:
                for m in range(2):
                    for mm in range(2):
                        new[m + 2][mm + 2] = new[m + 2][mm + 2] + gamma1 * dt * rho[m][mm]
            if gamma2 != 0.0:
                for m in range(2):
                    for mm in range(2):
                        new[2 * m + 1][2 * mm + 1] = new[2 * m + 1][2 * mm + 1] \
                            + gamma2 * dt * rho[2 * m][2 * mm]

        tr = new[0][0].real + new[1][1].real + new[2][2].real + new[3][3].real
        if k % CHECK_EVERY == 0:
            if not (tr == tr and tr > 0.1):
                raise NumericalAbort(
                    f"trace collapse or non-finite state at step {k}; reduce dt"
                )
        for m in range(4):
            for mm in range(4):
                rho[m][mm] = new[m][mm] / tr

    for m in range(4):
        for mm in range(4):
            snaps[n // stride, m, mm] = rho[m][mm]
    return snaps_arr, di_arr, dq_arr
