# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython twin of the NumPy kernels in ``_kernels_np``.

Same contracts: batched squared well distance and its gradient, tie to well
A, identity-branch subgradient where the optimal rotation degenerates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def dist2_two_wells(F, A, B):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Fc = \
        np.ascontiguousarray(F, dtype=np.float64).reshape(-1, 2, 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ac = np.ascontiguousarray(A, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Bc = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = Fc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] which = np.empty(n, dtype=np.uint8)

    cdef double a00 = Ac[0, 0], a01 = Ac[0, 1], a10 = Ac[1, 0], a11 = Ac[1, 1]
    cdef double b00 = Bc[0, 0], b01 = Bc[0, 1], b10 = Bc[1, 0], b11 = Bc[1, 1]
    cdef double na = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11
    cdef double nb = b00 * b00 + b01 * b01 + b10 * b10 + b11 * b11
    cdef double f00, f01, f10, f11, f2, pa, qa, pb, qb, da, db
    cdef Py_ssize_t i
    for i in range(n):
        f00 = Fc[i, 0, 0]; f01 = Fc[i, 0, 1]
        f10 = Fc[i, 1, 0]; f11 = Fc[i, 1, 1]
        f2 = f00 * f00 + f01 * f01 + f10 * f10 + f11 * f11
        pa = f00 * a00 + f01 * a01 + f10 * a10 + f11 * a11
        qa = -f00 * a10 - f01 * a11 + f10 * a00 + f11 * a01
        pb = f00 * b00 + f01 * b01 + f10 * b10 + f11 * b11
        qb = -f00 * b10 - f01 * b11 + f10 * b00 + f11 * b01
        da = f2 + na - 2.0 * sqrt(pa * pa + qa * qa)
        db = f2 + nb - 2.0 * sqrt(pb * pb + qb * qb)
        if da < 0.0:
            da = 0.0
        if db < 0.0:
            db = 0.0
        if db < da:
            d2[i] = db
            which[i] = 1
        else:
            d2[i] = da
            which[i] = 0
    return d2, which


def dist2_two_wells_grad(F, A, B):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Fc = \
        np.ascontiguousarray(F, dtype=np.float64).reshape(-1, 2, 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ac = np.ascontiguousarray(A, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Bc = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = Fc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] grad = np.empty((n, 2, 2), dtype=np.float64)

    cdef double a00 = Ac[0, 0], a01 = Ac[0, 1], a10 = Ac[1, 0], a11 = Ac[1, 1]
    cdef double b00 = Bc[0, 0], b01 = Bc[0, 1], b10 = Bc[1, 0], b11 = Bc[1, 1]
    cdef double na = a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11
    cdef double nb = b00 * b00 + b01 * b01 + b10 * b10 + b11 * b11
    cdef double f00, f01, f10, f11, f2, pa, qa, pb, qb, da, db
    cdef double g00, g01, g10, g11, p, q, r, coef
    cdef Py_ssize_t i
    for i in range(n):
        f00 = Fc[i, 0, 0]; f01 = Fc[i, 0, 1]
        f10 = Fc[i, 1, 0]; f11 = Fc[i, 1, 1]
        f2 = f00 * f00 + f01 * f01 + f10 * f10 + f11 * f11
        pa = f00 * a00 + f01 * a01 + f10 * a10 + f11 * a11
        qa = -f00 * a10 - f01 * a11 + f10 * a00 + f11 * a01
        pb = f00 * b00 + f01 * b01 + f10 * b10 + f11 * b11
        qb = -f00 * b10 - f01 * b11 + f10 * b00 + f11 * b01
        da = f2 + na - 2.0 * sqrt(pa * pa + qa * qa)
        db = f2 + nb - 2.0 * sqrt(pb * pb + qb * qb)
        if da < 0.0:
            da = 0.0
        if db < 0.0:
            db = 0.0
        if db < da:
            d2[i] = db
            g00 = b00; g01 = b01; g10 = b10; g11 = b11
            p = pb; q = qb
        else:
            d2[i] = da
            g00 = a00; g01 = a01; g10 = a10; g11 = a11
            p = pa; q = qa
        r = sqrt(p * p + q * q)
        if r > 0.0:
            coef = 2.0 / r
            # J G has rows (-g10, -g11) and (g00, g01).
            grad[i, 0, 0] = 2.0 * f00 - coef * (p * g00 - q * g10)
            grad[i, 0, 1] = 2.0 * f01 - coef * (p * g01 - q * g11)
            grad[i, 1, 0] = 2.0 * f10 - coef * (p * g10 + q * g00)
            grad[i, 1, 1] = 2.0 * f11 - coef * (p * g11 + q * g01)
        else:
            grad[i, 0, 0] = 2.0 * (f00 - g00)
            grad[i, 0, 1] = 2.0 * (f01 - g01)
            grad[i, 1, 0] = 2.0 * (f10 - g10)
            grad[i, 1, 1] = 2.0 * (f11 - g11)
    return d2, grad
