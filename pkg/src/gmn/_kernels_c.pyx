# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``.

Same signatures and return conventions; see the pure-Python module for docs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt

cnp.import_array()


cdef void _products(const double[:] s, const double[:] c, Py_ssize_t n,
                    double* ps, double* pc, double[:] dps, double[:] dpc) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double a, b
    ps[0] = 1.0
    pc[0] = 1.0
    for i in range(n):
        ps[0] *= s[i]
        pc[0] *= c[i]
    for i in range(n):
        a = 1.0
        b = 1.0
        for j in range(n):
            if j != i:
                a *= s[j]
                b *= c[j]
        dps[i] = 0.5 * c[i] * a
        dpc[i] = -0.5 * s[i] * b


def family_score(double a, alphas, double delta):
    cdef double[:] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef Py_ssize_t n = al.shape[0]
    cdef Py_ssize_t i
    cdef double[:] s = np.empty(n)
    cdef double[:] c = np.empty(n)
    cdef double[:] dps = np.empty(n)
    cdef double[:] dpc = np.empty(n)
    cdef double ps, pc, g, h, rad, root, inv_root, cd, sd, q, sign
    cdef double dg, dh, drad_da, drad_dal, dq_da, dq_dal, dq_dd
    grad_arr = np.empty(n + 2)
    cdef double[:] grad = grad_arr

    for i in range(n):
        s[i] = sin(0.5 * al[i])
        c[i] = cos(0.5 * al[i])
    _products(s, c, n, &ps, &pc, dps, dpc)
    sign = -1.0 if n % 2 else 1.0

    g = (1.0 - pc * pc) / ps
    h = g / ps
    rad = 1.0 - a * a * h
    if rad < 0.0:
        rad = 0.0
    root = sqrt(rad)
    inv_root = 0.5 / root if root > 0.0 else 0.0
    cd = cos(delta)
    sd = sin(delta)

    q = a * a * g * g + pc * pc * rad + 2.0 * sign * a * g * pc * root * cd
    drad_da = -2.0 * a * h
    dq_da = (2.0 * a * g * g + pc * pc * drad_da
             + 2.0 * sign * g * pc * cd * (root + a * drad_da * inv_root))
    dq_dd = -2.0 * sign * a * g * pc * root * sd
    grad[0] = 2.0 * a - dq_da
    for i in range(n):
        dg = (-2.0 * pc * dpc[i] * ps - (1.0 - pc * pc) * dps[i]) / (ps * ps)
        dh = (dg * ps - g * dps[i]) / (ps * ps)
        drad_dal = -a * a * dh
        dq_dal = (2.0 * a * a * g * dg + 2.0 * pc * dpc[i] * rad + pc * pc * drad_dal
                  + 2.0 * sign * a * cd * (dg * pc * root + g * dpc[i] * root
                                           + g * pc * drad_dal * inv_root))
        grad[i + 1] = -dq_dal
    grad[n + 1] = -dq_dd
    return a * a - q, grad_arr


def family_a_max(alphas):
    cdef double[:] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef Py_ssize_t n = al.shape[0]
    cdef Py_ssize_t i
    cdef double[:] s = np.empty(n)
    cdef double[:] c = np.empty(n)
    cdef double[:] dps = np.empty(n)
    cdef double[:] dpc = np.empty(n)
    cdef double ps, pc, den, m2, m
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    for i in range(n):
        s[i] = sin(0.5 * al[i])
        c[i] = cos(0.5 * al[i])
    _products(s, c, n, &ps, &pc, dps, dpc)
    den = 1.0 - pc * pc
    m2 = ps * ps / den
    m = sqrt(m2)
    for i in range(n):
        out[i] = 0.5 * (2.0 * ps * dps[i] * den + ps * ps * 2.0 * pc * dpc[i]) / (den * den) / m
    return m, out_arr


def qubit_terms(re, im, alphas):
    cdef double[:] zr = np.ascontiguousarray(re, dtype=np.float64)
    cdef double[:] zi = np.ascontiguousarray(im, dtype=np.float64)
    cdef double[:] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef Py_ssize_t n = al.shape[0]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t ncol = 2 * dim + n
    cdef Py_ssize_t i, j, k, x, x0, x1, bi, bj
    cdef double norm = 0.0
    cdef double fx, dfx, ovr, ovi, dor, doi, wr, wi, dwr, dwi, acc
    cdef double[:] s = np.empty(n)
    cdef double[:] c = np.empty(n)
    vals_arr = np.zeros(n + 2)
    jac_arr = np.zeros((n + 2, ncol))
    cdef double[:] vals = vals_arr
    cdef double[:, :] jac = jac_arr

    if zr.shape[0] != dim or zi.shape[0] != dim:
        raise ValueError("amplitude length does not match 2**N")

    with nogil:
        for i in range(n):
            s[i] = sin(0.5 * al[i])
            c[i] = cos(0.5 * al[i])
        for x in range(dim):
            norm += zr[x] * zr[x] + zi[x] * zi[x]

        vals[0] = zr[0] * zr[0] + zi[0] * zi[0]
        jac[0, 0] = 2.0 * zr[0]
        jac[0, dim] = 2.0 * zi[0]

        ovr = 0.0
        ovi = 0.0
        for x in range(dim):
            fx = 1.0
            for k in range(n):
                if (x >> (n - 1 - k)) & 1:
                    fx *= c[k]
                else:
                    fx *= -s[k]
            ovr += fx * zr[x]
            ovi += fx * zi[x]
            jac[1, x] = fx
            jac[1, dim + x] = fx
        vals[1] = ovr * ovr + ovi * ovi
        for x in range(dim):
            jac[1, x] *= 2.0 * ovr
            jac[1, dim + x] *= 2.0 * ovi
        for i in range(n):
            dor = 0.0
            doi = 0.0
            for x in range(dim):
                dfx = 1.0
                for k in range(n):
                    if (x >> (n - 1 - k)) & 1:
                        dfx *= (-0.5 * s[k]) if k == i else c[k]
                    else:
                        dfx *= (-0.5 * c[k]) if k == i else -s[k]
                dor += dfx * zr[x]
                doi += dfx * zi[x]
            jac[1, 2 * dim + i] = 2.0 * (ovr * dor + ovi * doi)

        for i in range(n):
            j = (i + 1) % n
            bi = (<Py_ssize_t>1) << (n - 1 - i)
            bj = (<Py_ssize_t>1) << (n - 1 - j)
            acc = 0.0
            for x in range(dim):
                # x0 enumerates indices with bit i = 0 and bit j = 0
                if (x & bi) or (x & bj):
                    continue
                x0 = x
                x1 = x | bi
                wr = c[i] * zr[x0] + s[i] * zr[x1]
                wi = c[i] * zi[x0] + s[i] * zi[x1]
                dwr = -0.5 * s[i] * zr[x0] + 0.5 * c[i] * zr[x1]
                dwi = -0.5 * s[i] * zi[x0] + 0.5 * c[i] * zi[x1]
                vals[2 + i] += wr * wr + wi * wi
                jac[2 + i, x0] = 2.0 * c[i] * wr
                jac[2 + i, x1] = 2.0 * s[i] * wr
                jac[2 + i, dim + x0] = 2.0 * c[i] * wi
                jac[2 + i, dim + x1] = 2.0 * s[i] * wi
                acc += wr * dwr + wi * dwi
            jac[2 + i, 2 * dim + i] = 2.0 * acc

        for k in range(n + 2):
            vals[k] /= norm
            for x in range(ncol):
                jac[k, x] /= norm
            for x in range(dim):
                jac[k, x] -= vals[k] * 2.0 * zr[x] / norm
                jac[k, dim + x] -= vals[k] * 2.0 * zi[x] / norm
    return vals_arr, jac_arr
