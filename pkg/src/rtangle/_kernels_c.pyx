# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the convex-roof hot kernels.

Mirrors ``rtangle._kernels_py``; the minimizer spends nearly all of its
time in these three entry points, so they are plain C loops over the
fixed monomial tables of the 2x2x2 hyperdeterminant.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, pow, sin, sqrt

cnp.import_array()

cdef double _COEF[12]
cdef int _IDX[12][4]
_coef_py = [1, 1, 1, 1, -2, -2, -2, -2, -2, -2, 4, 4]
_idx_py = [
    (0, 0, 7, 7), (1, 1, 6, 6), (2, 2, 5, 5), (4, 4, 3, 3),
    (0, 7, 3, 4), (0, 7, 5, 2), (0, 7, 6, 1),
    (3, 4, 5, 2), (3, 4, 6, 1), (5, 2, 6, 1),
    (0, 6, 5, 3), (7, 1, 2, 4),
]
for _t in range(12):
    _COEF[_t] = _coef_py[_t]
    for _u in range(4):
        _IDX[_t][_u] = _idx_py[_t][_u]

cdef double NORM_FLOOR = 1e-30


cdef inline double complex _row_det(double complex *w) nogil:
    cdef double complex acc = 0
    cdef int t
    for t in range(12):
        acc = acc + _COEF[t] * w[_IDX[t][0]] * w[_IDX[t][1]] * w[_IDX[t][2]] * w[_IDX[t][3]]
    return acc


def hyperdet_rows(W):
    """Hyperdeterminant of each row of an (m, 8) complex array."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Wa = np.ascontiguousarray(
        np.atleast_2d(W), dtype=np.complex128)
    cdef Py_ssize_t m = Wa.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t i
    for i in range(m):
        out[i] = _row_det(&Wa[i, 0])
    return out


def roof_value(W, bint use_sqrt, double eps=0.0):
    """Convex-roof objective on sub-normalized member rows."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Wa = np.ascontiguousarray(
        np.atleast_2d(W), dtype=np.complex128)
    cdef Py_ssize_t m = Wa.shape[0]
    cdef Py_ssize_t i, a
    cdef double complex det
    cdef double absd2, n, f = 0.0
    for i in range(m):
        det = _row_det(&Wa[i, 0])
        absd2 = det.real * det.real + det.imag * det.imag
        if use_sqrt:
            f += 2.0 * pow(absd2 + eps * eps, 0.25)
        else:
            n = 0.0
            for a in range(8):
                n += Wa[i, a].real * Wa[i, a].real + Wa[i, a].imag * Wa[i, a].imag
            if n > NORM_FLOOR:
                f += 4.0 * sqrt(absd2 + (eps * eps) * n * n * n * n) / n
    return f


def roof_value_grad(W, bint use_sqrt, double eps=0.0):
    """Objective value and the Wirtinger derivative P = df/dpsi (m, 8)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Wa = np.ascontiguousarray(
        np.atleast_2d(W), dtype=np.complex128)
    cdef Py_ssize_t m = Wa.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] P = np.zeros((m, 8), dtype=np.complex128)
    cdef double complex g[8]
    cdef double complex det, dconj, pa, pb, pc, pd
    cdef double absd2, s, n, sq, coefv, f = 0.0
    cdef Py_ssize_t i, t, a
    for i in range(m):
        det = _row_det(&Wa[i, 0])
        for a in range(8):
            g[a] = 0
        for t in range(12):
            pa = Wa[i, _IDX[t][0]]; pb = Wa[i, _IDX[t][1]]
            pc = Wa[i, _IDX[t][2]]; pd = Wa[i, _IDX[t][3]]
            g[_IDX[t][0]] = g[_IDX[t][0]] + _COEF[t] * pb * pc * pd
            g[_IDX[t][1]] = g[_IDX[t][1]] + _COEF[t] * pa * pc * pd
            g[_IDX[t][2]] = g[_IDX[t][2]] + _COEF[t] * pa * pb * pd
            g[_IDX[t][3]] = g[_IDX[t][3]] + _COEF[t] * pa * pb * pc
        absd2 = det.real * det.real + det.imag * det.imag
        dconj = det.conjugate()
        if use_sqrt:
            s = absd2 + eps * eps
            f += 2.0 * pow(s, 0.25)
            if s > 0.0:  # exactly tangle-free members have subgradient 0
                coefv = 0.5 * pow(s, -0.75)
                for a in range(8):
                    P[i, a] = coefv * dconj * g[a]
        else:
            n = 0.0
            for a in range(8):
                n += Wa[i, a].real * Wa[i, a].real + Wa[i, a].imag * Wa[i, a].imag
            if n > NORM_FLOOR:
                s = absd2 + (eps * eps) * n * n * n * n
                sq = sqrt(s if s > 1e-300 else 1e-300)
                f += 4.0 * sq / n
                for a in range(8):
                    P[i, a] = (2.0 / (n * sq)) * (dconj * g[a]
                               + 4.0 * eps * eps * n * n * n * Wa[i, a].conjugate()) \
                              - (4.0 * sq / (n * n)) * Wa[i, a].conjugate()
    return f, P


def polar_retract(A):
    """Nearest matrix with orthonormal columns, A (A^dag A)^(-1/2).

    The r x r Gram matrix (r <= 8 in practice) is diagonalized with a
    cyclic complex Jacobi iteration.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Aa = np.ascontiguousarray(A, dtype=np.complex128)
    cdef Py_ssize_t m = Aa.shape[0]
    cdef Py_ssize_t r = Aa.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] H = np.zeros((r, r), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] V = np.eye(r, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((m, r), dtype=np.complex128)
    cdef Py_ssize_t i, j, k, p, q, sweep
    cdef double mag, theta, c, s, off, tol
    cdef double complex apq, e, hp, hq, vp, vq, acc

    for i in range(r):
        for j in range(r):
            acc = 0
            for k in range(m):
                acc = acc + Aa[k, i].conjugate() * Aa[k, j]
            H[i, j] = acc
    tol = 0.0
    for i in range(r):
        tol += H[i, i].real
    tol = 1e-15 * (tol if tol > 0 else 1.0)

    for sweep in range(60):
        off = 0.0
        for p in range(r - 1):
            for q in range(p + 1, r):
                off += abs(H[p, q].real) + abs(H[p, q].imag)
        if off <= tol:
            break
        for p in range(r - 1):
            for q in range(p + 1, r):
                apq = H[p, q]
                mag = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if mag <= tol * 1e-2:
                    continue
                e = apq / mag
                theta = 0.5 * atan2(2.0 * mag, H[q, q].real - H[p, p].real)
                c = cos(theta); s = sin(theta)
                # columns p, q of H and V are mixed by the plane rotation
                for k in range(r):
                    hp = H[k, p]; hq = H[k, q]
                    H[k, p] = c * hp - s * e.conjugate() * hq
                    H[k, q] = s * e * hp + c * hq
                for k in range(r):
                    hp = H[p, k]; hq = H[q, k]
                    H[p, k] = c * hp - s * e * hq
                    H[q, k] = s * e.conjugate() * hp + c * hq
                for k in range(r):
                    vp = V[k, p]; vq = V[k, q]
                    V[k, p] = c * vp - s * e.conjugate() * vq
                    V[k, q] = s * e * vp + c * vq

    # out = A V diag(w^{-1/2}) V^dag
    cdef cnp.ndarray[cnp.float64_t, ndim=1] winv = np.empty(r, dtype=np.float64)
    for i in range(r):
        mag = H[i, i].real
        winv[i] = 1.0 / sqrt(mag if mag > 1e-30 else 1e-30)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] T = np.empty((r, r), dtype=np.complex128)
    for i in range(r):
        for j in range(r):
            acc = 0
            for k in range(r):
                acc = acc + V[i, k] * winv[k] * V[j, k].conjugate()
            T[i, j] = acc
    for i in range(m):
        for j in range(r):
            acc = 0
            for k in range(r):
                acc = acc + Aa[i, k] * T[k, j]
            out[i, j] = acc
    return out
