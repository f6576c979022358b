# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled enumeration kernels (sign-vector and subset extremes).

Contract-identical to ``_enum_fallback``: Gray-code walks over the
2^(m-1) quotiented sign vectors / atom subsets with incremental
accumulator updates, periodic refreshes against float drift, and
eigenvalues from direct LAPACK ``zheev`` calls.  Ties on exact float
equality are broken toward the smaller mask, independent of the walk
order.
"""

import numpy as np

from libc.stdlib cimport free, malloc
from scipy.linalg.cython_lapack cimport zheev

cdef int _REFRESH = 64


cdef inline int _ctz(unsigned long long v) noexcept nogil:
    cdef int c = 0
    while (v & 1ULL) == 0ULL:
        v >>= 1
        c += 1
    return c


cdef int _eig_range(double complex *acc, double complex *a, double *w,
                    double complex *work, int lwork, double *rwork,
                    int d, double *lo, double *hi) noexcept nogil:
    """Eigenvalue range of the Hermitian d x d matrix in ``acc``.

    Row-major data is handed to column-major LAPACK unchanged: the
    transpose of a Hermitian matrix is its conjugate, with the same
    real spectrum.
    """
    cdef int i, info = 0
    cdef char jobz = b'N', uplo = b'L'
    for i in range(d * d):
        a[i] = acc[i]
    zheev(&jobz, &uplo, &d, a, &d, w, work, &lwork, rwork, &info)
    lo[0] = w[0]
    hi[0] = w[d - 1]
    return info


def max_signed_opnorm(diffs_obj):
    diffs = np.ascontiguousarray(diffs_obj, dtype=np.complex128)
    cdef const double complex[:, :, ::1] D = diffs
    cdef int m = D.shape[0]
    cdef int d = D.shape[1]
    cdef int dd = d * d, i2, j, info = 0, lwork
    cdef unsigned long long total = 1ULL << (m - 1)
    cdef unsigned long long i, gray = 0, best_mask = 0
    cdef double best_val, val, lo, hi, sgn
    cdef double complex *base = &D[0, 0, 0]
    cdef double complex *acc = <double complex *> malloc(dd * sizeof(double complex))
    cdef double complex *a = <double complex *> malloc(dd * sizeof(double complex))
    cdef double *w = <double *> malloc(d * sizeof(double))
    cdef double *rwork = <double *> malloc(max(1, 3 * d - 2) * sizeof(double))
    cdef double complex wk_query
    cdef double complex *work = NULL
    cdef char jobz = b'N', uplo = b'L'
    cdef int neg1 = -1
    if acc == NULL or a == NULL or w == NULL or rwork == NULL:
        free(acc); free(a); free(w); free(rwork)
        raise MemoryError()
    zheev(&jobz, &uplo, &d, a, &d, w, &wk_query, &neg1, rwork, &info)
    lwork = max(2 * d - 1, <int> wk_query.real, 1)
    work = <double complex *> malloc(lwork * sizeof(double complex))
    if work == NULL:
        free(acc); free(a); free(w); free(rwork)
        raise MemoryError()
    try:
        with nogil:
            for i2 in range(dd):
                acc[i2] = 0
            for j in range(m):
                for i2 in range(dd):
                    acc[i2] = acc[i2] + base[j * dd + i2]
            info = _eig_range(acc, a, w, work, lwork, rwork, d, &lo, &hi)
            best_val = -lo if -lo > hi else hi
            best_mask = 0
            for i in range(1, total):
                j = _ctz(i)
                gray ^= 1ULL << j
                sgn = -2.0 if (gray >> j) & 1ULL else 2.0
                for i2 in range(dd):
                    acc[i2] = acc[i2] + sgn * base[(j + 1) * dd + i2]
                if (i & <unsigned long long> (_REFRESH - 1)) == 0:
                    for i2 in range(dd):
                        acc[i2] = base[i2]
                    for j in range(1, m):
                        sgn = -1.0 if (gray >> (j - 1)) & 1ULL else 1.0
                        for i2 in range(dd):
                            acc[i2] = acc[i2] + sgn * base[j * dd + i2]
                info |= _eig_range(acc, a, w, work, lwork, rwork, d, &lo, &hi)
                val = -lo if -lo > hi else hi
                if val > best_val or (val == best_val and gray < best_mask):
                    best_val = val
                    best_mask = gray
        if info != 0:
            raise RuntimeError("zheev failed inside the sign-enumeration kernel")
        return float(best_val), int(best_mask)
    finally:
        free(acc); free(a); free(w); free(rwork); free(work)


def max_subset_extreme(diffs_obj):
    diffs = np.ascontiguousarray(diffs_obj, dtype=np.complex128)
    cdef const double complex[:, :, ::1] D = diffs
    cdef int m = D.shape[0]
    cdef int d = D.shape[1]
    cdef int dd = d * d, i2, j, info = 0, lwork
    cdef unsigned long long total = 1ULL << (m - 1)
    cdef unsigned long long full = (1ULL << m) - 1
    cdef unsigned long long i, gray = 0, mask_s, mask_c, best_mask
    cdef double best_val, lo, hi, sgn
    cdef double complex *base = &D[0, 0, 0]
    cdef double complex *acc = <double complex *> malloc(dd * sizeof(double complex))
    cdef double complex *a = <double complex *> malloc(dd * sizeof(double complex))
    cdef double *w = <double *> malloc(d * sizeof(double))
    cdef double *rwork = <double *> malloc(max(1, 3 * d - 2) * sizeof(double))
    cdef double complex wk_query
    cdef double complex *work = NULL
    cdef char jobz = b'N', uplo = b'L'
    cdef int neg1 = -1
    if acc == NULL or a == NULL or w == NULL or rwork == NULL:
        free(acc); free(a); free(w); free(rwork)
        raise MemoryError()
    zheev(&jobz, &uplo, &d, a, &d, w, &wk_query, &neg1, rwork, &info)
    lwork = max(2 * d - 1, <int> wk_query.real, 1)
    work = <double complex *> malloc(lwork * sizeof(double complex))
    if work == NULL:
        free(acc); free(a); free(w); free(rwork)
        raise MemoryError()
    best_val = -np.inf
    best_mask = full + 1
    try:
        with nogil:
            for i2 in range(dd):
                acc[i2] = base[i2]        # S = {atom 0}
            for i in range(total):
                if i > 0:
                    j = _ctz(i)
                    gray ^= 1ULL << j
                    sgn = 1.0 if (gray >> j) & 1ULL else -1.0
                    for i2 in range(dd):
                        acc[i2] = acc[i2] + sgn * base[(j + 1) * dd + i2]
                    if (i & <unsigned long long> (_REFRESH - 1)) == 0:
                        for i2 in range(dd):
                            acc[i2] = base[i2]
                        for j in range(1, m):
                            if (gray >> (j - 1)) & 1ULL:
                                for i2 in range(dd):
                                    acc[i2] = acc[i2] + base[j * dd + i2]
                mask_s = (gray << 1) | 1ULL
                if mask_s == full:        # S = whole space: S and its empty complement are improper
                    continue
                mask_c = full ^ mask_s
                info |= _eig_range(acc, a, w, work, lwork, rwork, d, &lo, &hi)
                if hi > best_val or (hi == best_val and mask_s < best_mask):
                    best_val = hi
                    best_mask = mask_s
                if -lo > best_val or (-lo == best_val and mask_c < best_mask):
                    best_val = -lo
                    best_mask = mask_c
        if info != 0:
            raise RuntimeError("zheev failed inside the subset-enumeration kernel")
        return float(best_val), int(best_mask)
    finally:
        free(acc); free(a); free(w); free(rwork); free(work)
