# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamic-programming kernel for 1-D dynamic time warping."""

from libc.stdlib cimport free, malloc


def dtw_distance(const double[::1] a, const double[::1] b):
    """Unnormalized DTW cost between two non-empty 1-D float64 sequences.

    Local cost |a_i - b_j|; steps diagonal/horizontal/vertical, each adding
    one local cost; boundary-to-boundary path.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0 or m == 0:
        raise ValueError("dtw_distance requires non-empty sequences")

    cdef double *prev = <double *> malloc(m * sizeof(double))
    cdef double *cur = <double *> malloc(m * sizeof(double))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef double cost, best, ai, result
    cdef double *tmp

    try:
        prev[0] = a[0] - b[0] if a[0] >= b[0] else b[0] - a[0]
        for j in range(1, m):
            cost = a[0] - b[j] if a[0] >= b[j] else b[j] - a[0]
            prev[j] = prev[j - 1] + cost
        for i in range(1, n):
            ai = a[i]
            cost = ai - b[0] if ai >= b[0] else b[0] - ai
            cur[0] = prev[0] + cost
            for j in range(1, m):
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if cur[j - 1] < best:
                    best = cur[j - 1]
                cost = ai - b[j] if ai >= b[j] else b[j] - ai
                cur[j] = best + cost
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m - 1]
    finally:
        free(prev)
        free(cur)
    return result
