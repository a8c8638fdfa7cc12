# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split scan.

Mirrors the numpy fallback operation for operation: sequential prefix sums,
totals accumulated in the same left-to-right order, the identical gain
expression, and a strict greater-than best-so-far scan in feature-major
order (first maximum wins, so ties resolve to the lowest feature id and
then the lowest split position). Compiled without fast-math so results are
bit-identical to the fallback.
"""

from libc.math cimport INFINITY


def scan_splits(double[:, ::1] vals, double[:, ::1] g, double[:, ::1] h,
                double lam, Py_ssize_t min_leaf):
    """Best split over pre-sorted per-feature arrays; see the fallback docstring."""
    cdef Py_ssize_t F = vals.shape[0]
    cdef Py_ssize_t k = vals.shape[1]
    if k < 2:
        return (-1, -1, 0.0)
    cdef double best_gain = -INFINITY
    cdef Py_ssize_t best_f = -1
    cdef Py_ssize_t best_i = -1
    cdef Py_ssize_t f, i
    cdef double gt, ht, gl, hl, gr, hr, gain
    for f in range(F):
        gt = 0.0
        ht = 0.0
        for i in range(k):
            gt = gt + g[f, i]
            ht = ht + h[f, i]
        gl = 0.0
        hl = 0.0
        for i in range(k - 1):
            gl = gl + g[f, i]
            hl = hl + h[f, i]
            if i + 1 < min_leaf:
                continue
            if k - i - 1 < min_leaf:
                continue
            if not vals[f, i] < vals[f, i + 1]:
                continue
            gr = gt - gl
            hr = ht - hl
            gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - gt * gt / (ht + lam)
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_i = i
    if best_f == -1 or not best_gain > 0.0:
        return (-1, -1, 0.0)
    return (best_f, best_i, best_gain)
