# cython: language_level=3
"""Compiled inner loop for constrained candidate scoring.

Mirrors kernels.decode_batch_numpy exactly: identical candidate order,
quantizer branches, sequential residual accumulation, and first-minimum
tie-break, so the two backends are interchangeable.
"""

cimport cython


@cython.boundscheck(False)
@cython.wraparound(False)
def decode_batch(double[:, ::1] U, double[:, ::1] WX2,
                 signed char[::1] x1_codes,
                 double[:, ::1] x1_out, long long[::1] best_out,
                 double[::1] res_out):
    cdef Py_ssize_t n = U.shape[0]
    cdef Py_ssize_t l = U.shape[1]
    cdef Py_ssize_t m = WX2.shape[0]
    cdef Py_ssize_t i, c, j
    cdef double z, v, d, r, best_r
    cdef Py_ssize_t best_c
    cdef signed char code

    for i in range(n):
        best_r = -1.0
        best_c = 0
        for c in range(m):
            r = 0.0
            for j in range(l):
                z = U[i, j] - WX2[c, j]
                code = x1_codes[j]
                if code == 1:    # forced active: sign decision
                    v = 1.0 if z >= 0.0 else -1.0
                elif code == 2:  # forced silent
                    v = 0.0
                else:            # free: soft limiter at +-1/2
                    if z > 0.5:
                        v = 1.0
                    elif z < -0.5:
                        v = -1.0
                    else:
                        v = 0.0
                d = z - v
                r += d * d
            if best_r < 0.0 or r < best_r:
                best_r = r
                best_c = c
        best_out[i] = best_c
        res_out[i] = best_r
        for j in range(l):
            z = U[i, j] - WX2[best_c, j]
            code = x1_codes[j]
            if code == 1:
                v = 1.0 if z >= 0.0 else -1.0
            elif code == 2:
                v = 0.0
            else:
                if z > 0.5:
                    v = 1.0
                elif z < -0.5:
                    v = -1.0
                else:
                    v = 0.0
            x1_out[i, j] = v
