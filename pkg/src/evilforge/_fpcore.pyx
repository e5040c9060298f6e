# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled short-vector enumeration using 128-bit integer arithmetic.

Same recurrence as the Python kernel in ``_enum``; the caller guarantees
all quantities fit (see ``_enum.compiled_fits``).
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef long long i128 "__int128"


cdef inline i128 floordiv(i128 a, i128 b) nogil:
    cdef i128 q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef i128 isqrt128(i128 n) nogil:
    if n < 2:
        return n
    cdef i128 x = n
    cdef i128 y
    # start from a power of two above sqrt(n)
    cdef int bits = 0
    cdef i128 t = n
    while t > 0:
        t >>= 1
        bits += 1
    x = (<i128>1) << ((bits + 1) // 2)
    while True:
        y = (x + n / x) >> 1
        if y >= x:
            return x
        x = y


cdef object to_py(i128 v):
    cdef long long hi = <long long>(v >> 64)
    cdef unsigned long long lo = <unsigned long long>(v & <i128>0xFFFFFFFFFFFFFFFF)
    return (int(hi) << 64) + int(lo)


def enumerate_short(int n, d, nmat, bound2, bint exact=False):
    """Return [(x, x^T G x)] for all x with x^T G x <= bound2 (== bound2 if exact)."""
    cdef i128* D = <i128*>malloc((n + 1) * sizeof(i128))
    cdef i128* N = <i128*>malloc(n * n * sizeof(i128))
    cdef long long* x = <long long*>malloc(n * sizeof(long long))
    cdef long long* hi = <long long*>malloc(n * sizeof(long long))
    cdef i128* V = <i128*>malloc((n + 1) * sizeof(i128))
    cdef i128* C = <i128*>malloc(n * sizeof(i128))
    cdef i128 B = <long long>bound2
    cdef int i, j
    cdef i128 rr, r, t, c, t0
    cdef int k
    out = []
    try:
        for i in range(n + 1):
            D[i] = <long long>d[i]
        for i in range(n):
            for j in range(n):
                N[i * n + j] = <long long>nmat[i][j]
            x[i] = 0
        V[n] = 0
        i = n - 1
        # enter level i: compute c, range, set x[i] = lo - 1
        while True:
            c = 0
            for j in range(i + 1, n):
                c += N[i * n + j] * x[j]
            C[i] = c
            rr = D[i] * (D[i + 1] * B - V[i + 1])
            if rr < 0:
                hi[i] = 0
                x[i] = 1
            elif exact and i == 0:
                r = isqrt128(rr)
                if r * r == rr:
                    for k in range(2):
                        if k == 1 and r == 0:
                            break
                        t0 = -r if k == 0 else r
                        if (t0 - c) % D[1] == 0:
                            x[0] = <long long>floordiv(t0 - c, D[1])
                            out.append((tuple([x[j] for j in range(n)]), to_py(B)))
                x[0] = 0
                hi[0] = -1
            else:
                r = isqrt128(rr)
                x[i] = <long long>(-floordiv(r + c, D[i + 1])) - 1
                hi[i] = <long long>floordiv(r - c, D[i + 1])
            # advance at this level, ascending on exhaustion
            while True:
                x[i] += 1
                if x[i] > hi[i]:
                    x[i] = 0
                    i += 1
                    if i >= n:
                        return out
                    continue
                t = D[i + 1] * x[i] + C[i]
                V[i] = (D[i] * V[i + 1] + t * t) / D[i + 1]
                if i == 0:
                    out.append((tuple([x[j] for j in range(n)]), to_py(V[0])))
                    continue
                i -= 1
                break
    finally:
        free(D)
        free(N)
        free(x)
        free(hi)
        free(V)
        free(C)
