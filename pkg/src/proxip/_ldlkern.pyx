# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the LDL' numeric phase and triangular solves.

Mirrors the signatures in ``proxip._ldlkern_py``; both operate strictly on
caller-provided buffers so the hot path performs no allocation.
"""

BACKEND = "compiled"


def factor(int n,
           int[::1] Bp, int[::1] Bi, double[::1] Bx,
           int[::1] parent,
           int[::1] Lp, int[::1] Li, double[::1] Lx,
           double[::1] D,
           int[::1] lnz, int[::1] flag, int[::1] pattern, double[::1] y,
           signed char[::1] signs, double[::1] col_scale, double sign_tol):
    """Up-looking LDL' without pivoting; returns -1 or the failing column."""
    cdef int k, p, i, s, top, length, p2, q
    cdef double yi, l_ki, d
    for k in range(n):
        lnz[k] = 0
        flag[k] = -1
    for k in range(n):
        y[k] = 0.0
        top = n
        flag[k] = k
        for p in range(Bp[k], Bp[k + 1]):
            i = Bi[p]
            y[i] += Bx[p]
            length = 0
            while flag[i] != k:
                pattern[length] = i
                length += 1
                flag[i] = k
                i = parent[i]
            while length > 0:
                length -= 1
                top -= 1
                pattern[top] = pattern[length]
        d = y[k]
        y[k] = 0.0
        for s in range(top, n):
            i = pattern[s]
            yi = y[i]
            y[i] = 0.0
            p2 = Lp[i] + lnz[i]
            for q in range(Lp[i], p2):
                y[Li[q]] -= Lx[q] * yi
            l_ki = yi / D[i]
            d -= l_ki * yi
            Li[p2] = k
            Lx[p2] = l_ki
            lnz[i] += 1
        if d * signs[k] <= sign_tol * col_scale[k]:
            return k
        D[k] = d
    return -1


def solve_inplace(int n, int[::1] Lp, int[::1] Li, double[::1] Lx,
                  double[::1] D, double[::1] x):
    """Solve (L D L') y = x in place."""
    cdef int j, p
    cdef double xj, acc
    for j in range(n):
        xj = x[j]
        if xj != 0.0:
            for p in range(Lp[j], Lp[j + 1]):
                x[Li[p]] -= Lx[p] * xj
    for j in range(n):
        x[j] /= D[j]
    for j in range(n - 1, -1, -1):
        acc = x[j]
        for p in range(Lp[j], Lp[j + 1]):
            acc -= Lx[p] * x[Li[p]]
        x[j] = acc
