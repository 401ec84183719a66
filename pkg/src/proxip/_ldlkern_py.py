"""Pure NumPy backend for the LDL' inner loops.

Same contracts as the compiled module ``proxip._ldlkern``; used as the
import-time fallback and for cross-checking the compiled kernels.
"""

import numpy as np

BACKEND = "python"


def factor(n, Bp, Bi, Bx, parent, Lp, Li, Lx, D, lnz, flag, pattern, y, signs, col_scale, sign_tol):
    """Up-looking LDL' of an upper-triangular CSC matrix without pivoting.

    Writes L (unit lower triangular, implicit diagonal) into (Lp, Li, Lx) and
    the pivots into D, using only the precomputed elimination tree and column
    counts. Returns -1 on success, or the index of the first column whose
    pivot is zero or of unexpected sign.
    """
    lnz[:n] = 0
    flag[:n] = -1
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
            cols = Li[Lp[i]:p2]
            y[cols] -= Lx[Lp[i]:p2] * yi
            l_ki = yi / D[i]
            d -= l_ki * yi
            Li[p2] = k
            Lx[p2] = l_ki
            lnz[i] += 1
        if d * signs[k] <= sign_tol * col_scale[k]:
            return k
        D[k] = d
    return -1


def solve_inplace(n, Lp, Li, Lx, D, x):
    """Solve (L D L') y = x in place given the unit-triangular factor."""
    for j in range(n):
        seg = slice(Lp[j], Lp[j + 1])
        x[Li[seg]] -= Lx[seg] * x[j]
    x[:n] /= D[:n]
    for j in range(n - 1, -1, -1):
        seg = slice(Lp[j], Lp[j + 1])
        x[j] -= np.dot(Lx[seg], x[Li[seg]])
