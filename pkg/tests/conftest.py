"""Shared generators and fixtures for the test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proxip import QpProblem, SparseMatrixCsc

FIXTURE_DIR = Path(__file__).parent / "fixtures" / "qps"


@pytest.fixture
def qps_dir() -> Path:
    return FIXTURE_DIR


def random_sparse_symmetric(rng, n, density=0.2, spd_shift=0.0):
    """Random symmetric dense matrix with a sparse pattern (returned dense)."""
    mask = np.triu(rng.random((n, n)) < density)
    np.fill_diagonal(mask, True)
    vals = rng.standard_normal((n, n)) * mask
    out = np.triu(vals) + np.triu(vals, 1).T
    if spd_shift:
        out += spd_shift * np.eye(n)
    return out


def random_quasi_definite(rng, n1, n2, density=0.25):
    """Dense quasi-definite matrix: SPD (1,1) block, negative-definite (2,2) block."""
    B1 = rng.standard_normal((n1, n1)) * (rng.random((n1, n1)) < density)
    B2 = rng.standard_normal((n2, n2)) * (rng.random((n2, n2)) < density)
    top = B1 @ B1.T + (0.5 + rng.random()) * np.eye(n1)
    bot = B2 @ B2.T + (0.5 + rng.random()) * np.eye(n2)
    C = rng.standard_normal((n2, n1)) * (rng.random((n2, n1)) < density)
    K = np.zeros((n1 + n2, n1 + n2))
    K[:n1, :n1] = top
    K[n1:, n1:] = -bot
    K[n1:, :n1] = C
    K[:n1, n1:] = C.T
    return K


def make_random_qp(rng, n, p, m, cond=1e2, rank_frac=1.0, duplicate_eq=False):
    """Feasible bounded convex QP built to satisfy its own optimality system.

    The data is generated around a chosen primal/dual point, so the problem
    is solvable by construction even when P is rank deficient or equality
    rows are duplicated.
    """
    k = max(1, int(round(rank_frac * n)))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = np.zeros(n)
    eigs[:k] = np.logspace(0.0, np.log10(cond), k)[::-1] / np.sqrt(cond)
    Pd = (Q * eigs) @ Q.T
    Pd = (Pd + Pd.T) / 2.0

    A = rng.standard_normal((p, n)) * (rng.random((p, n)) < 0.4)
    G = rng.standard_normal((m, n)) * (rng.random((m, n)) < 0.4)
    for i in range(p):
        if not A[i].any():
            A[i, rng.integers(n)] = 1.0
    for i in range(m):
        if not G[i].any():
            G[i, rng.integers(n)] = 1.0

    xbar = rng.standard_normal(n)
    active = rng.random(m) < 0.3
    sbar = np.where(active, 0.0, rng.random(m) + 0.1)
    zbar = np.where(active, rng.random(m) + 0.1, 0.0)
    h = G @ xbar + sbar
    ybar = rng.standard_normal(p)
    if duplicate_eq and p > 0:
        A = np.vstack([A, A])
        ybar = np.concatenate([ybar / 2.0, ybar / 2.0])
    b = A @ xbar
    c = -(Pd @ xbar + A.T @ ybar + G.T @ zbar)
    return QpProblem(
        P=SparseMatrixCsc.from_dense(Pd, keep_upper=True),
        c=c,
        A=SparseMatrixCsc.from_dense(A),
        b=b,
        G=SparseMatrixCsc.from_dense(G),
        h=h,
    )


def make_badly_scaled_qp(rng, n, p, m, density=0.4, decades=2.2):
    """QP whose data is corrupted by diagonal factors; entries stay in 1e-6..1e6."""
    N = n + p + m
    s = 10.0 ** rng.uniform(-decades, decades, N)

    def mat(rs, cs, r, c, sym=False):
        mask = rng.random((r, c)) < density
        if sym:
            mask = np.triu(mask)
            np.fill_diagonal(mask, True)
        base = rng.uniform(0.1, 1.0, (r, c)) * np.where(rng.random((r, c)) < 0.5, -1.0, 1.0)
        return base * np.outer(rs, cs) * mask

    Pd = mat(s[:n], s[:n], n, n, sym=True)
    A = mat(s[n:n + p], s[:n], p, n)
    G = mat(s[n + p:], s[:n], m, n)
    for i in range(p):
        if not A[i].any():
            A[i, rng.integers(n)] = s[n + i] * s[rng.integers(n)] * 0.5
    for i in range(m):
        if not G[i].any():
            G[i, rng.integers(n)] = s[n + p + i] * s[rng.integers(n)] * 0.5
    return QpProblem(
        P=SparseMatrixCsc.from_dense(Pd, keep_upper=True),
        c=rng.standard_normal(n),
        A=SparseMatrixCsc.from_dense(A),
        b=rng.standard_normal(p),
        G=SparseMatrixCsc.from_dense(G),
        h=rng.standard_normal(m),
    )
