"""Regularized interior-point QP solver with proximal multiplier updates.

Each outer iteration linearizes the regularized KKT conditions at the current
estimates, takes one predictor-corrector step (one factorization, two
triangular solves), and then decides from the residual progress whether to
move the proximal center, the multiplier estimates, and how far to shrink the
penalty parameters. The slack/dual pair stays strictly positive throughout
via the fraction-to-boundary rule.

The lifecycle is ``setup`` (allocate everything, equilibrate, analyze the KKT
pattern once), optional ``update`` (new values, same pattern, buffers
reused), and ``solve``.
"""

from __future__ import annotations

import time

import numpy as np

from .kkt import FactorizationFailed, KktSystem
from .model import (
    Iterate,
    ProximalState,
    QpProblem,
    Settings,
    SolveResult,
    Status,
    StepInfo,
    TerminationInfo,
)
from .scaling import Equilibration, scale_into, unscale_into
from .sparse import SparseMatrixCsc, StructureError

__all__ = [
    "SolverInstance",
    "setup",
    "solve_qp",
    "step_size",
    "centering_parameter",
    "corrector_rhs",
    "update_estimates",
    "check_termination",
]

# Algorithm-2 progress ratio is clamped here so shrink factors stay positive.
_RATIO_CLAMP = 0.9
_RESIDUAL_IMPROVEMENT = 0.95


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def step_size(v: np.ndarray, dv: np.ndarray, tau: float) -> float:
    """Largest step in [0, 1] keeping v + alpha*dv >= (1 - tau) * v.

    ``v`` must be strictly positive. Equals min(1, tau * min over negative
    dv_i of v_i / -dv_i); 1 when no component of dv is negative.
    """
    neg = dv < 0.0
    if not np.any(neg):
        return 1.0
    ratio = np.min(v[neg] / -dv[neg])
    return float(min(1.0, tau * ratio))


def centering_parameter(s, z, ds_affine, dz_affine, alpha_p, alpha_d) -> tuple[float, float, float]:
    """Mehrotra centering weight from the affine trial step.

    Returns (sigma, mu, eta) where mu is the current mean complementarity,
    eta the ratio of the post-step mean complementarity to mu, and
    sigma = clamp(eta, 0, 1)**3. With no inequalities everything is zero.
    """
    m = s.size
    if m == 0:
        return 0.0, 0.0, 0.0
    sz = float(s @ z)
    mu = sz / m
    post = float((s + alpha_p * ds_affine) @ (z + alpha_d * dz_affine))
    eta = post / sz if sz > 0.0 else 0.0
    sigma = max(0.0, min(1.0, eta)) ** 3
    return sigma, mu, eta


def corrector_rhs(s, z, ds_affine, dz_affine, sigma: float, mu: float, out=None) -> np.ndarray:
    """Complementarity right-hand side combining prediction, correction, centering."""
    if out is None:
        out = np.empty_like(s)
    np.multiply(s, z, out=out)
    out += ds_affine * dz_affine
    np.negative(out, out=out)
    out += sigma * mu
    return out


def update_estimates(
    iterate_prev: Iterate,
    iterate_next: Iterate,
    proximal: ProximalState,
    p_prev: float,
    p_next: float,
    d_prev: float,
    d_next: float,
    settings: Settings,
) -> ProximalState:
    """Move estimates toward the new iterate where residuals improved.

    The relative change of the total complementarity drives how fast the
    penalties shrink; it is clamped to [0, 0.9] so the shrink factors remain
    positive. Both penalties are floored at their configured minima.
    """
    sz_prev = float(iterate_prev.s @ iterate_prev.z)
    if sz_prev > 0.0:
        sz_next = float(iterate_next.s @ iterate_next.z)
        r = abs(sz_prev - sz_next) / sz_prev
        r = min(max(r, 0.0), _RATIO_CLAMP)
    else:
        r = 0.0

    if p_next <= _RESIDUAL_IMPROVEMENT * p_prev:
        lam, nu = iterate_next.y, iterate_next.z
        delta = (1.0 - r) * proximal.delta
    else:
        lam, nu = proximal.lam, proximal.nu
        delta = (1.0 - r / 3.0) * proximal.delta

    if d_next <= _RESIDUAL_IMPROVEMENT * d_prev:
        xi = iterate_next.x
        rho = (1.0 - r) * proximal.rho
    else:
        xi = proximal.xi
        rho = (1.0 - r / 3.0) * proximal.rho

    return ProximalState(
        xi=xi.copy(),
        lam=lam.copy(),
        nu=nu.copy(),
        delta=max(delta, settings.delta_min),
        rho=max(rho, settings.rho_min),
    )


def check_termination(problem: QpProblem, iterate: Iterate, settings: Settings) -> TerminationInfo:
    """Evaluate the three convergence tests on the given (unscaled) data.

    Primal feasibility, dual stationarity, and the duality gap are each
    compared against eps_abs plus eps_rel times the natural scale of the
    quantities involved.
    """
    x, s, y, z = iterate.x, iterate.s, iterate.y, iterate.z
    ax = problem.A.matvec(x)
    gx = problem.G.matvec(x)
    px = problem.P.symvec(x)
    aty = problem.A.rmatvec(y)
    gtz = problem.G.rmatvec(z)

    p_res = max(_inf_norm(ax - problem.b), _inf_norm(gx - problem.h + s))
    p_scale = max(
        _inf_norm(ax), _inf_norm(problem.b), _inf_norm(gx), _inf_norm(problem.h), _inf_norm(s)
    )
    d_res = _inf_norm(px + problem.c + aty + gtz)
    d_scale = max(_inf_norm(px), _inf_norm(aty), _inf_norm(gtz), _inf_norm(problem.c))

    x_px = float(x @ px)
    ctx = float(problem.c @ x)
    bty = float(problem.b @ y)
    htz = float(problem.h @ z)
    gap = abs(x_px + ctx + bty + htz)
    g_scale = max(abs(x_px), abs(ctx), abs(bty), abs(htz))

    ea, er = settings.eps_abs, settings.eps_rel
    converged = (
        p_res <= ea + er * p_scale
        and d_res <= ea + er * d_scale
        and gap <= ea + er * g_scale
    )
    return TerminationInfo(converged, p_res, d_res, gap)


class SolverInstance:
    """One problem bound to its workspaces; create through :func:`setup`."""

    def __init__(self, problem: QpProblem, settings: Settings | None = None):
        t0 = time.perf_counter()
        self.settings = settings if settings is not None else Settings()
        expanded = problem.expand_boxes()

        # instance-owned copies: update() mutates these, never the caller's data
        self.orig = QpProblem(
            P=expanded.P.copy(),
            c=expanded.c.copy(),
            A=expanded.A.copy(),
            b=expanded.b.copy(),
            G=expanded.G.copy(),
            h=expanded.h.copy(),
            obj_constant=expanded.obj_constant,
            name=expanded.name,
        )
        self.n = self.orig.num_vars
        self.p = self.orig.num_eq
        self.m = self.orig.num_ineq
        # bookkeeping for box-bound value updates
        self._box_upper = (
            np.flatnonzero(np.isfinite(problem.u)) if problem.u is not None else np.empty(0, int)
        )
        self._box_lower = (
            np.flatnonzero(np.isfinite(problem.l)) if problem.l is not None else np.empty(0, int)
        )
        self._m_user = problem.G.nrows if problem.G is not None else 0
        self._pattern_ref = problem

        self.scaled = QpProblem(
            P=self.orig.P.copy(),
            c=self.orig.c.copy(),
            A=self.orig.A.copy(),
            b=self.orig.b.copy(),
            G=self.orig.G.copy(),
            h=self.orig.h.copy(),
        )
        self.equilibration = Equilibration.identity(self.n, self.p, self.m)
        self._equilibrate()

        self.kkt = KktSystem(self.scaled.P, self.scaled.A, self.scaled.G)

        n, p, m = self.n, self.p, self.m
        dim = n + p + m
        self._rhs = np.empty(dim)
        self._sol = np.empty(dim)
        self._w = np.empty(m)
        self._rs_aff = np.empty(m)
        self._rs_cor = np.empty(m)
        self._dirs = [(np.empty(n), np.empty(p), np.empty(m), np.empty(m)) for _ in range(2)]
        self._cand = Iterate(np.empty(n), np.empty(m), np.empty(p), np.empty(m))
        self._cand_unscaled = Iterate(np.empty(n), np.empty(m), np.empty(p), np.empty(m))
        self._best = Iterate(np.empty(n), np.empty(m), np.empty(p), np.empty(m))

        self.setup_time = time.perf_counter() - t0
        self.solve_time = 0.0

    # -- data management -------------------------------------------------------

    def _equilibrate(self):
        s = self.settings
        eq = self.equilibration
        eq.d_x[:] = 1.0
        eq.d_y[:] = 1.0
        eq.d_z[:] = 1.0
        eq.c_scale = 1.0
        eq.passes = 0
        if s.ruiz_iters > 0:
            scale_into(self.orig, self.scaled, eq, s.ruiz_iters, s.ruiz_tol)
        else:
            self.scaled.P.values[:] = self.orig.P.values
            self.scaled.c[:] = self.orig.c
            self.scaled.A.values[:] = self.orig.A.values
            self.scaled.b[:] = self.orig.b
            self.scaled.G.values[:] = self.orig.G.values
            self.scaled.h[:] = self.orig.h

    def update(self, P=None, c=None, A=None, b=None, G=None, h=None, l=None, u=None):
        """Replace problem values; sparsity patterns must be unchanged.

        Validates everything before touching instance state, so a structural
        error leaves the instance as it was. Data is re-equilibrated; the
        symbolic factorization and every buffer are reused.
        """
        ref = self._pattern_ref
        new_P = self._check_matrix(P, ref.P, "P")
        new_A = self._check_matrix(A, ref.A, "A")
        new_G = self._check_matrix(G, ref.G, "G")
        new_c = self._check_vector(c, self.n, "c")
        new_b = self._check_vector(b, self.p, "b")
        new_h = self._check_vector(h, self._m_user, "h")
        new_l = self._check_bounds(l, self._box_lower, ref.l, "l")
        new_u = self._check_bounds(u, self._box_upper, ref.u, "u")

        t0 = time.perf_counter()
        if new_P is not None:
            self.orig.P.values[:] = new_P
        if new_c is not None:
            self.orig.c[:] = new_c
        if new_A is not None:
            self.orig.A.values[:] = new_A
        if new_b is not None:
            self.orig.b[:] = new_b
        if new_G is not None:
            self.orig.G.values[:self._g_user_nnz()] = new_G
        if new_h is not None:
            self.orig.h[:self._m_user] = new_h
        if new_u is not None:
            self.orig.h[self._m_user:self._m_user + self._box_upper.size] = new_u[self._box_upper]
        if new_l is not None:
            lo = self._m_user + self._box_upper.size
            self.orig.h[lo:lo + self._box_lower.size] = -new_l[self._box_lower]
        self._equilibrate()
        self.setup_time = time.perf_counter() - t0

    def _g_user_nnz(self) -> int:
        return int(self._pattern_ref.G.nnz) if self._pattern_ref.G is not None else 0

    @staticmethod
    def _check_matrix(new, ref: SparseMatrixCsc, name: str):
        if new is None:
            return None
        if isinstance(new, SparseMatrixCsc):
            if not new.same_pattern(ref):
                raise StructureError(f"{name}: sparsity pattern differs from setup")
            vals = new.values
        else:
            vals = np.ascontiguousarray(new, dtype=np.float64)
            if vals.shape != (ref.nnz,):
                raise StructureError(
                    f"{name}: expected {ref.nnz} values for the setup pattern, got {vals.size}"
                )
        if not np.all(np.isfinite(vals)):
            raise StructureError(f"{name}: non-finite values")
        return vals.copy()

    @staticmethod
    def _check_vector(new, length: int, name: str):
        if new is None:
            return None
        vals = np.ascontiguousarray(new, dtype=np.float64)
        if vals.shape != (length,):
            raise StructureError(f"{name} has shape {vals.shape}, expected ({length},)")
        if not np.all(np.isfinite(vals)):
            raise StructureError(f"{name}: non-finite values")
        return vals

    @staticmethod
    def _check_bounds(new, finite_idx: np.ndarray, ref, name: str):
        if new is None:
            return None
        if ref is None:
            raise StructureError(f"{name}: problem was set up without this bound")
        vals = np.ascontiguousarray(new, dtype=np.float64)
        if vals.shape != np.asarray(ref).shape:
            raise StructureError(f"{name}: wrong length")
        if not np.array_equal(np.isfinite(vals), np.isfinite(np.asarray(ref))):
            raise StructureError(f"{name}: finiteness pattern must match setup")
        return vals

    # -- pieces of one iteration ----------------------------------------------

    def factorize_kkt(self, delta: float, rho: float, W: np.ndarray) -> tuple[float, float, int]:
        """Refresh and factorize the reduced KKT matrix, retrying on pivot failure."""
        s = self.settings
        return self.kkt.factorize(
            self.scaled.P,
            self.scaled.A,
            self.scaled.G,
            delta,
            rho,
            W,
            s.reg_retry_factor,
            s.reg_retry_max,
        )

    def newton_step(self, r_x, r_y, r_z, s, z, r_s, out_idx: int):
        """Solve the reduced system and reconstruct the slack direction."""
        n, p = self.n, self.p
        dx, dy, dz, ds = self._dirs[out_idx]
        self._rhs[:n] = r_x
        self._rhs[n:n + p] = r_y
        if self.m:
            self._rhs[n + p:] = r_z - r_s / z
        self.kkt.solve_into(self._rhs, self._sol)
        dx[:] = self._sol[:n]
        dy[:] = self._sol[n:n + p]
        dz[:] = self._sol[n + p:]
        if self.m:
            np.multiply(s, dz, out=ds)
            np.subtract(r_s, ds, out=ds)
            ds /= z
        return dx, dy, dz, ds

    def initialize(self) -> tuple[Iterate, ProximalState, tuple[float, float, int]]:
        """Starting point from one regularized least-squares solve.

        Solves the same reduced system with unit slack weighting for the
        primal/dual seed, then shifts the slack and inequality multiplier
        into the strictly positive orthant with a margin proportional to
        their normalized complementarity.
        """
        s = self.settings
        n, p, m = self.n, self.p, self.m
        self._w[:] = 1.0
        info = self.factorize_kkt(s.delta0, s.rho0, self._w)
        self._rhs[:n] = -self.scaled.c
        self._rhs[n:n + p] = self.scaled.b
        self._rhs[n + p:] = self.scaled.h
        self.kkt.solve_into(self._rhs, self._sol)
        xi0 = self._sol[:n].copy()
        lam0 = self._sol[n:n + p].copy()
        nu_t = self._sol[n + p:].copy()
        s_t = -nu_t
        s0, nu0 = interior_shift(s_t, nu_t)
        iterate = Iterate(x=xi0.copy(), s=s0, y=lam0.copy(), z=nu0)
        prox = ProximalState(
            xi=xi0, lam=lam0, nu=nu0.copy(), delta=s.delta0, rho=s.rho0
        )
        return iterate, prox, info

    # -- main loop --------------------------------------------------------------

    def solve(self, trace=None) -> SolveResult:
        """Run the interior-point iteration until the convergence tests hold.

        Returns the unscaled iterate with Solved, IterationLimit, TimeLimit,
        or NumericalError status; the slack and inequality dual of the
        returned iterate are strictly positive in every component.
        """
        t0 = time.perf_counter()
        st = self.settings
        n, p, m = self.n, self.p, self.m
        result = self._solve_loop(t0, st, n, p, m, trace)
        self.solve_time = time.perf_counter() - t0
        result.solve_time = self.solve_time
        result.setup_time = self.setup_time
        result.objective = self.orig.objective(result.iterate.x)
        return result

    def _solve_loop(self, t0, st, n, p, m, trace) -> SolveResult:
        sc = self.scaled
        best_score = np.inf
        best_info = TerminationInfo(False, np.inf, np.inf, np.inf)
        iterations = 0

        def finish(status, info):
            return SolveResult(
                status=status,
                iterate=self._best.copy(),
                primal_res=info.primal_res,
                dual_res=info.dual_res,
                duality_gap=info.duality_gap,
                iterations=iterations,
                setup_time=self.setup_time,
                solve_time=0.0,
            )

        try:
            iterate, prox, _ = self.initialize()
        except (FactorizationFailed, StructureError):
            fallback = Iterate(np.zeros(n), np.ones(m), np.zeros(p), np.ones(m))
            self._best = fallback
            return finish(Status.NUMERICAL_ERROR, best_info)

        unscale_into(self.equilibration, iterate, self._cand_unscaled)
        info = check_termination(self.orig, self._cand_unscaled, st)
        best_score = max(info.primal_res, info.dual_res, info.duality_gap)
        best_info = info
        self._copy_iterate(self._cand_unscaled, self._best)
        if info.converged:
            return finish(Status.SOLVED, info)

        x, s_vec, y, z = iterate.x, iterate.s, iterate.y, iterate.z
        for k in range(st.max_iter):
            if st.time_limit is not None and time.perf_counter() - t0 >= st.time_limit:
                return finish(Status.TIME_LIMIT, best_info)

            # line 2 of the outer iteration: restart from the estimates
            x[:] = prox.xi
            y[:] = prox.lam
            z[:] = prox.nu

            # plain KKT residuals at the restart point; the proximal and
            # penalty terms vanish because the point equals the estimates
            r_x = -(sc.P.symvec(x) + sc.c + sc.A.rmatvec(y) + sc.G.rmatvec(z))
            r_y = sc.b - sc.A.matvec(x)
            r_z = sc.h - sc.G.matvec(x) - s_vec
            p_start = max(_inf_norm(r_y), _inf_norm(r_z))
            d_start = _inf_norm(r_x)

            if m:
                np.divide(s_vec, z, out=self._w)
            try:
                delta_f, rho_f, retries = self.factorize_kkt(prox.delta, prox.rho, self._w)
            except (FactorizationFailed, StructureError):
                return finish(Status.NUMERICAL_ERROR, best_info)

            if m:
                np.multiply(s_vec, z, out=self._rs_aff)
                np.negative(self._rs_aff, out=self._rs_aff)
            dxa, dya, dza, dsa = self.newton_step(r_x, r_y, r_z, s_vec, z, self._rs_aff, 0)

            if m:
                alpha_pa = step_size(s_vec, dsa, st.tau)
                alpha_da = step_size(z, dza, st.tau)
                sigma, mu, eta = centering_parameter(s_vec, z, dsa, dza, alpha_pa, alpha_da)
                corrector_rhs(s_vec, z, dsa, dza, sigma, mu, out=self._rs_cor)
                dx, dy, dz, ds = self.newton_step(r_x, r_y, r_z, s_vec, z, self._rs_cor, 1)
                alpha_p = step_size(s_vec, ds, st.tau)
                alpha_d = step_size(z, dz, st.tau)
            else:
                alpha_pa = alpha_da = 1.0
                sigma = mu = eta = 0.0
                dx, dy, dz, ds = dxa, dya, dza, dsa
                alpha_p = alpha_d = 1.0

            cand = self._cand
            np.multiply(dx, alpha_p, out=cand.x)
            cand.x += x
            np.multiply(ds, alpha_p, out=cand.s)
            cand.s += s_vec
            np.multiply(dy, alpha_d, out=cand.y)
            cand.y += y
            np.multiply(dz, alpha_d, out=cand.z)
            cand.z += z
            iterations = k + 1

            if not (
                np.all(np.isfinite(cand.x))
                and np.all(np.isfinite(cand.s))
                and np.all(np.isfinite(cand.y))
                and np.all(np.isfinite(cand.z))
            ):
                return finish(Status.NUMERICAL_ERROR, best_info)

            if trace is not None:
                trace(
                    StepInfo(
                        iteration=k,
                        dx=dx.copy(), dy=dy.copy(), dz=dz.copy(), ds=ds.copy(),
                        alpha_p=alpha_p, alpha_d=alpha_d,
                        alpha_p_affine=alpha_pa, alpha_d_affine=alpha_da,
                        sigma=sigma, mu=mu, eta=eta,
                        delta=prox.delta, rho=prox.rho,
                        delta_factored=delta_f, rho_factored=rho_f,
                        factor_retries=retries,
                    ),
                    Iterate(x.copy(), s_vec.copy(), y.copy(), z.copy()),
                    cand.copy(),
                    prox,
                )

            # convergence is always judged on unscaled quantities
            unscale_into(self.equilibration, cand, self._cand_unscaled)
            info = check_termination(self.orig, self._cand_unscaled, st)
            score = max(info.primal_res, info.dual_res, info.duality_gap)
            if score < best_score:
                best_score = score
                best_info = info
                self._copy_iterate(self._cand_unscaled, self._best)
            if info.converged:
                self._copy_iterate(self._cand_unscaled, self._best)
                return finish(Status.SOLVED, info)

            p_next, d_next = self._scaled_residuals(cand)
            prox = update_estimates(
                Iterate(x, s_vec, y, z), cand, prox, p_start, p_next, d_start, d_next, st
            )
            s_vec[:] = cand.s

        return finish(Status.ITERATION_LIMIT, best_info)

    def _scaled_residuals(self, it: Iterate) -> tuple[float, float]:
        sc = self.scaled
        p_res = max(
            _inf_norm(sc.A.matvec(it.x) - sc.b),
            _inf_norm(sc.G.matvec(it.x) - sc.h + it.s),
        )
        d_res = _inf_norm(sc.P.symvec(it.x) + sc.c + sc.A.rmatvec(it.y) + sc.G.rmatvec(it.z))
        return p_res, d_res

    @staticmethod
    def _copy_iterate(src: Iterate, dst: Iterate):
        dst.x[:] = src.x
        dst.s[:] = src.s
        dst.y[:] = src.y
        dst.z[:] = src.z


def interior_shift(s_tilde: np.ndarray, nu_tilde: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shift a trial slack/multiplier pair strictly inside the positive orthant.

    First a conservative uniform shift clears the most negative component of
    each vector, then both are pushed further from zero by half the mean
    complementarity normalized by the other vector's total mass.
    """
    m = s_tilde.size
    if m == 0:
        return s_tilde.copy(), nu_tilde.copy()
    ds = max(0.0, -1.5 * float(np.min(s_tilde)))
    dnu = max(0.0, -1.5 * float(np.min(nu_tilde)))
    st = s_tilde + ds
    nt = nu_tilde + dnu
    dot = float(st @ nt)
    den_nu = float(np.sum(nt))
    den_s = float(np.sum(st))
    extra_s = 0.5 * dot / den_nu if den_nu > 0.0 else 1.0
    extra_nu = 0.5 * dot / den_s if den_s > 0.0 else 1.0
    s0 = s_tilde + (ds + extra_s)
    nu0 = nu_tilde + (dnu + extra_nu)
    # degenerate data can leave zeros; force strict interiority
    if np.min(s0) <= 0.0:
        s0 += 1.0 - np.min(s0)
    if np.min(nu0) <= 0.0:
        nu0 += 1.0 - np.min(nu0)
    return s0, nu0


def setup(problem: QpProblem, settings: Settings | None = None) -> SolverInstance:
    """Allocate a solver instance bound to the problem's sparsity structure."""
    return SolverInstance(problem, settings)


def solve_qp(problem: QpProblem, settings: Settings | None = None) -> SolveResult:
    """One-shot convenience: setup followed by solve."""
    return SolverInstance(problem, settings).solve()
