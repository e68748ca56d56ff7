"""Embedded primal-dual interior-point solver for conic programs.

Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step, over zero / nonnegative / second-order cones plus
an optional PSD capability (svec'd symmetric blocks). Dense linear algebra
throughout: target problems here have at most a few hundred variables and a
handful of cones, where an LU of the full KKT matrix per iteration is both
fast and robust. The embedding yields certificates of infeasibility and
unboundedness instead of diverging.

Internal form (cones converted on intake):

    minimize    c.x
    subject to  A x = b
                G x + s = h,   s in  K = R+^l x SOC x ... x PSD x ...

Rotated second-order cones are mapped onto plain SOCs by an orthogonal
rotation of their first two rows; zero cones become the equality block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .conic import (
    PSD,
    SOC,
    ConicProgram,
    Nonneg,
    RotatedSOC,
    Zero,
    rotated_to_soc_map,
    smat,
    svec,
)


class SolverStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERS = "MaxIters"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolverResult:
    status: SolverStatus
    x: np.ndarray | None
    objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    duals: list[np.ndarray] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL


class PsdCapabilityError(RuntimeError):
    """Raised when a program needs the PSD backend and it is disabled."""


# PSD support is an optional capability: the path-following pipeline never
# uses it, the SDP baselines require it. Kept as a module flag so a build
# without PSD machinery degrades gracefully rather than half-working.
PSD_CAPABILITY = True


# -- cone blocks -----------------------------------------------------------


def _soc_spectral(u):
    """Jordan eigenvalues (lam1 >= lam2) and unit frame vector of an SOC point."""
    nrm = np.linalg.norm(u[1:])
    unit = u[1:] / nrm if nrm > 0 else np.zeros_like(u[1:])
    return u[0] + nrm, u[0] - nrm, unit


def _soc_pow(u, p):
    lam1, lam2, unit = _soc_spectral(u)
    # floor the Jordan eigenvalues: a slack that collapses onto the cone
    # boundary (or apex) by roundoff must yield a usable, if extreme,
    # scaling rather than abort the iteration
    floor = max(1e-14 * abs(lam1), 1e-280)
    lam1, lam2 = max(lam1, floor), max(lam2, floor)
    a, b = lam1**p, lam2**p
    out = np.empty_like(u)
    out[0] = (a + b) / 2.0
    out[1:] = (a - b) / 2.0 * unit
    return out


def _soc_quad(a, v):
    """Quadratic representation P(a) v = 2 a (a.v) - det(a) (J v)."""
    det = a[0] ** 2 - a[1:] @ a[1:]
    out = 2.0 * a * (a @ v)
    out[0] -= det * v[0]
    out[1:] += det * v[1:]
    return out


class _NonnegBlock:
    kind = "nonneg"

    def __init__(self, dim):
        self.dim = dim
        self.degree = dim

    def identity(self):
        return np.ones(self.dim)

    def update(self, s, z):
        s = np.maximum(s, 1e-300)
        z = np.maximum(z, 1e-300)
        self.w = np.sqrt(s / z)
        self.lam = np.sqrt(s * z)

    def wtw(self):
        return np.diag(self.w**2)

    def apply_w(self, v):
        return self.w * v

    def apply_winv(self, v):
        return v / self.w

    def prod(self, u, v):
        return u * v

    def div_lam(self, v):
        return v / self.lam

    def step_to_boundary(self, lam, d):
        neg = d < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-lam[neg] / d[neg]))


class _SocBlock:
    kind = "soc"

    def __init__(self, dim):
        self.dim = dim
        self.degree = 1

    def identity(self):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def update(self, s, z):
        # NT scaling point w solves P(w) z = s; the scaling matrix is P(w^1/2).
        s_half = _soc_pow(s, 0.5)
        w = _soc_quad(s_half, _soc_pow(_soc_quad(s_half, z), -0.5))
        q = _soc_pow(w, 0.5)
        det_q = q[0] ** 2 - q[1:] @ q[1:]
        jdiag = np.full(self.dim, -det_q)
        jdiag[0] = det_q
        self.W = 2.0 * np.outer(q, q) - np.diag(jdiag)
        qi = np.empty_like(q)
        qi[0], qi[1:] = q[0] / det_q, -q[1:] / det_q
        det_qi = 1.0 / det_q
        jdiag_i = np.full(self.dim, -det_qi)
        jdiag_i[0] = det_qi
        self.Winv = 2.0 * np.outer(qi, qi) - np.diag(jdiag_i)
        self.lam = self.W @ z

    def wtw(self):
        return self.W @ self.W

    def apply_w(self, v):
        return self.W @ v

    def apply_winv(self, v):
        return self.Winv @ v

    def prod(self, u, v):
        out = np.empty_like(u)
        out[0] = u @ v
        out[1:] = u[0] * v[1:] + v[0] * u[1:]
        return out

    def div_lam(self, v):
        lam = self.lam
        det = lam[0] ** 2 - lam[1:] @ lam[1:]
        if not det > 0:
            det = max(1e-28 * lam[0] ** 2, 1e-300)
        x0 = (lam[0] * v[0] - lam[1:] @ v[1:]) / det
        out = np.empty_like(v)
        out[0] = x0
        out[1:] = (v[1:] - x0 * lam[1:]) / lam[0]
        return out

    def step_to_boundary(self, lam, d):
        # largest t >= 0 keeping lam + t d inside; first positive root of
        # (lam0 + t d0)^2 - ||lam1 + t d1||^2, which is positive at t = 0
        a = d[0] ** 2 - d[1:] @ d[1:]
        b = 2.0 * (lam[0] * d[0] - lam[1:] @ d[1:])
        c = lam[0] ** 2 - lam[1:] @ lam[1:]
        if abs(a) < 1e-300:
            return float(-c / b) if b < 0 else np.inf
        disc = b * b - 4.0 * a * c
        if disc < 0:
            return np.inf
        sq = np.sqrt(disc)
        roots = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
        pos = [r for r in roots if r > 0]
        return float(min(pos)) if pos else np.inf


class _PsdBlock:
    kind = "psd"

    def __init__(self, side):
        self.side = side
        self.dim = side * (side + 1) // 2
        self.degree = side

    def identity(self):
        return svec(np.eye(self.side))

    @staticmethod
    def _sqrt_pair(mat):
        vals, vecs = np.linalg.eigh(mat)
        # same eigenvalue floor as the SOC scaling: survive boundary collapse
        floor = max(1e-14 * abs(vals.max(initial=0.0)), 1e-280)
        vals = np.maximum(vals, floor)
        r = np.sqrt(vals)
        return (vecs * r) @ vecs.T, (vecs / r) @ vecs.T

    def update(self, s, z):
        S, Z = smat(s, self.side), smat(z, self.side)
        s_half, _ = self._sqrt_pair(S)
        inner = s_half @ Z @ s_half
        _, inner_isqrt = self._sqrt_pair(0.5 * (inner + inner.T))
        Wnt = s_half @ inner_isqrt @ s_half
        Wnt = 0.5 * (Wnt + Wnt.T)
        self.Wnt = Wnt
        self.T, self.Tinv = self._sqrt_pair(Wnt)
        lam_mat = self.T @ Z @ self.T
        self.lam_mat = 0.5 * (lam_mat + lam_mat.T)
        self.lam = svec(self.lam_mat)

    def wtw(self):
        # operator X -> Wnt X Wnt expressed on svec coordinates
        from .conic import _svec_indices

        W = self.Wnt
        rows, cols, scale = _svec_indices(self.side)
        # column k is svec of the symmetrized outer product of W's columns
        left = W[:, rows]                       # (d, K)
        right = W[:, cols]
        outer = np.einsum("ik,jk->ijk", left, right)
        outer = 0.5 * (outer + outer.transpose(1, 0, 2))
        cols_mat = (outer[rows, cols, :] * scale[:, None]) * scale[None, :]
        return cols_mat

    def apply_w(self, v):
        return svec(self.T @ smat(v, self.side) @ self.T)

    def apply_winv(self, v):
        return svec(self.Tinv @ smat(v, self.side) @ self.Tinv)

    def prod(self, u, v):
        U, V = smat(u, self.side), smat(v, self.side)
        return svec(0.5 * (U @ V + V @ U))

    def div_lam(self, v):
        vals, vecs = np.linalg.eigh(self.lam_mat)
        V = vecs.T @ smat(v, self.side) @ vecs
        X = V * (2.0 / (vals[:, None] + vals[None, :]))
        return svec(vecs @ X @ vecs.T)

    def step_to_boundary(self, lam, d):
        lam_mat = smat(lam, self.side)
        try:
            L = np.linalg.cholesky(lam_mat)
        except np.linalg.LinAlgError:
            ridge = 1e-14 * max(np.trace(lam_mat), 1e-280)
            L = np.linalg.cholesky(lam_mat + ridge * np.eye(self.side))
        D = smat(d, self.side)
        M = sla.solve_triangular(L, sla.solve_triangular(L, D, lower=True).T, lower=True)
        wmin = float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())
        return np.inf if wmin >= 0 else -1.0 / wmin


def _blockize(vec, blocks):
    out, k = [], 0
    for blk in blocks:
        out.append(vec[k : k + blk.dim])
        k += blk.dim
    return out


def _cone_neg(blocks, v):
    """Most negative 'eigenvalue' across blocks (how far v is outside K)."""
    worst = -np.inf
    k = 0
    for blk in blocks:
        u = v[k : k + blk.dim]
        if blk.kind == "nonneg":
            worst = max(worst, float(-u.min(initial=np.inf)))
        elif blk.kind == "soc":
            worst = max(worst, float(np.linalg.norm(u[1:]) - u[0]))
        else:
            worst = max(worst, float(-np.linalg.eigvalsh(smat(u, blk.side)).min()))
        k += blk.dim
    return worst


def _step_size(blocks, lam, d):
    alpha, k = np.inf, 0
    for blk in blocks:
        alpha = min(alpha, blk.step_to_boundary(lam[k : k + blk.dim], d[k : k + blk.dim]))
        k += blk.dim
    return alpha




# -- internal core ---------------------------------------------------------


@dataclass
class _Metrics:
    pres: float
    dres: float
    relgap: float

    def worst(self):
        return max(self.pres, self.dres, self.relgap)


class _Embedding:
    """One homogeneous self-dual solve on data (c, A, b, G, h, blocks)."""

    def __init__(self, c, A, b, G, h, blocks, tol, max_iters):
        self.c, self.A, self.b, self.G, self.h = c, A, b, G, h
        self.blocks = blocks
        self.tol = tol
        self.max_iters = max_iters
        self.n, self.p, self.m = len(c), len(b), len(h)
        self.degree = sum(blk.degree for blk in blocks)
        self.norm_b = max(1.0, np.linalg.norm(b) if self.p else 0.0)
        self.norm_h = max(1.0, np.linalg.norm(h))
        self.norm_c = max(1.0, np.linalg.norm(c))
        n, p, m = self.n, self.p, self.m
        self.kdim = n + p + m
        template = np.zeros((self.kdim, self.kdim))
        if p:
            template[:n, n : n + p] = A.T
            template[n : n + p, :n] = A
        template[:n, n + p :] = G.T
        template[n + p :, :n] = G
        self.k_template = template
        self.reg = 1e-11

    # KKT with current scaling -------------------------------------------

    def _factor(self):
        n, p = self.n, self.p
        K = self.k_template.copy()
        k = n + p
        for blk in self.blocks:
            K[k : k + blk.dim, k : k + blk.dim] = -blk.wtw()
            k += blk.dim
        self.k_exact = K
        reg_vec = np.full(self.kdim, -self.reg)
        reg_vec[:n] = self.reg
        self.k_factor = sla.lu_factor(K + np.diag(reg_vec), check_finite=False)

    def _solve_kkt(self, rhs):
        sol = sla.lu_solve(self.k_factor, rhs, check_finite=False)
        # one round of iterative refinement against the unregularized matrix
        for _ in range(2):
            resid = rhs - self.k_exact @ sol
            if np.linalg.norm(resid) <= 1e-13 * (1.0 + np.linalg.norm(rhs)):
                break
            sol = sol + sla.lu_solve(self.k_factor, resid, check_finite=False)
        return sol

    def _split(self, sol):
        n, p = self.n, self.p
        return sol[:n], sol[n : n + p], sol[n + p :]

    # directions -----------------------------------------------------------

    def _direction(self, res_weight, rx, ry, rz, rt, ds_target, dk_target, u1):
        tau, kappa = self.tau, self.kappa
        lam_div = np.concatenate([
            blk.div_lam(d)
            for blk, d in zip(self.blocks, _blockize(ds_target, self.blocks))
        ]) if self.m else np.zeros(0)
        w_lam_div = self._apply_w(lam_div)  # W'(lam \ ds); W symmetric
        rhs = np.concatenate([
            -res_weight * rx,
            -res_weight * ry,
            -res_weight * rz - w_lam_div,
        ])
        x2, y2, z2 = self._split(self._solve_kkt(rhs))
        x1, y1, z1 = u1
        bt = -res_weight * rt - dk_target / tau
        denom = float(self.c @ x1 + self.b @ y1 + self.h @ z1 - kappa / tau)
        dtau = (bt - float(self.c @ x2 + self.b @ y2 + self.h @ z2)) / denom
        dx = x2 + dtau * x1
        dy = y2 + dtau * y1
        dz = z2 + dtau * z1
        ds = w_lam_div - self._apply_wtw(dz)
        dkappa = (dk_target - kappa * dtau) / tau
        return dx, dy, dz, ds, dtau, dkappa

    def _apply_w(self, v):
        out, k = np.empty_like(v), 0
        for blk in self.blocks:
            out[k : k + blk.dim] = blk.apply_w(v[k : k + blk.dim])
            k += blk.dim
        return out

    def _apply_winv(self, v):
        out, k = np.empty_like(v), 0
        for blk in self.blocks:
            out[k : k + blk.dim] = blk.apply_winv(v[k : k + blk.dim])
            k += blk.dim
        return out

    def _apply_wtw(self, v):
        return self._apply_w(self._apply_w(v))

    def _jordan(self, u, v):
        out, k = np.empty_like(u), 0
        for blk in self.blocks:
            out[k : k + blk.dim] = blk.prod(u[k : k + blk.dim], v[k : k + blk.dim])
            k += blk.dim
        return out

    def _identity(self):
        return np.concatenate([blk.identity() for blk in self.blocks])

    # main loop ------------------------------------------------------------

    def run(self):
        n, p, m = self.n, self.p, self.m
        e = self._identity()

        # initial point: least-squares KKT solves with identity scaling,
        # then shift s and z into the cone interior
        for blk in self.blocks:
            blk.w = np.ones(blk.dim)
            blk.W = np.eye(blk.dim) if blk.kind == "soc" else None
        K = self.k_template.copy()
        K[n + p :, n + p :] = -np.eye(m)
        reg_vec = np.full(self.kdim, -self.reg)
        reg_vec[:n] = self.reg
        self.k_exact = K
        self.k_factor = sla.lu_factor(K + np.diag(reg_vec), check_finite=False)
        xp, _, zp = self._split(
            self._solve_kkt(np.concatenate([np.zeros(n), self.b, self.h]))
        )
        s = -zp  # = h - G xp up to regularization
        # always shift to a unit interior margin; a boundary-grazing start
        # makes the first scaling matrix singular
        s = s + (1.0 + max(0.0, _cone_neg(self.blocks, s))) * e
        xd, yd, zd = self._split(
            self._solve_kkt(np.concatenate([-self.c, np.zeros(p), np.zeros(m)]))
        )
        z = zd + (1.0 + max(0.0, _cone_neg(self.blocks, zd))) * e
        x, y = xd, yd
        self.tau, self.kappa = 1.0, 1.0

        best = None
        status = SolverStatus.MAX_ITERS
        iters_done = 0

        for it in range(self.max_iters):
            iters_done = it
            tau, kappa = self.tau, self.kappa
            rx = (self.A.T @ y if p else 0.0) + self.G.T @ z + self.c * tau
            ry = self.A @ x - self.b * tau if p else np.zeros(0)
            rz = self.G @ x + s - self.h * tau
            rt = float(self.c @ x + (self.b @ y if p else 0.0) + self.h @ z) + kappa

            stz = float(s @ z)
            mu = (stz + tau * kappa) / (self.degree + 1)

            pcost = float(self.c @ x) / tau
            dcost = -float((self.b @ y if p else 0.0) + self.h @ z) / tau
            absgap = stz / tau**2
            relgap = absgap / max(1.0, abs(pcost))
            pres = max(
                (np.linalg.norm(ry) / self.norm_b if p else 0.0),
                np.linalg.norm(rz) / self.norm_h,
            ) / tau
            dres = np.linalg.norm(rx) / self.norm_c / tau
            metrics = _Metrics(pres=pres, dres=dres, relgap=relgap)

            if best is None or metrics.worst() < best[0].worst():
                best = (metrics, x / tau, y / tau, z / tau, s / tau, pcost)

            if pres <= self.tol and dres <= self.tol and (
                relgap <= self.tol or absgap <= self.tol
            ):
                status = SolverStatus.OPTIMAL
                best = (metrics, x / tau, y / tau, z / tau, s / tau, pcost)
                iters_done = it
                break

            # certificate tests include a slope guard: the improving ray's
            # objective rate must be commensurate with the ray's size, or a
            # large-norm junk iterate can masquerade as a certificate
            by_hz = float((self.b @ y if p else 0.0) + self.h @ z)
            dual_norm = float(np.linalg.norm(np.concatenate([y, z])))
            if by_hz < 0.0 and -by_hz >= 1e-8 * max(1.0, dual_norm):
                pinf = np.linalg.norm(
                    (self.A.T @ y if p else 0.0) + self.G.T @ z
                ) / self.norm_c / (-by_hz)
                if pinf <= self.tol:
                    scale = -1.0 / by_hz
                    best = (metrics, None, y * scale, z * scale, None, np.nan)
                    status = SolverStatus.INFEASIBLE
                    break
            ctx = float(self.c @ x)
            if ctx < 0.0 and -ctx >= 1e-8 * max(1.0, float(np.linalg.norm(x))):
                dinf = max(
                    (np.linalg.norm(self.A @ x) / self.norm_b if p else 0.0),
                    np.linalg.norm(self.G @ x + s) / self.norm_h,
                ) / (-ctx)
                if dinf <= self.tol:
                    best = (metrics, x / (-ctx), None, None, s / (-ctx), np.nan)
                    status = SolverStatus.UNBOUNDED
                    break

            # Nesterov-Todd scaling at the current iterate
            try:
                k = 0
                for blk in self.blocks:
                    blk.update(s[k : k + blk.dim], z[k : k + blk.dim])
                    k += blk.dim
                self._factor()
                u1 = self._split(
                    self._solve_kkt(np.concatenate([-self.c, self.b, self.h]))
                )
                lam = np.concatenate([blk.lam for blk in self.blocks])

                # predictor
                ds_t = -self._jordan(lam, lam)
                dk_t = -tau * kappa
                aff = self._direction(1.0, rx, ry, rz, rt, ds_t, dk_t, u1)
                dxa, dya, dza, dsa, dta, dka = aff
                dz_sc = self._apply_w(dza)
                ds_sc = self._apply_winv(dsa)
                alpha = min(
                    _step_size(self.blocks, lam, dz_sc),
                    _step_size(self.blocks, lam, ds_sc),
                    tau / -dta if dta < 0 else np.inf,
                    kappa / -dka if dka < 0 else np.inf,
                )
                alpha_aff = min(1.0, alpha)
                sigma = min(1.0, max(0.0, 1.0 - alpha_aff)) ** 3

                # corrector + centering
                ds_t = ds_t + sigma * mu * e - self._jordan(ds_sc, dz_sc)
                dk_t = dk_t + sigma * mu - dta * dka
                comb = self._direction(1.0 - sigma, rx, ry, rz, rt, ds_t, dk_t, u1)
                dx, dy, dz, ds, dtau, dkappa = comb
                dz_sc = self._apply_w(dz)
                ds_sc = self._apply_winv(ds)
                alpha = min(
                    _step_size(self.blocks, lam, dz_sc),
                    _step_size(self.blocks, lam, ds_sc),
                    tau / -dtau if dtau < 0 else np.inf,
                    kappa / -dkappa if dkappa < 0 else np.inf,
                )
            except np.linalg.LinAlgError:
                status = SolverStatus.NUMERICAL_FAILURE
                break

            step = min(1.0, 0.99 * alpha)
            # borderline-feasible problems can produce directions that swing
            # tau or kappa across many orders of magnitude per step and the
            # iteration thrashes between the feasible and infeasible limits;
            # capping their per-step growth keeps the homotopy coherent
            if dtau > 0 and tau > 0:
                step = min(step, 9.0 * tau / dtau)
            if dkappa > 0 and kappa > 0:
                step = min(step, 9.0 * kappa / dkappa)
            if step <= 1e-9 or not np.isfinite(step):
                break  # stalled; report best iterate under MAX_ITERS

            x = x + step * dx
            y = y + step * dy if p else y
            z = z + step * dz
            s = s + step * ds
            self.tau = tau + step * dtau
            self.kappa = kappa + step * dkappa
            if self.tau <= 0 or self.kappa <= 0:
                status = SolverStatus.NUMERICAL_FAILURE
                break
        else:
            iters_done = self.max_iters

        metrics, xb, yb, zb, sb, pcost = best
        return status, metrics, xb, yb, zb, sb, pcost, iters_done + 1


# -- public API ------------------------------------------------------------


def solve(prog: ConicProgram, tol_solve: float = 1e-8, max_iters: int = 200,
          require_psd: bool | None = None) -> SolverResult:
    """Solve a conic program; never raises on solvable/infeasible inputs.

    Malformed programs fail at construction time, not here. ``tol_solve``
    bounds the scaled KKT residuals accepted as optimal.
    """
    if prog.uses_psd and not PSD_CAPABILITY:
        raise PsdCapabilityError("PSD backend unavailable in this build")

    n = prog.num_vars
    zero_cons = [(i, c) for i, c in enumerate(prog.constraints) if isinstance(c.cone, Zero)]
    ineq_cons = [(i, c) for i, c in enumerate(prog.constraints) if not isinstance(c.cone, Zero)]
    if not ineq_cons:
        raise ValueError("program needs at least one non-zero cone")

    c_int = -prog.objective

    # per-row scaling for equalities
    arows, brows, zero_row_scale = [], [], []
    for _, con in zero_cons:
        d = np.maximum(np.abs(con.A).max(axis=1, initial=0.0), np.abs(con.b))
        d = np.maximum(d, 1e-10)
        arows.append(con.A / d[:, None])
        brows.append(-con.b / d)
        zero_row_scale.append(d)
    A = np.vstack(arows) if arows else np.zeros((0, n))
    b = np.concatenate(brows) if brows else np.zeros(0)

    # one positive scalar per cone block keeps membership invariant
    grows, hrows, blocks, block_scale = [], [], [], []
    for _, con in ineq_cons:
        Ai, bi, cone = con.A, con.b, con.cone
        if isinstance(cone, RotatedSOC):
            T = rotated_to_soc_map(cone.dim)
            Ai, bi = T @ Ai, T @ bi
            blocks.append(_SocBlock(cone.dim))
        elif isinstance(cone, SOC):
            blocks.append(_SocBlock(cone.dim))
        elif isinstance(cone, Nonneg):
            blocks.append(_NonnegBlock(cone.dim))
        elif isinstance(cone, PSD):
            blocks.append(_PsdBlock(cone.side))
        else:  # pragma: no cover
            raise TypeError(f"unsupported cone {cone!r}")
        d = max(np.abs(Ai).max(initial=0.0), np.abs(bi).max(initial=0.0), 1e-10)
        grows.append(-Ai / d)
        hrows.append(bi / d)
        block_scale.append(d)
    G = np.vstack(grows)
    h = np.concatenate(hrows)

    # column equilibration: block scaling can leave a variable whose only
    # large coefficients sat in a heavily downscaled block with a near-zero
    # column, which poisons the KKT system and the ray certificates
    col = np.abs(G).max(axis=0, initial=0.0)
    if len(b):
        col = np.maximum(col, np.abs(A).max(axis=0, initial=0.0))
    col = np.maximum(col, 1e-12)
    G = G / col[None, :]
    if len(b):
        A = A / col[None, :]
    c_int = c_int / col

    # objective scaling keeps relative-gap tests meaningful across magnitudes
    obj_scale = max(1.0, float(np.abs(c_int).max(initial=0.0)))
    c_int = c_int / obj_scale

    emb = _Embedding(c_int, A, b, G, h, blocks, tol_solve, max_iters)
    try:
        status, metrics, x, y, z, s, pcost, iters = emb.run()
    except np.linalg.LinAlgError:
        return SolverResult(
            status=SolverStatus.NUMERICAL_FAILURE, x=None, objective=np.nan,
            primal_residual=np.nan, dual_residual=np.nan, gap=np.nan, iterations=0,
        )
    if x is not None:
        x = x / col  # undo column equilibration

    # map multipliers back to the original constraints (maximize convention:
    # objective + sum A_i' y_i = 0, with Zero-cone multipliers free)
    duals: list[np.ndarray | None] = [None] * len(prog.constraints)
    if y is not None and z is not None:
        kk = 0
        for (orig_i, _), dscale in zip(zero_cons, zero_row_scale):
            nrows = len(dscale)
            duals[orig_i] = -obj_scale * y[kk : kk + nrows] / dscale
            kk += nrows
        kk = 0
        for (orig_i, con), blk, dscale in zip(ineq_cons, blocks, block_scale):
            zi = obj_scale * z[kk : kk + blk.dim] / dscale
            if isinstance(con.cone, RotatedSOC):
                zi = rotated_to_soc_map(con.cone.dim).T @ zi
            duals[orig_i] = zi
            kk += blk.dim

    objective = np.nan
    if x is not None and status in (SolverStatus.OPTIMAL, SolverStatus.MAX_ITERS):
        objective = float(prog.objective @ x + prog.offset)
    return SolverResult(
        status=status,
        x=x,
        objective=objective,
        primal_residual=metrics.pres,
        dual_residual=metrics.dres,
        gap=metrics.relgap,
        iterations=iters,
        duals=duals,
    )
