"""Validation oracles built on the PSD relaxation of the design problem.

Dropping the rank-one requirement on the beamforming outer products W_n
turns the design into a semidefinite program whose value upper-bounds every
feasible design. Three certifiers use it:

* a fixed-split relaxation (rank diagnostics included),
* a bisection search locating the largest worst-user harvest the relaxation
  still supports, and
* a branch-and-bound sweep over the box of splitting ratios for the sum
  objective, whose per-box bound decouples the ratio/beamformer product
  (best-case harvesting weight, loosest-case decoder noise) so each node is
  a single linear SDP.

Hermitian matrices are embedded into real symmetric blocks
[[X, -Y], [Y, X]], which preserves the PSD ordering and keeps the solver
real-valued.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .algorithms import AlgoConfig, InfeasibleError, maximize_sum_eh
from .conic import PSD, ConicProgram, Nonneg, RotatedSOC, SOC
from .ipm import SolverStatus, solve
from .network import DesignPoint, NetworkInstance
from .surrogate import ALPHA_MAX, ALPHA_MIN


def outer_product_dimension(num_antennas: int, num_users: int) -> int:
    """Complex degrees of freedom of the stacked outer products."""
    return num_users * num_antennas * (num_antennas + 1) // 2


class RankDeficient(RuntimeError):
    """Relaxation returned matrices too far from rank one to extract."""

    def __init__(self, ratios):
        super().__init__(f"eigenvalue ratios {ratios} exceed the rank-one tolerance")
        self.ratios = np.asarray(ratios)


@dataclass(frozen=True)
class OuterProductSolution:
    W: list[np.ndarray]        # N Hermitian M x M matrices
    alpha: np.ndarray          # (n_eh,)
    eigen_ratios: np.ndarray   # lambda_2 / lambda_1 per matrix
    objective: float           # relaxation value (same units as sum_eh)
    solver_iterations: int


# -- Hermitian <-> real parameterization -----------------------------------


class _HermitianVars:
    """Flat real parameters for N Hermitian M x M matrices (M^2 reals each).

    Parameter order per matrix: M diagonal entries, then (Re, Im) pairs of
    the strictly-lower triangle, column-major.
    """

    def __init__(self, num_users: int, num_antennas: int, num_extra: int = 0):
        self.N, self.M = num_users, num_antennas
        self.per_matrix = num_antennas**2
        self.num_extra = num_extra
        self.num_vars = self.N * self.per_matrix + num_extra

    def extra_index(self, k: int) -> int:
        return self.N * self.per_matrix + k

    def _pairs(self):
        M = self.M
        out = []
        for j in range(M):
            for i in range(j + 1, M):
                out.append((i, j))
        return out

    def quadratic_form_row(self, h: np.ndarray, n: int) -> np.ndarray:
        """Row r with r @ x = h^H W_n h (real because W_n is Hermitian)."""
        row = np.zeros(self.num_vars)
        base = n * self.per_matrix
        row[base : base + self.M] = np.abs(h) ** 2
        k = base + self.M
        for i, j in self._pairs():
            cross = np.conj(h[i]) * h[j]
            row[k] = 2.0 * cross.real
            row[k + 1] = -2.0 * cross.imag
            k += 2
        return row

    def trace_row(self, n: int) -> np.ndarray:
        row = np.zeros(self.num_vars)
        base = n * self.per_matrix
        row[base : base + self.M] = 1.0
        return row

    def psd_embedding(self, n: int) -> np.ndarray:
        """Map params of W_n to svec([[X, -Y], [Y, X]]), side 2M."""
        M = self.M
        side = 2 * M
        svec_dim = side * (side + 1) // 2

        def svec_index(i, j):
            # lower-triangular column-major position of (i >= j)
            return j * side - j * (j - 1) // 2 + (i - j)

        sqrt2 = np.sqrt(2.0)
        A = np.zeros((svec_dim, self.num_vars))
        base = n * self.per_matrix
        for d in range(M):
            A[svec_index(d, d), base + d] = 1.0
            A[svec_index(M + d, M + d), base + d] = 1.0
        k = base + M
        for i, j in self._pairs():
            # real part: symmetric in both diagonal blocks
            A[svec_index(i, j), k] = sqrt2
            A[svec_index(M + i, M + j), k] = sqrt2
            # imaginary part: S[M+i, j] = +1, S[M+j, i] = -1
            A[svec_index(M + i, j), k + 1] = sqrt2
            A[svec_index(M + j, i), k + 1] = -sqrt2
            k += 2
        return A

    def extract(self, x: np.ndarray, n: int) -> np.ndarray:
        M = self.M
        base = n * self.per_matrix
        W = np.zeros((M, M), dtype=complex)
        W[np.diag_indices(M)] = x[base : base + M]
        k = base + M
        for i, j in self._pairs():
            W[i, j] = x[k] + 1j * x[k + 1]
            W[j, i] = x[k] - 1j * x[k + 1]
            k += 2
        return W


def _solve_robust(prog: ConicProgram, tol_solve: float):
    """Solve with a loosening-tolerance ladder; feasibility boundaries make
    some baseline SDPs stall at tight tolerances."""
    res = solve(prog, tol_solve=tol_solve)
    for factor in (10.0, 100.0):
        if res.status in (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE,
                          SolverStatus.UNBOUNDED):
            break
        res = solve(prog, tol_solve=factor * tol_solve)
    return res


def _eigen_ratios(mats) -> np.ndarray:
    ratios = []
    for W in mats:
        vals = np.linalg.eigvalsh(W)[::-1]
        top = max(vals[0], 0.0)
        second = max(vals[1], 0.0) if len(vals) > 1 else 0.0
        ratios.append(second / top if top > 0 else 1.0)
    return np.array(ratios)


def _hyperbolic_rows(u_row, u_off, v_row, v_off, rhs):
    """u * v >= rhs with affine u, v and constant rhs >= 0, as an SOC triple."""
    A = np.vstack([u_row + v_row, np.zeros_like(u_row), u_row - v_row])
    b = np.array([u_off + v_off, 2.0 * np.sqrt(rhs), u_off - v_off])
    return A, b


# -- fixed-split relaxation -------------------------------------------------


def _relaxation_program(inst: NetworkInstance, eh_weight, sinr_circuit_noise):
    """Common SDP skeleton: maximize sum_n1 weight*p_tilde with fixed noise
    terms; eh_weight and sinr_circuit_noise are per-user constants."""
    hv = _HermitianVars(inst.num_users, inst.num_antennas)
    obj = np.zeros(hv.num_vars)
    offset = 0.0
    for n1 in range(inst.n_eh):
        coeff = inst.zeta[n1] * eh_weight[n1]
        for eta in range(inst.num_users):
            obj += coeff * hv.quadratic_form_row(inst.h[n1], eta)
        offset += coeff * inst.sigma_a_sq
    prog = ConicProgram(num_vars=hv.num_vars, objective=obj, offset=offset)
    _add_relaxation_constraints(prog, inst, hv, sinr_circuit_noise)
    return prog, hv


def _add_relaxation_constraints(prog, inst, hv, sinr_circuit_noise):
    power_row = -sum(hv.trace_row(n) for n in range(inst.num_users))
    prog.add(power_row.reshape(1, -1), np.array([inst.power_budget]), Nonneg(1))
    rows, offs = [], []
    for n in range(inst.num_users):
        gamma = inst.gamma_min[n]
        row = hv.quadratic_form_row(inst.h[n], n)
        for eta in range(inst.num_users):
            if eta != n:
                row = row - gamma * hv.quadratic_form_row(inst.h[n], eta)
        rows.append(row)
        offs.append(-gamma * (inst.sigma_a_sq + sinr_circuit_noise[n]))
    prog.add(np.vstack(rows), np.array(offs), Nonneg(inst.num_users))
    for n in range(inst.num_users):
        A = hv.psd_embedding(n)
        prog.add(A, np.zeros(A.shape[0]), PSD(2 * inst.num_antennas))


def solve_relaxation_fixed_alpha(inst: NetworkInstance, alpha,
                                 tol_solve: float = 1e-6) -> OuterProductSolution:
    """Rank-relaxed sum-harvest maximization at frozen splitting ratios."""
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (inst.n_eh,))
    if np.any(alpha <= 0) or np.any(alpha >= 1):
        raise ValueError("alpha must lie strictly inside (0, 1)")
    noise = np.concatenate([
        inst.sigma_c_sq / alpha**2, np.full(inst.num_id_only, inst.sigma_c_sq)
    ])
    prog, hv = _relaxation_program(inst, 1.0 - alpha**2, noise)
    res = _solve_robust(prog, tol_solve)
    if res.status is SolverStatus.INFEASIBLE:
        raise InfeasibleError("relaxation infeasible at the given splitting ratios")
    if not res.optimal:
        raise RuntimeError(f"relaxation solve failed: {res.status.value}")
    mats = [hv.extract(res.x, n) for n in range(inst.num_users)]
    return OuterProductSolution(
        W=mats, alpha=alpha.copy(), eigen_ratios=_eigen_ratios(mats),
        objective=res.objective, solver_iterations=res.iterations,
    )


# -- box-decoupled upper bound (used by BB and as a bisection bracket) ------


def solve_box_relaxation(inst: NetworkInstance, alpha_lo, alpha_hi,
                         tol_solve: float = 1e-6) -> OuterProductSolution:
    """Upper bound on the relaxation over a whole box of splitting ratios.

    The bilinear ratio/matrix product is decoupled: the objective keeps the
    largest harvesting weight in the box (at alpha = lo) while the decoder
    noise keeps its smallest value (at alpha = hi), so the resulting SDP
    dominates every fixed ratio choice inside the box.
    """
    alpha_lo = np.broadcast_to(np.asarray(alpha_lo, dtype=float), (inst.n_eh,))
    alpha_hi = np.broadcast_to(np.asarray(alpha_hi, dtype=float), (inst.n_eh,))
    noise = np.concatenate([
        inst.sigma_c_sq / alpha_hi**2, np.full(inst.num_id_only, inst.sigma_c_sq)
    ])
    prog, hv = _relaxation_program(inst, 1.0 - alpha_lo**2, noise)
    res = _solve_robust(prog, tol_solve)
    if res.status is SolverStatus.INFEASIBLE:
        raise InfeasibleError("relaxation infeasible over the ratio box")
    if not res.optimal:
        raise RuntimeError(f"box relaxation solve failed: {res.status.value}")
    mats = [hv.extract(res.x, n) for n in range(inst.num_users)]
    return OuterProductSolution(
        W=mats, alpha=alpha_lo.copy(), eigen_ratios=_eigen_ratios(mats),
        objective=res.objective, solver_iterations=res.iterations,
    )


# -- bisection for the max-min objective ------------------------------------


@dataclass(frozen=True)
class BisectionResult:
    upper_bound: float
    solution: OuterProductSolution
    feasibility_solves: int


UNDECIDED = "undecided"


def _maxmin_constraints(inst: NetworkInstance, hv, prog):
    """Constraints shared by the max-min feasibility and direct programs:
    power cap, decoder thresholds (hyperbolic in a = alpha^2 for splitting
    users), the a box, and the PSD blocks."""
    nv = hv.num_vars
    power_row = -sum(hv.trace_row(n) for n in range(inst.num_users))
    prog.add(power_row.reshape(1, -1), np.array([inst.power_budget]), Nonneg(1))

    rows, offs = [], []
    for n in range(inst.num_users):
        gamma = inst.gamma_min[n]
        margin = hv.quadratic_form_row(inst.h[n], n)
        for eta in range(inst.num_users):
            if eta != n:
                margin = margin - gamma * hv.quadratic_form_row(inst.h[n], eta)
        if n < inst.n_eh:
            a_row = np.zeros(nv)
            a_row[hv.extra_index(n)] = 1.0
            A, b = _hyperbolic_rows(
                margin, -gamma * inst.sigma_a_sq, a_row, 0.0,
                gamma * inst.sigma_c_sq,
            )
            prog.add(A, b, SOC(3))
        else:
            rows.append(margin)
            offs.append(-gamma * (inst.sigma_a_sq + inst.sigma_c_sq))
    if rows:
        prog.add(np.vstack(rows), np.array(offs), Nonneg(len(rows)))

    box_rows, box_offs = [], []
    for n1 in range(inst.n_eh):
        row = np.zeros(nv)
        row[hv.extra_index(n1)] = 1.0
        box_rows.extend([row, -row])
        box_offs.extend([-(ALPHA_MIN**2), ALPHA_MAX**2])
    prog.add(np.vstack(box_rows), np.array(box_offs), Nonneg(len(box_offs)))

    for n in range(inst.num_users):
        A = hv.psd_embedding(n)
        prog.add(A, np.zeros(A.shape[0]), PSD(2 * inst.num_antennas))


def _harvest_forms(inst: NetworkInstance, hv, n1):
    """(row, offset) with row @ x + offset = zeta_n1 * p_tilde_n1(W)."""
    row = sum(hv.quadratic_form_row(inst.h[n1], eta)
              for eta in range(inst.num_users)) * inst.zeta[n1]
    return row, inst.zeta[n1] * inst.sigma_a_sq


def _extract_maxmin_solution(inst, hv, x, objective):
    mats = [hv.extract(x, n) for n in range(inst.num_users)]
    a = np.array([x[hv.extra_index(k)] for k in range(inst.n_eh)])
    a = np.clip(a, ALPHA_MIN**2, ALPHA_MAX**2)
    return OuterProductSolution(
        W=mats, alpha=np.sqrt(a), eigen_ratios=_eigen_ratios(mats),
        objective=objective, solver_iterations=0,
    )


def _maxmin_feasibility(inst: NetworkInstance, lam: float, tol_solve: float,
                        max_iters: int = 80):
    """Feasibility probe at worst-user level lam, splitting ratios free.

    Decision variables are the matrix parameters plus a = alpha^2 per
    splitting user, which keeps both ratio-dependent terms conic. Returns a
    solution (feasible), None (certified infeasible), or the UNDECIDED
    sentinel: probes next to the critical level are intrinsically
    degenerate and may exhaust their iteration budget without either
    certificate.
    """
    hv = _HermitianVars(inst.num_users, inst.num_antennas, num_extra=inst.n_eh)
    nv = hv.num_vars
    obj = -sum(hv.trace_row(n) for n in range(inst.num_users)) / inst.power_budget
    prog = ConicProgram(num_vars=nv, objective=obj)
    for n1 in range(inst.n_eh):
        p_row, p_off = _harvest_forms(inst, hv, n1)
        one_minus_a = np.zeros(nv)
        one_minus_a[hv.extra_index(n1)] = -1.0
        if lam > 0:
            A, b = _hyperbolic_rows(p_row, p_off, one_minus_a, 1.0, lam)
            prog.add(A, b, SOC(3))
        # lam == 0 is implied by a <= amax < 1 and p_tilde >= 0
    _maxmin_constraints(inst, hv, prog)

    res = solve(prog, tol_solve=tol_solve, max_iters=max_iters)
    if res.status not in (SolverStatus.OPTIMAL, SolverStatus.INFEASIBLE):
        res = solve(prog, tol_solve=10.0 * tol_solve, max_iters=max_iters)
    if res.status is SolverStatus.INFEASIBLE:
        return None
    if not res.optimal:
        return UNDECIDED
    return _extract_maxmin_solution(inst, hv, res.x, lam)


def maxmin_relaxation_direct(inst: NetworkInstance, tol_solve: float = 1e-6):
    """Single-shot relaxed max-min optimum via the substitution lam = rho^2.

    With rho as a variable, each worst-user level constraint
    zeta * p_tilde * (1 - a) >= rho^2 is one rotated cone, so the whole
    relaxation solves in one SDP. Used to certify the bisection bracket
    when near-boundary probes come back undecided.
    """
    hv = _HermitianVars(inst.num_users, inst.num_antennas,
                        num_extra=inst.n_eh + 1)
    nv = hv.num_vars
    rho_idx = hv.extra_index(inst.n_eh)
    obj = np.zeros(nv)
    obj[rho_idx] = 1.0
    prog = ConicProgram(num_vars=nv, objective=obj)
    for n1 in range(inst.n_eh):
        p_row, p_off = _harvest_forms(inst, hv, n1)
        half_one_minus_a = np.zeros(nv)
        half_one_minus_a[hv.extra_index(n1)] = -0.5
        rho_row = np.zeros(nv)
        rho_row[rho_idx] = 1.0
        A = np.vstack([p_row, half_one_minus_a, rho_row])
        b = np.array([p_off, 0.5, 0.0])
        prog.add(A, b, RotatedSOC(3))
    _maxmin_constraints(inst, hv, prog)
    res = _solve_robust(prog, tol_solve)
    if res.status is SolverStatus.INFEASIBLE:
        raise InfeasibleError("SINR constraints infeasible in the relaxation")
    if res.x is None:
        raise RuntimeError(f"direct max-min relaxation failed: {res.status.value}")
    value = float(res.x[rho_idx]) ** 2
    slack = res.gap if np.isfinite(res.gap) else 1.0
    if not res.optimal:
        if res.primal_residual > 1e-5 or slack > 1e-2:
            raise RuntimeError(
                f"direct max-min relaxation failed: {res.status.value}")
        value *= (1.0 + 3.0 * slack)  # conservative cover of the duality gap
    sol = _extract_maxmin_solution(inst, hv, res.x, value)
    return value, sol


def bisection_max_min(inst: NetworkInstance, tol_lambda: float = 1e-3,
                      tol_solve: float = 1e-6) -> BisectionResult:
    """Largest worst-user harvest supported by the relaxation, via bisection.

    An upper bound on the true max-min design value. The initial bracket
    comes from the sum-objective box relaxation divided by the number of
    harvesting users (min <= mean); only feasibility solves are counted.
    Probes that exhaust their budget without a certificate (possible right
    at the critical level) shrink the working bracket, and the reported
    bound is then cross-certified against the single-shot relaxation.
    """
    bracket = solve_box_relaxation(inst, ALPHA_MIN, ALPHA_MAX, tol_solve=tol_solve)
    hi = bracket.objective / inst.n_eh
    lo = 0.0
    solves = 1
    best = _maxmin_feasibility(inst, 0.0, tol_solve, max_iters=200)
    if best is None or best is UNDECIDED:
        raise InfeasibleError("SINR constraints infeasible in the relaxation")
    uncertified = False
    while hi - lo > tol_lambda * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        sol = _maxmin_feasibility(inst, mid, tol_solve)
        solves += 1
        if sol is UNDECIDED:
            uncertified = True
            hi = mid
        elif sol is None:
            hi = mid
        else:
            lo = mid
            best = sol
    if uncertified:
        direct_value, _ = maxmin_relaxation_direct(inst, tol_solve)
        hi = max(hi, direct_value * (1.0 + 1e-4))
    best = OuterProductSolution(
        W=best.W, alpha=best.alpha, eigen_ratios=best.eigen_ratios,
        objective=lo, solver_iterations=best.solver_iterations,
    )
    # hi upper-bounds every feasible level: probes above it were certified
    # infeasible, or it covers the directly-solved relaxation optimum
    return BisectionResult(upper_bound=hi, solution=best, feasibility_solves=solves)


# -- branch and bound over the splitting-ratio box ---------------------------


@dataclass(frozen=True)
class BBResult:
    upper_bound: float
    incumbent_value: float
    nodes_expanded: int
    incumbent_point: DesignPoint
    budget_exhausted: bool

    @property
    def gap(self) -> float:
        return (self.upper_bound - self.incumbent_value) / max(self.upper_bound, 1e-300)


def bb_sum_eh(inst: NetworkInstance, gap_tol: float = 1e-2,
              node_budget: int = 500, tol_solve: float = 1e-6,
              algo_cfg: AlgoConfig | None = None) -> BBResult:
    """Certify the sum objective globally by bisecting the ratio box.

    Upper bounds come from the decoupled box relaxation; incumbents from the
    ascent algorithm initialized at box midpoints (always feasible designs).
    Best-first on the node bound; stops at the requested relative gap or
    when the node budget runs out (flagged).
    """
    algo_cfg = algo_cfg or AlgoConfig()
    lo0 = np.full(inst.n_eh, ALPHA_MIN)
    hi0 = np.full(inst.n_eh, ALPHA_MAX)
    root = solve_box_relaxation(inst, lo0, hi0, tol_solve=tol_solve)
    nodes_expanded = 1

    def incumbent_at(mid):
        # pinning the initialization at a tiny midpoint ratio can make the
        # feasibility SOCP unsolvable even though the instance is fine
        try:
            point, _ = maximize_sum_eh(inst, algo_cfg, initial_alpha=mid)
        except InfeasibleError:
            return -np.inf, None
        return inst.sum_eh(point), point

    inc_value, inc_point = incumbent_at(0.5 * (lo0 + hi0))
    if inc_point is None:
        point, _ = maximize_sum_eh(inst, algo_cfg)
        inc_value, inc_point = inst.sum_eh(point), point
    heap = [(-root.objective, 0, lo0, hi0)]
    counter = 1
    budget_exhausted = False

    while heap:
        neg_ub, _, lo, hi = heapq.heappop(heap)
        ub = -neg_ub
        gap = (ub - inc_value) / max(ub, 1e-300)
        if gap <= gap_tol:
            heapq.heappush(heap, (neg_ub, counter, lo, hi))
            counter += 1
            break
        if nodes_expanded + 2 > node_budget:
            heapq.heappush(heap, (neg_ub, counter, lo, hi))
            counter += 1
            budget_exhausted = True
            break
        edge = int(np.argmax(hi - lo))
        mid = 0.5 * (lo[edge] + hi[edge])
        for child_lo, child_hi in (
            (lo, np.where(np.arange(inst.n_eh) == edge, mid, hi)),
            (np.where(np.arange(inst.n_eh) == edge, mid, lo), hi),
        ):
            try:
                child = solve_box_relaxation(inst, child_lo, child_hi,
                                             tol_solve=tol_solve)
                child_ub = min(child.objective, ub)
            except InfeasibleError:
                nodes_expanded += 1
                continue
            nodes_expanded += 1
            value, point = incumbent_at(0.5 * (child_lo + child_hi))
            if value > inc_value:
                inc_value, inc_point = value, point
            if child_ub > inc_value:
                heapq.heappush(heap, (-child_ub, counter, child_lo, child_hi))
                counter += 1

    upper = max((-entry[0] for entry in heap), default=inc_value)
    upper = max(upper, inc_value)
    return BBResult(
        upper_bound=upper,
        incumbent_value=inc_value,
        nodes_expanded=nodes_expanded,
        incumbent_point=inc_point,
        budget_exhausted=budget_exhausted,
    )


# -- rank-one extraction -----------------------------------------------------


def rank_one_extract(sol: OuterProductSolution, tol_rank: float = 1e-4) -> DesignPoint:
    """Recover beamformers from near-rank-one outer products.

    Raises :class:`RankDeficient` (carrying the eigenvalue ratios) when any
    matrix has a second eigenvalue above tol_rank times the first; recovery
    by randomization is out of scope, the diagnostics are the product.
    """
    ratios = sol.eigen_ratios
    if np.any(ratios > tol_rank):
        raise RankDeficient(ratios)
    w = []
    for W in sol.W:
        vals, vecs = np.linalg.eigh(W)
        w.append(np.sqrt(max(vals[-1], 0.0)) * vecs[:, -1])
    return DesignPoint(w=np.array(w), alpha=sol.alpha.copy())
