"""Translate design constraints and surrogate objectives into conic programs.

Beamformers enter the flat real variable vector as interleaved Re/Im pairs;
SS ratios, their reciprocal bounds t, and per-program epigraph auxiliaries
follow. Three builders cover the solves the outer loops need: minimum-power
feasibility initialization, the sum-energy iteration, and the max-min
iteration. SINR thresholds are enforced through the second-order cone

    Re{h_n^H w_n} >= sqrt(gamma_n) * ||(sigma_a, mu_n, cross terms)||,

with mu_n = sigma_c * t_n for splitting users (t_n * alpha_n >= 1 via a
3-dim cone) and mu_n = sigma_c for decode-only users. The sqrt(gamma)
factor is folded into the norm entries, which is algebraically identical to
keeping it outside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import SOC, ConicProgram, Nonneg, Zero
from .network import DesignPoint, NetworkInstance
from .surrogate import ALPHA_MAX, ALPHA_MIN, ExpansionPoint, minorant_coefficients


@dataclass(frozen=True)
class VariableLayout:
    """Offsets of every model quantity inside the flat real vector.

    Variables: N blocks of 2M reals (w, interleaved Re/Im), then alpha and t
    for each of the first n_eh users, then any program-specific extras
    (epigraph and slack scalars) appended in order.
    """

    num_antennas: int
    num_users: int
    n_eh: int
    extras: tuple[str, ...] = ()

    @property
    def w_len(self) -> int:
        return 2 * self.num_antennas * self.num_users

    @property
    def num_vars(self) -> int:
        return self._num_vars()

    def _num_vars(self) -> int:
        total = self.w_len + 2 * self.n_eh
        for name in self.extras:
            total += self.extra_size(name)
        return total

    def extra_size(self, name: str) -> int:
        return 1 if name in ("tau", "objective") else self.n_eh

    def w_slice(self, n: int) -> slice:
        return slice(2 * self.num_antennas * n, 2 * self.num_antennas * (n + 1))

    def alpha_index(self, n1: int) -> int:
        return self.w_len + n1

    def t_index(self, n1: int) -> int:
        return self.w_len + self.n_eh + n1

    def extra_index(self, name: str, k: int = 0) -> int:
        base = self.w_len + 2 * self.n_eh
        for label in self.extras:
            if label == name:
                return base + k
            base += self.extra_size(label)
        raise KeyError(name)

    # -- complex/real embedding helpers ------------------------------------

    def re_inner_row(self, g: np.ndarray, n: int) -> np.ndarray:
        """Row r with r @ x = Re{g^H w_n}."""
        row = np.zeros(self._num_vars())
        sl = self.w_slice(n)
        row[sl.start : sl.stop : 2] = g.real
        row[sl.start + 1 : sl.stop : 2] = g.imag
        return row

    def im_inner_row(self, g: np.ndarray, n: int) -> np.ndarray:
        """Row r with r @ x = Im{g^H w_n}."""
        row = np.zeros(self._num_vars())
        sl = self.w_slice(n)
        row[sl.start : sl.stop : 2] = -g.imag
        row[sl.start + 1 : sl.stop : 2] = g.real
        return row

    def pack(self, point: DesignPoint) -> np.ndarray:
        x = np.zeros(self._num_vars())
        for n in range(self.num_users):
            sl = self.w_slice(n)
            x[sl.start : sl.stop : 2] = point.w[n].real
            x[sl.start + 1 : sl.stop : 2] = point.w[n].imag
        for n1 in range(self.n_eh):
            x[self.alpha_index(n1)] = point.alpha[n1]
            x[self.t_index(n1)] = point.t[n1]
        return x

    def unpack(self, x: np.ndarray) -> DesignPoint:
        M, N = self.num_antennas, self.num_users
        w = np.empty((N, M), dtype=complex)
        for n in range(N):
            sl = self.w_slice(n)
            w[n] = x[sl.start : sl.stop : 2] + 1j * x[sl.start + 1 : sl.stop : 2]
        alpha = np.array([x[self.alpha_index(k)] for k in range(self.n_eh)])
        t = np.array([x[self.t_index(k)] for k in range(self.n_eh)])
        # solvers graze the open interval by O(tol); keep the point valid
        alpha = np.clip(alpha, 1e-9, 1.0 - 1e-9)
        return DesignPoint(w=w, alpha=alpha, t=t)


def _as_bounds(inst: NetworkInstance, alpha_bounds) -> tuple[np.ndarray, np.ndarray]:
    if alpha_bounds is None:
        alpha_bounds = (ALPHA_MIN, ALPHA_MAX)
    lo, hi = alpha_bounds
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (inst.n_eh,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (inst.n_eh,))
    if np.any(lo <= 0) or np.any(hi >= 1) or np.any(lo > hi):
        raise ValueError("alpha bounds must satisfy 0 < lo <= hi < 1")
    return lo, hi


def make_layout(inst: NetworkInstance, extras: tuple[str, ...] = ()) -> VariableLayout:
    return VariableLayout(
        num_antennas=inst.num_antennas,
        num_users=inst.num_users,
        n_eh=inst.n_eh,
        extras=extras,
    )


def build_sinr_soc(inst: NetworkInstance, layout: VariableLayout, n: int):
    """The decoding-threshold cone of user n: list of (A, b, cone) to add."""
    nv = layout._num_vars()
    sq = np.sqrt(inst.gamma_min[n])
    sigma_a = np.sqrt(inst.sigma_a_sq)
    sigma_c = np.sqrt(inst.sigma_c_sq)
    rows = [layout.re_inner_row(inst.h[n], n)]
    offs = [0.0]
    rows.append(np.zeros(nv))
    offs.append(sq * sigma_a)
    mu_row = np.zeros(nv)
    if n < inst.n_eh:
        mu_row[layout.t_index(n)] = sq * sigma_c
        offs.append(0.0)
    else:
        offs.append(sq * sigma_c)
    rows.append(mu_row)
    for eta in range(inst.num_users):
        if eta == n:
            continue
        rows.append(sq * layout.re_inner_row(inst.h[n], eta))
        offs.append(0.0)
        rows.append(sq * layout.im_inner_row(inst.h[n], eta))
        offs.append(0.0)
    A = np.vstack(rows)
    return [(A, np.array(offs), SOC(A.shape[0]))]


def _hyperbolic_soc(nv: int, u_row, u_off, v_row, v_off, rhs: float):
    """u * v >= rhs (u, v affine, rhs > 0) as the SOC (u+v, 2*sqrt(rhs), u-v)."""
    A = np.vstack([u_row + v_row, np.zeros(nv), u_row - v_row])
    b = np.array([u_off + v_off, 2.0 * np.sqrt(rhs), u_off - v_off])
    return A, b, SOC(3)


def _reciprocal_cone(layout: VariableLayout, i: int, j: int):
    """x_i * x_j >= 1 for two plain variables, as a 3-dim SOC."""
    nv = layout._num_vars()
    u = np.zeros(nv)
    u[i] = 1.0
    v = np.zeros(nv)
    v[j] = 1.0
    return _hyperbolic_soc(nv, u, 0.0, v, 0.0, 1.0)


def _add_common_cones(prog: ConicProgram, inst: NetworkInstance,
                      layout: VariableLayout, lo, hi):
    nv = layout._num_vars()
    for n in range(inst.num_users):
        for A, b, cone in build_sinr_soc(inst, layout, n):
            prog.add(A, b, cone)
    for n1 in range(inst.n_eh):
        A, b, cone = _reciprocal_cone(layout, layout.t_index(n1), layout.alpha_index(n1))
        prog.add(A, b, cone)
    # alpha box; pinned entries become equalities
    box_rows, box_offs = [], []
    for n1 in range(inst.n_eh):
        idx = layout.alpha_index(n1)
        if lo[n1] == hi[n1]:
            row = np.zeros((1, nv))
            row[0, idx] = 1.0
            prog.add(row, np.array([-lo[n1]]), Zero(1))
            continue
        row = np.zeros(nv)
        row[idx] = 1.0
        box_rows.extend([row, -row])
        box_offs.extend([-lo[n1], hi[n1]])
    if box_rows:
        prog.add(np.vstack(box_rows), np.array(box_offs), Nonneg(len(box_offs)))


def _w_norm_rows(layout: VariableLayout) -> np.ndarray:
    nv = layout._num_vars()
    rows = np.zeros((layout.w_len, nv))
    rows[:, : layout.w_len] = np.eye(layout.w_len)
    return rows


def build_init_program(inst: NetworkInstance, alpha_bounds=None):
    """Minimum-power feasibility program; compare tau*^2 against the budget."""
    layout = make_layout(inst, extras=("tau",))
    lo, hi = _as_bounds(inst, alpha_bounds)
    nv = layout._num_vars()
    obj = np.zeros(nv)
    obj[layout.extra_index("tau")] = -1.0  # maximize -tau == minimize power^(1/2)
    prog = ConicProgram(num_vars=nv, objective=obj)
    head = np.zeros((1, nv))
    head[0, layout.extra_index("tau")] = 1.0
    prog.add(np.vstack([head, _w_norm_rows(layout)]),
             np.zeros(1 + layout.w_len), SOC(1 + layout.w_len))
    _add_common_cones(prog, inst, layout, lo, hi)
    return prog, layout


def _add_power_budget(prog: ConicProgram, inst: NetworkInstance, layout: VariableLayout):
    nv = layout._num_vars()
    rows = np.vstack([np.zeros((1, nv)), _w_norm_rows(layout)])
    offs = np.zeros(1 + layout.w_len)
    offs[0] = np.sqrt(inst.power_budget)
    prog.add(rows, offs, SOC(1 + layout.w_len))


def _eh_epigraph_cones(prog: ConicProgram, layout: VariableLayout, n1: int):
    """beta <= 1 - alpha^2 and s * beta >= 1 for one splitting user."""
    nv = layout._num_vars()
    a_idx = layout.alpha_index(n1)
    b_idx = layout.extra_index("beta", n1)
    s_idx = layout.extra_index("s", n1)
    A = np.zeros((3, nv))
    A[0, b_idx] = -1.0
    A[1, a_idx] = 2.0
    A[2, b_idx] = 1.0
    prog.add(A, np.array([2.0, 0.0, 0.0]), SOC(3))
    A, b, cone = _reciprocal_cone(layout, s_idx, b_idx)
    prog.add(A, b, cone)


def _surrogate_objective_row(inst: NetworkInstance, layout: VariableLayout,
                             exp: ExpansionPoint, n1: int):
    """(row, offset) with row @ x + offset = zeta * minorant (s-relaxed)."""
    nv = layout._num_vars()
    coeff = minorant_coefficients(exp, inst, n1)
    zeta = inst.zeta[n1]
    row = np.zeros(nv)
    for eta in range(inst.num_users):
        row += zeta * layout.re_inner_row(coeff.w_forms[eta], eta)
    row[layout.extra_index("s", n1)] = -zeta * coeff.inverse_weight
    return row, zeta * coeff.constant


def build_sum_eh_program(exp: ExpansionPoint, inst: NetworkInstance, alpha_bounds=None):
    """One inner SOCP of the sum-energy ascent loop around the given iterate."""
    layout = make_layout(inst, extras=("s", "beta"))
    lo, hi = _as_bounds(inst, alpha_bounds)
    nv = layout._num_vars()
    obj = np.zeros(nv)
    offset = 0.0
    for n1 in range(inst.n_eh):
        row, const = _surrogate_objective_row(inst, layout, exp, n1)
        obj += row
        offset += const
    prog = ConicProgram(num_vars=nv, objective=obj, offset=offset)
    _add_power_budget(prog, inst, layout)
    _add_common_cones(prog, inst, layout, lo, hi)
    for n1 in range(inst.n_eh):
        _eh_epigraph_cones(prog, layout, n1)
    return prog, layout


def build_max_min_program(exp: ExpansionPoint, inst: NetworkInstance, alpha_bounds=None):
    """One inner SOCP of the max-min ascent loop: epigraph over per-user minorants."""
    layout = make_layout(inst, extras=("s", "beta", "objective"))
    lo, hi = _as_bounds(inst, alpha_bounds)
    nv = layout._num_vars()
    lam_idx = layout.extra_index("objective")
    obj = np.zeros(nv)
    obj[lam_idx] = 1.0
    prog = ConicProgram(num_vars=nv, objective=obj)
    rows, offs = [], []
    for n1 in range(inst.n_eh):
        row, const = _surrogate_objective_row(inst, layout, exp, n1)
        row[lam_idx] = -1.0
        rows.append(row)
        offs.append(const)
    prog.add(np.vstack(rows), np.array(offs), Nonneg(inst.n_eh))
    _add_power_budget(prog, inst, layout)
    _add_common_cones(prog, inst, layout, lo, hi)
    for n1 in range(inst.n_eh):
        _eh_epigraph_cones(prog, layout, n1)
    return prog, layout


def phase_align(inst: NetworkInstance, w: np.ndarray) -> np.ndarray:
    """Rotate each beamformer so h_n^H w_n is real nonnegative.

    A common phase per stream changes no magnitude in the model, but the
    threshold cones require the aligned representative.
    """
    out = w.copy()
    for n in range(inst.num_users):
        g = inst.h[n].conj() @ w[n]
        if abs(g) > 0:
            out[n] = w[n] * (g.conjugate() / abs(g))
    return out
