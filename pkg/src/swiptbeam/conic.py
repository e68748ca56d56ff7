"""Language-neutral conic program representation.

A program is a linear objective (maximized) plus an ordered list of cone
memberships ``A x + b in K``, with K one of: zero, nonnegative orthant,
second-order cone, rotated second-order cone, or (optionally, for the SDP
baselines) the PSD cone over svec'd symmetric matrices. The embedded
interior-point solver consumes this form directly; :func:`certify`
recomputes feasibility and optimality residuals independently of solver
internals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_SQRT2 = np.sqrt(2.0)


# -- cones ---------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    dim: int


@dataclass(frozen=True)
class Nonneg:
    dim: int


@dataclass(frozen=True)
class SOC:
    """(u0, u1) with u0 >= ||u1||_2; dim >= 2."""

    dim: int


@dataclass(frozen=True)
class RotatedSOC:
    """(u0, u1, u2) with 2*u0*u1 >= ||u2||^2, u0 >= 0, u1 >= 0; dim >= 3."""

    dim: int


@dataclass(frozen=True)
class PSD:
    """svec'd symmetric matrix of the given side, PSD ordered."""

    side: int

    @property
    def dim(self) -> int:
        return self.side * (self.side + 1) // 2


Cone = Zero | Nonneg | SOC | RotatedSOC | PSD


_SVEC_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _svec_indices(side: int):
    """(rows, cols, scale) of the lower triangle in column-major order."""
    cached = _SVEC_CACHE.get(side)
    if cached is None:
        rows, cols = [], []
        for j in range(side):
            for i in range(j, side):
                rows.append(i)
                cols.append(j)
        rows = np.array(rows)
        cols = np.array(cols)
        scale = np.where(rows == cols, 1.0, _SQRT2)
        cached = (rows, cols, scale)
        _SVEC_CACHE[side] = cached
    return cached


def svec(mat: np.ndarray) -> np.ndarray:
    """Column-major lower-triangular vectorization, off-diagonals scaled by
    sqrt(2) so that <X, Y> = svec(X) . svec(Y)."""
    rows, cols, scale = _svec_indices(mat.shape[0])
    return mat[rows, cols] * scale


def smat(vec: np.ndarray, side: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    rows, cols, scale = _svec_indices(side)
    out = np.zeros((side, side))
    vals = vec / scale
    out[rows, cols] = vals
    out[cols, rows] = vals
    return out


def rotated_to_soc_map(dim: int) -> np.ndarray:
    """Orthogonal map T with: u in RotatedSOC(dim)  <=>  T u in SOC(dim)."""
    t = np.eye(dim)
    r = 1.0 / _SQRT2
    t[0, 0], t[0, 1] = r, r
    t[1, 0], t[1, 1] = r, -r
    return t


def cone_residual(v: np.ndarray, cone: Cone) -> float:
    """How far v is from membership (0 means inside, in the vector's units)."""
    v = np.asarray(v, dtype=float)
    if isinstance(cone, Zero):
        return float(np.abs(v).max(initial=0.0))
    if isinstance(cone, Nonneg):
        return float(max(0.0, -v.min(initial=0.0)))
    if isinstance(cone, SOC):
        return float(max(0.0, np.linalg.norm(v[1:]) - v[0]))
    if isinstance(cone, RotatedSOC):
        return cone_residual(rotated_to_soc_map(cone.dim) @ v, SOC(cone.dim))
    if isinstance(cone, PSD):
        eigs = np.linalg.eigvalsh(smat(v, cone.side))
        return float(max(0.0, -eigs.min(initial=0.0)))
    raise TypeError(f"unknown cone {cone!r}")


def dual_cone_residual(y: np.ndarray, cone: Cone) -> float:
    """Distance of a multiplier from the dual cone (Zero duals are free)."""
    if isinstance(cone, Zero):
        return 0.0
    return cone_residual(y, cone)  # remaining cones are self-dual


# -- program -------------------------------------------------------------


@dataclass(frozen=True)
class ConeConstraint:
    A: np.ndarray  # (cone.dim, num_vars)
    b: np.ndarray  # (cone.dim,)
    cone: Cone


@dataclass
class ConicProgram:
    """maximize objective . x + offset  s.t.  A_i x + b_i in K_i for all i."""

    num_vars: int
    objective: np.ndarray
    constraints: list[ConeConstraint] = field(default_factory=list)
    offset: float = 0.0

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise ValueError("objective length must equal num_vars")
        for i, con in enumerate(self.constraints):
            self._check_constraint(i, con)

    def _check_constraint(self, i: int, con: ConeConstraint):
        dim = con.cone.dim
        if isinstance(con.cone, SOC) and dim < 2:
            raise ValueError(f"constraint {i}: SOC dimension must be >= 2")
        if isinstance(con.cone, RotatedSOC) and dim < 3:
            raise ValueError(f"constraint {i}: rotated SOC dimension must be >= 3")
        if con.A.shape != (dim, self.num_vars):
            raise ValueError(
                f"constraint {i}: affine map is {con.A.shape}, cone wants "
                f"({dim}, {self.num_vars})"
            )
        if con.b.shape != (dim,):
            raise ValueError(f"constraint {i}: offset length {con.b.shape} != {dim}")
        if not (np.all(np.isfinite(con.A)) and np.all(np.isfinite(con.b))):
            raise ValueError(f"constraint {i}: non-finite data")

    def add(self, A, b, cone: Cone):
        con = ConeConstraint(
            A=np.asarray(A, dtype=float), b=np.asarray(b, dtype=float), cone=cone
        )
        self._check_constraint(len(self.constraints), con)
        self.constraints.append(con)

    @property
    def uses_psd(self) -> bool:
        return any(isinstance(c.cone, PSD) for c in self.constraints)

    def constraint_values(self, x: np.ndarray) -> list[np.ndarray]:
        return [con.A @ x + con.b for con in self.constraints]

    def dump(self, stream=None) -> str:
        """Plain-text problem dump for cross-checking against other solvers.

        Format: a VARS line, an OFFSET line, an OBJECTIVE line (maximize,
        one coefficient per variable), then one section per constraint with
        a CONE header and dim rows of ``b_r | A_r0 A_r1 ...``.
        """
        out = stream or io.StringIO()
        out.write(f"VARS {self.num_vars}\n")
        out.write(f"OFFSET {self.offset!r}\n")
        out.write("OBJECTIVE " + " ".join(repr(v) for v in self.objective) + "\n")
        for i, con in enumerate(self.constraints):
            tag = type(con.cone).__name__
            size = con.cone.side if isinstance(con.cone, PSD) else con.cone.dim
            out.write(f"CONE {i} {tag} {size}\n")
            for r in range(con.cone.dim):
                row = " ".join(repr(v) for v in con.A[r])
                out.write(f"{con.b[r]!r} | {row}\n")
        return out.getvalue() if stream is None else ""


# -- independent optimality check ----------------------------------------


@dataclass(frozen=True)
class CertifyReport:
    cone_residuals: np.ndarray       # primal membership violation per constraint
    dual_cone_residuals: np.ndarray  # multiplier membership violation
    stationarity: float              # ||objective + sum_i A_i' y_i||_inf
    gap: float                       # dual value - primal value (>= 0 at optimum)

    def max_violation(self) -> float:
        return float(max(
            self.cone_residuals.max(initial=0.0),
            self.dual_cone_residuals.max(initial=0.0),
            self.stationarity,
            abs(self.gap),
        ))


def certify(prog: ConicProgram, result) -> CertifyReport:
    """Recompute KKT residuals of a solution from scratch.

    Uses only (x, duals) from the result; any solver claiming optimality must
    survive this check. Multiplier convention: objective + sum A_i' y_i = 0
    with y_i in the dual cone; sum y_i . b_i then upper-bounds the optimum.
    """
    x = result.x
    cone_res = np.array([
        cone_residual(con.A @ x + con.b, con.cone) for con in prog.constraints
    ])
    dual_res = np.array([
        dual_cone_residual(y, con.cone)
        for con, y in zip(prog.constraints, result.duals)
    ])
    grad = prog.objective.copy()
    dual_value = 0.0
    for con, y in zip(prog.constraints, result.duals):
        grad += con.A.T @ y
        dual_value += float(con.b @ y)
    primal_value = float(prog.objective @ x)
    return CertifyReport(
        cone_residuals=cone_res,
        dual_cone_residuals=dual_res,
        stationarity=float(np.abs(grad).max(initial=0.0)),
        gap=dual_value - primal_value,
    )
