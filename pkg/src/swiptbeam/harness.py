"""Configuration-driven Monte-Carlo experiment runner.

Sweeps transmit power and SINR threshold over seeded channel realizations,
runs the selected ascent algorithm (optionally with an SDP baseline), and
emits one CSV row per (power, threshold, realization) triple plus
plot-ready aggregates. Records are independent and individually seeded, so
the output is identical regardless of worker count; failures are recorded
per row, never aborting the sweep.

dBm/watt conversions live here, at the boundary: the optimization core only
sees noise-normalized instances.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import baselines
from .algorithms import AlgoConfig, InfeasibleError, NumericalError, maximize_min_eh, maximize_sum_eh
from .channel import ChannelConfig, draw_channel
from .network import NetworkInstance

ALGORITHMS = ("sum-eh", "max-min")
BASELINES = ("none", "sdp-fixed-alpha", "bisection", "bb")


def dbm_to_watts(x: float) -> float:
    return 1e-3 * 10.0 ** (x / 10.0)


def watts_to_dbm(x: float) -> float:
    if x <= 0:
        return -np.inf
    return 10.0 * np.log10(x / 1e-3)


@dataclass(frozen=True)
class ExperimentConfig:
    num_antennas: int
    num_eh_users: int
    num_id_users: int
    distances_m: tuple[float, ...]
    power_dbm_sweep: tuple[float, ...]
    gamma_db_sweep: tuple[float, ...]
    realizations: int = 200
    master_seed: int = 0
    algorithm: str = "sum-eh"
    baseline: str = "none"
    carrier_freq_hz: float = 470e6
    antenna_gain_db: float = 10.0
    ref_distance_m: float = 2.0
    pathloss_exponent: float = 2.6
    rician_k_db: float = 10.0
    sigma_a_dbm: float = -90.0
    sigma_c_dbm: float = -90.0
    zeta: float = 0.5
    tol_converge: float = 1e-4
    max_outer_iters: int = 50
    tol_solve: float = 1e-8
    bisection_tol_lambda: float = 1e-3
    bb_gap_tol: float = 1e-2
    bb_node_budget: int = 500
    record_timings: bool = False
    output_path: str = "runs.csv"

    def __post_init__(self):
        object.__setattr__(self, "distances_m", tuple(float(d) for d in self.distances_m))
        object.__setattr__(self, "power_dbm_sweep", tuple(float(p) for p in self.power_dbm_sweep))
        object.__setattr__(self, "gamma_db_sweep", tuple(float(g) for g in self.gamma_db_sweep))
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.power_dbm_sweep or not self.gamma_db_sweep:
            raise ValueError("sweep lists must be nonempty")
        if len(self.distances_m) != self.num_eh_users + self.num_id_users:
            raise ValueError("need one distance per user")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.baseline not in BASELINES:
            raise ValueError(f"baseline must be one of {BASELINES}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def algo_config(self) -> AlgoConfig:
        return AlgoConfig(
            tol_converge=self.tol_converge,
            max_outer_iters=self.max_outer_iters,
            tol_solve=self.tol_solve,
        )

    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(
            carrier_freq_hz=self.carrier_freq_hz,
            antenna_gain_db=self.antenna_gain_db,
            ref_distance_m=self.ref_distance_m,
            pathloss_exponent=self.pathloss_exponent,
            rician_k_db=self.rician_k_db,
            num_antennas=self.num_antennas,
            distances_m=self.distances_m,
            seed=self.master_seed,
        )


RUN_RECORD_FIELDS = (
    "realization", "num_antennas", "num_eh_users", "num_id_users",
    "power_dbm", "gamma_db", "algorithm", "objective_dbm", "per_user_dbm",
    "outer_iterations", "solver_iterations", "status", "wall_ms",
    "baseline_value_dbm", "baseline_gap",
)


@dataclass
class RunRecord:
    realization: int
    num_antennas: int
    num_eh_users: int
    num_id_users: int
    power_dbm: float
    gamma_db: float
    algorithm: str
    objective_dbm: float = np.nan
    per_user_dbm: tuple[float, ...] = ()
    outer_iterations: int = 0
    solver_iterations: int = 0
    status: str = "optimal"
    wall_ms: float = np.nan
    baseline_value_dbm: float = np.nan
    baseline_gap: float = np.nan

    @property
    def succeeded(self) -> bool:
        return self.status in ("optimal", "degraded")


def make_instance(cfg: ExperimentConfig, power_dbm: float, gamma_db: float,
                  realization: int) -> NetworkInstance:
    h = draw_channel(cfg.channel_config(), realization).h
    return NetworkInstance.from_physical(
        h=h,
        n_eh=cfg.num_eh_users,
        sigma_a_sq=dbm_to_watts(cfg.sigma_a_dbm),
        sigma_c_sq=dbm_to_watts(cfg.sigma_c_dbm),
        zeta=cfg.zeta,
        gamma_min=10.0 ** (gamma_db / 10.0),
        power_budget=dbm_to_watts(power_dbm),
    )


def _run_baseline(cfg: ExperimentConfig, inst: NetworkInstance, point) -> float:
    """One baseline value in internal (noise-normalized) units."""
    if cfg.baseline == "sdp-fixed-alpha":
        sol = baselines.solve_relaxation_fixed_alpha(inst, point.alpha)
        return sol.objective
    if cfg.baseline == "bisection":
        res = baselines.bisection_max_min(inst, tol_lambda=cfg.bisection_tol_lambda)
        return res.upper_bound
    if cfg.baseline == "bb":
        res = baselines.bb_sum_eh(
            inst, gap_tol=cfg.bb_gap_tol, node_budget=cfg.bb_node_budget,
            algo_cfg=cfg.algo_config(),
        )
        return res.upper_bound
    raise ValueError(cfg.baseline)


def run_single(cfg: ExperimentConfig, power_dbm: float, gamma_db: float,
               realization: int) -> RunRecord:
    """One sweep cell; failures become the record's status, never raise."""
    rec = RunRecord(
        realization=realization,
        num_antennas=cfg.num_antennas,
        num_eh_users=cfg.num_eh_users,
        num_id_users=cfg.num_id_users,
        power_dbm=power_dbm,
        gamma_db=gamma_db,
        algorithm=cfg.algorithm,
    )
    try:
        inst = make_instance(cfg, power_dbm, gamma_db, realization)
        runner = maximize_sum_eh if cfg.algorithm == "sum-eh" else maximize_min_eh
        point, trace = runner(inst, cfg.algo_config())
        value = inst.sum_eh(point) if cfg.algorithm == "sum-eh" else inst.min_eh(point)
        rec.objective_dbm = watts_to_dbm(value * inst.scale)
        rec.per_user_dbm = tuple(
            watts_to_dbm(inst.harvested_energy(point, n1) * inst.scale)
            for n1 in range(inst.n_eh)
        )
        rec.outer_iterations = trace.outer_iterations
        rec.solver_iterations = trace.total_solver_iterations
        rec.status = "degraded" if trace.degraded else "optimal"
        rec.wall_ms = sum(r.wall_ms for r in trace.records)
        if cfg.baseline != "none":
            ub = _run_baseline(cfg, inst, point)
            rec.baseline_value_dbm = watts_to_dbm(ub * inst.scale)
            rec.baseline_gap = (ub - value) / max(ub, 1e-300)
    except InfeasibleError:
        rec.status = "infeasible"
    except (NumericalError, RuntimeError) as exc:
        rec.status = f"error:{type(exc).__name__}"
    return rec


def _run_cell(args):
    return run_single(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Full sweep x realization product, in deterministic record order."""
    cells = [
        (cfg, p, g, r)
        for p in cfg.power_dbm_sweep
        for g in cfg.gamma_db_sweep
        for r in range(cfg.realizations)
    ]
    if workers <= 1:
        return [run_single(*cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, cells, chunksize=4))


# -- CSV emission ------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        if np.isinf(value):
            return "-inf" if value < 0 else "inf"
        return f"{value:.9g}"
    return str(value)


def write_records_csv(records: Iterable[RunRecord], path: str,
                      record_timings: bool = False):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_RECORD_FIELDS)
        for rec in records:
            row = []
            for name in RUN_RECORD_FIELDS:
                if name == "per_user_dbm":
                    row.append(";".join(_fmt(v) for v in rec.per_user_dbm))
                elif name == "wall_ms" and not record_timings:
                    # timings are not reproducible; keep default output
                    # byte-identical across reruns
                    row.append("")
                else:
                    row.append(_fmt(getattr(rec, name)))
            writer.writerow(row)


def read_records_csv(path: str) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            per_user = tuple(
                float(v) for v in row["per_user_dbm"].split(";") if v
            )
            out.append(RunRecord(
                realization=int(row["realization"]),
                num_antennas=int(row["num_antennas"]),
                num_eh_users=int(row["num_eh_users"]),
                num_id_users=int(row["num_id_users"]),
                power_dbm=float(row["power_dbm"]),
                gamma_db=float(row["gamma_db"]),
                algorithm=row["algorithm"],
                objective_dbm=float(row["objective_dbm"]) if row["objective_dbm"] else np.nan,
                per_user_dbm=per_user,
                outer_iterations=int(row["outer_iterations"]),
                solver_iterations=int(row["solver_iterations"]),
                status=row["status"],
                wall_ms=float(row["wall_ms"]) if row["wall_ms"] else np.nan,
                baseline_value_dbm=float(row["baseline_value_dbm"]) if row["baseline_value_dbm"] else np.nan,
                baseline_gap=float(row["baseline_gap"]) if row["baseline_gap"] else np.nan,
            ))
    return out


# -- aggregation -------------------------------------------------------------

AGGREGATE_FIELDS = (
    "num_antennas", "power_dbm", "gamma_db", "algorithm", "records",
    "mean_dbm", "stderr_db", "mean_outer_iterations", "degraded_fraction",
    "mean_baseline_gap",
)


@dataclass(frozen=True)
class AggregateRow:
    num_antennas: int
    power_dbm: float
    gamma_db: float
    algorithm: str
    records: int
    mean_dbm: float
    stderr_db: float
    mean_outer_iterations: float
    degraded_fraction: float
    mean_baseline_gap: float


def aggregate(records: Iterable[RunRecord]) -> list[AggregateRow]:
    """Per (M, P, gamma, algorithm) cell: linear-domain mean converted to
    dBm, with the standard error mapped through the same log transform."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(
            (rec.num_antennas, rec.power_dbm, rec.gamma_db, rec.algorithm), []
        ).append(rec)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        ok = [r for r in recs if r.succeeded and np.isfinite(r.objective_dbm)]
        watts = np.array([dbm_to_watts(r.objective_dbm) for r in ok])
        if len(watts):
            mean_w = watts.mean()
            se_w = watts.std(ddof=1) / np.sqrt(len(watts)) if len(watts) > 1 else 0.0
            mean_dbm = watts_to_dbm(mean_w)
            stderr_db = 10.0 / np.log(10.0) * se_w / mean_w
        else:
            mean_dbm, stderr_db = np.nan, np.nan
        gaps = np.array([r.baseline_gap for r in ok if np.isfinite(r.baseline_gap)])
        rows.append(AggregateRow(
            num_antennas=key[0],
            power_dbm=key[1],
            gamma_db=key[2],
            algorithm=key[3],
            records=len(recs),
            mean_dbm=mean_dbm,
            stderr_db=stderr_db,
            mean_outer_iterations=float(np.mean([r.outer_iterations for r in ok])) if ok else np.nan,
            degraded_fraction=float(np.mean([r.status == "degraded" for r in recs])),
            mean_baseline_gap=float(gaps.mean()) if len(gaps) else np.nan,
        ))
    return rows


def write_aggregate_csv(rows: Iterable[AggregateRow], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_FIELDS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in AGGREGATE_FIELDS])
