"""Acceptance suite: one test per exit criterion, one printed verdict each.

Hard criteria assert; soft (statistical, convention-dependent) criteria
print a [SOFT] report line and only assert their structural parts. Run with
``pytest tests/test_acceptance.py -s`` to see the per-criterion lines.
"""

import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from swiptbeam.algorithms import (
    AlgoConfig,
    InfeasibleError,
    maximize_min_eh,
    maximize_sum_eh,
)
from swiptbeam.baselines import (
    bb_sum_eh,
    bisection_max_min,
    solve_relaxation_fixed_alpha,
)
from swiptbeam.harness import (
    ExperimentConfig,
    aggregate,
    dbm_to_watts,
    make_instance,
    run_experiment,
)
from swiptbeam.ipm import SolverStatus, solve
from swiptbeam.network import NetworkInstance
from swiptbeam.surrogate import ExpansionPoint, minorant_value, perspective_bound

from conftest import random_instance
from conic_testlib import random_infeasible_program, random_known_program

WORKERS = 2


def _verdict(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def _soft(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'WITHIN BAND' if ok else 'OUT OF BAND'} [SOFT] {detail}")


# -- criterion 1: monotone ascent, feasible iterates ------------------------


def _criterion1_batch(arg):
    seed, count = arg
    rng = np.random.default_rng(seed)
    stats = dict(instances=0, infeasible=0, monotone_fail=0, residual_fail=0,
                 degraded=0, worst_residual=0.0)
    while stats["instances"] < count:
        k = stats["instances"] + stats["infeasible"]
        M = [4, 6, 8][k % 3]
        N = [2, 4, 6][(k // 3) % 3]
        inst = random_instance(
            rng, num_antennas=M, num_users=N, n_eh=max(1, N // 2),
            gamma_db=rng.uniform(5, 12), power=rng.uniform(0.5, 3),
            channel_scale=rng.uniform(15, 45),
        )
        try:
            results = [maximize_sum_eh(inst), maximize_min_eh(inst)]
        except InfeasibleError:
            stats["infeasible"] += 1
            continue
        stats["instances"] += 1
        for (point, trace), metric in zip(results, (inst.sum_eh, inst.min_eh)):
            slack = 1e-9 * max(1.0, abs(metric(point)))
            if not trace.is_monotone(slack):
                stats["monotone_fail"] += 1
            worst = min((r.worst_residual for r in trace.records), default=0.0)
            stats["worst_residual"] = min(stats["worst_residual"], worst)
            if worst < -1e-6:
                stats["residual_fail"] += 1
            if trace.degraded:
                stats["degraded"] += 1
    return stats


def test_criterion_1_monotone_ascent():
    t0 = time.time()
    per_worker = 500 // WORKERS
    with ProcessPoolExecutor(WORKERS) as pool:
        parts = list(pool.map(_criterion1_batch,
                              [(1000 + w, per_worker) for w in range(WORKERS)]))
    total = {k: sum(p[k] for p in parts) for k in parts[0] if k != "worst_residual"}
    worst = min(p["worst_residual"] for p in parts)
    elapsed = time.time() - t0
    ok = (total["monotone_fail"] == 0 and total["residual_fail"] == 0
          and total["degraded"] == 0 and total["instances"] == 500)
    _verdict(
        "1 monotone-ascent (hard)", ok,
        f"{total['instances']} instances x 2 algorithms, "
        f"{total['infeasible']} infeasible draws resampled, "
        f"worst residual {worst:.1e}, {elapsed:.0f}s",
    )
    assert ok
    assert elapsed < 300, f"runtime target 5 min exceeded: {elapsed:.0f}s"


# -- criterion 2: Lemma-1 suite ---------------------------------------------


def test_criterion_2_minorant_suite(rng):
    t0 = time.time()
    inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2)
    n_points, n_expansions = 10_000, 100
    # one shared batch of random candidate points, evaluated in bulk
    w_batch = (rng.standard_normal((n_points, 3, 4))
               + 1j * rng.standard_normal((n_points, 3, 4)))
    w_batch *= np.sqrt(inst.power_budget / np.sum(
        np.abs(w_batch) ** 2, axis=(1, 2)))[:, None, None]
    alpha_batch = rng.uniform(0.02, 0.98, size=(n_points, inst.n_eh))
    z = np.einsum("um,pnm->pun", inst.h[: inst.n_eh].conj(), w_batch)
    p_true = np.sum(np.abs(z) ** 2, axis=2) + inst.sigma_a_sq   # (points, n_eh)
    scale = float(p_true.max())

    violations = 0
    tight_err = 0.0
    for _ in range(n_expansions):
        k = rng.integers(n_points)
        exp = ExpansionPoint.at(inst, w_batch[k], alpha_batch[k])
        for n1 in range(inst.n_eh):
            c = 1.0 - exp.alpha_k[n1] ** 2
            affine = 2.0 * c * ((exp.a[n1].conj() * z[:, n1, :]).real.sum(axis=1)
                                + inst.sigma_a_sq)
            minorant = affine - exp.p_k[n1] * c**2 / (1.0 - alpha_batch[:, n1] ** 2)
            product = (1.0 - alpha_batch[:, n1] ** 2) * p_true[:, n1]
            violations += int(np.sum(minorant > product + 1e-9 * scale))
            # tightness at the expansion point itself
            at_exp = minorant_value(exp, inst, w_batch[k], alpha_batch[k][n1], n1)
            tight_err = max(tight_err, abs(at_exp - product[k]) / scale)

    zs = rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
    zbars = rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
    ys = rng.uniform(0.01, 10.0, 100_000)
    ybars = rng.uniform(0.01, 10.0, 100_000)
    bound = 2.0 * (np.conj(zbars) * zs).real / ybars - np.abs(zbars) ** 2 * ys / ybars**2
    persp_violations = int(np.sum(bound > np.abs(zs) ** 2 / ys + 1e-9))
    # spot-check the scalar entry point agrees with the vectorized formula
    assert perspective_bound(zs[0], zbars[0], ys[0], ybars[0]) == pytest.approx(bound[0])

    elapsed = time.time() - t0
    ok = violations == 0 and tight_err <= 1e-10 and persp_violations == 0
    _verdict(
        "2 minorant-suite (hard)", ok,
        f"{n_points}x{n_expansions} bound checks, tightness {tight_err:.1e}, "
        f"1e5 perspective checks, {elapsed:.0f}s",
    )
    assert ok
    assert elapsed < 30.0


# -- criterion 3: single-user closed form ------------------------------------


def test_criterion_3_single_user_oracle(rng):
    cfg = AlgoConfig(tol_converge=1e-7, max_outer_iters=100)
    checked, worst_alpha, worst_energy = 0, 0.0, 0.0
    while checked < 100:
        M = int(rng.integers(2, 8))
        h = rng.uniform(10, 50) * (rng.standard_normal(M)
                                   + 1j * rng.standard_normal(M)) / np.sqrt(2)
        inst = NetworkInstance(h=h.reshape(1, -1), n_eh=1, sigma_a_sq=1.0,
                               sigma_c_sq=rng.uniform(0.5, 2.0), zeta=0.5,
                               gamma_min=rng.uniform(2.0, 30.0),
                               power_budget=rng.uniform(0.5, 4.0))
        ph2 = inst.power_budget * np.linalg.norm(h) ** 2
        gamma = inst.gamma_min[0]
        alpha_sq = gamma * inst.sigma_c_sq / (ph2 - gamma * inst.sigma_a_sq)
        if not 5e-6 < alpha_sq < 0.9:
            continue
        energy = inst.zeta[0] * (1 - alpha_sq) * (ph2 + inst.sigma_a_sq)
        point, _ = maximize_sum_eh(inst, cfg)
        worst_alpha = max(worst_alpha,
                          abs(point.alpha[0] ** 2 - alpha_sq) / alpha_sq)
        worst_energy = max(worst_energy,
                           abs(inst.sum_eh(point) - energy) / energy)
        checked += 1
    ok = worst_alpha <= 1e-4 and worst_energy <= 1e-4
    _verdict("3 single-user-oracle (hard)", ok,
             f"100 instances, worst rel err: alpha^2 {worst_alpha:.1e}, "
             f"energy {worst_energy:.1e}")
    assert ok


# -- criterion 4 & 5: paper operating point, iteration counts ----------------


PAPER_VALUES = {6: -8.1, 7: -5.8, 8: -4.7}


@pytest.fixture(scope="module")
def paper_sweep():
    cells = {}
    for M in (6, 7, 8):
        cfg = ExperimentConfig(
            num_antennas=M, num_eh_users=3, num_id_users=3,
            distances_m=(7.0, 7.0, 7.0, 20.0, 20.0, 20.0),
            power_dbm_sweep=(26.0,) if M != 8 else (20.0, 26.0),
            gamma_db_sweep=(12.0,), realizations=500, master_seed=7,
        )
        records = run_experiment(cfg, workers=WORKERS)
        for row in aggregate(records):
            cells[(M, row.power_dbm)] = row
    return cells


def test_criterion_4_paper_figure_regression(paper_sweep):
    details = []
    within = True
    for M, target in PAPER_VALUES.items():
        row = paper_sweep[(M, 26.0)]
        delta = row.mean_dbm - target
        within &= abs(delta) <= 1.5
        details.append(f"M={M}: {row.mean_dbm:.2f} dBm vs {target} "
                       f"(delta {delta:+.2f} dB, se {row.stderr_db:.2f})")
    _soft("4a figure-values", within, "; ".join(details))

    # hard structural part: strictly increasing in M and in P at 2 SE
    means = {M: paper_sweep[(M, 26.0)] for M in (6, 7, 8)}
    mono_m = all(
        means[b].mean_dbm - means[a].mean_dbm
        > 2 * np.hypot(means[a].stderr_db, means[b].stderr_db)
        for a, b in ((6, 7), (7, 8))
    )
    low_p, high_p = paper_sweep[(8, 20.0)], paper_sweep[(8, 26.0)]
    mono_p = (high_p.mean_dbm - low_p.mean_dbm
              > 2 * np.hypot(low_p.stderr_db, high_p.stderr_db))
    ok = mono_m and mono_p
    _verdict("4b figure-monotonicity (hard)", ok,
             f"in M: {mono_m}, in P: {mono_p}")
    assert ok
    degraded = max(row.degraded_fraction for row in paper_sweep.values())
    assert degraded == 0.0, f"degraded fraction {degraded}"


def test_criterion_5_iteration_counts(paper_sweep):
    sum_iters = paper_sweep[(8, 26.0)].mean_outer_iterations
    cfg = ExperimentConfig(
        num_antennas=6, num_eh_users=3, num_id_users=3,
        distances_m=(7.0, 7.0, 7.0, 20.0, 20.0, 20.0),
        power_dbm_sweep=(26.0,), gamma_db_sweep=(12.0,),
        realizations=100, master_seed=17, algorithm="max-min",
    )
    rows = aggregate(run_experiment(cfg, workers=WORKERS))
    minmax_iters = rows[0].mean_outer_iterations
    ok = sum_iters <= 15 and minmax_iters <= 15
    _verdict("5 iteration-counts", ok,
             f"sum-EH mean {sum_iters:.1f} (paper 6.5), "
             f"max-min mean {minmax_iters:.1f} (paper 6.8), cap 15")
    assert ok


# -- criterion 6: global-optimality cross-checks ------------------------------


def _bb_case(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, num_antennas=3, num_users=2, n_eh=1,
                           gamma_db=float(rng.uniform(6, 12)),
                           power=float(rng.uniform(0.5, 3)),
                           channel_scale=float(rng.uniform(15, 40)))
    try:
        bb = bb_sum_eh(inst, gap_tol=1e-2, node_budget=300)
    except InfeasibleError:
        return None
    point, _ = maximize_sum_eh(inst)
    value = inst.sum_eh(point)
    return value >= (1 - 1e-2) * bb.upper_bound * (1 - 1e-9), bb.gap


def test_criterion_6_global_optimality():
    t0 = time.time()
    with ProcessPoolExecutor(WORKERS) as pool:
        outcomes = list(pool.map(_bb_case, range(3000, 3080)))
    outcomes = [o for o in outcomes if o is not None][:50]
    assert len(outcomes) == 50
    certified = sum(ok for ok, _ in outcomes)

    # paper-setting bisection cross-check for the max-min objective
    cfg = ExperimentConfig(
        num_antennas=6, num_eh_users=3, num_id_users=3,
        distances_m=(7.0, 7.0, 7.0, 9.0, 9.0, 9.0),
        power_dbm_sweep=(26.0,), gamma_db_sweep=(12.0,),
        realizations=1, master_seed=23, algorithm="max-min",
    )
    hits, solves = [], []
    for r in range(10):
        inst = make_instance(cfg, 26.0, 12.0, r)
        point, _ = maximize_min_eh(inst, cfg.algo_config())
        res = bisection_max_min(inst, tol_lambda=1e-3)
        hits.append(inst.min_eh(point) >= 0.99 * res.upper_bound)
        solves.append(res.feasibility_solves)
    bis_ok = sum(hits) >= 9
    ok = certified == 50 and bis_ok
    _verdict(
        "6 global-optimality (hard)", ok,
        f"BB certified {certified}/50 small instances; max-min within 1% of "
        f"bisection bound in {sum(hits)}/10 paper-setting realizations "
        f"(mean {np.mean(solves):.1f} SDP solves, paper 11.6), "
        f"{time.time()-t0:.0f}s",
    )
    assert ok


# -- criterion 7: rank statistics ---------------------------------------------


def test_criterion_7_rank_statistics():
    counts = {}
    for gamma_db in (12.0, 18.0):
        cfg = ExperimentConfig(
            num_antennas=6, num_eh_users=3, num_id_users=3,
            distances_m=(7.0, 7.0, 7.0, 20.0, 20.0, 20.0),
            power_dbm_sweep=(26.0,), gamma_db_sweep=(gamma_db,),
            realizations=1, master_seed=31,
        )
        rank_deficient = 0
        total = 30
        for r in range(total):
            inst = make_instance(cfg, 26.0, gamma_db, r)
            try:
                point, _ = maximize_sum_eh(inst, cfg.algo_config())
                sol = solve_relaxation_fixed_alpha(inst, point.alpha)
            except (InfeasibleError, RuntimeError):
                total -= 1
                continue
            if np.any(sol.eigen_ratios > 1e-4):
                rank_deficient += 1
        counts[gamma_db] = (rank_deficient, total)
    frac12 = counts[12.0][0] / counts[12.0][1]
    frac18 = counts[18.0][0] / counts[18.0][1]
    _soft("7 rank-statistics", 0.3 <= frac12 <= 0.7 and frac18 >= 0.8,
          f"rank>1 at 12 dB: {frac12:.0%} (paper ~50%), "
          f"at 18 dB: {frac18:.0%} (paper ~100%)")


# -- criterion 8: conic solver suite ------------------------------------------


def test_criterion_8_solver_suite(rng):
    t0 = time.time()
    worst = 0.0
    failures = 0
    from swiptbeam.conic import SOC, Nonneg
    for k in range(1000):
        cones = [SOC(int(rng.integers(2, 8))), Nonneg(int(rng.integers(1, 8)))]
        if k % 4 == 0:
            cones.append(SOC(int(rng.integers(2, 5))))
        prog, opt, _ = random_known_program(rng, n=10, cones=cones)
        res = solve(prog)
        if not res.optimal:
            failures += 1
            continue
        worst = max(worst, abs(res.objective - opt) / max(1.0, abs(opt)))
    slow_certificates = 0
    for _ in range(100):
        res = solve(random_infeasible_program(rng))
        if res.status is not SolverStatus.INFEASIBLE or res.iterations > 50:
            slow_certificates += 1
    ok = failures == 0 and worst <= 1e-6 and slow_certificates == 0
    _verdict(
        "8 conic-solver-suite (hard)", ok,
        f"1000 known-optimum programs, worst rel err {worst:.1e}; "
        f"100 infeasible certified <= 50 iters, {time.time()-t0:.0f}s",
    )
    assert ok
