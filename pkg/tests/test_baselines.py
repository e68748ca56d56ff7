import numpy as np
import pytest

import swiptbeam.ipm as ipm
from swiptbeam.algorithms import AlgoConfig, maximize_min_eh, maximize_sum_eh
from swiptbeam.baselines import (
    BisectionResult,
    RankDeficient,
    _HermitianVars,
    _maxmin_feasibility,
    bb_sum_eh,
    bisection_max_min,
    outer_product_dimension,
    rank_one_extract,
    solve_box_relaxation,
    solve_relaxation_fixed_alpha,
    OuterProductSolution,
)
from swiptbeam.conic import smat
from swiptbeam.ipm import PsdCapabilityError
from swiptbeam.network import NetworkInstance
from swiptbeam.surrogate import ALPHA_MAX, ALPHA_MIN

from conftest import random_instance


def single_user_instance(rng, num_antennas=4, gamma=10.0, power=2.0):
    h = 30.0 * (rng.standard_normal(num_antennas)
                + 1j * rng.standard_normal(num_antennas)) / np.sqrt(2)
    return NetworkInstance(h=h.reshape(1, -1), n_eh=1, sigma_a_sq=1.0,
                           sigma_c_sq=1.0, zeta=0.5, gamma_min=gamma,
                           power_budget=power)


class TestHermitianEmbedding:
    def test_quadratic_form_row(self, rng):
        hv = _HermitianVars(num_users=2, num_antennas=3)
        x = rng.standard_normal(hv.num_vars)
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        for n in range(2):
            W = hv.extract(x, n)
            assert np.allclose(W, W.conj().T)
            direct = (h.conj() @ W @ h).real
            assert hv.quadratic_form_row(h, n) @ x == pytest.approx(direct)

    def test_trace_row(self, rng):
        hv = _HermitianVars(num_users=2, num_antennas=4)
        x = rng.standard_normal(hv.num_vars)
        assert hv.trace_row(1) @ x == pytest.approx(np.trace(hv.extract(x, 1)).real)

    def test_psd_embedding_eigenvalues(self, rng):
        # [[X, -Y], [Y, X]] has each eigenvalue of W twice
        hv = _HermitianVars(num_users=1, num_antennas=3)
        x = rng.standard_normal(hv.num_vars)
        W = hv.extract(x, 0)
        S = smat(hv.psd_embedding(0) @ x, 6)
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(S)),
            np.sort(np.repeat(np.linalg.eigvalsh(W), 2)),
            atol=1e-10,
        )

    def test_dimension_bookkeeping_matches_paper_counts(self):
        assert [outer_product_dimension(m, 6) for m in (6, 7, 8)] == [126, 168, 216]


class TestFixedAlphaRelaxation:
    def test_single_user_tight_and_rank_one(self, rng):
        inst = single_user_instance(rng)
        ph2 = inst.power_budget * np.linalg.norm(inst.h) ** 2
        alpha_sq = 10.0 / (ph2 - 10.0)
        sol = solve_relaxation_fixed_alpha(inst, np.sqrt(alpha_sq))
        expected = 0.5 * (1 - alpha_sq) * (ph2 + 1.0)
        assert sol.objective == pytest.approx(expected, rel=1e-5)
        assert sol.eigen_ratios[0] <= 1e-6
        # W = P h h^H / ||h||^2
        W = sol.W[0]
        target = inst.power_budget * np.outer(inst.h[0], inst.h[0].conj()) \
            / np.linalg.norm(inst.h) ** 2
        assert np.abs(W - target).max() <= 1e-5 * np.abs(target).max()

    def test_trace_within_budget(self, rng):
        inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                               gamma_db=8.0)
        sol = solve_relaxation_fixed_alpha(inst, np.full(2, 0.4))
        total = sum(np.trace(W).real for W in sol.W)
        assert total <= inst.power_budget * (1 + 1e-6)

    def test_matrices_psd_within_tolerance(self, rng):
        inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                               gamma_db=8.0)
        sol = solve_relaxation_fixed_alpha(inst, np.full(2, 0.4))
        for W in sol.W:
            floor = np.linalg.eigvalsh(W).min()
            assert floor >= -1e-8 * max(1.0, np.trace(W).real)

    def test_dominates_feasible_designs_at_same_alpha(self, rng):
        # frozen-ratio ascent runs against the relaxation on 100 instances
        for k in range(100):
            inst = random_instance(rng, num_antennas=3, num_users=2, n_eh=1,
                                   gamma_db=float(rng.uniform(4, 10)),
                                   channel_scale=float(rng.uniform(15, 40)))
            alpha = np.full(1, float(rng.uniform(0.15, 0.85)))
            point, _ = maximize_sum_eh(inst, alpha_bounds=(alpha, alpha))
            sol = solve_relaxation_fixed_alpha(inst, alpha)
            assert sol.objective >= inst.sum_eh(point) * (1 - 1e-5), k

    def test_capability_error_when_psd_disabled(self, rng, monkeypatch):
        inst = single_user_instance(rng)
        monkeypatch.setattr(ipm, "PSD_CAPABILITY", False)
        with pytest.raises(PsdCapabilityError):
            solve_relaxation_fixed_alpha(inst, 0.5)


class TestBoxRelaxation:
    def test_bounds_every_alpha_in_box(self, rng):
        inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                               gamma_db=8.0)
        box = solve_box_relaxation(inst, 0.2, 0.8)
        for alpha in (0.2, 0.5, 0.8):
            fixed = solve_relaxation_fixed_alpha(inst, np.full(2, alpha))
            assert box.objective >= fixed.objective * (1 - 1e-5)

    def test_shrinking_box_tightens(self, rng):
        inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                               gamma_db=8.0)
        wide = solve_box_relaxation(inst, ALPHA_MIN, ALPHA_MAX)
        narrow = solve_box_relaxation(inst, 0.3, 0.6)
        assert narrow.objective <= wide.objective * (1 + 1e-6)


class TestBisection:
    def test_single_user_matches_closed_form(self, rng):
        inst = single_user_instance(rng)
        ph2 = inst.power_budget * np.linalg.norm(inst.h) ** 2
        alpha_sq = 10.0 / (ph2 - 10.0)
        energy = 0.5 * (1 - alpha_sq) * (ph2 + 1.0)
        res = bisection_max_min(inst, tol_lambda=1e-4)
        assert res.upper_bound == pytest.approx(energy, rel=1e-3)

    def test_upper_bounds_path_following(self, rng):
        for _ in range(3):
            inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                                   gamma_db=8.0)
            res = bisection_max_min(inst, tol_lambda=1e-3)
            point, _ = maximize_min_eh(inst)
            value = inst.min_eh(point)
            assert res.upper_bound >= value * (1 - 1e-5)

    def test_feasibility_monotone_in_level(self, rng):
        inst = random_instance(rng, num_antennas=4, num_users=3, n_eh=2,
                               gamma_db=8.0)
        res = bisection_max_min(inst, tol_lambda=1e-3)
        lam = res.upper_bound
        for frac in (0.05, 0.3, 0.6, 0.9):
            assert _maxmin_feasibility(inst, frac * lam * (1 - 2e-3), 1e-6) is not None
        assert _maxmin_feasibility(inst, 1.5 * lam, 1e-6) is None

    def test_counts_solves(self, rng):
        inst = single_user_instance(rng)
        res = bisection_max_min(inst, tol_lambda=1e-3)
        assert 5 <= res.feasibility_solves <= 20


class TestBranchAndBound:
    def test_certifies_small_instances(self, rng):
        for _ in range(3):
            inst = random_instance(rng, num_antennas=3, num_users=2, n_eh=1,
                                   gamma_db=10.0, channel_scale=25.0)
            bb = bb_sum_eh(inst, gap_tol=1e-2, node_budget=200)
            assert bb.incumbent_value <= bb.upper_bound * (1 + 1e-9)
            assert bb.gap <= 1e-2 + 1e-12
            assert not bb.budget_exhausted
            point, _ = maximize_sum_eh(inst, AlgoConfig())
            assert inst.sum_eh(point) >= (1 - 1e-2) * bb.upper_bound * (1 - 1e-9)

    def test_budget_exhaustion_flag(self, rng):
        inst = random_instance(rng, num_antennas=3, num_users=2, n_eh=1,
                               gamma_db=10.0)
        bb = bb_sum_eh(inst, gap_tol=1e-9, node_budget=4)
        assert bb.budget_exhausted
        assert bb.incumbent_value <= bb.upper_bound


class TestRankOneExtract:
    def test_exact_rank_one_input(self, rng):
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        sol = OuterProductSolution(
            W=[np.outer(h, h.conj())], alpha=np.array([0.5]),
            eigen_ratios=np.array([0.0]), objective=1.0, solver_iterations=0,
        )
        point = rank_one_extract(sol)
        W_back = np.outer(point.w[0], point.w[0].conj())
        assert np.abs(W_back - sol.W[0]).max() <= 1e-10 * np.abs(h).max() ** 2

    def test_isotropic_matrix_rejected(self):
        sol = OuterProductSolution(
            W=[np.eye(3, dtype=complex)], alpha=np.array([0.5]),
            eigen_ratios=np.array([1.0]), objective=1.0, solver_iterations=0,
        )
        with pytest.raises(RankDeficient) as err:
            rank_one_extract(sol)
        assert err.value.ratios[0] == pytest.approx(1.0)

    def test_extracted_point_feasible_when_relaxation_tight(self, rng):
        inst = single_user_instance(rng)
        ph2 = inst.power_budget * np.linalg.norm(inst.h) ** 2
        alpha = np.sqrt(10.0 / (ph2 - 10.0))
        sol = solve_relaxation_fixed_alpha(inst, alpha)
        point = rank_one_extract(sol, tol_rank=1e-4)
        report = inst.constraint_residuals(point)
        assert report.power >= -1e-5 * inst.power_budget
        assert np.all(report.sinr >= -1e-5 * inst.gamma_min)
