import dataclasses

import numpy as np
import pytest

import marcrelay.oracles as oracles
from marcrelay.channel import ChannelSet, PowerBudget, load_channels, sample_rayleigh
from marcrelay.exceptions import GridTooLargeError, StepOutOfRangeError
from marcrelay.oracles import (OracleReport, check_lemma1, check_lemma2, check_theorem3,
                               dump_violation, kkt_residual, random_feasible_joint_search,
                               run_suite, shared_eigenvector_instance, simplex_grid,
                               tau_grid_search, theorem3_on)
from marcrelay.tdma_relaying import optimal_time_slots


class TestReport:
    def test_record_counts_and_details(self):
        r = OracleReport("x")
        r.record([0.5, -1.0, 1e-12, -1e-12], 1e-9, lambda i: {"i2": 2 * i})
        assert r.trials == 4 and r.violations == 1
        assert r.worst_gap == -1.0
        assert r.details == [{"index": 1, "gap": -1.0, "i2": 2}]
        assert not r.passed
        assert "violations=1" in r.summary()

    def test_empty_passes(self):
        assert OracleReport("x").passed


class TestRandomSearch:
    @pytest.mark.parametrize("seed", range(3))
    def test_no_violations(self, seed):
        c = sample_rayleigh(2, 2, 2, seed)
        r = random_feasible_joint_search(c, PowerBudget([1.0, 2.0], 10.0), 10_000, seed)
        assert r.passed, r.summary()
        assert r.trials > 2 * 10_000
        assert abs(r.info["rank_one_gap"]) <= 1e-9
        assert r.info["scaled_identity_gap"] >= -1e-9

    def test_detects_a_wrong_closed_form(self, monkeypatch):
        real = oracles.joint_sum_rate

        def understated(c, p):
            sol = real(c, p)
            return dataclasses.replace(sol, sum_rate=0.5 * sol.sum_rate)

        monkeypatch.setattr(oracles, "joint_sum_rate", understated)
        c = sample_rayleigh(2, 2, 2, 0)
        r = random_feasible_joint_search(c, PowerBudget([1.0, 2.0], 10.0), 2000, 0)
        assert r.violations > 0

    def test_rejects_empty_population(self):
        c = sample_rayleigh(1, 1, 1, 0)
        with pytest.raises(ValueError):
            random_feasible_joint_search(c, PowerBudget([1.0], 1.0), 0, 0)

    def test_deterministic(self):
        c = sample_rayleigh(2, 2, 3, 5)
        p = PowerBudget([1.0, 1.0], 4.0)
        a = random_feasible_joint_search(c, p, 500, 7)
        b = random_feasible_joint_search(c, p, 500, 7)
        assert a.worst_gap == b.worst_gap


class TestGrid:
    @pytest.mark.parametrize("K,res", [(1, 10), (2, 10), (3, 12), (4, 10)])
    def test_simplex_grid(self, K, res):
        g = simplex_grid(K, res)
        from math import comb
        assert g.shape == (comb(res + K - 1, K - 1), K)
        np.testing.assert_allclose(g.sum(axis=1), 1.0)
        assert np.all(g >= 0)
        assert len({tuple(np.round(row * res).astype(int)) for row in g}) == len(g)

    def test_symmetric_users_peak_at_half(self):
        H = np.array([[1.0 + 1j]])
        c = ChannelSet((H, H), np.ones(1))
        r = tau_grid_search(c, PowerBudget([2.0, 2.0], 10.0), 200)
        assert r.passed
        assert r.info["best_grid_tau"] == [0.5, 0.5]
        assert r.info["distance"] == 0.0

    def test_single_user(self):
        r = tau_grid_search(sample_rayleigh(1, 2, 2, 0), PowerBudget([1.0], 3.0), 50)
        assert r.passed and r.trials == 1

    @pytest.mark.parametrize("seed", range(3))
    def test_three_users(self, seed):
        c = sample_rayleigh(3, 2, 2, seed)
        r = tau_grid_search(c, PowerBudget([1.0, 2.0, 3.0], 10.0), 200)
        assert r.passed, r.summary()
        assert r.info["distance"] <= 1.0 / 200 + 1e-12
        assert r.info["interior"]

    def test_too_many_users(self):
        with pytest.raises(GridTooLargeError):
            tau_grid_search(sample_rayleigh(5, 1, 1, 0), PowerBudget.uniform(5, 1, 1), 20)

    def test_coarse_resolution_rejected(self):
        with pytest.raises(ValueError):
            tau_grid_search(sample_rayleigh(2, 1, 1, 0), PowerBudget.uniform(2, 1, 1), 5)


class TestKkt:
    def test_symmetric_optimum(self):
        H = np.array([[0.7 - 0.2j]])
        c = ChannelSet((H, H), np.ones(1))
        assert kkt_residual(c, PowerBudget([1.0, 1.0], 5.0), [0.5, 0.5]) < 1e-7

    def test_far_from_optimum(self):
        c = ChannelSet((np.array([[np.sqrt(3.0)]]), np.array([[1.0]])), np.ones(1))
        assert kkt_residual(c, PowerBudget([1.0, 1.0], 10.0), [0.25, 0.75]) > 1e-3

    @pytest.mark.parametrize("seed", range(5))
    def test_optimal_slots_are_stationary(self, seed):
        c = sample_rayleigh(4, 3, 3, seed)
        p = PowerBudget([1.0, 2.0, 3.0, 4.0], 20.0)
        assert kkt_residual(c, p, optimal_time_slots(c, p)) < 1e-5

    def test_step_out_of_range(self):
        c = sample_rayleigh(2, 1, 1, 0)
        with pytest.raises(StepOutOfRangeError):
            kkt_residual(c, PowerBudget.uniform(2, 1, 1), [1.0, 0.0])


class TestMatrixInequalities:
    def test_lemma1_trials(self):
        r = check_lemma1(10_000, 5, 0)
        assert r.passed and r.trials == 10_000
        assert r.worst_gap >= -1e-10

    def test_lemma1_identity_shift(self):
        r = check_lemma1(1, 4, 3)
        assert abs(r.info["shift_gap"]) <= 1e-10

    def test_lemma1_equality_when_increment_vanishes(self):
        from marcrelay.matrix_core import eig_max
        rng = np.random.default_rng(0)
        X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        B = X @ X.conj().T
        assert eig_max(B + 0 * B)[0] - eig_max(B)[0] == 0.0

    def test_lemma2_trials(self):
        r = check_lemma2(10_000, (3, 5), 0)
        assert r.passed and r.trials == 20_000

    def test_lemma2_scaled_identity(self):
        from marcrelay.matrix_core import is_psd
        rng = np.random.default_rng(1)
        A = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        P = 2.0 * np.eye(4) / 4
        assert is_psd(2.0 * A @ A.conj().T - A @ P @ A.conj().T)

    def test_lemma2_tight_for_rank_one(self):
        # all power on one input: the difference has a zero eigenvalue
        rng = np.random.default_rng(2)
        A = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        budget = 3.0
        P = np.zeros((3, 3))
        P[0, 0] = budget
        diff = budget * A @ A.conj().T - A @ P @ A.conj().T
        w = np.linalg.eigvalsh(diff)
        assert w[0] >= -1e-9
        assert abs(w[0]) < 1e-9 * np.abs(w).max()

    def test_deterministic(self):
        assert check_lemma2(50, (3, 3), 9).worst_gap == check_lemma2(50, (3, 3), 9).worst_gap


class TestOrderingCheck:
    def test_shared_eigenvector_witness(self):
        c = shared_eigenvector_instance(4, 3, 0, M=2)
        r = theorem3_on([c], PowerBudget.uniform(4, 10.0, 100.0))
        assert r.passed
        assert r.info["max_abs_gap"] < 1e-9
        assert r.info["strict"] == 0

    def test_single_user_has_no_gap(self):
        r = check_theorem3(20, (1, 3, 3), PowerBudget([5.0], 50.0), 0)
        assert r.passed and r.info["strict"] == 0
        assert r.info["max_abs_gap"] < 1e-9

    def test_random_instances_strict(self):
        r = check_theorem3(50, (8, 4, 4), PowerBudget.uniform(8, 10.0, 100.0), 0)
        assert r.passed and r.trials == 50
        assert r.info["strict"] == 50
        assert r.info["worst_eig_gap"] > 0

    def test_violation_carries_channel(self, monkeypatch):
        real = oracles.tdma_sum_rate

        def halved(c, p):
            sol = real(c, p)
            return dataclasses.replace(sol, sum_rate=0.5 * sol.sum_rate)

        monkeypatch.setattr(oracles, "tdma_sum_rate", halved)
        r = check_theorem3(3, (3, 2, 2), PowerBudget.uniform(3, 10.0, 100.0), 0)
        assert r.violations == 3
        assert all(isinstance(d["channels"], ChannelSet) for d in r.details)


def test_dump_violation_round_trip(tmp_path):
    c = sample_rayleigh(2, (1, 3), 2, 4)
    path = tmp_path / "v.txt"
    dump_violation(c, path, "gap=-1")
    text = path.read_text()
    assert text.startswith("# violation")
    assert load_channels(path) == c


class TestRunSuite:
    def test_all_small(self):
        reports = run_suite("all", 50, 1)
        names = [r.name for r in reports]
        assert names == ["lemma1", "lemma2", "theorem1", "theorem2_grid", "theorem2_kkt",
                         "theorem3", "theorem3_witness"]
        assert all(r.passed for r in reports), [r.summary() for r in reports]

    def test_deterministic(self):
        a = [r.summary() for r in run_suite("lemmas", 100, 3)]
        b = [r.summary() for r in run_suite("lemmas", 100, 3)]
        assert a == b

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("theorem9", 10, 0)
