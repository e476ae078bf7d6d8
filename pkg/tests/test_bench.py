"""Synthetic generation, the end-to-end pipeline, and benchmark aggregation."""

import dataclasses

import numpy as np
import pytest

from macreg import io
from macreg.bench import (
    ABLATION_ROWS,
    INDOOR_CRITERIA,
    KITTI_CRITERIA,
    MAC_N_LEVELS,
    CliqueMode,
    PairResult,
    RegistrationConfig,
    SuccessCriteria,
    SyntheticSpec,
    evaluate_batch,
    evaluate_dataset,
    generate_synthetic,
    max_workers,
    register,
    rmse_evaluate,
    summarize,
)
from macreg.correspondences import Correspondences
from macreg.geometry import random_rigid_transform, transform_errors
from macreg.graph import GraphOrder
from macreg.hypotheses import EvalParams, Metric, SvdMode


class TestGenerateSynthetic:
    def test_deterministic(self):
        spec = SyntheticSpec(20, 30, noise_sigma=0.5, seed=42)
        c1, t1, (s1, g1) = generate_synthetic(spec)
        c2, t2, (s2, g2) = generate_synthetic(spec)
        assert np.array_equal(c1.source, c2.source)
        assert np.array_equal(c1.target, c2.target)
        assert np.array_equal(t1.rotation, t2.rotation)
        assert np.array_equal(s1, s2) and np.array_equal(g1, g2)

    def test_seed_changes_data(self):
        a, _, _ = generate_synthetic(SyntheticSpec(20, 30, seed=0))
        b, _, _ = generate_synthetic(SyntheticSpec(20, 30, seed=1))
        assert not np.array_equal(a.source, b.source)

    def test_noise_free_inliers_match_ground_truth(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(25, 15, seed=3))
        res = np.linalg.norm(t_gt.apply(corrs.source) - corrs.target, axis=1)
        exact = int(np.count_nonzero(res < 1e-9))
        assert exact == 25  # every inlier, no outlier

    def test_extent_scales_cloud(self):
        corrs, _, _ = generate_synthetic(SyntheticSpec(30, 0, extent=5.0, seed=4))
        assert corrs.source.max() > 2.0
        assert corrs.source.min() >= 0.0
        assert corrs.source.max() <= 5.0

    def test_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(1, 1)
        with pytest.raises(ValueError):
            SyntheticSpec(5, 5, noise_sigma=-0.1)
        with pytest.raises(ValueError):
            SyntheticSpec(5, 5, extent=0.0)


class TestRegister:
    def test_recovers_pose_and_populates_report(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(30, 70, seed=5))
        rep = register(corrs, RegistrationConfig(), t_gt=t_gt, criteria=INDOOR_CRITERIA)
        assert rep.success
        assert rep.re_deg < 1.0 and rep.te < 0.05
        assert rep.correct_hypothesis_count >= 1
        assert rep.n_cliques > 0 and len(rep.hypotheses) > 0
        assert set(rep.stage_times) == {
            "graph_construction",
            "clique_search",
            "node_guided_selection",
            "pose_estimation",
        }
        assert rep.total_time_ms == pytest.approx(sum(rep.stage_times.values()))

    def test_deterministic(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(20, 40, noise_sigma=0.5, seed=6))
        r1 = register(corrs, RegistrationConfig(), t_gt=t_gt, criteria=INDOOR_CRITERIA)
        r2 = register(corrs, RegistrationConfig(), t_gt=t_gt, criteria=INDOOR_CRITERIA)
        assert np.array_equal(r1.best.transform.rotation, r2.best.transform.rotation)
        assert r1.best.score == r2.best.score
        assert r1.re_deg == r2.re_deg

    def test_capacity_overrun_reports_identity(self):
        rng = np.random.default_rng(7)
        corrs = Correspondences(rng.uniform(0, 1, (8001, 3)), rng.uniform(0, 1, (8001, 3)))
        rep = register(corrs, RegistrationConfig())
        assert not rep.success
        assert "cap" in rep.error
        assert np.array_equal(rep.best.transform.rotation, np.eye(3))

    def test_budget_overrun_reports_identity(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(20, 80, seed=8))
        rep = register(corrs, RegistrationConfig(clique_budget=1), t_gt=t_gt, criteria=INDOOR_CRITERIA)
        assert not rep.success
        assert "exceeded" in rep.error
        assert rep.re_deg is not None  # errors still reported vs identity

    def test_maximum_mode_single_hypothesis(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(30, 30, seed=9))
        rep = register(
            corrs,
            RegistrationConfig(clique_mode=CliqueMode.MAXIMUM),
            t_gt=t_gt,
            criteria=INDOOR_CRITERIA,
        )
        assert len(rep.hypotheses) == 1
        assert rep.success

    def test_pairwise_incompatible_cluster_fools_maximum_but_not_maximal(self):
        # A mirrored cluster preserves every pairwise distance, so it forms a
        # large clique, but no rigid transform fits it: the maximum-clique
        # shortcut yields a bad pose where scoring over all maximal cliques
        # recovers the true one.
        rng = np.random.default_rng(10)
        t_gt = random_rigid_transform(rng)
        src_in = rng.uniform(0, 0.5, (20, 3))
        mirror_src = rng.uniform(0, 5.0, (25, 3)) + [20.0, 0, 0]
        mirrored = mirror_src * [-1.0, 1.0, 1.0]  # reflection: distances kept
        src = np.vstack([src_in, mirror_src])
        tgt = np.vstack([t_gt.apply(src_in), mirrored + [0, 0, 50.0]])
        corrs = Correspondences(src, tgt)
        config = RegistrationConfig(graph_order=GraphOrder.FIRST_ORDER)
        rep_maximal = register(corrs, config, t_gt=t_gt, criteria=INDOOR_CRITERIA)
        rep_maximum = register(
            corrs,
            dataclasses.replace(config, clique_mode=CliqueMode.MAXIMUM),
            t_gt=t_gt,
            criteria=INDOOR_CRITERIA,
        )
        assert rep_maximal.success
        assert not rep_maximum.success

    def test_gc_prefilter_path(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(30, 30, seed=11))
        rep = register(
            corrs,
            RegistrationConfig(use_gc_prefilter=True),
            t_gt=t_gt,
            criteria=INDOOR_CRITERIA,
        )
        assert rep.success

    def test_weighted_svd_and_metric_variants(self):
        corrs, t_gt, _ = generate_synthetic(SyntheticSpec(30, 30, noise_sigma=0.5, seed=12))
        for metric in Metric:
            for mode in SvdMode:
                config = RegistrationConfig(
                    eval=EvalParams(metric=metric, svd_mode=mode)
                )
                rep = register(corrs, config, t_gt=t_gt, criteria=INDOOR_CRITERIA)
                assert rep.success, (metric, mode)

    def test_requires_three_correspondences(self):
        corrs = Correspondences([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [1, 0, 0]])
        with pytest.raises(ValueError):
            register(corrs, RegistrationConfig())


class TestSummarize:
    @staticmethod
    def _result(i, success, re_deg, te, correct):
        return PairResult(
            index=i, meta=str(i), success=success, re_deg=re_deg, te=te,
            score=1.0, correct_hypothesis_count=correct, total_time_ms=1.0,
        )

    def test_recall_and_means(self):
        results = [
            self._result(0, True, 1.0, 0.1, 5),
            self._result(1, False, 90.0, 2.0, 0),
            self._result(2, True, 3.0, 0.2, 1),
            self._result(3, False, None, None, None),  # parse-style failure
        ]
        s = summarize(results, INDOOR_CRITERIA)
        assert s.n_pairs == 4 and s.n_success == 2
        assert s.recall_pct == pytest.approx(50.0)
        assert s.mean_re_success == pytest.approx(2.0)
        assert s.mean_te_success == pytest.approx(0.15)
        assert s.mean_re_all == pytest.approx((1.0 + 90.0 + 3.0) / 3)
        assert s.mac_n_recall_pct[1] == pytest.approx(50.0)
        assert s.mac_n_recall_pct[5] == pytest.approx(25.0)
        assert set(s.mac_n_recall_pct) == set(MAC_N_LEVELS)

    def test_empty(self):
        s = summarize([], KITTI_CRITERIA)
        assert s.n_pairs == 0 and s.recall_pct == 0.0
        assert s.mean_re_success is None

    def test_mac1_bounds_plain_recall(self):
        # A successful pair always has at least one correct hypothesis, so
        # MAC-1 recall is an upper bound on plain recall.
        instances = [
            generate_synthetic(SyntheticSpec(20, 80, noise_sigma=0.5, seed=s))[:2]
            for s in range(10)
        ]
        _, summary = evaluate_batch(instances, RegistrationConfig(), INDOOR_CRITERIA)
        assert summary.mac_n_recall_pct[1] >= summary.recall_pct


class TestEvaluateDataset:
    @staticmethod
    def _write_pair(tmp_path, name, spec):
        corrs, t_gt, _ = generate_synthetic(spec)
        corr_path = tmp_path / f"{name}.corr.txt"
        gt_path = tmp_path / f"{name}.gt.txt"
        io.save_correspondences(corr_path, corrs)
        io.save_transform(gt_path, t_gt)
        return str(corr_path), str(gt_path), name

    def test_files_end_to_end(self, tmp_path):
        pairs = [
            self._write_pair(tmp_path, f"p{i}", SyntheticSpec(20, 30, seed=i))
            for i in range(3)
        ]
        results, summary = evaluate_dataset(pairs, RegistrationConfig(), INDOOR_CRITERIA)
        assert summary.n_pairs == 3
        assert summary.recall_pct == pytest.approx(100.0)
        assert [r.index for r in results] == [0, 1, 2]

    def test_parse_failures_count_unless_excluded(self, tmp_path):
        good = self._write_pair(tmp_path, "good", SyntheticSpec(20, 30, seed=0))
        bad_corr = tmp_path / "bad.txt"
        bad_corr.write_text("not numbers at all\n")
        pairs = [good, (str(bad_corr), good[1], "bad")]
        results, summary = evaluate_dataset(pairs, RegistrationConfig(), INDOOR_CRITERIA)
        assert summary.n_pairs == 2 and summary.n_success == 1
        assert results[1].parse_failed and results[1].error
        _, excl = evaluate_dataset(
            pairs, RegistrationConfig(), INDOOR_CRITERIA, exclude_parse_failures=True
        )
        assert excl.n_pairs == 1 and excl.recall_pct == pytest.approx(100.0)

    def test_parallel_matches_serial(self, tmp_path, monkeypatch):
        pairs = [
            self._write_pair(tmp_path, f"q{i}", SyntheticSpec(15, 25, seed=10 + i))
            for i in range(4)
        ]
        serial, _ = evaluate_dataset(pairs, RegistrationConfig(), INDOOR_CRITERIA)
        monkeypatch.setenv("MAC_THREADS", "2")
        parallel, _ = evaluate_dataset(pairs, RegistrationConfig(), INDOOR_CRITERIA)
        assert [(r.index, r.success, r.re_deg, r.score) for r in serial] == [
            (r.index, r.success, r.re_deg, r.score) for r in parallel
        ]

    def test_max_workers_validation(self, monkeypatch):
        monkeypatch.setenv("MAC_THREADS", "4")
        assert max_workers() == 4
        monkeypatch.setenv("MAC_THREADS", "zero")
        with pytest.raises(ValueError):
            max_workers()
        monkeypatch.setenv("MAC_THREADS", "0")
        with pytest.raises(ValueError):
            max_workers()
        monkeypatch.delenv("MAC_THREADS")
        assert max_workers() == 1


class TestAblationPresets:
    def test_all_rows_present(self):
        assert list(ABLATION_ROWS) == [str(i) for i in range(1, 15)]
        base = ABLATION_ROWS["1"][1]
        assert base.eval.metric is Metric.INLIER_COUNT
        assert ABLATION_ROWS["2"][1].use_gc_prefilter
        assert ABLATION_ROWS["3"][1].graph_order is GraphOrder.FIRST_ORDER
        assert not ABLATION_ROWS["4"][1].use_node_guided
        assert ABLATION_ROWS["5"][1].eval.svd_mode is SvdMode.WEIGHTED
        assert ABLATION_ROWS["6"][1].eval.metric is Metric.MAE
        assert ABLATION_ROWS["7"][1].eval.metric is Metric.MSE
        assert ABLATION_ROWS["8"][1].filter.use_normal_consistency
        assert ABLATION_ROWS["9"][1].clique_mode is CliqueMode.MAXIMUM
        for row, k in zip(("10", "11", "12", "13", "14"), (100, 200, 500, 1000, 2000)):
            assert ABLATION_ROWS[row][1].filter.top_k == k


class TestRmseEvaluate:
    def test_perfect_registration_passes_all_thresholds(self):
        corrs, t_gt, (source, _) = generate_synthetic(SyntheticSpec(30, 20, seed=13))
        flags, rmse_pr = rmse_evaluate(
            corrs, t_gt, source, RegistrationConfig(), [0.2, 2.0, 5.0]
        )
        assert rmse_pr < 0.2
        assert flags == [True, True, True]

    def test_thresholds_split_on_imperfect_pose(self):
        corrs, t_gt, (source, _) = generate_synthetic(
            SyntheticSpec(20, 30, noise_sigma=2.0, seed=14)
        )
        flags, rmse_pr = rmse_evaluate(
            corrs, t_gt, source, RegistrationConfig(), [0.0, 1e9]
        )
        assert rmse_pr > 0.0
        assert flags == [False, True]


class TestSuccessCriteria:
    def test_presets(self):
        assert INDOOR_CRITERIA == SuccessCriteria(15.0, 0.30)
        assert KITTI_CRITERIA == SuccessCriteria(5.0, 0.60)
        with pytest.raises(ValueError):
            SuccessCriteria(0.0, 1.0)
