"""Synthetic data generation, end-to-end registration, and benchmark
aggregation (recall, RE/TE, RMSE, hypothesis-quality counts)."""

from __future__ import annotations

import enum
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import cliques as cq
from . import graph as gr
from . import hypotheses as hy
from .correspondences import Correspondences
from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    DegenerateInput,
    FileFormatError,
    NoClique,
)
from .geometry import (
    RigidTransform,
    random_rotation,
    rmse_alignment,
    transform_errors,
)

STAGE_NAMES = (
    "graph_construction",
    "clique_search",
    "node_guided_selection",
    "pose_estimation",
)


class CliqueMode(enum.Enum):
    MAXIMAL = "maximal"
    MAXIMUM = "maximum"


@dataclass(frozen=True)
class SuccessCriteria:
    re_thresh_deg: float
    te_thresh: float

    def __post_init__(self):
        if self.re_thresh_deg <= 0 or self.te_thresh <= 0:
            raise ValueError("thresholds must be positive")


# Indoor-scene and KITTI-style success thresholds (degrees, meters).
INDOOR_CRITERIA = SuccessCriteria(15.0, 0.30)
KITTI_CRITERIA = SuccessCriteria(5.0, 0.60)


@dataclass(frozen=True)
class RegistrationConfig:
    graph: gr.GraphParams = field(default_factory=gr.GraphParams)
    filter: cq.CliqueFilterParams = field(default_factory=cq.CliqueFilterParams)
    eval: hy.EvalParams = field(default_factory=hy.EvalParams)
    graph_order: gr.GraphOrder = gr.GraphOrder.SECOND_ORDER
    use_gc_prefilter: bool = False
    clique_mode: CliqueMode = CliqueMode.MAXIMAL
    use_node_guided: bool = True
    clique_budget: int = cq.DEFAULT_CLIQUE_BUDGET


@dataclass(frozen=True)
class SyntheticSpec:
    """Desk-scale synthetic registration instance.

    noise_sigma is in pr units of the generated source cloud; extent is the
    side of the bounding cube in length units.
    """

    n_inliers: int
    n_outliers: int
    noise_sigma: float = 0.0
    extent: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_inliers + self.n_outliers < 3:
            raise ValueError("need at least 3 correspondences")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.extent <= 0:
            raise ValueError("extent must be positive")


@dataclass
class RegistrationReport:
    best: hy.Hypothesis
    success: bool
    stage_times: dict[str, float]
    hypotheses: list[hy.Hypothesis] = field(default_factory=list)
    re_deg: float | None = None
    te: float | None = None
    correct_hypothesis_count: int | None = None
    n_cliques: int = 0
    error: str | None = None

    @property
    def total_time_ms(self) -> float:
        return sum(self.stage_times.values())


def generate_synthetic(spec: SyntheticSpec):
    """Seeded synthetic correspondence set with ground truth.

    Returns (corrs, t_gt, (source_cloud, target_cloud)). Inlier targets are
    the rigidly transformed sources plus isotropic Gaussian noise of
    noise_sigma * pr; outliers pair independently drawn points.
    """
    rng = np.random.default_rng(spec.seed)
    e = spec.extent
    n_in, n_out = spec.n_inliers, spec.n_outliers

    src_in = rng.uniform(0.0, e, (n_in, 3))
    t_gt = RigidTransform(random_rotation(rng), rng.uniform(0.0, e, 3))
    src_out = rng.uniform(0.0, e, (n_out, 3))
    tgt_out = t_gt.apply(rng.uniform(0.0, e, (n_out, 3)))

    source = np.vstack([src_in, src_out]) if n_out else src_in
    pr = gr.estimate_resolution(source) if len(source) >= 2 else e
    noise = rng.normal(size=(n_in, 3)) * (spec.noise_sigma * pr)
    tgt_in = t_gt.apply(src_in) + noise
    target = np.vstack([tgt_in, tgt_out]) if n_out else tgt_in

    perm = rng.permutation(n_in + n_out)
    corrs = Correspondences(source[perm], target[perm])
    return corrs, t_gt, (source[perm], target[perm])


def _identity_report(stage_times, error=None) -> RegistrationReport:
    return RegistrationReport(
        best=hy.Hypothesis(
            transform=RigidTransform.identity(),
            score=0.0,
            source_clique=(),
            metric=hy.Metric.MAE,
        ),
        success=False,
        stage_times=stage_times,
        error=error,
    )


def register(
    corrs: Correspondences,
    config: RegistrationConfig,
    t_gt: RigidTransform | None = None,
    criteria: SuccessCriteria | None = None,
) -> RegistrationReport:
    """Full pipeline: (optional GC prefilter) -> graph -> cliques ->
    (node-guided selection, NC, ranking) -> per-clique SVD -> scoring
    against the full initial set -> best hypothesis.

    Capacity/budget overruns and an empty hypothesis set are reported as
    success=False with the identity transform, never raised. When t_gt is
    given, RE/TE are filled in; when criteria are also given, success means
    the errors meet them and correct_hypothesis_count is populated.
    """
    if len(corrs) < 3:
        raise ValueError("at least 3 correspondences are required")
    times = dict.fromkeys(STAGE_NAMES, 0.0)

    def finish(report: RegistrationReport) -> RegistrationReport:
        if t_gt is not None:
            report.re_deg, report.te = transform_errors(report.best.transform, t_gt)
            if criteria is not None:
                report.success = report.success and (
                    report.re_deg <= criteria.re_thresh_deg
                    and report.te <= criteria.te_thresh
                )
                report.correct_hypothesis_count = hy.count_correct_hypotheses(
                    report.hypotheses, t_gt, criteria.re_thresh_deg, criteria.te_thresh
                )
        return report

    # Stage 1: graph construction (including the optional GC prefilter).
    t0 = time.perf_counter()
    try:
        graph_params = config.graph.resolve(corrs)
        work = gr.gc_prefilter(corrs, graph_params) if config.use_gc_prefilter else corrs
        if len(work) < 3:
            times["graph_construction"] = (time.perf_counter() - t0) * 1e3
            return finish(_identity_report(times, error="prefilter left fewer than 3 correspondences"))
        graph = gr.build_fog(work, graph_params)
        if config.graph_order is gr.GraphOrder.SECOND_ORDER:
            graph = gr.build_sog(graph)
    except CapacityExceeded as exc:
        times["graph_construction"] = (time.perf_counter() - t0) * 1e3
        return finish(_identity_report(times, error=str(exc)))
    times["graph_construction"] = (time.perf_counter() - t0) * 1e3

    # Stage 2: maximal clique search (or the single maximum clique).
    t0 = time.perf_counter()
    try:
        if config.clique_mode is CliqueMode.MAXIMUM:
            try:
                found = [cq.maximum_clique(graph, config.filter.min_size, config.clique_budget)]
            except NoClique:
                found = []
        else:
            found = cq.enumerate_maximal_cliques(
                graph, config.filter.min_size, config.clique_budget
            )
    except BudgetExceeded as exc:
        times["clique_search"] = (time.perf_counter() - t0) * 1e3
        return finish(_identity_report(times, error=str(exc)))
    times["clique_search"] = (time.perf_counter() - t0) * 1e3

    # Stage 3: node-guided selection plus the optional clique filters.
    t0 = time.perf_counter()
    if config.use_node_guided:
        found = cq.node_guided_select(found, graph.n)
    if config.filter.use_normal_consistency:
        found = [
            c for c in found
            if cq.normal_consistency_filter(c, work, config.filter.t_alpha)
        ]
    if config.filter.top_k is not None:
        found = cq.rank_top_k(found, config.filter.top_k)
    times["node_guided_selection"] = (time.perf_counter() - t0) * 1e3

    # Stage 4: pose estimation and evaluation against the full initial set.
    t0 = time.perf_counter()
    eval_params = config.eval
    if eval_params.inlier_threshold is None:
        eval_params = replace(eval_params, inlier_threshold=10.0 * graph_params.pr)
    node_weights = None
    if eval_params.svd_mode is hy.SvdMode.WEIGHTED:
        node_weights = hy.dominant_eigenvector(graph.weights)
    hypotheses: list[hy.Hypothesis] = []
    for c in found:
        try:
            h = hy.clique_to_hypothesis(c, work, eval_params.svd_mode, node_weights)
        except DegenerateInput:
            continue
        h.score = hy.score_hypothesis(h.transform, corrs, eval_params)
        h.metric = eval_params.metric
        hypotheses.append(h)
    if not hypotheses:
        times["pose_estimation"] = (time.perf_counter() - t0) * 1e3
        report = _identity_report(times, error="no pose hypotheses")
        report.n_cliques = len(found)
        return finish(report)
    best = hy.select_best(hypotheses, corrs, eval_params)
    times["pose_estimation"] = (time.perf_counter() - t0) * 1e3

    return finish(
        RegistrationReport(
            best=best,
            success=True,
            stage_times=times,
            hypotheses=hypotheses,
            n_cliques=len(found),
        )
    )


@dataclass
class PairResult:
    index: int
    meta: str
    success: bool
    re_deg: float | None
    te: float | None
    score: float
    correct_hypothesis_count: int | None
    total_time_ms: float
    error: str | None = None
    parse_failed: bool = False


@dataclass
class DatasetSummary:
    n_pairs: int
    n_success: int
    recall_pct: float
    mean_re_success: float | None
    mean_te_success: float | None
    mean_re_all: float | None
    mean_te_all: float | None
    mac_n_recall_pct: dict[int, float]
    criteria: SuccessCriteria


MAC_N_LEVELS = (1, 5, 10, 20, 50)


def summarize(results: list[PairResult], criteria: SuccessCriteria) -> DatasetSummary:
    n = len(results)
    successes = [r for r in results if r.success]
    scored = [r for r in results if r.re_deg is not None]

    def mean(vals):
        return float(np.mean(vals)) if vals else None

    mac_n = {}
    for level in MAC_N_LEVELS:
        hits = sum(
            1
            for r in results
            if r.correct_hypothesis_count is not None
            and r.correct_hypothesis_count >= level
        )
        mac_n[level] = 100.0 * hits / n if n else 0.0
    return DatasetSummary(
        n_pairs=n,
        n_success=len(successes),
        recall_pct=100.0 * len(successes) / n if n else 0.0,
        mean_re_success=mean([r.re_deg for r in successes if r.re_deg is not None]),
        mean_te_success=mean([r.te for r in successes if r.te is not None]),
        mean_re_all=mean([r.re_deg for r in scored]),
        mean_te_all=mean([r.te for r in scored]),
        mac_n_recall_pct=mac_n,
        criteria=criteria,
    )


def evaluate_batch(
    instances: list[tuple[Correspondences, RigidTransform]],
    config: RegistrationConfig,
    criteria: SuccessCriteria,
    metas: list[str] | None = None,
) -> tuple[list[PairResult], DatasetSummary]:
    """Register a list of in-memory (correspondences, ground truth) pairs."""
    results = []
    for i, (corrs, t_gt) in enumerate(instances):
        rep = register(corrs, config, t_gt=t_gt, criteria=criteria)
        results.append(
            PairResult(
                index=i,
                meta=metas[i] if metas else str(i),
                success=rep.success,
                re_deg=rep.re_deg,
                te=rep.te,
                score=rep.best.score,
                correct_hypothesis_count=rep.correct_hypothesis_count,
                total_time_ms=rep.total_time_ms,
                error=rep.error,
            )
        )
    return results, summarize(results, criteria)


def _evaluate_one_pair(args):
    index, corr_path, gt_path, meta, config, criteria = args
    from . import io as macio

    try:
        corrs = macio.load_correspondences(corr_path)
        t_gt = macio.load_transform(gt_path)
    except (FileFormatError, OSError, ValueError) as exc:
        return PairResult(
            index=index,
            meta=meta,
            success=False,
            re_deg=None,
            te=None,
            score=0.0,
            correct_hypothesis_count=None,
            total_time_ms=0.0,
            error=str(exc),
            parse_failed=True,
        )
    rep = register(corrs, config, t_gt=t_gt, criteria=criteria)
    return PairResult(
        index=index,
        meta=meta,
        success=rep.success,
        re_deg=rep.re_deg,
        te=rep.te,
        score=rep.best.score,
        correct_hypothesis_count=rep.correct_hypothesis_count,
        total_time_ms=rep.total_time_ms,
        error=rep.error,
    )


def max_workers() -> int:
    """Worker cap from the MAC_THREADS environment variable (default 1)."""
    raw = os.environ.get("MAC_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"MAC_THREADS must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"MAC_THREADS must be a positive integer, got {raw!r}")
    return value


def evaluate_dataset(
    pairs: list[tuple[str, str, str]],
    config: RegistrationConfig,
    criteria: SuccessCriteria,
    exclude_parse_failures: bool = False,
) -> tuple[list[PairResult], DatasetSummary]:
    """Register every (corr_file, gt_file, meta) pair and aggregate.

    Pairs whose files fail to parse count as failures by default; with
    exclude_parse_failures they are dropped from the denominator (but still
    returned in the per-pair list). Pairs run in parallel when MAC_THREADS
    is set above 1; results merge by pair index either way.
    """
    jobs = [
        (i, corr, gt, meta, config, criteria)
        for i, (corr, gt, meta) in enumerate(pairs)
    ]
    workers = max_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_one_pair, jobs))
    else:
        results = [_evaluate_one_pair(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    counted = results
    if exclude_parse_failures:
        counted = [r for r in results if not r.parse_failed]
    return results, summarize(counted, criteria)


def _ablation_rows() -> dict[str, tuple[str, RegistrationConfig]]:
    base = RegistrationConfig(eval=hy.EvalParams(metric=hy.Metric.INLIER_COUNT))
    rows = {
        "1": ("SOG + NG + SVD + inlier count", base),
        "2": ("row 1 + GC prefilter", replace(base, use_gc_prefilter=True)),
        "3": ("FOG instead of SOG", replace(base, graph_order=gr.GraphOrder.FIRST_ORDER)),
        "4": ("row 1 without NG", replace(base, use_node_guided=False)),
        "5": (
            "row 1 with weighted SVD",
            replace(base, eval=replace(base.eval, svd_mode=hy.SvdMode.WEIGHTED)),
        ),
        "6": ("row 1 with MAE", replace(base, eval=replace(base.eval, metric=hy.Metric.MAE))),
        "7": ("row 1 with MSE", replace(base, eval=replace(base.eval, metric=hy.Metric.MSE))),
        "8": (
            "row 1 + normal consistency",
            replace(base, filter=replace(base.filter, use_normal_consistency=True)),
        ),
        "9": ("maximum clique instead of maximal", replace(base, clique_mode=CliqueMode.MAXIMUM)),
    }
    for row, k in zip(("10", "11", "12", "13", "14"), (100, 200, 500, 1000, 2000)):
        rows[row] = (
            f"row 1 + clique ranking top {k}",
            replace(base, filter=replace(base.filter, top_k=k)),
        )
    return rows


ABLATION_ROWS = _ablation_rows()


def rmse_evaluate(
    corrs: Correspondences,
    t_gt: RigidTransform,
    source_cloud,
    config: RegistrationConfig,
    rmse_thresholds_pr: list[float],
) -> tuple[list[bool], float]:
    """Register a pair and judge it by alignment RMSE in pr units of the
    source cloud, once per threshold. Returns (success flags, rmse_pr)."""
    rep = register(corrs, config, t_gt=t_gt)
    pr = gr.estimate_resolution(source_cloud)
    rmse_pr = rmse_alignment(source_cloud, rep.best.transform, t_gt) / pr
    return [rmse_pr <= thr for thr in rmse_thresholds_pr], rmse_pr
