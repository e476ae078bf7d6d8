"""Pose hypothesis generation from cliques, scoring, and selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cliques import Clique
from .correspondences import Correspondence, Correspondences
from .errors import DegenerateInput, NoHypotheses
from .geometry import RigidTransform, kabsch_svd, rotation_error, translation_error


class Metric(enum.Enum):
    INLIER_COUNT = "inlier"
    MAE = "mae"
    MSE = "mse"


class SvdMode(enum.Enum):
    INSTANCE_EQUAL = "equal"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class EvalParams:
    """Hypothesis evaluation parameters.

    inlier_threshold of None defaults to 10 * pr at registration time.
    """

    inlier_threshold: float | None = None
    metric: Metric = Metric.MAE
    svd_mode: SvdMode = SvdMode.INSTANCE_EQUAL

    def __post_init__(self):
        if self.inlier_threshold is not None and self.inlier_threshold <= 0:
            raise ValueError("inlier_threshold must be positive")


@dataclass
class Hypothesis:
    transform: RigidTransform
    score: float
    source_clique: tuple[int, ...]
    metric: Metric


def dominant_eigenvector(
    weights: np.ndarray, tol: float = 1e-6, max_iter: int = 1000
) -> np.ndarray:
    """Dominant eigenvector of a symmetric nonnegative matrix via power
    iteration, oriented so its entries are nonnegative. A zero matrix yields
    the uniform vector."""
    n = weights.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        w = weights @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return v
        w = w / norm
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    if v.sum() < 0:
        v = -v
    return v


def clique_to_hypothesis(
    clique: Clique,
    corrs: Correspondences,
    mode: SvdMode = SvdMode.INSTANCE_EQUAL,
    node_weights: np.ndarray | None = None,
) -> Hypothesis:
    """Fit a rigid transform to the clique's correspondences.

    In weighted mode, `node_weights` is the dominant eigenvector of the full
    graph weight matrix (computed once per registration); the clique's
    entries of it weight the SVD fit. Falls back to equal weights when the
    restricted entries are all zero.
    """
    idx = np.asarray(clique.nodes, dtype=np.int64)
    weights = None
    if mode is SvdMode.WEIGHTED:
        if node_weights is None:
            raise ValueError("weighted mode requires node_weights")
        weights = np.asarray(node_weights, dtype=float)[idx]
        if weights.sum() <= 0:
            weights = None
    transform = kabsch_svd(corrs.source[idx], corrs.target[idx], weights)
    return Hypothesis(
        transform=transform,
        score=0.0,
        source_clique=tuple(int(i) for i in corrs.indices[idx]),
        metric=Metric.MAE,
    )


def residual(transform: RigidTransform, c: Correspondence) -> float:
    """||T(p_s) - p_t|| for one correspondence."""
    return float(np.linalg.norm(transform.apply(c.source) - c.target))


def residuals(transform: RigidTransform, corrs: Correspondences) -> np.ndarray:
    diff = transform.apply(corrs.source) - corrs.target
    return np.linalg.norm(diff, axis=1)


def score_residuals(r: np.ndarray, threshold: float, metric: Metric) -> float:
    inl = r < threshold
    if metric is Metric.INLIER_COUNT:
        return float(np.count_nonzero(inl))
    rel = (threshold - r[inl]) / threshold
    if metric is Metric.MAE:
        return float(rel.sum())
    if metric is Metric.MSE:
        return float((rel * rel).sum())
    raise ValueError(f"unknown metric {metric}")


def score_hypothesis(
    transform: RigidTransform, corrs: Correspondences, params: EvalParams
) -> float:
    """Consensus score of a pose over the full correspondence set.

    With residual r_i and threshold tau: inlier count is |{r_i < tau}|,
    MAE sums (tau - r_i)/tau and MSE sums ((tau - r_i)/tau)^2 over inliers.
    Higher is better for all three; the score lies in [0, n].
    """
    if params.inlier_threshold is None:
        raise ValueError("inlier_threshold must be resolved before scoring")
    return score_residuals(
        residuals(transform, corrs), params.inlier_threshold, params.metric
    )


def select_best(
    hypotheses: list[Hypothesis], corrs: Correspondences, params: EvalParams
) -> Hypothesis:
    """Highest-scoring hypothesis; ties broken by smaller mean inlier
    residual, then by clique node list, then by position."""
    if not hypotheses:
        raise NoHypotheses("no hypotheses to select from")
    best_score = max(h.score for h in hypotheses)
    contenders = [(i, h) for i, h in enumerate(hypotheses) if h.score == best_score]
    if len(contenders) == 1:
        return contenders[0][1]

    def tie_key(item):
        i, h = item
        r = residuals(h.transform, corrs)
        inl = r < params.inlier_threshold
        mean_res = float(r[inl].mean()) if np.any(inl) else np.inf
        return (mean_res, h.source_clique, i)

    return min(contenders, key=tie_key)[1]


def ransac_baseline(
    corrs: Correspondences,
    iterations: int,
    params: EvalParams,
    seed: int,
    sample_size: int = 3,
) -> tuple[Hypothesis, list[Hypothesis]]:
    """Plain RANSAC over the correspondence set, for hypothesis-quality
    comparisons. Degenerate samples consume their iteration and are skipped;
    a fixed seed reproduces the hypothesis list exactly."""
    n = len(corrs)
    if n < sample_size:
        raise ValueError("not enough correspondences for the sample size")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    rng = np.random.default_rng(seed)
    hypotheses: list[Hypothesis] = []
    for _ in range(iterations):
        pick = rng.choice(n, size=sample_size, replace=False)
        try:
            t = kabsch_svd(corrs.source[pick], corrs.target[pick])
        except DegenerateInput:
            continue
        h = Hypothesis(
            transform=t,
            score=score_hypothesis(t, corrs, params),
            source_clique=tuple(int(i) for i in corrs.indices[np.sort(pick)]),
            metric=params.metric,
        )
        hypotheses.append(h)
    best = select_best(hypotheses, corrs, params)
    return best, hypotheses


def count_correct_hypotheses(
    hypotheses: list[Hypothesis],
    t_gt: RigidTransform,
    re_thresh: float,
    te_thresh: float,
) -> int:
    """How many hypotheses fall within the RE/TE thresholds of the ground
    truth."""
    if re_thresh <= 0 or te_thresh <= 0:
        raise ValueError("thresholds must be positive")
    count = 0
    for h in hypotheses:
        if (
            rotation_error(h.transform.rotation, t_gt.rotation) <= re_thresh
            and translation_error(h.transform.translation, t_gt.translation) <= te_thresh
        ):
            count += 1
    return count
