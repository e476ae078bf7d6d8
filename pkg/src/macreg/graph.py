"""Compatibility graph construction over correspondence sets.

First-order weights come from the rigid distance constraint passed through a
Gaussian and thresholded; second-order weights reweight each edge by the
agreement of the two endpoints' common neighbors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .correspondences import Correspondence, Correspondences
from .errors import CapacityExceeded, DegenerateCloud

# Dense n x n storage; larger inputs should be subsampled upstream.
MAX_DENSE_NODES = 8000

_DEFAULT_T_CMP = 0.99
_LARGE_SET_T_CMP = 0.999
_LARGE_SET_THRESHOLD = 5000


class GraphOrder(enum.Enum):
    FIRST_ORDER = "fog"
    SECOND_ORDER = "sog"


@dataclass(frozen=True)
class GraphParams:
    """Graph construction parameters.

    d_cmp is expressed in point-cloud-resolution (pr) units and converted to
    absolute length at build time. t_cmp of None selects 0.99, or 0.999 for
    correspondence sets larger than 5000.
    """

    d_cmp: float = 10.0
    t_cmp: float | None = None
    t_alpha: float = 0.1
    pr: float | None = None

    def __post_init__(self):
        if self.d_cmp <= 0:
            raise ValueError("d_cmp must be positive")
        if self.t_cmp is not None and not (0.0 < self.t_cmp < 1.0):
            raise ValueError("t_cmp must lie in (0, 1)")
        if self.t_alpha <= 0:
            raise ValueError("t_alpha must be positive")
        if self.pr is not None and self.pr <= 0:
            raise ValueError("pr must be positive")

    def effective_t_cmp(self, n: int) -> float:
        if self.t_cmp is not None:
            return self.t_cmp
        return _LARGE_SET_T_CMP if n > _LARGE_SET_THRESHOLD else _DEFAULT_T_CMP

    def resolve(self, corrs: Correspondences) -> "GraphParams":
        """Fill in pr (mean of the two clouds' resolutions) if unset."""
        if self.pr is not None:
            return self
        pr = 0.5 * (estimate_resolution(corrs.source) + estimate_resolution(corrs.target))
        return replace(self, pr=pr)


class CompatGraph:
    """Symmetric nonnegative weight matrix over correspondences; an edge
    exists wherever the weight is positive."""

    def __init__(self, weights, order: GraphOrder):
        w = np.ascontiguousarray(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be square")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diagonal(w) != 0):
            raise ValueError("diagonal must be zero")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        self.weights = w
        self.order = order
        self._adjacency = None

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def adjacency(self) -> list[np.ndarray]:
        """Per-node sorted neighbor index arrays."""
        if self._adjacency is None:
            self._adjacency = [np.flatnonzero(row > 0) for row in self.weights]
        return self._adjacency

    def neighbors(self, i: int) -> np.ndarray:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])


def estimate_resolution(cloud) -> float:
    """Mean nearest-neighbor distance of a cloud ('pr', the scale-free
    distance unit)."""
    pts = np.asarray(cloud, dtype=float).reshape(-1, 3)
    if pts.shape[0] < 2:
        raise ValueError("at least 2 points are required")
    tree = cKDTree(pts)
    dists, _ = tree.query(pts, k=2)
    res = float(np.mean(dists[:, 1]))
    if res <= 0:
        raise DegenerateCloud("all points coincide")
    return res


def estimate_normals(cloud, k: int = 20) -> np.ndarray:
    """Per-point unit normals from the k-NN scatter matrix.

    The normal is the eigenvector with the smallest eigenvalue, oriented away
    from the cloud centroid. For points whose offset from the centroid is
    orthogonal to the normal, the sign is fixed by making the
    largest-magnitude component positive.
    """
    pts = np.asarray(cloud, dtype=float).reshape(-1, 3)
    n = pts.shape[0]
    if n < k + 1:
        raise ValueError(f"need at least k+1 = {k + 1} points")
    tree = cKDTree(pts)
    _, idx = tree.query(pts, k=k + 1)
    neigh = pts[idx[:, 1:]]  # (n, k, 3), self excluded
    centered = neigh - neigh.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / k
    _, vecs = np.linalg.eigh(cov)
    normals = vecs[:, :, 0]  # smallest-eigenvalue eigenvector
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)

    outward = pts - pts.mean(axis=0)
    dots = np.einsum("ni,ni->n", normals, outward)
    flip = dots < -1e-12
    normals[flip] = -normals[flip]
    ambiguous = np.abs(dots) <= 1e-12
    if np.any(ambiguous):
        sub = normals[ambiguous]
        lead = np.take_along_axis(
            sub, np.abs(sub).argmax(axis=1, keepdims=True), axis=1
        ).ravel()
        sub[lead < 0] = -sub[lead < 0]
        normals[ambiguous] = sub
    return normals


def s_dist(ci: Correspondence, cj: Correspondence) -> float:
    """Rigid distance constraint: | ||p_i^s - p_j^s|| - ||p_i^t - p_j^t|| |."""
    ds = np.linalg.norm(ci.source - cj.source)
    dt = np.linalg.norm(ci.target - cj.target)
    return float(abs(ds - dt))


def s_cmp(ci: Correspondence, cj: Correspondence, params: GraphParams) -> float:
    """Gaussian compatibility score, thresholded to 0 unless it exceeds t_cmp.

    The raw score is exp(-S_dist^2 / (2 d_cmp^2)) with d_cmp in absolute
    length units (pr units times pr).
    """
    if params.pr is None:
        raise ValueError("params.pr must be set (call GraphParams.resolve)")
    d_abs = params.d_cmp * params.pr
    raw = float(np.exp(-s_dist(ci, cj) ** 2 / (2.0 * d_abs * d_abs)))
    return raw if raw > params.effective_t_cmp(2) else 0.0


def _pairwise_scores(corrs: Correspondences, params: GraphParams, t_cmp: float) -> np.ndarray:
    d_abs = params.d_cmp * params.pr
    ds = cdist(corrs.source, corrs.source)
    dt = cdist(corrs.target, corrs.target)
    sdist = np.abs(ds - dt)
    raw = np.exp(-(sdist * sdist) / (2.0 * d_abs * d_abs))
    w = np.where(raw > t_cmp, raw, 0.0)
    np.fill_diagonal(w, 0.0)
    # cdist(x, x) is not exactly symmetric in floating point
    return np.maximum(w, w.T)


def build_fog(corrs: Correspondences, params: GraphParams) -> CompatGraph:
    """First-order compatibility graph."""
    n = len(corrs)
    if n < 2:
        raise ValueError("at least 2 correspondences are required")
    if n > MAX_DENSE_NODES:
        raise CapacityExceeded(
            f"{n} correspondences exceed the dense-graph cap of {MAX_DENSE_NODES}"
        )
    params = params.resolve(corrs)
    w = _pairwise_scores(corrs, params, params.effective_t_cmp(n))
    return CompatGraph(w, GraphOrder.FIRST_ORDER)


def build_sog(fog: CompatGraph) -> CompatGraph:
    """Second-order graph: W_FOG ⊙ (W_FOG @ W_FOG).

    Per edge this equals w_ij * sum_k w_ik * w_jk; edges whose endpoints
    share no common neighbor drop to weight 0 and disappear.
    """
    if fog.order is not GraphOrder.FIRST_ORDER:
        raise ValueError("build_sog expects a first-order graph")
    w = fog.weights
    prod = w @ w
    # the BLAS product of a symmetric matrix is only symmetric to rounding
    prod = 0.5 * (prod + prod.T)
    return CompatGraph(w * prod, GraphOrder.SECOND_ORDER)


def gc_prefilter(corrs: Correspondences, params: GraphParams) -> Correspondences:
    """Geometric-consistency prefilter.

    Each correspondence seeds the cluster of everything compatible with it
    (positive pairwise score); the largest cluster wins, ties going to the
    lowest seed index. The seed itself is always part of its cluster.
    """
    n = len(corrs)
    if n == 0:
        raise ValueError("at least 1 correspondence is required")
    if n == 1:
        return corrs
    if n > MAX_DENSE_NODES:
        raise CapacityExceeded(
            f"{n} correspondences exceed the dense-graph cap of {MAX_DENSE_NODES}"
        )
    params = params.resolve(corrs)
    compat = _pairwise_scores(corrs, params, params.effective_t_cmp(n)) > 0
    sizes = compat.sum(axis=1)  # seed itself excluded; constant +1 everywhere
    seed = int(np.argmax(sizes))
    members = np.flatnonzero(compat[seed] | (np.arange(n) == seed))
    return corrs.subset(members)
