"""Correspondence containers: matched source/target point pairs with
optional unit normals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Correspondence:
    """A single putative match (p_s, p_t), optionally carrying unit normals
    at both points and its position in the initial correspondence set."""

    source: np.ndarray
    target: np.ndarray
    source_normal: np.ndarray | None = None
    target_normal: np.ndarray | None = None
    index: int = 0


def _check_points(arr, name) -> np.ndarray:
    a = np.ascontiguousarray(arr, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"{name} must be an (n, 3) array")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def _check_normals(arr, n, name) -> np.ndarray:
    a = _check_points(arr, name)
    if a.shape[0] != n:
        raise ValueError(f"{name} length mismatch")
    norms = np.linalg.norm(a, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError(f"{name} must be unit vectors")
    return a


class Correspondences:
    """Column-wise store of a correspondence set.

    Normals are either present for every correspondence or absent entirely;
    `indices` preserves each correspondence's position in the initial set
    across filtering steps.
    """

    def __init__(self, source, target, source_normals=None, target_normals=None, indices=None):
        self.source = _check_points(source, "source")
        self.target = _check_points(target, "target")
        n = self.source.shape[0]
        if self.target.shape[0] != n:
            raise ValueError("source and target must have the same length")
        if (source_normals is None) != (target_normals is None):
            raise ValueError("normals must be given for both sides or neither")
        if source_normals is not None:
            self.source_normals = _check_normals(source_normals, n, "source_normals")
            self.target_normals = _check_normals(target_normals, n, "target_normals")
        else:
            self.source_normals = None
            self.target_normals = None
        if indices is None:
            self.indices = np.arange(n, dtype=np.int64)
        else:
            self.indices = np.asarray(indices, dtype=np.int64).reshape(-1)
            if self.indices.shape[0] != n:
                raise ValueError("indices length mismatch")
            if len(np.unique(self.indices)) != n:
                raise ValueError("indices must be unique")
            if n and self.indices.min() < 0:
                raise ValueError("indices must be nonnegative")

    def __len__(self) -> int:
        return self.source.shape[0]

    @property
    def has_normals(self) -> bool:
        return self.source_normals is not None

    def __getitem__(self, i: int) -> Correspondence:
        return Correspondence(
            source=self.source[i],
            target=self.target[i],
            source_normal=None if self.source_normals is None else self.source_normals[i],
            target_normal=None if self.target_normals is None else self.target_normals[i],
            index=int(self.indices[i]),
        )

    def subset(self, idx) -> "Correspondences":
        """Row subset; original indices are preserved."""
        idx = np.asarray(idx, dtype=np.int64)
        return Correspondences(
            self.source[idx],
            self.target[idx],
            None if self.source_normals is None else self.source_normals[idx],
            None if self.target_normals is None else self.target_normals[idx],
            self.indices[idx],
        )
