"""Rigid-transform algebra, SVD pose solving, and pose error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput

_SO3_TOL = 1e-9

# Second singular value of the cross-covariance below this fraction of the
# largest means the source points are (nearly) collinear and the rotation
# about that axis is unobservable.
_DEGENERACY_RATIO = 1e-12


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


@dataclass(frozen=True)
class RigidTransform:
    """Rotation in SO(3) plus a translation vector."""

    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = _as_vec3(self.translation)
        if not np.all(np.isfinite(R)):
            raise ValueError("rotation entries must be finite")
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-8:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-8:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        m = np.asarray(m, dtype=float).reshape(4, 4)
        return cls(m[:3, :3], m[:3, 3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points) -> np.ndarray:
        """Apply R @ p + t to one point or an (n, 3) array of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return self ∘ other (other applied first)."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


def apply_transform(transform: RigidTransform, point) -> np.ndarray:
    """R @ p + t for a single point."""
    return transform.apply(_as_vec3(point))


def kabsch_svd(source, target, weights=None) -> RigidTransform:
    """Least-squares rigid transform mapping source points onto target points.

    Minimizes sum_i w_i * ||R s_i + t - t_i||^2 via SVD of the weighted
    cross-covariance, with the standard sign flip on the smallest singular
    direction when the raw rotation candidate is a reflection.

    Raises DegenerateInput when the source points are rank-deficient
    (collinear or coincident), in which case the pose is unstable and the
    caller should skip the hypothesis.
    """
    src = np.asarray(source, dtype=float).reshape(-1, 3)
    tgt = np.asarray(target, dtype=float).reshape(-1, 3)
    n = src.shape[0]
    if tgt.shape[0] != n:
        raise ValueError("source and target must have the same length")
    if n < 3:
        raise ValueError("at least 3 point pairs are required")
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise ValueError("weights must match the number of pairs")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must have positive sum")
        w = w / total

    centroid_s = w @ src
    centroid_t = w @ tgt
    ds = src - centroid_s
    dt = tgt - centroid_t
    H = (w[:, None] * ds).T @ dt

    U, S, Vt = np.linalg.svd(H)
    if S[0] <= 0 or S[1] < _DEGENERACY_RATIO * S[0]:
        raise DegenerateInput("source points are rank-deficient")
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    t = centroid_t - R @ centroid_s
    return RigidTransform(R, t)


def rotation_error(r_est, r_gt) -> float:
    """Geodesic rotation error in degrees, in [0, 180].

    arccos((trace(R_gt^T R_est) - 1) / 2), with the argument clamped to
    [-1, 1] to absorb floating-point drift.
    """
    r_est = np.asarray(r_est, dtype=float).reshape(3, 3)
    r_gt = np.asarray(r_gt, dtype=float).reshape(3, 3)
    c = (np.trace(r_gt.T @ r_est) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def translation_error(t_est, t_gt) -> float:
    """Euclidean distance between two translation vectors."""
    return float(np.linalg.norm(_as_vec3(t_est) - _as_vec3(t_gt)))


def rmse_alignment(source_points, t_est: RigidTransform, t_gt: RigidTransform) -> float:
    """RMS distance between a cloud transformed by the estimated and the
    ground-truth pose."""
    pts = np.asarray(source_points, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise ValueError("point list must be nonempty")
    diff = t_est.apply(pts) - t_gt.apply(pts)
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))


def transform_errors(t_est: RigidTransform, t_gt: RigidTransform) -> tuple[float, float]:
    """(rotation error in degrees, translation error) of t_est versus t_gt."""
    return (
        rotation_error(t_est.rotation, t_gt.rotation),
        translation_error(t_est.translation, t_gt.translation),
    )


def rotation_about_axis(axis, angle_deg: float) -> np.ndarray:
    """Rotation matrix about a (not necessarily unit) axis, angle in degrees."""
    a = _as_vec3(axis)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("axis must be nonzero")
    a = a / norm
    th = np.radians(angle_deg)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(th) * K + (1 - np.cos(th)) * (K @ K)


def quaternion_to_rotation(q) -> np.ndarray:
    """Rotation matrix from a (w, x, y, z) quaternion; normalized internally."""
    q = np.asarray(q, dtype=float).reshape(4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation drawn uniformly on SO(3) (via a uniform unit quaternion)."""
    return quaternion_to_rotation(rng.normal(size=4))


def random_rigid_transform(rng: np.random.Generator, translation_scale: float = 1.0) -> RigidTransform:
    return RigidTransform(
        random_rotation(rng),
        rng.uniform(-translation_scale, translation_scale, 3),
    )


def nearest_rotation(m) -> np.ndarray:
    """Project a 3x3 matrix onto SO(3) (nearest rotation in Frobenius norm)."""
    m = np.asarray(m, dtype=float).reshape(3, 3)
    U, _, Vt = np.linalg.svd(m)
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt
