"""Map-quality metrics: ICP matching error, occupancy compactness, surface error.

The ICP here is deliberately plain point-to-point: nearest-neighbor
correspondences through a KD-tree, distance-gated, with a closed-form
least-squares rigid update per iteration.  Alignment is restricted to the
planar degrees of freedom (x, y, yaw) by default, matching the 2.5D motion
model; a full 3D rigid mode is available behind ``mode="rigid3d"``.

"Compactness" counts distinct fixed-size cells containing at least one
point (equivalent to the leaf count of a fixed-depth octree).  Absolute
counts depend on the environment; only the corrected-vs-raw direction and
the reduction ratio are meaningful across setups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import Pose2, PointCloud
from .scene import Scene, surface_distance


@dataclass(frozen=True)
class IcpParams:
    max_iterations: int = 50
    convergence_eps_m: float = 1e-4
    max_correspondence_dist_m: float = 2.0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.convergence_eps_m > 0.0):
            raise ValueError("convergence_eps_m must be > 0")
        if not (self.max_correspondence_dist_m > 0.0):
            raise ValueError("max_correspondence_dist_m must be > 0")


@dataclass(frozen=True)
class IcpResult:
    """Planar relative pose, mean inlier residual, and convergence status.

    ``mean_p2p_error`` is the mean 3D point-to-point distance over the
    final inlier correspondences.  ``message`` carries diagnostics when the
    match degenerates (for example, zero inliers).
    """

    relative_pose: Pose2
    mean_p2p_error: float
    iterations: int
    converged: bool
    num_inliers: int = 0
    message: str = ""

    def __post_init__(self) -> None:
        if self.mean_p2p_error < 0.0:
            raise ValueError("mean_p2p_error must be >= 0")


@dataclass(frozen=True)
class OccupancyResult:
    cell_size: float
    occupied_cells: int

    def __post_init__(self) -> None:
        if self.occupied_cells < 0:
            raise ValueError("occupied_cells must be >= 0")


@dataclass(frozen=True)
class SurfaceError:
    rms: float
    max: float
    per_point: np.ndarray


def _planar_fit(src: np.ndarray, dst: np.ndarray) -> Pose2:
    """Least-squares planar rigid transform mapping src onto dst (x, y, yaw)."""
    ps = src[:, :2].mean(axis=0)
    pd = dst[:, :2].mean(axis=0)
    a = src[:, :2] - ps
    b = dst[:, :2] - pd
    dot = float(np.sum(a * b))
    cross = float(np.sum(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))
    gamma = math.atan2(cross, dot)
    c, s = math.cos(gamma), math.sin(gamma)
    tx = pd[0] - (c * ps[0] - s * ps[1])
    ty = pd[1] - (s * ps[0] + c * ps[1])
    return Pose2(tx, ty, gamma)


def _rigid3d_fit(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Kabsch: 4x4 rigid transform mapping src onto dst."""
    ps = src.mean(axis=0)
    pd = dst.mean(axis=0)
    h = (src - ps).T @ (dst - pd)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = np.eye(4)
    t[:3, :3] = r
    t[:3, 3] = pd - r @ ps
    return t


def icp_match(
    source: PointCloud,
    target: PointCloud,
    init: Pose2 | None = None,
    params: IcpParams = IcpParams(),
    mode: str = "planar",
) -> IcpResult:
    """Point-to-point ICP aligning ``source`` onto ``target``.

    ``init`` seeds the source pose (odometry poses are the natural choice).
    Iterations stop when the incremental pose update falls below
    ``convergence_eps_m`` (translation norm plus yaw magnitude) or at the
    iteration cap.  Raises ``ValueError`` on an empty input cloud; a zero
    inlier set ends the match unconverged, with diagnostics.
    """
    if len(source) == 0 or len(target) == 0:
        raise ValueError("icp_match requires non-empty source and target clouds")
    if mode not in ("planar", "rigid3d"):
        raise ValueError("mode must be 'planar' or 'rigid3d'")
    init = init or Pose2.identity()
    tree = cKDTree(target.points)
    gate = params.max_correspondence_dist_m

    pose = init
    transform3d = np.eye(4)
    moved = init.transform_points(source.points)
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        dist, idx = tree.query(moved, distance_upper_bound=gate)
        ok = np.isfinite(dist)
        if not np.any(ok):
            return IcpResult(
                relative_pose=pose,
                mean_p2p_error=0.0,
                iterations=iterations,
                converged=False,
                num_inliers=0,
                message="no correspondences within max_correspondence_dist",
            )
        src_in = moved[ok]
        dst_in = target.points[idx[ok]]
        if mode == "planar":
            step = _planar_fit(src_in, dst_in)
            moved = step.transform_points(moved)
            pose = step.compose(pose)
            delta = math.hypot(step.x, step.y) + abs(step.theta)
        else:
            step = _rigid3d_fit(src_in, dst_in)
            moved = moved @ step[:3, :3].T + step[:3, 3]
            transform3d = step @ transform3d
            cos_rot = min(1.0, max(-1.0, (np.trace(step[:3, :3]) - 1.0) / 2.0))
            delta = float(np.linalg.norm(step[:3, 3])) + abs(math.acos(cos_rot))
        if delta < params.convergence_eps_m:
            converged = True
            break
    if mode == "rigid3d":
        pose = _pose_from_matrix(transform3d, init)

    # final inlier residuals after the last update
    dist, _ = tree.query(moved, distance_upper_bound=gate)
    ok = np.isfinite(dist)
    if not np.any(ok):
        return IcpResult(
            relative_pose=pose,
            mean_p2p_error=0.0,
            iterations=iterations,
            converged=False,
            num_inliers=0,
            message="no correspondences within max_correspondence_dist",
        )
    return IcpResult(
        relative_pose=pose,
        mean_p2p_error=float(dist[ok].mean()),
        iterations=iterations,
        converged=converged,
        num_inliers=int(ok.sum()),
        message="" if converged else "iteration cap reached",
    )


def _pose_from_matrix(t: np.ndarray, init: Pose2) -> Pose2:
    """Planar projection of an accumulated 3D transform, composed with init."""
    yaw = math.atan2(t[1, 0], t[0, 0])
    step = Pose2(float(t[0, 3]), float(t[1, 3]), yaw)
    return step.compose(init)


def occupancy_count(cloud: PointCloud, cell_size: float) -> OccupancyResult:
    """Number of distinct cells of side ``cell_size`` containing a point.

    Invariant to point order and to duplicated points; adding points never
    decreases the count.
    """
    if not (cell_size > 0.0):
        raise ValueError("cell_size must be > 0")
    if len(cloud) == 0:
        return OccupancyResult(cell_size=cell_size, occupied_cells=0)
    cells = np.floor(cloud.points / cell_size).astype(np.int64)
    unique = np.unique(cells, axis=0)
    return OccupancyResult(cell_size=cell_size, occupied_cells=int(unique.shape[0]))


def point_to_surface_error(cloud: PointCloud, scene: Scene) -> SurfaceError:
    """Unsigned distance of every point to the nearest scene surface.

    The cloud must be expressed in the scene's (world) frame; lift sensor
    frame clouds with ``Pose2.transform_points`` and the sensor height
    first.
    """
    if scene.is_empty():
        raise ValueError("scene has no primitives to measure against")
    per_point = surface_distance(scene, cloud.points)
    if per_point.size == 0:
        return SurfaceError(rms=0.0, max=0.0, per_point=per_point)
    rms = float(np.sqrt(np.mean(per_point**2)))
    return SurfaceError(rms=rms, max=float(per_point.max()), per_point=per_point)
