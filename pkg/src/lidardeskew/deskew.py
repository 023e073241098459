"""Motion compensation of rotating-LiDAR scans from a per-scan odometry increment.

A raw scan pretends every ray was fired from a single viewpoint; in truth
the sensor moved during the sweep.  Deskewing back-projects each ray to the
sensor pose it was actually fired from, expressed in the end-of-scan frame,
and re-assembles the cloud there.  Only measured points are corrected;
coverage lost to a sub-360 world sweep is not recovered.

The correction depends only on the ray's sweep progress (all beams of a
firing column share one pose) and on the total motion over the scan,
distributed linearly in phase (constant-rate assumption within a scan).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NO_RETURN, TWO_PI, MotionIncrement, Point3, PointCloud, Pose2, Ray, Scan
from .odometry import pose_at_phase, poses_at_phases
from .simulator import coverage_analysis

#: Allowed mismatch between increment duration and scan period, seconds.
TIME_TOL = 1e-6


@dataclass(frozen=True)
class DeskewReport:
    """Summary of one deskew pass.

    ``swept_world_angle`` is ``2*pi`` plus the vehicle yaw projected onto
    the mirror's spin direction: above ``2*pi`` the scan saw part of the
    world twice, below it left a blind wedge.
    """

    num_points: int
    max_correction_displacement: float
    swept_world_angle: float

    def __post_init__(self) -> None:
        if not (self.swept_world_angle > 0.0):
            raise ValueError("swept_world_angle must be > 0")


def spherical_to_cartesian(omega, alpha, d) -> np.ndarray:
    """Sensor-frame Cartesian points from inclination, azimuth, range (broadcast)."""
    omega = np.asarray(omega, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    d = np.asarray(d, dtype=float)
    shape = np.broadcast_shapes(omega.shape, alpha.shape, d.shape)
    out = np.empty(shape + (3,))
    cos_om = np.cos(omega)
    out[..., 0] = d * cos_om * np.cos(alpha)
    out[..., 1] = d * cos_om * np.sin(alpha)
    out[..., 2] = d * np.sin(omega)
    return out


def ray_to_point(ray: Ray, mirror_sign: float = 1.0) -> Point3:
    """Project a single returned ray into the sensor frame.

    ``mirror_sign`` converts sweep progress into the geometric azimuth
    (+1 counterclockwise, -1 clockwise); the default matches the
    counterclockwise convention in which azimuth and progress coincide.
    """
    if not ray.is_return:
        raise ValueError("no-return rays carry no point; filter them upstream")
    g = mirror_sign * ray.azimuth_alpha
    cos_om = math.cos(ray.inclination_omega)
    return Point3(
        ray.range_d * cos_om * math.cos(g),
        ray.range_d * cos_om * math.sin(g),
        ray.range_d * math.sin(ray.inclination_omega),
    )


def correct_point(ray: Ray, pose: Pose2, mirror_sign: float = 1.0) -> Point3:
    """Re-express one ray through its firing pose (planar rotation about z).

    ``pose`` is the sensor pose of the ray in the end-of-scan frame, as
    produced by ``pose_at_phase``; z never rotates.
    """
    p = ray_to_point(ray, mirror_sign)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return Point3(pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y, p.z)


def project_scan(scan: Scan) -> PointCloud:
    """Naive single-viewpoint assembly of a scan (no motion compensation).

    This is the "raw" cloud: all rays projected as if fired from one pose.
    Point order is firing order (columns outer, beams inner); no-returns
    are dropped.
    """
    pts, _, valid = _raw_points(scan)
    return PointCloud(pts[valid], _valid_remission(scan, valid))


def deskew_scan(scan: Scan, scan_increment: MotionIncrement) -> tuple[PointCloud, DeskewReport]:
    """Motion-compensate a scan with the odometry increment covering it.

    The increment must span exactly the scan window (duration within
    ``TIME_TOL`` of the scan period).  Zero motion is the identity map on
    the raw cloud, bit for bit.  Output point order matches
    :func:`project_scan`.
    """
    if abs(scan_increment.dt - scan.config.scan_period_Ts) > TIME_TOL:
        raise ValueError(
            f"increment duration {scan_increment.dt!r} does not match scan period "
            f"{scan.config.scan_period_Ts!r} (tolerance {TIME_TOL})"
        )
    raw, phases, valid = _raw_points(scan)
    remission = _valid_remission(scan, valid)
    if scan_increment.delta_x == 0.0 and scan_increment.delta_theta == 0.0:
        cloud = PointCloud(raw[valid], remission)
        report = DeskewReport(
            num_points=len(cloud),
            max_correction_displacement=0.0,
            swept_world_angle=coverage_analysis(scan_increment, scan.config),
        )
        return cloud, report

    rel = poses_at_phases(scan_increment, phases)  # (C, 3) of x, y, theta
    c = np.cos(rel[:, 2])[:, None]
    s = np.sin(rel[:, 2])[:, None]
    corrected = np.empty_like(raw)
    corrected[:, :, 0] = c * raw[:, :, 0] - s * raw[:, :, 1] + rel[:, 0:1]
    corrected[:, :, 1] = s * raw[:, :, 0] + c * raw[:, :, 1] + rel[:, 1:2]
    corrected[:, :, 2] = raw[:, :, 2]

    disp = np.linalg.norm((corrected - raw).reshape(-1, 3)[valid.reshape(-1)], axis=1)
    cloud = PointCloud(corrected.reshape(-1, 3)[valid.reshape(-1)], remission)
    report = DeskewReport(
        num_points=len(cloud),
        max_correction_displacement=float(disp.max()) if disp.size else 0.0,
        swept_world_angle=coverage_analysis(scan_increment, scan.config),
    )
    return cloud, report


def pose_for_ray(scan_increment: MotionIncrement, ray: Ray) -> Pose2:
    """Convenience wrapper: firing pose of one ray in the end-of-scan frame."""
    return pose_at_phase(scan_increment, ray.phase)


def _raw_points(scan: Scan) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sensor-frame points (C, B, 3), column phases (C,), valid mask (C, B)."""
    alphas = scan.azimuths()
    g = scan.config.mirror_sign * alphas  # geometric azimuth per column
    omega = scan.config.beam_inclinations
    pts = spherical_to_cartesian(omega[None, :], g[:, None], scan.ranges)
    valid = scan.ranges != NO_RETURN
    return pts, alphas / TWO_PI, valid


def _valid_remission(scan: Scan, valid: np.ndarray) -> np.ndarray | None:
    if scan.remission is None:
        return None
    return scan.remission[valid]
