"""Odometry-based motion deskewing for rotating LiDAR scans.

The package pairs the correction itself (``odometry``, ``deskew``) with a
closed-form scan simulator (``scene``, ``simulator``) and map-quality
metrics (``metrics``), so distortion magnitudes and the effect of the
correction can be reproduced end to end on synthetic data.
"""

from .core import (
    NO_RETURN,
    LidarConfig,
    MotionIncrement,
    OdometrySample,
    Point3,
    PointCloud,
    Pose2,
    Ray,
    Scan,
    WheelConfig,
    hdl64_config,
    normalize_angle,
)
from .deskew import DeskewReport, correct_point, deskew_scan, project_scan, ray_to_point
from .metrics import (
    IcpParams,
    IcpResult,
    OccupancyResult,
    SurfaceError,
    icp_match,
    occupancy_count,
    point_to_surface_error,
)
from .odometry import (
    TrajectorySegment,
    integrate_pose,
    integrate_trajectory,
    pose_at_phase,
    wheel_to_increment,
    window_increment,
)
from .scene import Box, Fence, Post, Scene
from .simulator import (
    NoiseSpec,
    Segment,
    TrajectorySpec,
    coverage_analysis,
    emit_can_log,
    sample_trajectory,
    simulate_scan,
)

__version__ = "0.1.0"

__all__ = [
    "NO_RETURN",
    "Box",
    "DeskewReport",
    "Fence",
    "IcpParams",
    "IcpResult",
    "LidarConfig",
    "MotionIncrement",
    "NoiseSpec",
    "OccupancyResult",
    "OdometrySample",
    "Point3",
    "PointCloud",
    "Pose2",
    "Post",
    "Ray",
    "Scan",
    "Scene",
    "Segment",
    "SurfaceError",
    "TrajectorySegment",
    "TrajectorySpec",
    "WheelConfig",
    "correct_point",
    "coverage_analysis",
    "deskew_scan",
    "emit_can_log",
    "hdl64_config",
    "icp_match",
    "integrate_pose",
    "integrate_trajectory",
    "normalize_angle",
    "occupancy_count",
    "point_to_surface_error",
    "pose_at_phase",
    "project_scan",
    "ray_to_point",
    "sample_trajectory",
    "simulate_scan",
    "wheel_to_increment",
    "window_increment",
]
