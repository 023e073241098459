"""Shared domain types and frame conventions.

Frames and sign conventions used throughout the package:

* The vehicle frame is planar and right handed: x forward, y left, z up,
  heading theta measured counterclockwise from +x.
* A scan's azimuth ``alpha`` is the sweep progress of the mirror, in
  ``[0, 2*pi)``, zero at scan start and increasing with time regardless of
  the physical spin direction.  ``phase = alpha / (2*pi)`` is the fraction
  of the scan period elapsed when the ray fired.
* The geometric direction of a ray in the sensor frame is
  ``mirror_sign * alpha`` where ``mirror_sign`` is +1 for a
  counterclockwise mirror and -1 for a clockwise one (the Velodyne-style
  default).  The world-frame ray azimuth is
  ``vehicle_heading + mirror_sign * alpha``.
* The reference frame of a corrected scan is the sensor pose at scan END
  (sweep progress ``2*pi``); rays fired earlier are back-projected into it.

All types are immutable value objects; they can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

#: Sentinel range for rays that produced no return.
NO_RETURN = -1.0


def normalize_angle(theta: float) -> float:
    """Wrap an angle to the interval (-pi, pi].

    The boundary maps to +pi, so ``normalize_angle(3*pi) == pi``.
    Idempotent; raises ``ValueError`` on non-finite input.
    """
    if not math.isfinite(theta):
        raise ValueError(f"cannot normalize non-finite angle {theta!r}")
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def normalize_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`normalize_angle` for float arrays."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("cannot normalize non-finite angles")
    r = np.remainder(theta + math.pi, TWO_PI) - math.pi
    # np.remainder lands in [-pi, pi); move the open edge to +pi
    return np.where(r <= -math.pi, r + TWO_PI, r)


@dataclass(frozen=True)
class Pose2:
    """Planar pose (x, y in meters, heading theta in radians).

    The constructor normalizes ``theta`` to (-pi, pi].
    """

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.theta):
            if not math.isfinite(v):
                raise ValueError(f"Pose2 fields must be finite, got {v!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @staticmethod
    def identity() -> "Pose2":
        return Pose2(0.0, 0.0, 0.0)

    def compose(self, other: "Pose2") -> "Pose2":
        """Pose of ``other`` expressed through this pose (self * other)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(-(c * self.x + s * self.y), -(-s * self.x + c * self.y), -self.theta)

    def transform_points(self, points: np.ndarray, z_offset: float = 0.0) -> np.ndarray:
        """Apply the planar pose to an (N, 3) array: rotate about z, then translate.

        ``z_offset`` lifts the result vertically (sensor height when going
        from sensor frame to world frame); z is never rotated.
        """
        pts = np.asarray(points, dtype=float)
        c, s = math.cos(self.theta), math.sin(self.theta)
        out = np.empty_like(pts)
        out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + self.x
        out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + self.y
        out[:, 2] = pts[:, 2] + z_offset
        return out


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"Point3 fields must be finite, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class WheelConfig:
    """Differential odometry geometry: wheel radius and track width, meters."""

    wheel_radius_r: float
    track_L: float

    def __post_init__(self) -> None:
        if not (self.wheel_radius_r > 0.0):
            raise ValueError("wheel_radius_r must be > 0")
        if not (self.track_L > 0.0):
            raise ValueError("track_L must be > 0")


@dataclass(frozen=True)
class OdometrySample:
    """One CAN-style wheel increment: angle deltas of each wheel over dt seconds."""

    dt: float
    delta_theta_R: float
    delta_theta_L: float

    def __post_init__(self) -> None:
        if not (self.dt > 0.0):
            raise ValueError("OdometrySample.dt must be > 0")


@dataclass(frozen=True)
class MotionIncrement:
    """Planar motion over dt seconds: signed arc length and heading change.

    ``delta_theta`` is the angular increment over the interval; the
    corresponding rate is exposed separately as :attr:`yaw_rate`.
    """

    delta_x: float
    delta_theta: float
    dt: float

    def __post_init__(self) -> None:
        if not (self.dt > 0.0):
            raise ValueError("MotionIncrement.dt must be > 0")

    @property
    def speed(self) -> float:
        return self.delta_x / self.dt

    @property
    def yaw_rate(self) -> float:
        return self.delta_theta / self.dt


class LidarConfig:
    """Rotating LiDAR geometry and timing.

    Parameters
    ----------
    scan_period_Ts : float
        Seconds per mirror revolution (> 0).
    beam_inclinations : array-like
        Fixed elevation angle of each beam, radians, strictly inside
        (-pi/2, pi/2).  Length defines the beam count.
    azimuth_step : float
        Sweep progress between consecutive firings, radians.  Must divide
        2*pi evenly to within 1e-9.
    mirror_direction : str
        "clockwise" or "counterclockwise"; sets :attr:`mirror_sign`.
    max_range : float
        Maximum measurable range, meters.
    sensor_height : float
        Height of the sensor above the ground plane, meters.
    """

    __slots__ = (
        "scan_period_Ts",
        "beam_inclinations",
        "azimuth_step",
        "mirror_direction",
        "max_range",
        "sensor_height",
    )

    def __init__(
        self,
        scan_period_Ts: float,
        beam_inclinations,
        azimuth_step: float,
        mirror_direction: str = "clockwise",
        max_range: float = 120.0,
        sensor_height: float = 1.9,
    ) -> None:
        if not (scan_period_Ts > 0.0):
            raise ValueError("scan_period_Ts must be > 0")
        if not (azimuth_step > 0.0):
            raise ValueError("azimuth_step must be > 0")
        n = TWO_PI / azimuth_step
        if abs(n - round(n)) * azimuth_step > 1e-9:
            raise ValueError("azimuth_step must evenly divide 2*pi (tolerance 1e-9)")
        incl = np.array(beam_inclinations, dtype=float, copy=True).reshape(-1)
        if incl.size == 0:
            raise ValueError("at least one beam inclination required")
        if np.any(incl <= -math.pi / 2) or np.any(incl >= math.pi / 2):
            raise ValueError("beam inclinations must lie strictly inside (-pi/2, pi/2)")
        if mirror_direction not in ("clockwise", "counterclockwise"):
            raise ValueError("mirror_direction must be 'clockwise' or 'counterclockwise'")
        if not (max_range > 0.0):
            raise ValueError("max_range must be > 0")
        self.scan_period_Ts = float(scan_period_Ts)
        self.beam_inclinations = incl
        self.beam_inclinations.setflags(write=False)
        self.azimuth_step = float(azimuth_step)
        self.mirror_direction = mirror_direction
        self.max_range = float(max_range)
        self.sensor_height = float(sensor_height)

    @property
    def num_beams(self) -> int:
        return int(self.beam_inclinations.size)

    @property
    def num_columns(self) -> int:
        return int(round(TWO_PI / self.azimuth_step))

    @property
    def mirror_sign(self) -> float:
        """+1.0 for counterclockwise sweep, -1.0 for clockwise."""
        return 1.0 if self.mirror_direction == "counterclockwise" else -1.0

    def column_azimuths(self) -> np.ndarray:
        """Sweep progress of each firing column, radians in [0, 2*pi)."""
        return np.arange(self.num_columns, dtype=float) * self.azimuth_step

    def __eq__(self, other) -> bool:
        if not isinstance(other, LidarConfig):
            return NotImplemented
        return (
            self.scan_period_Ts == other.scan_period_Ts
            and np.array_equal(self.beam_inclinations, other.beam_inclinations)
            and self.azimuth_step == other.azimuth_step
            and self.mirror_direction == other.mirror_direction
            and self.max_range == other.max_range
            and self.sensor_height == other.sensor_height
        )

    def __repr__(self) -> str:
        return (
            f"LidarConfig(Ts={self.scan_period_Ts}, beams={self.num_beams}, "
            f"step={self.azimuth_step:.6g}, {self.mirror_direction}, "
            f"max_range={self.max_range}, h={self.sensor_height})"
        )


def hdl64_config(
    azimuth_step_deg: float = 0.5,
    scan_period_Ts: float = 0.1,
    num_beams: int = 64,
    max_range: float = 120.0,
    sensor_height: float = 1.9,
) -> LidarConfig:
    """Config resembling a 64-beam spinning unit at 10 Hz.

    Beams span [-24.8 deg, +2 deg] of elevation; the mirror spins clockwise.
    The azimuth step is coarser than the real device by default so that
    desk-scale experiments stay fast.
    """
    incl = np.deg2rad(np.linspace(-24.8, 2.0, num_beams))
    return LidarConfig(
        scan_period_Ts=scan_period_Ts,
        beam_inclinations=incl,
        azimuth_step=math.radians(azimuth_step_deg),
        mirror_direction="clockwise",
        max_range=max_range,
        sensor_height=sensor_height,
    )


@dataclass(frozen=True)
class Ray:
    """One LiDAR measurement.

    ``azimuth_alpha`` is sweep progress in [0, 2*pi) from scan start;
    ``phase`` is derived from it (stored for clarity).  ``range_d`` is the
    measured distance in meters, or the ``NO_RETURN`` sentinel.
    """

    beam_index: int
    inclination_omega: float
    azimuth_alpha: float
    range_d: float
    phase: float = field(init=False)

    def __post_init__(self) -> None:
        if self.beam_index < 0:
            raise ValueError("beam_index must be >= 0")
        if not (-math.pi / 2 < self.inclination_omega < math.pi / 2):
            raise ValueError("inclination must lie strictly inside (-pi/2, pi/2)")
        if not (0.0 <= self.azimuth_alpha < TWO_PI):
            raise ValueError("azimuth_alpha must lie in [0, 2*pi)")
        if self.range_d != NO_RETURN and self.range_d < 0.0:
            raise ValueError("range_d must be >= 0 or the no-return sentinel")
        object.__setattr__(self, "phase", self.azimuth_alpha / TWO_PI)

    @property
    def is_return(self) -> bool:
        return self.range_d != NO_RETURN


class Scan:
    """Rays of one mirror revolution, grouped into azimuth columns.

    Storage is columnar: ``ranges[c, b]`` is the range of beam ``b`` fired
    at column ``c`` (sweep progress ``c * azimuth_step``), with ``NO_RETURN``
    sentinels for missing echoes.  All beams of a column share one firing
    time, hence one phase.  ``remission`` is an optional per-ray scalar
    (kept in memory only; the text scan format does not persist it).
    """

    __slots__ = ("config", "start_time", "ranges", "remission")

    def __init__(
        self,
        config: LidarConfig,
        start_time: float,
        ranges: np.ndarray,
        remission: np.ndarray | None = None,
    ) -> None:
        ranges = np.array(ranges, dtype=float, copy=True)
        expect = (config.num_columns, config.num_beams)
        if ranges.shape != expect:
            raise ValueError(f"ranges shape {ranges.shape} != (columns, beams) {expect}")
        bad = (ranges < 0.0) & (ranges != NO_RETURN)
        if np.any(bad):
            raise ValueError("negative ranges other than the no-return sentinel")
        if remission is not None:
            remission = np.array(remission, dtype=float, copy=True)
            if remission.shape != expect:
                raise ValueError("remission shape must match ranges")
            remission.setflags(write=False)
        ranges.setflags(write=False)
        self.config = config
        self.start_time = float(start_time)
        self.ranges = ranges
        self.remission = remission

    @property
    def end_time(self) -> float:
        return self.start_time + self.config.scan_period_Ts

    def azimuths(self) -> np.ndarray:
        return self.config.column_azimuths()

    def phases(self) -> np.ndarray:
        return self.azimuths() / TWO_PI

    def ray_times(self) -> np.ndarray:
        """Firing time of each column, assuming uniform mirror rotation."""
        return self.start_time + self.phases() * self.config.scan_period_Ts

    def num_returns(self) -> int:
        return int(np.count_nonzero(self.ranges != NO_RETURN))

    def rays(self):
        """Iterate Ray objects in firing order (column-major, beams inner)."""
        az = self.azimuths()
        incl = self.config.beam_inclinations
        for c in range(self.config.num_columns):
            for b in range(self.config.num_beams):
                yield Ray(b, float(incl[b]), float(az[c]), float(self.ranges[c, b]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scan):
            return NotImplemented
        rem_eq = (self.remission is None) == (other.remission is None) and (
            self.remission is None or np.array_equal(self.remission, other.remission)
        )
        return (
            self.config == other.config
            and self.start_time == other.start_time
            and np.array_equal(self.ranges, other.ranges)
            and rem_eq
        )

    def __repr__(self) -> str:
        return (
            f"Scan(t0={self.start_time}, columns={self.config.num_columns}, "
            f"beams={self.config.num_beams}, returns={self.num_returns()})"
        )


class PointCloud:
    """An (N, 3) array of points with an optional per-point remission scalar."""

    __slots__ = ("points", "remission")

    def __init__(self, points: np.ndarray, remission: np.ndarray | None = None) -> None:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        if remission is not None:
            remission = np.asarray(remission, dtype=float).reshape(-1)
            if remission.shape[0] != pts.shape[0]:
                raise ValueError("remission length must match point count")
        self.points = pts
        self.remission = remission

    def __len__(self) -> int:
        return self.points.shape[0]

    def transformed(self, pose: Pose2, z_offset: float = 0.0) -> "PointCloud":
        return PointCloud(pose.transform_points(self.points, z_offset), self.remission)

    @staticmethod
    def merge(clouds) -> "PointCloud":
        clouds = list(clouds)
        if not clouds:
            return PointCloud(np.zeros((0, 3)))
        pts = np.vstack([c.points for c in clouds])
        if all(c.remission is not None for c in clouds):
            rem = np.concatenate([c.remission for c in clouds])
        else:
            rem = None
        return PointCloud(pts, rem)

    def __repr__(self) -> str:
        return f"PointCloud({len(self)} points)"
