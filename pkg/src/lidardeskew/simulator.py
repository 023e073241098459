"""Synthetic vehicle trajectories, CAN logs, and distorted LiDAR scans.

Trajectories are closed-form (piecewise constant speed and yaw rate), so
they serve as an exact kinematic oracle: the simulator places the sensor at
the true pose of every firing column, and any residual after deskewing is
attributable to the correction model alone.

Sign conventions are shared with the deskewer (see ``core``): the world
azimuth of a ray is ``vehicle_heading + mirror_sign * alpha``, so a
clockwise mirror combined with clockwise vehicle yaw sweeps more than a
full turn of the world and objects near the scan-start azimuth appear
twice in the raw scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NO_RETURN,
    TWO_PI,
    LidarConfig,
    MotionIncrement,
    OdometrySample,
    Pose2,
    Scan,
    WheelConfig,
)
from .odometry import increment_to_wheels
from .scene import Scene, raycast

_YAW_TINY = 1e-12


@dataclass(frozen=True)
class Segment:
    """Constant speed (m/s) and yaw rate (rad/s) for ``duration`` seconds."""

    speed: float
    yaw_rate: float
    duration: float

    def __post_init__(self) -> None:
        if not (self.duration > 0.0):
            raise ValueError("segment duration must be > 0")
        if not (math.isfinite(self.speed) and math.isfinite(self.yaw_rate)):
            raise ValueError("segment speed and yaw rate must be finite")


@dataclass(frozen=True)
class NoiseSpec:
    range_sigma: float = 0.0
    wheel_tick_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.range_sigma < 0.0 or self.wheel_tick_sigma < 0.0:
            raise ValueError("noise sigmas must be >= 0")


def _advance(pose: Pose2, speed: float, yaw_rate: float, tau: float) -> Pose2:
    """Closed-form pose after ``tau`` seconds of constant-rate motion.

    Zero yaw rate degrades to a straight line (not an error)."""
    if abs(yaw_rate) < _YAW_TINY:
        return Pose2(
            pose.x + speed * tau * math.cos(pose.theta),
            pose.y + speed * tau * math.sin(pose.theta),
            pose.theta,
        )
    radius = speed / yaw_rate
    psi = yaw_rate * tau
    return Pose2(
        pose.x + radius * (math.sin(pose.theta + psi) - math.sin(pose.theta)),
        pose.y - radius * (math.cos(pose.theta + psi) - math.cos(pose.theta)),
        pose.theta + psi,
    )


@dataclass(frozen=True)
class TrajectorySpec:
    """Piecewise constant-rate vehicle trajectory with a closed-form evaluator."""

    segments: tuple[Segment, ...]
    start_pose: Pose2 = field(default_factory=Pose2.identity)

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("trajectory needs at least one segment")
        # segment start poses, precomputed once (closed form per segment)
        starts = [self.start_pose]
        for seg in self.segments[:-1]:
            starts.append(_advance(starts[-1], seg.speed, seg.yaw_rate, seg.duration))
        object.__setattr__(self, "_segment_starts", tuple(starts))

    @staticmethod
    def linear(speed: float, duration: float, start: Pose2 | None = None) -> "TrajectorySpec":
        return TrajectorySpec((Segment(speed, 0.0, duration),), start or Pose2.identity())

    @staticmethod
    def arc(
        speed: float, yaw_rate: float, duration: float, start: Pose2 | None = None
    ) -> "TrajectorySpec":
        return TrajectorySpec((Segment(speed, yaw_rate, duration),), start or Pose2.identity())

    @staticmethod
    def piecewise(segments, start: Pose2 | None = None) -> "TrajectorySpec":
        return TrajectorySpec(tuple(segments), start or Pose2.identity())

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def kind(self) -> str:
        if len(self.segments) > 1:
            return "piecewise"
        return "arc" if abs(self.segments[0].yaw_rate) >= _YAW_TINY else "linear"

    def pose_at(self, t: float) -> Pose2:
        """Exact pose at time t (clamped to [0, duration])."""
        t = min(max(t, 0.0), self.duration)
        elapsed = 0.0
        for seg, start in zip(self.segments, self._segment_starts):
            if t <= elapsed + seg.duration or seg is self.segments[-1]:
                return _advance(start, seg.speed, seg.yaw_rate, t - elapsed)
            elapsed += seg.duration
        raise AssertionError("unreachable")

    def increment_over(self, t0: float, t1: float) -> MotionIncrement:
        """Exact accumulated (delta_x, delta_theta) over [t0, t1]."""
        if not (t1 > t0):
            raise ValueError("interval end must be after start")
        dx = 0.0
        dtheta = 0.0
        elapsed = 0.0
        for seg in self.segments:
            lo = max(elapsed, t0)
            hi = min(elapsed + seg.duration, t1)
            if hi > lo:
                dx += seg.speed * (hi - lo)
                dtheta += seg.yaw_rate * (hi - lo)
            elapsed += seg.duration
        return MotionIncrement(delta_x=dx, delta_theta=dtheta, dt=t1 - t0)


def sample_trajectory(spec: TrajectorySpec, dt: float) -> list[tuple[float, Pose2]]:
    """Closed-form poses at times 0, dt, 2*dt, ... up to the trajectory duration."""
    if not (0.0 < dt <= spec.duration):
        raise ValueError("dt must satisfy 0 < dt <= duration")
    n = int(math.floor(spec.duration / dt + 1e-9))
    return [(k * dt, spec.pose_at(k * dt)) for k in range(n + 1)]


def emit_can_log(
    spec: TrajectorySpec,
    cfg: WheelConfig,
    rate_hz: float,
    noise: NoiseSpec = NoiseSpec(),
) -> list[OdometrySample]:
    """Synthesize wheel increments at a fixed rate from the trajectory oracle.

    Each sample inverts the differential-drive relations over its interval;
    optional Gaussian tick noise is applied independently per wheel.
    Samples start at t = 0 and are contiguous; timestamps are implied by
    the rate (sample k covers (k/rate, (k+1)/rate]).
    """
    if not (rate_hz > 0.0):
        raise ValueError("rate_hz must be > 0")
    dt = 1.0 / rate_hz
    n = int(math.floor(spec.duration * rate_hz + 1e-9))
    rng = np.random.default_rng(np.random.SeedSequence([int(noise.seed) & 0x7FFFFFFF, 0xCA]))
    out = []
    for k in range(n):
        inc = spec.increment_over(k * dt, (k + 1) * dt)
        sample = increment_to_wheels(inc, cfg)
        if noise.wheel_tick_sigma > 0.0:
            jr, jl = rng.normal(0.0, noise.wheel_tick_sigma, size=2)
            sample = OdometrySample(
                dt=sample.dt,
                delta_theta_R=sample.delta_theta_R + jr,
                delta_theta_L=sample.delta_theta_L + jl,
            )
        out.append(sample)
    return out


def simulate_scan(
    scene: Scene,
    spec: TrajectorySpec,
    scan_start: float,
    cfg: LidarConfig,
    noise: NoiseSpec = NoiseSpec(),
) -> Scan:
    """Ray-cast one scan while the vehicle moves along the trajectory.

    Every firing column is cast from the exact vehicle pose at its firing
    time; the world azimuth of a beam is the vehicle heading plus the
    signed mirror progress.  Hits within ``cfg.max_range`` become ranges
    (plus optional Gaussian range noise); misses are no-returns.  Remission
    carries the material id of the primitive hit.  Output is bit-identical
    for identical inputs and seed.
    """
    ts = cfg.scan_period_Ts
    if scan_start < -1e-9 or scan_start + ts > spec.duration + 1e-9:
        raise ValueError(
            f"scan window [{scan_start:.6f}, {scan_start + ts:.6f}] outside "
            f"trajectory duration {spec.duration:.6f}"
        )
    alphas = cfg.column_azimuths()
    phases = alphas / TWO_PI
    poses = [spec.pose_at(scan_start + p * ts) for p in phases]
    px = np.array([p.x for p in poses])
    py = np.array([p.y for p in poses])
    heading = np.array([p.theta for p in poses])

    n_cols = alphas.size
    n_beams = cfg.num_beams
    world_az = heading + cfg.mirror_sign * alphas  # (C,)
    omega = cfg.beam_inclinations  # (B,)
    cos_om, sin_om = np.cos(omega), np.sin(omega)

    dirs = np.empty((n_cols, n_beams, 3))
    dirs[:, :, 0] = np.cos(world_az)[:, None] * cos_om[None, :]
    dirs[:, :, 1] = np.sin(world_az)[:, None] * cos_om[None, :]
    dirs[:, :, 2] = sin_om[None, :]

    origins = np.empty((n_cols, n_beams, 3))
    origins[:, :, 0] = px[:, None]
    origins[:, :, 1] = py[:, None]
    origins[:, :, 2] = cfg.sensor_height

    t, mat = raycast(scene, origins.reshape(-1, 3), dirs.reshape(-1, 3))
    hit = np.isfinite(t) & (t <= cfg.max_range)
    ranges = np.where(hit, t, NO_RETURN)
    if noise.range_sigma > 0.0 and np.any(hit):
        key = abs(int(round(scan_start * 1e9)))
        rng = np.random.default_rng(
            np.random.SeedSequence([int(noise.seed) & 0x7FFFFFFF, key])
        )
        jitter = rng.normal(0.0, noise.range_sigma, size=int(hit.sum()))
        noisy = ranges[hit] + jitter
        ranges[hit] = np.clip(noisy, 1e-6, cfg.max_range)
    remission = np.where(hit, mat.astype(float), NO_RETURN)
    return Scan(
        config=cfg,
        start_time=scan_start,
        ranges=ranges.reshape(n_cols, n_beams),
        remission=remission.reshape(n_cols, n_beams),
    )


def coverage_analysis(scan_increment: MotionIncrement, cfg: LidarConfig) -> float:
    """World-frame angular coverage of one scan, radians.

    ``2*pi + mirror_sign * delta_theta``: above 2*pi the scan overlaps its
    own start (objects there can be measured twice); below 2*pi a blind
    wedge of the deficit width is never observed.
    """
    return TWO_PI + cfg.mirror_sign * scan_increment.delta_theta
