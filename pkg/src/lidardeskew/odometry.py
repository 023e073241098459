"""Wheel odometry to planar motion, pose integration, and per-ray back-projection.

The dead-reckoning scheme is a midpoint (second-order Runge-Kutta) update:
each increment advances the position along the heading evaluated halfway
through the turn.  :func:`pose_at_phase` is the exact algebraic inverse of
that update, scaled by the fraction of the scan still remaining when a ray
fired, so the last ray of a scan receives exactly zero correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MotionIncrement, OdometrySample, Pose2, WheelConfig

#: Allowed discontinuity between consecutive odometry samples, seconds.
CONTIGUITY_TOL = 1e-6


def wheel_to_increment(sample: OdometrySample, cfg: WheelConfig) -> MotionIncrement:
    """Convert wheel angle deltas to a planar motion increment.

    Linear motion is the wheel-radius-scaled mean of the two wheel angles;
    the heading change is their radius-scaled difference over the track.
    """
    r = cfg.wheel_radius_r
    delta_x = r * (sample.delta_theta_R + sample.delta_theta_L) / 2.0
    delta_theta = r * (sample.delta_theta_R - sample.delta_theta_L) / cfg.track_L
    return MotionIncrement(delta_x=delta_x, delta_theta=delta_theta, dt=sample.dt)


def increment_to_wheels(inc: MotionIncrement, cfg: WheelConfig) -> OdometrySample:
    """Inverse of :func:`wheel_to_increment` (used when synthesizing CAN logs)."""
    r = cfg.wheel_radius_r
    d_r = (inc.delta_x + inc.delta_theta * cfg.track_L / 2.0) / r
    d_l = (inc.delta_x - inc.delta_theta * cfg.track_L / 2.0) / r
    return OdometrySample(dt=inc.dt, delta_theta_R=d_r, delta_theta_L=d_l)


def integrate_pose(prev: Pose2, inc: MotionIncrement) -> Pose2:
    """One midpoint dead-reckoning step.

    The position advances by ``delta_x`` along the heading at the middle of
    the turn (``theta + delta_theta / 2``); the heading advances by
    ``delta_theta``.  With ``delta_theta == 0`` this is an exact translation.
    """
    mid = prev.theta + inc.delta_theta / 2.0
    return Pose2(
        prev.x + inc.delta_x * math.cos(mid),
        prev.y + inc.delta_x * math.sin(mid),
        prev.theta + inc.delta_theta,
    )


@dataclass(frozen=True)
class TrajectorySegment:
    """Contiguous, time-ordered motion increments starting at ``t0``.

    Sample k covers ``(t0 + sum(dt[:k]), t0 + sum(dt[:k+1])]``.  When built
    from explicitly timestamped increments use :meth:`from_timed`, which
    enforces contiguity to within ``CONTIGUITY_TOL``.
    """

    t0: float
    samples: tuple[MotionIncrement, ...]

    @staticmethod
    def from_timed(t0: float, timed: list[tuple[float, MotionIncrement]]) -> "TrajectorySegment":
        """Build from (start_time, increment) pairs, checking contiguity."""
        expected = t0
        for t_start, inc in timed:
            if abs(t_start - expected) > CONTIGUITY_TOL:
                raise ValueError(
                    f"non-contiguous odometry: sample starts at {t_start:.9f}, "
                    f"previous ends at {expected:.9f}"
                )
            expected = t_start + inc.dt
        return TrajectorySegment(t0=t0, samples=tuple(inc for _, inc in timed))

    @property
    def t1(self) -> float:
        return self.t0 + sum(s.dt for s in self.samples)

    def boundaries(self) -> np.ndarray:
        """Sample boundary times, length ``len(samples) + 1``."""
        dts = np.array([s.dt for s in self.samples], dtype=float)
        return self.t0 + np.concatenate([[0.0], np.cumsum(dts)])


def integrate_trajectory(start: Pose2, seg: TrajectorySegment) -> list[tuple[float, Pose2]]:
    """Fold :func:`integrate_pose` over a segment.

    Returns ``len(samples) + 1`` timed poses, the start pose included.
    """
    out = [(seg.t0, start)]
    t = seg.t0
    pose = start
    for inc in seg.samples:
        t += inc.dt
        pose = integrate_pose(pose, inc)
        out.append((t, pose))
    return out


def pose_at_phase(scan_increment: MotionIncrement, phase: float) -> Pose2:
    """Sensor pose of a ray, expressed in the end-of-scan frame.

    ``scan_increment`` is the total motion over one scan period; ``phase``
    in [0, 1] is the fraction of the scan elapsed when the ray fired.  With
    ``f = 1 - phase`` the remaining fraction, the ray pose is one midpoint
    step from the origin with the negated remaining increments
    ``(-delta_x * f, -delta_theta * f)``.  This is the exact inverse of
    :func:`integrate_pose`: stepping the result forward by the remaining
    increment lands back on the origin to machine precision.  Phase 1
    returns the identity pose exactly.
    """
    if not (0.0 <= phase <= 1.0):
        raise ValueError(f"phase must lie in [0, 1], got {phase!r}")
    f = 1.0 - phase
    if f == 0.0:
        return Pose2.identity()
    bx = -scan_increment.delta_x * f
    btheta = -scan_increment.delta_theta * f
    return Pose2(bx * math.cos(btheta / 2.0), bx * math.sin(btheta / 2.0), btheta)


def poses_at_phases(scan_increment: MotionIncrement, phases: np.ndarray) -> np.ndarray:
    """Vectorized :func:`pose_at_phase`: returns an (N, 3) array of (x, y, theta).

    Headings stay un-normalized here; intra-scan heading changes are small
    by construction and callers rotate with cos/sin directly.
    """
    phases = np.asarray(phases, dtype=float)
    if np.any(phases < 0.0) or np.any(phases > 1.0):
        raise ValueError("phases must lie in [0, 1]")
    f = 1.0 - phases
    bx = -scan_increment.delta_x * f
    btheta = -scan_increment.delta_theta * f
    out = np.empty(phases.shape + (3,), dtype=float)
    out[..., 0] = bx * np.cos(btheta / 2.0)
    out[..., 1] = bx * np.sin(btheta / 2.0)
    out[..., 2] = btheta
    zero = f == 0.0
    out[zero] = 0.0
    return out


def window_increment(seg: TrajectorySegment, t0: float, t1: float) -> MotionIncrement:
    """Accumulate a segment's motion over the window [t0, t1].

    Samples straddling a window edge contribute proportionally to the time
    overlap, consistent with the constant-rate assumption within a sample.
    The window must lie inside the segment (tolerance ``CONTIGUITY_TOL``).
    """
    if not (t1 > t0):
        raise ValueError("window end must be after window start")
    if t0 < seg.t0 - CONTIGUITY_TOL or t1 > seg.t1 + CONTIGUITY_TOL:
        raise ValueError(
            f"window [{t0:.6f}, {t1:.6f}] outside odometry coverage "
            f"[{seg.t0:.6f}, {seg.t1:.6f}]"
        )
    bounds = seg.boundaries()
    dx = 0.0
    dtheta = 0.0
    for k, inc in enumerate(seg.samples):
        lo = max(bounds[k], t0)
        hi = min(bounds[k + 1], t1)
        if hi <= lo:
            continue
        frac = (hi - lo) / inc.dt
        dx += inc.delta_x * frac
        dtheta += inc.delta_theta * frac
    return MotionIncrement(delta_x=dx, delta_theta=dtheta, dt=t1 - t0)


def segment_from_wheels(
    t0: float, samples: list[OdometrySample], cfg: WheelConfig
) -> TrajectorySegment:
    """Convert a contiguous wheel sample stream into a trajectory segment."""
    return TrajectorySegment(
        t0=t0, samples=tuple(wheel_to_increment(s, cfg) for s in samples)
    )
