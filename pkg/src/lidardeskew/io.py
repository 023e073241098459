"""File formats and run configuration.

Text formats write floats with 17 significant digits so that every writer
and parser round-trips losslessly.  The scan and odometry formats are
deliberately transparent line-oriented text so fixtures stay reviewable;
see the README for the full grammar.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .core import (
    NO_RETURN,
    LidarConfig,
    OdometrySample,
    Pose2,
    PointCloud,
    Scan,
    WheelConfig,
)
from .metrics import IcpParams
from .odometry import TrajectorySegment, segment_from_wheels
from .scene import Box, Fence, Post, Scene
from .simulator import NoiseSpec, Segment, TrajectorySpec


def fmt(x: float) -> str:
    """Lossless text form of a float (17 significant digits)."""
    return "%.17g" % float(x)


class FormatError(ValueError):
    """Malformed input file; the message names the file and line."""


# ---------------------------------------------------------------------------
# Scan files.
#
#   ts <seconds>
#   period <seconds>
#   beams <n>
#   mirror <clockwise|counterclockwise>     (optional, default clockwise)
#   max_range <meters>                      (optional, default 120)
#   height <meters>                         (optional, default 1.9)
#   <beam_index> <azimuth_rad> <inclination_rad> <range_m>   one ray per line
#
# Rays appear in firing order: columns in non-decreasing azimuth, all beams
# of a column consecutive in ascending beam index.  Range -1 marks a
# no-return.  Remission is not persisted in this format.

_SCAN_HEADER_KEYS = ("ts", "period", "beams", "mirror", "max_range", "height")


def write_scan_file(scan: Scan, path: str) -> None:
    cfg = scan.config
    lines = [
        f"ts {fmt(scan.start_time)}",
        f"period {fmt(cfg.scan_period_Ts)}",
        f"beams {cfg.num_beams}",
        f"mirror {cfg.mirror_direction}",
        f"max_range {fmt(cfg.max_range)}",
        f"height {fmt(cfg.sensor_height)}",
    ]
    az = scan.azimuths()
    incl = cfg.beam_inclinations
    for c in range(cfg.num_columns):
        a = fmt(az[c])
        for b in range(cfg.num_beams):
            lines.append(f"{b} {a} {fmt(incl[b])} {fmt(scan.ranges[c, b])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def parse_scan_file(path: str) -> Scan:
    header: dict = {}
    ray_rows: list[tuple[int, float, float, float]] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if tokens[0] in _SCAN_HEADER_KEYS:
                if len(tokens) != 2:
                    raise FormatError(f"{path}:{lineno}: header needs one value")
                header[tokens[0]] = tokens[1]
                continue
            if len(tokens) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 ray fields, got {len(tokens)}")
            try:
                ray_rows.append(
                    (int(tokens[0]), float(tokens[1]), float(tokens[2]), float(tokens[3]))
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    for key in ("ts", "period", "beams"):
        if key not in header:
            raise FormatError(f"{path}: missing required header '{key}'")
    if not ray_rows:
        raise FormatError(f"{path}: empty scan (no ray lines)")

    n_beams = int(header["beams"])
    if n_beams < 1 or len(ray_rows) % n_beams != 0:
        raise FormatError(
            f"{path}: {len(ray_rows)} rays do not form whole columns of {n_beams} beams"
        )
    n_cols = len(ray_rows) // n_beams

    beam_idx = np.array([r[0] for r in ray_rows], dtype=int).reshape(n_cols, n_beams)
    azimuth = np.array([r[1] for r in ray_rows]).reshape(n_cols, n_beams)
    incl = np.array([r[2] for r in ray_rows]).reshape(n_cols, n_beams)
    ranges = np.array([r[3] for r in ray_rows]).reshape(n_cols, n_beams)

    if not np.array_equal(beam_idx, np.tile(np.arange(n_beams), (n_cols, 1))):
        raise FormatError(f"{path}: beam indices must run 0..{n_beams - 1} within each column")
    if np.any(azimuth != azimuth[:, :1]):
        raise FormatError(f"{path}: all beams of a column must share one azimuth")
    col_az = azimuth[:, 0]
    regress = np.nonzero(np.diff(col_az) <= 0)[0]
    if regress.size:
        c = int(regress[0])
        raise FormatError(
            f"{path}: azimuth regression between columns {c} and {c + 1} "
            f"({fmt(col_az[c])} -> {fmt(col_az[c + 1])})"
        )
    if np.any(incl != incl[:1, :]):
        raise FormatError(f"{path}: beam inclinations must be constant across columns")

    if n_cols > 1:
        steps = np.diff(col_az)
        step = float(steps[0])
        if np.max(np.abs(steps - step)) > 1e-9:
            raise FormatError(f"{path}: azimuth step must be uniform")
    else:
        step = 2.0 * math.pi
    if abs(col_az[0]) > 1e-12:
        raise FormatError(f"{path}: first column azimuth must be 0, got {fmt(col_az[0])}")

    cfg = LidarConfig(
        scan_period_Ts=float(header["period"]),
        beam_inclinations=incl[0],
        azimuth_step=step,
        mirror_direction=header.get("mirror", "clockwise"),
        max_range=float(header.get("max_range", 120.0)),
        sensor_height=float(header.get("height", 1.9)),
    )
    if cfg.num_columns != n_cols:
        raise FormatError(
            f"{path}: {n_cols} columns with step {fmt(step)} do not cover one revolution"
        )
    return Scan(config=cfg, start_time=float(header["ts"]), ranges=ranges)


# ---------------------------------------------------------------------------
# Odometry logs.
#
#   format wheel            (or: format increment)
#   t0 <seconds>
#   <t> <dtheta_R> <dtheta_L>     wheel lines: angle increments over
#                                 (previous timestamp, t]
#   <t> <dx_m> <dtheta_rad>       increment lines (gyro path variant)
#
# Timestamps are sample END times and must be strictly increasing; the
# first sample's dt is measured from the declared t0.


def write_odometry_log(samples: list[OdometrySample], path: str, t0: float = 0.0) -> None:
    lines = ["format wheel", f"t0 {fmt(t0)}"]
    t = t0
    for s in samples:
        t += s.dt
        lines.append(f"{fmt(t)} {fmt(s.delta_theta_R)} {fmt(s.delta_theta_L)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_increment_log(seg: TrajectorySegment, path: str) -> None:
    lines = ["format increment", f"t0 {fmt(seg.t0)}"]
    t = seg.t0
    for inc in seg.samples:
        t += inc.dt
        lines.append(f"{fmt(t)} {fmt(inc.delta_x)} {fmt(inc.delta_theta)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


class OdometryLog:
    """Parsed wheel log: a sequence of OdometrySample with absolute times."""

    __slots__ = ("t0", "samples")

    def __init__(self, t0: float, samples: tuple[OdometrySample, ...]) -> None:
        self.t0 = float(t0)
        self.samples = samples

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def segment(self, wheels: WheelConfig) -> TrajectorySegment:
        return segment_from_wheels(self.t0, list(self.samples), wheels)


def _parse_odometry_lines(path: str) -> tuple[str, float, list[tuple[float, float, float]]]:
    fmt_kind = "wheel"
    t0 = 0.0
    rows: list[tuple[float, float, float]] = []
    prev_t: float | None = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if tokens[0] == "format":
                if len(tokens) != 2 or tokens[1] not in ("wheel", "increment"):
                    raise FormatError(f"{path}:{lineno}: format must be wheel or increment")
                fmt_kind = tokens[1]
                continue
            if tokens[0] == "t0":
                if len(tokens) != 2:
                    raise FormatError(f"{path}:{lineno}: t0 needs one value")
                t0 = float(tokens[1])
                prev_t = t0
                continue
            if len(tokens) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 fields, got {len(tokens)}")
            try:
                t, a, b = (float(x) for x in tokens)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if prev_t is None:
                prev_t = t0
            if t <= prev_t:
                raise FormatError(
                    f"{path}:{lineno}: timestamp {fmt(t)} does not advance past {fmt(prev_t)}"
                )
            rows.append((t, a, b))
            prev_t = t
    if not rows:
        raise FormatError(f"{path}: empty odometry log")
    return fmt_kind, t0, rows


def parse_odometry_log(path: str) -> OdometryLog:
    """Read a wheel-format odometry log (see module docstring for grammar)."""
    kind, t0, rows = _parse_odometry_lines(path)
    if kind != "wheel":
        raise FormatError(
            f"{path}: log is '{kind}' format; use load_odometry_segment for increments"
        )
    samples = []
    prev = t0
    for t, d_r, d_l in rows:
        samples.append(OdometrySample(dt=t - prev, delta_theta_R=d_r, delta_theta_L=d_l))
        prev = t
    return OdometryLog(t0=t0, samples=tuple(samples))


def load_odometry_segment(path: str, wheels: WheelConfig | None = None) -> TrajectorySegment:
    """Read either odometry format into a trajectory segment.

    Wheel logs need the wheel geometry; increment logs do not.
    """
    kind, t0, rows = _parse_odometry_lines(path)
    if kind == "wheel":
        if wheels is None:
            raise ValueError("wheel-format log requires a WheelConfig")
        return parse_odometry_log(path).segment(wheels)
    from .core import MotionIncrement

    incs = []
    prev = t0
    for t, dx, dtheta in rows:
        incs.append(MotionIncrement(delta_x=dx, delta_theta=dtheta, dt=t - prev))
        prev = t
    return TrajectorySegment(t0=t0, samples=tuple(incs))


# ---------------------------------------------------------------------------
# Point clouds: whitespace xyz text, or binary little-endian PLY with double
# precision properties (x y z [remission]).


def write_point_cloud(cloud: PointCloud, path: str, format: str = "ply-binary-little-endian") -> None:
    if format == "xyz-ascii":
        _write_xyz(cloud, path)
    elif format == "ply-binary-little-endian":
        _write_ply(cloud, path)
    else:
        raise ValueError(f"unknown point cloud format {format!r}")


def _write_xyz(cloud: PointCloud, path: str) -> None:
    rows = []
    if cloud.remission is None:
        for p in cloud.points:
            rows.append(f"{fmt(p[0])} {fmt(p[1])} {fmt(p[2])}")
    else:
        for p, r in zip(cloud.points, cloud.remission):
            rows.append(f"{fmt(p[0])} {fmt(p[1])} {fmt(p[2])} {fmt(r)}")
    atomic_write_text(path, "\n".join(rows) + ("\n" if rows else ""))


def _write_ply(cloud: PointCloud, path: str) -> None:
    n = len(cloud)
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property double {axis}" for axis in ("x", "y", "z")]
    if cloud.remission is not None:
        header.append("property double remission")
    header.append("end_header")
    if cloud.remission is not None:
        data = np.column_stack([cloud.points, cloud.remission])
    else:
        data = cloud.points
    payload = np.ascontiguousarray(data, dtype="<f8").tobytes()
    atomic_write_bytes(path, ("\n".join(header) + "\n").encode("ascii") + payload)


def read_point_cloud(path: str) -> PointCloud:
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic.startswith(b"ply"):
        return _read_ply(path)
    return _read_xyz(path)


def _read_xyz(path: str) -> PointCloud:
    pts = []
    rem = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line = raw_line.strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) not in (3, 4):
                raise FormatError(f"{path}:{lineno}: expected 3 or 4 fields")
            try:
                values = [float(x) for x in tokens]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            pts.append(values[:3])
            if len(values) == 4:
                rem.append(values[3])
    if rem and len(rem) != len(pts):
        raise FormatError(f"{path}: mixed 3- and 4-field lines")
    points = np.array(pts, dtype=float).reshape(-1, 3)
    return PointCloud(points, np.array(rem) if rem else None)


def _read_ply(path: str) -> PointCloud:
    with open(path, "rb") as fh:
        line = fh.readline().strip()
        if line != b"ply":
            raise FormatError(f"{path}: not a PLY file")
        fmt_line = fh.readline().strip()
        if fmt_line != b"format binary_little_endian 1.0":
            raise FormatError(f"{path}: unsupported PLY format line {fmt_line!r}")
        n = None
        props: list[str] = []
        while True:
            line = fh.readline()
            if not line:
                raise FormatError(f"{path}: truncated PLY header")
            line = line.strip()
            if line == b"end_header":
                break
            tokens = line.split()
            if tokens[0] == b"comment":
                continue
            if tokens[0] == b"element":
                if tokens[1] != b"vertex":
                    raise FormatError(f"{path}: only vertex elements supported")
                n = int(tokens[2])
            elif tokens[0] == b"property":
                if tokens[1] != b"double":
                    raise FormatError(f"{path}: only double properties supported")
                props.append(tokens[2].decode("ascii"))
        if n is None:
            raise FormatError(f"{path}: missing vertex element")
        if props[:3] != ["x", "y", "z"]:
            raise FormatError(f"{path}: vertex properties must start with x y z")
        width = len(props)
        payload = fh.read(8 * width * n)
        if len(payload) != 8 * width * n:
            raise FormatError(f"{path}: truncated PLY payload")
    data = np.frombuffer(payload, dtype="<f8").reshape(n, width)
    rem = data[:, 3] if width > 3 and props[3] == "remission" else None
    return PointCloud(data[:, :3].copy(), None if rem is None else rem.copy())


# ---------------------------------------------------------------------------
# Ground-truth pose tables: sensor pose at each scan end.
#
#   height <meters>
#   <scan_index> <t_end> <x> <y> <theta>


def write_pose_file(poses: list[tuple[int, float, Pose2]], height: float, path: str) -> None:
    lines = [f"height {fmt(height)}"]
    for index, t_end, pose in poses:
        lines.append(f"{index} {fmt(t_end)} {fmt(pose.x)} {fmt(pose.y)} {fmt(pose.theta)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def parse_pose_file(path: str) -> tuple[float, list[tuple[int, float, Pose2]]]:
    height = 1.9
    rows: list[tuple[int, float, Pose2]] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if tokens[0] == "height":
                height = float(tokens[1])
                continue
            if len(tokens) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 fields")
            try:
                rows.append(
                    (
                        int(tokens[0]),
                        float(tokens[1]),
                        Pose2(float(tokens[2]), float(tokens[3]), float(tokens[4])),
                    )
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty pose file")
    return height, rows


# ---------------------------------------------------------------------------
# Run configuration (TOML, schema version 1).


@dataclass(frozen=True)
class RunConfig:
    lidar: LidarConfig
    wheels: WheelConfig
    noise: NoiseSpec
    trajectory: TrajectorySpec
    scene: Scene
    seed: int = 0
    can_rate_hz: float = 100.0
    num_scans: int = 1
    cell_sizes: tuple[float, ...] = (0.1,)
    icp: IcpParams = field(default_factory=IcpParams)
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.num_scans < 1:
            raise ValueError("num_scans must be >= 1")
        if not (self.can_rate_hz > 0.0):
            raise ValueError("can_rate_hz must be > 0")
        need = self.num_scans * self.lidar.scan_period_Ts
        if need > self.trajectory.duration + 1e-9:
            raise ValueError(
                f"{self.num_scans} scans need {need:.3f}s of trajectory, "
                f"spec provides {self.trajectory.duration:.3f}s"
            )


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise FormatError(f"config: missing '{key}' in [{where}]")
    return table[key]


def _load_scene_table(table: dict) -> Scene:
    posts = tuple(
        Post(cx=p["center"][0], cy=p["center"][1], radius=p["radius"], height=p["height"])
        for p in table.get("posts", [])
    )
    fences = tuple(
        Fence(
            x1=f["start"][0],
            y1=f["start"][1],
            x2=f["end"][0],
            y2=f["end"][1],
            height=f["height"],
        )
        for f in table.get("fences", [])
    )
    boxes = tuple(
        Box(
            xmin=b["min"][0],
            ymin=b["min"][1],
            zmin=b["min"][2],
            xmax=b["max"][0],
            ymax=b["max"][1],
            zmax=b["max"][2],
        )
        for b in table.get("boxes", [])
    )
    return Scene(ground=bool(table.get("ground", True)), posts=posts, fences=fences, boxes=boxes)


def _load_trajectory_table(table: dict) -> TrajectorySpec:
    start_raw = table.get("start", [0.0, 0.0, 0.0])
    start = Pose2(float(start_raw[0]), float(start_raw[1]), float(start_raw[2]))
    if "segments" in table:
        segments = tuple(
            Segment(
                speed=float(s["speed"]),
                yaw_rate=math.radians(float(s.get("yaw_rate_deg", 0.0))),
                duration=float(s["duration"]),
            )
            for s in table["segments"]
        )
        return TrajectorySpec.piecewise(segments, start)
    kind = _require(table, "kind", "trajectory")
    duration = float(_require(table, "duration", "trajectory"))
    speed = float(_require(table, "speed", "trajectory"))
    if kind == "linear":
        return TrajectorySpec.linear(speed, duration, start)
    if kind == "arc":
        yaw = math.radians(float(_require(table, "yaw_rate_deg", "trajectory")))
        return TrajectorySpec.arc(speed, yaw, duration, start)
    raise FormatError(f"config: unknown trajectory kind {kind!r}")


def _load_lidar_table(table: dict) -> LidarConfig:
    if "inclinations_deg" in table:
        incl = np.deg2rad(np.asarray(table["inclinations_deg"], dtype=float))
    else:
        span = table.get("inclination_span_deg", [-24.8, 2.0])
        incl = np.deg2rad(np.linspace(span[0], span[1], int(table.get("num_beams", 64))))
    return LidarConfig(
        scan_period_Ts=float(table.get("scan_period", 0.1)),
        beam_inclinations=incl,
        azimuth_step=math.radians(float(table.get("azimuth_step_deg", 0.5))),
        mirror_direction=table.get("mirror", "clockwise"),
        max_range=float(table.get("max_range", 120.0)),
        sensor_height=float(table.get("height", 1.9)),
    )


def load_run_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if raw.get("schema") != 1:
        raise FormatError(f"{path}: expected schema = 1, got {raw.get('schema')!r}")

    scene_ref = raw.get("scene")
    if isinstance(scene_ref, str):
        scene_path = os.path.join(os.path.dirname(os.path.abspath(path)), scene_ref)
        if not os.path.exists(scene_path):
            raise FormatError(f"{path}: referenced scene file not found: {scene_path}")
        with open(scene_path, "rb") as fh:
            scene_table = tomllib.load(fh).get("scene", {})
    elif isinstance(scene_ref, dict):
        scene_table = scene_ref
    else:
        raise FormatError(f"{path}: config needs a [scene] table or scene = 'file.toml'")

    wheels_table = raw.get("wheels", {})
    wheels = WheelConfig(
        wheel_radius_r=float(wheels_table.get("radius", 0.3)),
        track_L=float(wheels_table.get("track", 1.5)),
    )
    noise_table = raw.get("noise", {})
    run_table = raw.get("run", {})
    noise = NoiseSpec(
        range_sigma=float(noise_table.get("range_sigma", 0.0)),
        wheel_tick_sigma=float(noise_table.get("wheel_tick_sigma", 0.0)),
        seed=int(raw.get("seed", 0)),
    )
    icp_table = run_table.get("icp", {})
    return RunConfig(
        lidar=_load_lidar_table(raw.get("lidar", {})),
        wheels=wheels,
        noise=noise,
        trajectory=_load_trajectory_table(_require(raw, "trajectory", "config")),
        scene=_load_scene_table(scene_table),
        seed=int(raw.get("seed", 0)),
        can_rate_hz=float(run_table.get("can_rate_hz", 100.0)),
        num_scans=int(run_table.get("num_scans", 1)),
        cell_sizes=tuple(float(c) for c in run_table.get("cell_sizes", [0.1])),
        icp=IcpParams(
            max_iterations=int(icp_table.get("max_iterations", 50)),
            convergence_eps_m=float(icp_table.get("convergence_eps", 1e-4)),
            max_correspondence_dist_m=float(icp_table.get("max_correspondence_dist", 2.0)),
        ),
        out_dir=run_table.get("out_dir"),
    )


# ---------------------------------------------------------------------------


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("ascii"))


def atomic_write_bytes(path: str, blob: bytes) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
