"""Command-line pipeline: simulate, deskew, icp, octree, gt-error, report.

Every subcommand is reproducible: the same configuration and seed produce
byte-identical output files.  The default run directory comes from the
``LIDARDESKEW_OUT`` environment variable (falling back to ``./out``).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import io as lio
from . import report as lreport
from .core import PointCloud
from .deskew import deskew_scan, project_scan
from .metrics import icp_match, occupancy_count, point_to_surface_error
from .odometry import window_increment
from .simulator import emit_can_log, simulate_scan


def _default_out() -> str:
    return os.environ.get("LIDARDESKEW_OUT", "out")


def _scan_path(run_dir: str, index: int) -> str:
    return os.path.join(run_dir, "scans", f"scan_{index:04d}.txt")


def _cloud_path(run_dir: str, kind: str, index: int) -> str:
    return os.path.join(run_dir, "clouds", f"{kind}_{index:04d}.ply")


def _list_scans(run_dir: str) -> list[str]:
    scans_dir = os.path.join(run_dir, "scans")
    if not os.path.isdir(scans_dir):
        raise FileNotFoundError(f"no scans directory at {scans_dir}; run simulate first")
    names = sorted(n for n in os.listdir(scans_dir) if n.endswith(".txt"))
    if not names:
        raise FileNotFoundError(f"no scan files in {scans_dir}")
    return [os.path.join(scans_dir, n) for n in names]


def _load_config(args) -> lio.RunConfig:
    cfg = lio.load_run_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed, noise=replace(cfg.noise, seed=args.seed))
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    run_dir = args.run
    os.makedirs(os.path.join(run_dir, "scans"), exist_ok=True)
    ts = cfg.lidar.scan_period_Ts
    poses = []
    for k in range(cfg.num_scans):
        scan = simulate_scan(cfg.scene, cfg.trajectory, k * ts, cfg.lidar, cfg.noise)
        lio.write_scan_file(scan, _scan_path(run_dir, k))
        t_end = (k + 1) * ts
        poses.append((k, t_end, cfg.trajectory.pose_at(t_end)))
    samples = emit_can_log(cfg.trajectory, cfg.wheels, cfg.can_rate_hz, cfg.noise)
    lio.write_odometry_log(samples, os.path.join(run_dir, "odom.txt"), t0=0.0)
    lio.write_pose_file(poses, cfg.lidar.sensor_height, os.path.join(run_dir, "poses.txt"))
    print(f"simulate: wrote {cfg.num_scans} scans, {len(samples)} CAN samples -> {run_dir}")
    return 0


def cmd_deskew(args) -> int:
    cfg = _load_config(args)
    run_dir = args.run
    scan_paths = _list_scans(run_dir)
    seg = lio.load_odometry_segment(os.path.join(run_dir, "odom.txt"), cfg.wheels)
    os.makedirs(os.path.join(run_dir, "clouds"), exist_ok=True)

    def one(item):
        index, path = item
        scan = lio.parse_scan_file(path)
        inc = window_increment(seg, scan.start_time, scan.end_time)
        corrected, rep = deskew_scan(scan, inc)
        raw = project_scan(scan)
        return index, scan, inc, raw, corrected, rep

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(one, enumerate(scan_paths)))

    rows = []
    merged_raw = []
    merged_corr = []
    pose_by_index = None
    poses_path = os.path.join(run_dir, "poses.txt")
    height = cfg.lidar.sensor_height
    if os.path.exists(poses_path):
        height, pose_rows = lio.parse_pose_file(poses_path)
        pose_by_index = {i: p for i, _, p in pose_rows}
    for index, scan, inc, raw, corrected, rep in results:
        lio.write_point_cloud(raw, _cloud_path(run_dir, "raw", index))
        lio.write_point_cloud(corrected, _cloud_path(run_dir, "corrected", index))
        rows.append(
            [index, scan.start_time, inc.delta_x, inc.delta_theta, rep.num_points,
             rep.max_correction_displacement, rep.swept_world_angle]
        )
        if pose_by_index is not None and index in pose_by_index:
            pose = pose_by_index[index]
            merged_raw.append(raw.transformed(pose, height))
            merged_corr.append(corrected.transformed(pose, height))
    lreport.write_csv(
        os.path.join(run_dir, "deskew_report.csv"),
        ["scan", "t_start", "delta_x", "delta_theta", "num_points",
         "max_correction_displacement", "swept_world_angle"],
        rows,
    )
    if merged_raw:
        lio.write_point_cloud(PointCloud.merge(merged_raw), os.path.join(run_dir, "merged_raw.ply"))
        lio.write_point_cloud(
            PointCloud.merge(merged_corr), os.path.join(run_dir, "merged_corrected.ply")
        )
    print(f"deskew: corrected {len(results)} scans -> {run_dir}/clouds")
    return 0


def cmd_icp(args) -> int:
    cfg = _load_config(args)
    run_dir = args.run
    _, pose_rows = lio.parse_pose_file(os.path.join(run_dir, "poses.txt"))
    poses = {i: p for i, _, p in pose_rows}
    indices = sorted(poses)
    rows = []
    for variant in ("raw", "corrected"):
        for a, b in zip(indices, indices[1:]):
            target = lio.read_point_cloud(_cloud_path(run_dir, variant, a))
            source = lio.read_point_cloud(_cloud_path(run_dir, variant, b))
            init = poses[a].inverse().compose(poses[b])
            res = icp_match(source, target, init=init, params=cfg.icp)
            rows.append(
                [variant, a, b, res.mean_p2p_error, res.iterations, res.converged,
                 res.num_inliers, res.relative_pose.x, res.relative_pose.y,
                 res.relative_pose.theta]
            )
            print(
                f"icp {variant} {a}->{b}: mean_p2p={res.mean_p2p_error:.6f} m "
                f"iters={res.iterations} converged={res.converged}"
            )
    lreport.write_csv(
        os.path.join(run_dir, "icp_results.csv"),
        ["variant", "target", "source", "mean_p2p_error", "iterations", "converged",
         "inliers", "pose_x", "pose_y", "pose_theta"],
        rows,
    )
    return 0


def cmd_octree(args) -> int:
    rows = []
    for path in args.clouds:
        cloud = lio.read_point_cloud(path)
        res = occupancy_count(cloud, args.cell)
        rows.append([path, res.cell_size, res.occupied_cells])
        print(f"octree {path}: cell={args.cell:g} occupied={res.occupied_cells}")
    if args.out:
        lreport.write_csv(args.out, ["cloud", "cell_size", "occupied_cells"], rows)
    return 0


def cmd_gt_error(args) -> int:
    cfg = _load_config(args)
    run_dir = args.run
    height, pose_rows = lio.parse_pose_file(os.path.join(run_dir, "poses.txt"))
    rows = []
    for variant in args.which:
        errs = []
        for index, _, pose in pose_rows:
            cloud = lio.read_point_cloud(_cloud_path(run_dir, variant, index))
            world = cloud.transformed(pose, height)
            err = point_to_surface_error(world, cfg.scene)
            rows.append([variant, index, len(world), err.rms, err.max])
            errs.append(err)
        n = sum(e.per_point.size for e in errs)
        rms = math.sqrt(sum(float((e.per_point**2).sum()) for e in errs) / n) if n else 0.0
        print(f"gt-error {variant}: overall rms={rms:.6f} m over {n} points")
    lreport.write_csv(
        os.path.join(run_dir, "gt_error.csv"),
        ["variant", "scan", "points", "rms", "max"],
        rows,
    )
    return 0


def cmd_report(args) -> int:
    cfg = _load_config(args)
    run_dir = args.run
    report_dir = os.path.join(run_dir, "report")
    os.makedirs(report_dir, exist_ok=True)

    summary = []
    for name in ("deskew_report.csv", "icp_results.csv", "gt_error.csv"):
        path = os.path.join(run_dir, name)
        if not os.path.exists(path):
            continue
        header, rows = lreport.read_csv(path)
        summary.append([name, "rows", len(rows)])
        if name == "icp_results.csv":
            for variant in ("raw", "corrected"):
                vals = [float(r[header.index("mean_p2p_error")]) for r in rows if r[0] == variant]
                if vals:
                    summary.append([name, f"mean_p2p_{variant}", sum(vals) / len(vals)])

    merged = {}
    for variant in ("raw", "corrected"):
        path = os.path.join(run_dir, f"merged_{variant}.ply")
        if os.path.exists(path):
            merged[variant] = lio.read_point_cloud(path)
            for cell in cfg.cell_sizes:
                res = occupancy_count(merged[variant], cell)
                summary.append([f"merged_{variant}", f"occupied_cells_{cell:g}", res.occupied_cells])
    if "raw" in merged and "corrected" in merged:
        for cell in cfg.cell_sizes:
            raw_n = occupancy_count(merged["raw"], cell).occupied_cells
            corr_n = occupancy_count(merged["corrected"], cell).occupied_cells
            if raw_n:
                summary.append(["octree", f"reduction_ratio_{cell:g}", 1.0 - corr_n / raw_n])
        layers = [("raw", "#9a9a9a", merged["raw"]), ("corrected", "#d62728", merged["corrected"])]
        lreport.svg_topdown(os.path.join(report_dir, "topdown.svg"), layers, scene=cfg.scene)
    lreport.write_csv(os.path.join(report_dir, "summary.csv"), ["source", "metric", "value"], summary)
    print(f"report: wrote {report_dir}/summary.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidardeskew",
        description="Odometry-based LiDAR scan deskewing: simulation, correction, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="run configuration (TOML)")
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--run", default=_default_out(), help="run directory (default $LIDARDESKEW_OUT or ./out)")

    p = sub.add_parser("simulate", help="generate scans, CAN log, and ground-truth poses")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("deskew", help="motion-compensate scans with the CAN log")
    add_common(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel scan workers")
    p.set_defaults(func=cmd_deskew)

    p = sub.add_parser("icp", help="match consecutive raw and corrected clouds")
    add_common(p)
    p.set_defaults(func=cmd_icp)

    p = sub.add_parser("octree", help="occupancy cell counts of point cloud files")
    p.add_argument("clouds", nargs="+", help="point cloud files (.ply or .xyz)")
    p.add_argument("--cell", type=float, default=0.1, help="cell size in meters")
    p.add_argument("--out", default=None, help="optional CSV output path")
    p.set_defaults(func=cmd_octree)

    p = sub.add_parser("gt-error", help="point-to-surface error against the scene")
    add_common(p)
    p.add_argument(
        "--which", nargs="+", default=["raw", "corrected"], choices=["raw", "corrected"]
    )
    p.set_defaults(func=cmd_gt_error)

    p = sub.add_parser("report", help="summary tables and top-down SVG overlays")
    add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (lio.FormatError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
