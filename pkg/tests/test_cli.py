import os

import pytest

from lidardeskew.cli import cli_main
from lidardeskew.report import read_csv

LINEAR_CONFIG = """
schema = 1
seed = 11

[lidar]
scan_period = 0.1
num_beams = 12
inclination_span_deg = [-16.0, 2.0]
azimuth_step_deg = 1.0
mirror = "clockwise"
max_range = 80.0
height = 1.9

[wheels]
radius = 0.3
track = 1.5

[trajectory]
kind = "linear"
speed = 10.0
duration = 0.5

[scene]
ground = true
[[scene.posts]]
center = [12.13, -1.21]
radius = 0.1
height = 3.0
[[scene.fences]]
start = [20.13, -8.21]
end = [20.53, 8.37]
height = 2.0

[run]
can_rate_hz = 100.0
num_scans = 4
cell_sizes = [0.1]
"""

ROTATION_CONFIG = """
schema = 1
seed = 11

[lidar]
scan_period = 0.1
num_beams = 16
inclination_span_deg = [-20.0, 2.0]
azimuth_step_deg = 1.0
mirror = "clockwise"
max_range = 80.0
height = 1.9

[wheels]
radius = 0.3
track = 1.5

[trajectory]
kind = "arc"
speed = 5.0
yaw_rate_deg = -25.0
duration = 1.0

[scene]
ground = true
[[scene.posts]]
center = [12.13, -2.21]
radius = 0.12
height = 3.0
[[scene.posts]]
center = [16.37, 5.29]
radius = 0.15
height = 2.5
[[scene.posts]]
center = [8.41, -6.07]
radius = 0.1
height = 2.0
[[scene.posts]]
center = [22.23, 2.11]
radius = 0.2
height = 3.5
[[scene.posts]]
center = [-9.13, 3.27]
radius = 0.15
height = 3.0
[[scene.posts]]
center = [18.59, -7.43]
radius = 0.16
height = 3.2
[[scene.fences]]
start = [26.13, -10.21]
end = [26.53, 6.37]
height = 2.2
[[scene.fences]]
start = [-12.29, -8.13]
end = [-11.87, 8.21]
height = 2.0
[[scene.fences]]
start = [-8.17, 12.31]
end = [14.23, 12.73]
height = 2.1
[[scene.fences]]
start = [-8.43, -12.19]
end = [14.57, -12.61]
height = 2.1
[[scene.boxes]]
min = [6.13, 6.21, 0.0]
max = [8.07, 8.13, 1.2]

[run]
can_rate_hz = 100.0
num_scans = 10
cell_sizes = [0.1]
"""


@pytest.fixture()
def linear_run(tmp_path):
    cfg = tmp_path / "linear.toml"
    cfg.write_text(LINEAR_CONFIG)
    run = tmp_path / "run"
    assert cli_main(["simulate", "--config", str(cfg), "--run", str(run)]) == 0
    return cfg, run


def read_tree(root):
    out = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            path = os.path.join(dirpath, name)
            out[os.path.relpath(path, root)] = open(path, "rb").read()
    return out


class TestUsage:
    def test_no_arguments_exits_2(self, capsys):
        assert cli_main([]) == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_exits_2(self, capsys):
        assert cli_main(["simulate", "--bogus"]) == 2

    def test_missing_input_reports_error(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text(LINEAR_CONFIG)
        rc = cli_main(["deskew", "--config", str(cfg), "--run", str(tmp_path / "void")])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestPipeline:
    def test_simulate_writes_expected_files(self, linear_run):
        _, run = linear_run
        assert (run / "odom.txt").exists()
        assert (run / "poses.txt").exists()
        assert len(list((run / "scans").iterdir())) == 4

    def test_deskew_then_gt_error_is_below_closure_threshold(self, linear_run, capsys):
        cfg, run = linear_run
        assert cli_main(["deskew", "--config", str(cfg), "--run", str(run)]) == 0
        assert cli_main(["gt-error", "--config", str(cfg), "--run", str(run)]) == 0
        header, rows = read_csv(str(run / "gt_error.csv"))
        rms_idx = header.index("rms")
        corrected = [float(r[rms_idx]) for r in rows if r[0] == "corrected"]
        raw = [float(r[rms_idx]) for r in rows if r[0] == "raw"]
        assert corrected and max(corrected) < 1e-3
        assert min(raw) > 0.01

    def test_octree_direction_on_rotation_fixture(self, tmp_path, capsys):
        cfg = tmp_path / "rot.toml"
        cfg.write_text(ROTATION_CONFIG)
        run = tmp_path / "rotrun"
        assert cli_main(["simulate", "--config", str(cfg), "--run", str(run)]) == 0
        assert cli_main(["deskew", "--config", str(cfg), "--run", str(run)]) == 0
        capsys.readouterr()
        out_csv = str(run / "octree.csv")
        rc = cli_main(
            ["octree", "--cell", "0.1", str(run / "merged_raw.ply"),
             str(run / "merged_corrected.ply"), "--out", out_csv]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        header, rows = read_csv(out_csv)
        counts = {os.path.basename(r[0]): int(r[2]) for r in rows}
        assert counts["merged_corrected.ply"] <= counts["merged_raw.ply"]

    def test_icp_subcommand_writes_results(self, linear_run):
        cfg, run = linear_run
        assert cli_main(["deskew", "--config", str(cfg), "--run", str(run)]) == 0
        assert cli_main(["icp", "--config", str(cfg), "--run", str(run)]) == 0
        header, rows = read_csv(str(run / "icp_results.csv"))
        assert len(rows) == 6  # 3 pairs x raw and corrected
        assert all(r[header.index("converged")] == "true" for r in rows)

    def test_report_emits_summary_and_svg(self, linear_run):
        cfg, run = linear_run
        assert cli_main(["deskew", "--config", str(cfg), "--run", str(run)]) == 0
        assert cli_main(["icp", "--config", str(cfg), "--run", str(run)]) == 0
        assert cli_main(["report", "--config", str(cfg), "--run", str(run)]) == 0
        assert (run / "report" / "summary.csv").exists()
        svg = (run / "report" / "topdown.svg").read_text()
        assert svg.startswith("<?xml")
        assert 'id="raw"' in svg and 'id="corrected"' in svg and 'id="scene"' in svg

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text(LINEAR_CONFIG.replace("range_sigma = 0.0", ""))
        run_a = tmp_path / "a"
        run_b = tmp_path / "b"
        assert cli_main(["simulate", "--config", str(cfg), "--run", str(run_a), "--seed", "99"]) == 0
        assert cli_main(["simulate", "--config", str(cfg), "--run", str(run_b), "--seed", "99"]) == 0
        assert read_tree(run_a) == read_tree(run_b)


class TestDeterminism:
    def test_full_pipeline_is_byte_identical(self, tmp_path):
        cfg = tmp_path / "rot.toml"
        cfg.write_text(ROTATION_CONFIG + "\n[noise]\nrange_sigma = 0.01\n")
        trees = []
        for name in ("one", "two"):
            run = tmp_path / name
            for argv in (
                ["simulate", "--config", str(cfg), "--run", str(run)],
                ["deskew", "--config", str(cfg), "--run", str(run)],
                ["icp", "--config", str(cfg), "--run", str(run)],
                ["gt-error", "--config", str(cfg), "--run", str(run)],
                ["report", "--config", str(cfg), "--run", str(run)],
            ):
                assert cli_main(argv) == 0
            trees.append(read_tree(run))
        assert trees[0].keys() == trees[1].keys()
        for key in trees[0]:
            assert trees[0][key] == trees[1][key], f"{key} differs between runs"
