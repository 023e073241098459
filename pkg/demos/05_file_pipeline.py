"""The same workflow through files and the command line
=======================================================

Everything the previous demos did in memory also runs as a reproducible
file pipeline: scans, CAN logs, and poses are plain text; clouds are PLY.
This script writes a run configuration and drives the CLI subcommands
programmatically (equivalent shell commands are printed as it goes).
"""

import os

from lidardeskew.cli import cli_main

HERE = os.path.dirname(__file__)
OUT = os.path.join(HERE, "out", "pipeline")
os.makedirs(OUT, exist_ok=True)

CONFIG = """
schema = 1
seed = 42

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

[noise]
range_sigma = 0.01
wheel_tick_sigma = 0.0005

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
[[scene.fences]]
start = [26.13, -10.21]
end = [26.53, 6.37]
height = 2.2
[[scene.fences]]
start = [-12.29, -8.13]
end = [-11.87, 8.21]
height = 2.0

[run]
can_rate_hz = 100.0
num_scans = 8
cell_sizes = [0.1]
"""

config_path = os.path.join(OUT, "arc25.toml")
with open(config_path, "w") as fh:
    fh.write(CONFIG)

run_dir = os.path.join(OUT, "run")
for argv in (
    ["simulate", "--config", config_path, "--run", run_dir],
    ["deskew", "--config", config_path, "--run", run_dir],
    ["icp", "--config", config_path, "--run", run_dir],
    ["octree", "--cell", "0.1",
     os.path.join(run_dir, "merged_raw.ply"), os.path.join(run_dir, "merged_corrected.ply")],
    ["gt-error", "--config", config_path, "--run", run_dir],
    ["report", "--config", config_path, "--run", run_dir],
):
    print(f"\n$ lidardeskew {' '.join(argv)}")
    rc = cli_main(argv)
    assert rc == 0, f"subcommand failed with exit code {rc}"

print(f"\nartifacts under {run_dir}: scans/, clouds/, *.csv, report/topdown.svg")
