"""Shared fixtures: a structure-rich yard scene and a cluster counter.

Primitive coordinates are deliberately non-round so that surfaces do not
coincide with occupancy cell boundaries (a measure-zero alignment that
would distort cell counts).
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial import cKDTree

import lidardeskew as ld


@pytest.fixture(scope="session")
def yard_scene() -> ld.Scene:
    """Suburban yard: perimeter fences, posts, and two boxes on flat ground."""
    return ld.Scene(
        ground=True,
        posts=(
            ld.Post(12.13, -2.21, 0.12, 3.0),
            ld.Post(16.37, 5.29, 0.15, 2.5),
            ld.Post(8.41, -6.07, 0.10, 2.0),
            ld.Post(22.23, 2.11, 0.20, 3.5),
            ld.Post(-9.13, 3.27, 0.15, 3.0),
            ld.Post(5.17, 9.23, 0.12, 2.8),
            ld.Post(-4.31, -9.17, 0.14, 2.6),
            ld.Post(18.59, -7.43, 0.16, 3.2),
        ),
        fences=(
            ld.Fence(26.13, -10.21, 26.53, 6.37, 2.2),
            ld.Fence(-12.29, -8.13, -11.87, 8.21, 2.0),
            ld.Fence(-8.17, 12.31, 14.23, 12.73, 2.1),
            ld.Fence(-8.43, -12.19, 14.57, -12.61, 2.1),
        ),
        boxes=(
            ld.Box(6.13, 6.21, 0.0, 8.07, 8.13, 1.2),
            ld.Box(-6.87, -4.13, 0.0, -4.93, -2.27, 1.5),
        ),
    )


@pytest.fixture(scope="session")
def structure_scene(yard_scene: ld.Scene) -> ld.Scene:
    """The yard without its ground plane (vertical structures only)."""
    return ld.Scene(
        ground=False,
        posts=yard_scene.posts,
        fences=yard_scene.fences,
        boxes=yard_scene.boxes,
    )


def cluster_sizes(xy: np.ndarray, eps: float) -> list[int]:
    """Sizes of connected components under radius-eps connectivity."""
    n = xy.shape[0]
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in cKDTree(xy).query_pairs(eps):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    from collections import Counter

    counts = Counter(find(i) for i in range(n))
    return sorted(counts.values(), reverse=True)


def merge_world(scans_and_incs, spec, cfg, corrected: bool):
    """Merge per-scan clouds into the world frame using exact end poses."""
    clouds = []
    for scan, inc in scans_and_incs:
        if corrected:
            cloud, _ = ld.deskew_scan(scan, inc)
        else:
            cloud = ld.project_scan(scan)
        pose = spec.pose_at(scan.end_time)
        clouds.append(cloud.transformed(pose, cfg.sensor_height))
    return ld.PointCloud.merge(clouds)
