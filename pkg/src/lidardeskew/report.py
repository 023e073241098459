"""Flat CSV tables and top-down SVG overlays of raw vs corrected clouds.

SVG output is generated directly (no plotting library) so that identical
inputs produce byte-identical files; the layout mirrors the usual
before/after figures: raw points in grey, corrected points in red,
ground-truth scene outlines in green.
"""

from __future__ import annotations

import numpy as np

from .core import PointCloud
from .io import atomic_write_text, fmt
from .scene import Scene


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    """Write a flat record table; floats at 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, float):
                cells.append(fmt(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty csv")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def _coord(x: float) -> str:
    return "%.4f" % x


def _layer_points(points: np.ndarray, max_points: int) -> np.ndarray:
    if points.shape[0] <= max_points:
        return points
    stride = int(np.ceil(points.shape[0] / max_points))
    return points[::stride]


def svg_topdown(
    path: str,
    layers: list[tuple[str, str, PointCloud]],
    scene: Scene | None = None,
    size_px: int = 900,
    max_points_per_layer: int = 20000,
) -> None:
    """Orthographic top-down scatter of point cloud layers.

    ``layers`` is a list of (label, css color, cloud); later layers draw on
    top.  World y is drawn upward.
    """
    all_xy = [c.points[:, :2] for _, _, c in layers if len(c)]
    if scene is not None:
        for post in scene.posts:
            all_xy.append(np.array([[post.cx - post.radius, post.cy - post.radius],
                                    [post.cx + post.radius, post.cy + post.radius]]))
        for fence in scene.fences:
            all_xy.append(np.array([[fence.x1, fence.y1], [fence.x2, fence.y2]]))
        for box in scene.boxes:
            all_xy.append(np.array([[box.xmin, box.ymin], [box.xmax, box.ymax]]))
    if not all_xy:
        raise ValueError("nothing to plot")
    xy = np.vstack(all_xy)
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = max(float((hi - lo).max()), 1.0)
    margin = 0.05 * span
    lo = lo - margin
    span = span + 2 * margin
    dot = span / 450.0

    def sx(x: float) -> str:
        return _coord((x - lo[0]) / span * size_px)

    def sy(y: float) -> str:
        # world y up, svg y down
        return _coord(size_px - (y - lo[1]) / span * size_px)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size_px}" height="{size_px}" '
        f'viewBox="0 0 {size_px} {size_px}">',
        f'<rect width="{size_px}" height="{size_px}" fill="#101010"/>',
    ]
    for label, color, cloud in layers:
        parts.append(f'<g id="{label}" fill="{color}">')
        r = _coord(max(dot / span * size_px, 0.7))
        for p in _layer_points(cloud.points, max_points_per_layer):
            parts.append(f'<circle cx="{sx(p[0])}" cy="{sy(p[1])}" r="{r}"/>')
        parts.append("</g>")
    if scene is not None:
        parts.append('<g id="scene" stroke="#2ca02c" stroke-width="1.5" fill="none">')
        for fence in scene.fences:
            parts.append(
                f'<line x1="{sx(fence.x1)}" y1="{sy(fence.y1)}" '
                f'x2="{sx(fence.x2)}" y2="{sy(fence.y2)}"/>'
            )
        for post in scene.posts:
            pr = _coord(post.radius / span * size_px)
            parts.append(f'<circle cx="{sx(post.cx)}" cy="{sy(post.cy)}" r="{pr}"/>')
        for box in scene.boxes:
            w = _coord((box.xmax - box.xmin) / span * size_px)
            h = _coord((box.ymax - box.ymin) / span * size_px)
            parts.append(
                f'<rect x="{sx(box.xmin)}" y="{sy(box.ymax)}" width="{w}" height="{h}"/>'
            )
        parts.append("</g>")
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")
