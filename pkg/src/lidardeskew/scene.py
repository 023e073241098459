"""Parametric ground-truth scenes: analytic ray casting and surface distances.

Primitives are deliberately simple (horizontal ground plane, vertical
cylinders, vertical rectangles, axis-aligned boxes) so intersections and
point-to-surface distances are exact closed forms.  That exactness is what
lets the deskew closure tests assert millimeter-level agreement.

Nearest hit wins; ties are broken by primitive order: ground, posts,
fences, boxes, each list in insertion order.  Material ids follow the same
ordering (ground is id 0) and are emitted as the per-point remission value
by the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-9


@dataclass(frozen=True)
class Post:
    """Vertical cylinder footed on the ground: lateral surface only."""

    cx: float
    cy: float
    radius: float
    height: float

    def __post_init__(self) -> None:
        if not (self.radius > 0.0 and self.height > 0.0):
            raise ValueError("post radius and height must be > 0")


@dataclass(frozen=True)
class Fence:
    """Vertical rectangle from (x1, y1) to (x2, y2), ground to ``height``."""

    x1: float
    y1: float
    x2: float
    y2: float
    height: float

    def __post_init__(self) -> None:
        if not (self.height > 0.0):
            raise ValueError("fence height must be > 0")
        if math.hypot(self.x2 - self.x1, self.y2 - self.y1) <= 0.0:
            raise ValueError("fence endpoints must be distinct")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, surfaces only."""

    xmin: float
    ymin: float
    zmin: float
    xmax: float
    ymax: float
    zmax: float

    def __post_init__(self) -> None:
        if not (self.xmax > self.xmin and self.ymax > self.ymin and self.zmax > self.zmin):
            raise ValueError("box must have positive extent on every axis")


@dataclass(frozen=True)
class Scene:
    ground: bool = True
    posts: tuple[Post, ...] = field(default_factory=tuple)
    fences: tuple[Fence, ...] = field(default_factory=tuple)
    boxes: tuple[Box, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "posts", tuple(self.posts))
        object.__setattr__(self, "fences", tuple(self.fences))
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def is_empty(self) -> bool:
        return not (self.ground or self.posts or self.fences or self.boxes)

    def material_ids(self) -> dict:
        """Material id per primitive: ground 0, then posts, fences, boxes."""
        ids: dict = {}
        mat = 0
        if self.ground:
            ids["ground"] = mat
            mat += 1
        for i, p in enumerate(self.posts):
            ids[("post", i)] = mat
            mat += 1
        for i, f in enumerate(self.fences):
            ids[("fence", i)] = mat
            mat += 1
        for i, b in enumerate(self.boxes):
            ids[("box", i)] = mat
            mat += 1
        return ids


# ---------------------------------------------------------------------------
# Ray casting.  origins (N, 3), dirs (N, 3) unit vectors; returns per-ray
# hit distance (inf for miss).


def _raycast_ground(origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    t = np.full(origins.shape[0], np.inf)
    uz = dirs[:, 2]
    moving = np.abs(uz) > _EPS
    cand = np.where(moving, -origins[:, 2] / np.where(moving, uz, 1.0), np.inf)
    ok = moving & (cand > _EPS)
    t[ok] = cand[ok]
    return t


def _raycast_post(origins: np.ndarray, dirs: np.ndarray, post: Post) -> np.ndarray:
    n = origins.shape[0]
    t = np.full(n, np.inf)
    ox = origins[:, 0] - post.cx
    oy = origins[:, 1] - post.cy
    ux, uy = dirs[:, 0], dirs[:, 1]
    a = ux * ux + uy * uy
    b = 2.0 * (ox * ux + oy * uy)
    c = ox * ox + oy * oy - post.radius**2
    disc = b * b - 4.0 * a * c
    hitq = (disc >= 0.0) & (a > _EPS)
    if not np.any(hitq):
        return t
    sq = np.sqrt(np.where(hitq, disc, 0.0))
    a_safe = np.where(hitq, a, 1.0)
    t1 = (-b - sq) / (2.0 * a_safe)
    t2 = (-b + sq) / (2.0 * a_safe)
    for cand in (t1, t2):
        z = origins[:, 2] + cand * dirs[:, 2]
        ok = hitq & (cand > _EPS) & (z >= 0.0) & (z <= post.height) & (cand < t)
        t[ok] = cand[ok]
    return t


def _raycast_fence(origins: np.ndarray, dirs: np.ndarray, fence: Fence) -> np.ndarray:
    t = np.full(origins.shape[0], np.inf)
    ex, ey = fence.x2 - fence.x1, fence.y2 - fence.y1
    length2 = ex * ex + ey * ey
    # horizontal plane normal (unnormalized is fine for the t ratio)
    nx, ny = -ey, ex
    denom = dirs[:, 0] * nx + dirs[:, 1] * ny
    moving = np.abs(denom) > _EPS * math.sqrt(length2)
    num = (fence.x1 - origins[:, 0]) * nx + (fence.y1 - origins[:, 1]) * ny
    cand = np.where(moving, num / np.where(moving, denom, 1.0), -1.0)
    hx = origins[:, 0] + cand * dirs[:, 0]
    hy = origins[:, 1] + cand * dirs[:, 1]
    hz = origins[:, 2] + cand * dirs[:, 2]
    s = ((hx - fence.x1) * ex + (hy - fence.y1) * ey) / length2
    ok = moving & (cand > _EPS) & (s >= 0.0) & (s <= 1.0) & (hz >= 0.0) & (hz <= fence.height)
    t[ok] = cand[ok]
    return t


def _raycast_box(origins: np.ndarray, dirs: np.ndarray, box: Box) -> np.ndarray:
    lo = np.array([box.xmin, box.ymin, box.zmin])
    hi = np.array([box.xmax, box.ymax, box.zmax])
    inv = np.where(np.abs(dirs) > _EPS, 1.0 / np.where(np.abs(dirs) > _EPS, dirs, 1.0), np.inf)
    t_lo = (lo[None, :] - origins) * inv
    t_hi = (hi[None, :] - origins) * inv
    # rays parallel to a slab: inside the slab -> (-inf, inf), outside -> miss
    parallel = np.abs(dirs) <= _EPS
    inside = (origins >= lo[None, :]) & (origins <= hi[None, :])
    t_enter = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t_lo, t_hi))
    t_exit = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t_lo, t_hi))
    t_near = t_enter.max(axis=1)
    t_far = t_exit.min(axis=1)
    ok = (t_near <= t_far) & (t_near > _EPS)
    t = np.full(origins.shape[0], np.inf)
    t[ok] = t_near[ok]
    return t


def raycast(scene: Scene, origins: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-hit distances for a batch of rays.

    Returns ``(t, material)``: hit distance per ray (inf on miss) and the
    material id of the primitive hit (-1 on miss).  Ties keep the earlier
    primitive in scene order.
    """
    origins = np.asarray(origins, dtype=float).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
    n = origins.shape[0]
    best_t = np.full(n, np.inf)
    best_mat = np.full(n, -1, dtype=np.int64)
    mat = 0
    if scene.ground:
        t = _raycast_ground(origins, dirs)
        closer = t < best_t
        best_t[closer] = t[closer]
        best_mat[closer] = mat
        mat += 1
    for prims, caster in (
        (scene.posts, _raycast_post),
        (scene.fences, _raycast_fence),
        (scene.boxes, _raycast_box),
    ):
        for prim in prims:
            t = caster(origins, dirs, prim)
            closer = t < best_t
            best_t[closer] = t[closer]
            best_mat[closer] = mat
            mat += 1
    return best_t, best_mat


# ---------------------------------------------------------------------------
# Unsigned distance from points to the nearest primitive surface.


def _dist_ground(pts: np.ndarray) -> np.ndarray:
    return np.abs(pts[:, 2])


def _dist_post(pts: np.ndarray, post: Post) -> np.ndarray:
    rho = np.hypot(pts[:, 0] - post.cx, pts[:, 1] - post.cy)
    dr = rho - post.radius
    dz = np.maximum(np.maximum(-pts[:, 2], pts[:, 2] - post.height), 0.0)
    return np.hypot(dr, dz)


def _dist_fence(pts: np.ndarray, fence: Fence) -> np.ndarray:
    ex, ey = fence.x2 - fence.x1, fence.y2 - fence.y1
    length2 = ex * ex + ey * ey
    s = ((pts[:, 0] - fence.x1) * ex + (pts[:, 1] - fence.y1) * ey) / length2
    s = np.clip(s, 0.0, 1.0)
    qx = fence.x1 + s * ex
    qy = fence.y1 + s * ey
    dxy = np.hypot(pts[:, 0] - qx, pts[:, 1] - qy)
    dz = np.maximum(np.maximum(-pts[:, 2], pts[:, 2] - fence.height), 0.0)
    return np.hypot(dxy, dz)


def _dist_box(pts: np.ndarray, box: Box) -> np.ndarray:
    lo = np.array([box.xmin, box.ymin, box.zmin])
    hi = np.array([box.xmax, box.ymax, box.zmax])
    outside = np.maximum(np.maximum(lo[None, :] - pts, pts - hi[None, :]), 0.0)
    d_out = np.linalg.norm(outside, axis=1)
    # inside the solid: distance to the closest face
    slack = np.minimum(pts - lo[None, :], hi[None, :] - pts)
    d_in = np.maximum(slack.min(axis=1), 0.0)
    is_inside = np.all((pts >= lo[None, :]) & (pts <= hi[None, :]), axis=1)
    return np.where(is_inside, d_in, d_out)


def surface_distance(scene: Scene, points: np.ndarray) -> np.ndarray:
    """Per-point unsigned distance to the nearest surface of the scene."""
    if scene.is_empty():
        raise ValueError("scene has no primitives")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    best = np.full(pts.shape[0], np.inf)
    if scene.ground:
        np.minimum(best, _dist_ground(pts), out=best)
    for post in scene.posts:
        np.minimum(best, _dist_post(pts, post), out=best)
    for fence in scene.fences:
        np.minimum(best, _dist_fence(pts, fence), out=best)
    for box in scene.boxes:
        np.minimum(best, _dist_box(pts, box), out=best)
    return best
