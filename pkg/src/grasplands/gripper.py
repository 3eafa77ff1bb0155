"""Parallel-jaw gripper: dimensions, grasp frames, collision bodies.

Grasp-frame convention
----------------------
The frame x-axis is the approach direction (the view).  The reference
orientation comes from the minimal rotation taking world +z onto the view
(Rodrigues form; the exact antipode maps to a half-turn about x).  The
in-plane angle then rotates the closing (y) and height (z) axes about x.
Frame origin sits at the grasp center; gripper bodies are laid out along the
approach axis so the finger tips reach ``depth`` past the center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Array, RigidTransform, SpatialIndex, require_unit


@dataclass(frozen=True)
class GripperModel:
    max_width: float = 0.10
    finger_length: float = 0.06
    finger_thickness: float = 0.01
    finger_height: float = 0.02
    palm_depth: float = 0.02

    def __post_init__(self):
        vals = (self.max_width, self.finger_length, self.finger_thickness,
                self.finger_height, self.palm_depth)
        if any(v <= 0 for v in vals):
            raise ValueError("gripper dimensions must be positive")
        if self.max_width <= 2 * self.finger_thickness:
            raise ValueError("max_width must exceed twice the finger thickness")

    def kernel_params(self, width_clearance: float = 0.01) -> np.ndarray:
        return np.array([self.finger_length, self.finger_thickness,
                         self.finger_height, self.palm_depth,
                         self.max_width, width_clearance])


@dataclass(frozen=True)
class GraspPose:
    center: Array
    view: Array
    in_plane_angle: float
    depth: float
    width: float
    score: float

    def frame(self) -> RigidTransform:
        return grasp_frame(self.center, self.view, self.in_plane_angle)


@dataclass(frozen=True)
class OrientedBox:
    center: Array
    rotation: Array  # columns = box axes in world
    half_extents: Array

    def contains(self, points: Array, slack: float = 1e-9) -> np.ndarray:
        """Strict inside test with boundary slack."""
        local = (np.atleast_2d(points) - self.center) @ self.rotation
        return np.all(np.abs(local) < self.half_extents - slack, axis=1)

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm(self.half_extents))


def view_frame_axes(view: Array) -> Array:
    """Rows (approach, closing-at-angle-0, height-at-angle-0) for one view."""
    v = np.asarray(view, dtype=np.float64)
    vx, vy, vz = v[0], v[1], v[2]
    if vz < -1.0 + 1e-12:
        # antipode of +z: half-turn about x
        return np.array([[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]])
    c1 = 1.0 + vz
    y0 = np.array([-vx * vy / c1, 1.0 - vy * vy / c1, -vy])
    z0 = np.cross(v, y0)
    return np.stack([v, y0, z0])


def view_frames(views: Array) -> Array:
    """(V, 3, 3) stacked frame rows for a batch of views."""
    views = np.atleast_2d(np.asarray(views, dtype=np.float64))
    out = np.empty((len(views), 3, 3))
    for i, v in enumerate(views):
        out[i] = view_frame_axes(v)
    return out


def grasp_frame(center: Array, view: Array, in_plane_angle: float) -> RigidTransform:
    """Grasp frame at the given center (rotation columns = x, y, z axes)."""
    require_unit(view)
    axes = view_frame_axes(view)
    ca, sa = np.cos(in_plane_angle), np.sin(in_plane_angle)
    y = ca * axes[1] + sa * axes[2]
    z = -sa * axes[1] + ca * axes[2]
    rot = np.stack([axes[0], y, z], axis=1)
    return RigidTransform(rot, np.asarray(center, dtype=np.float64))


def gripper_bodies(gripper: GripperModel, frame: RigidTransform, depth: float,
                   width: float) -> list[OrientedBox]:
    """Two fingers + palm as oriented boxes in world coordinates."""
    if width > gripper.max_width + 1e-12:
        raise ValueError("width exceeds gripper max_width")
    lf, ft, fh, pd = (gripper.finger_length, gripper.finger_thickness,
                      gripper.finger_height, gripper.palm_depth)
    rot = frame.rotation
    c = frame.translation
    half_f = np.array([lf / 2.0, ft / 2.0, fh / 2.0])
    v_off = width / 2.0 + ft / 2.0
    u_f = depth - lf / 2.0
    left = OrientedBox(c + rot @ np.array([u_f, -v_off, 0.0]), rot, half_f)
    right = OrientedBox(c + rot @ np.array([u_f, v_off, 0.0]), rot, half_f)
    half_p = np.array([pd / 2.0, width / 2.0 + ft, fh / 2.0])
    u_p = depth - lf - pd / 2.0
    palm = OrientedBox(c + rot @ np.array([u_p, 0.0, 0.0]), rot, half_p)
    return [left, right, palm]


def contact_radius(gripper: GripperModel, depths) -> float:
    """Radius around a grasp center that bounds every possible contact point
    over the given depth grid (at any width up to the full opening)."""
    u_lo = min(depths) - gripper.finger_length
    u_hi = max(depths)
    u_max = max(-u_lo, u_hi, 0.0)
    return float(np.sqrt(u_max**2 + (gripper.max_width / 2.0) ** 2
                         + (gripper.finger_height / 2.0) ** 2)) + 1e-9


def collision_radius(gripper: GripperModel, depths) -> float:
    """Radius around a grasp center that bounds the swept gripper volume
    (fingers and palm) over the given depth grid."""
    u_lo = min(depths) - gripper.finger_length - gripper.palm_depth
    u_hi = max(depths)
    u_max = max(-u_lo, u_hi, 0.0)
    v_max = gripper.max_width / 2.0 + gripper.finger_thickness
    return float(np.sqrt(u_max**2 + v_max**2
                         + (gripper.finger_height / 2.0) ** 2)) + 1e-9


def grasp_exclusion(gripper: GripperModel, frame: RigidTransform, depth: float,
                    width: float) -> OrientedBox:
    """Open inter-finger region (where the target sits; never a collision)."""
    lf, fh = gripper.finger_length, gripper.finger_height
    rot = frame.rotation
    center = frame.translation + rot @ np.array([depth - lf / 2.0, 0.0, 0.0])
    return OrientedBox(center, rot, np.array([lf / 2.0, width / 2.0, fh / 2.0]))


def check_collision(bodies: list[OrientedBox], scene_index: SpatialIndex,
                    exclusion: OrientedBox | None = None) -> bool:
    """True iff a scene point lies strictly inside a body (and outside the
    exclusion volume)."""
    if len(scene_index) == 0:
        return False
    for body in bodies:
        cand = scene_index.within(body.center, body.circumradius)
        if cand.size == 0:
            continue
        pts = scene_index.positions[cand]
        inside = body.contains(pts)
        if not np.any(inside):
            continue
        if exclusion is None:
            return True
        if np.any(inside & ~exclusion.contains(pts)):
            return True
    return False


def grasp_collides(gripper: GripperModel, pose: GraspPose,
                   scene_index: SpatialIndex) -> bool:
    frame = pose.frame()
    bodies = gripper_bodies(gripper, frame, pose.depth, pose.width)
    excl = grasp_exclusion(gripper, frame, pose.depth, pose.width)
    return check_collision(bodies, scene_index, excl)


def cylinder_crop(seed: Array, view: Array, points: Array, r: float = 0.05,
                  h_range: tuple[float, float] = (-0.02, 0.04),
                  k_count: int = 16, rng_seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Group points inside the grasp-aligned cylinder around a seed.

    Membership: approach coordinate in [h_min, h_max] and radial distance from
    the approach axis <= r.  If more than ``k_count`` qualify, a seeded uniform
    subset is drawn.  Returns (ascending indices, grasp-frame coordinates / r).
    """
    if r <= 0:
        raise ValueError("cylinder radius must be positive")
    h_min, h_max = h_range
    if not h_min < h_max:
        raise ValueError("h_range must be increasing")
    axes = view_frame_axes(view)
    rel = np.atleast_2d(np.asarray(points, dtype=np.float64)) - np.asarray(seed, dtype=np.float64)
    local = rel @ axes.T  # columns: approach u, closing v, height w
    u = local[:, 0]
    rad2 = local[:, 1] ** 2 + local[:, 2] ** 2
    inside = np.flatnonzero((u >= h_min) & (u <= h_max) & (rad2 <= r * r))
    if inside.size > k_count:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed)))
        inside = np.sort(rng.choice(inside, size=k_count, replace=False))
    return inside, local[inside] / r
