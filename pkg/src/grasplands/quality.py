"""Antipodal grasp quality: contact search, minimum friction, score mapping.

The model: close the jaws along the frame's y axis, take the extreme closing
coordinates inside the finger sweep as contact bands, pick one representative
contact per band (closest to the approach axis), and ask how much friction the
two contacts need for the grasp to be antipodal.  The score maps that minimum
friction coefficient to [0, 1] on a log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Array, RigidTransform
from .gripper import GripperModel, view_frames


@dataclass(frozen=True)
class ContactPair:
    left_point: Array | None
    right_point: Array | None
    left_normal: Array | None
    right_normal: Array | None
    width: float
    valid: bool

    @staticmethod
    def invalid() -> "ContactPair":
        return ContactPair(None, None, None, None, 0.0, False)


@dataclass(frozen=True)
class QualityConfig:
    mu_min: float = 0.1
    mu_max: float = 1.0
    score_threshold_c: float = 0.0

    def __post_init__(self):
        if not 0 < self.mu_min < self.mu_max:
            raise ValueError("need 0 < mu_min < mu_max")
        if not 0.0 <= self.score_threshold_c < 1.0:
            raise ValueError("score_threshold_c must be in [0, 1)")

    @property
    def feasible_mu_threshold(self) -> float:
        """mu* below this value <=> score above threshold c.

        Precomputing the threshold keeps the feasibility indicator free of
        logarithms inside the hot kernels.
        """
        c = self.score_threshold_c
        if c == 0.0:
            return self.mu_max
        return self.mu_max ** (1.0 - c) * self.mu_min**c

    def kernel_params(self, band_eps: float) -> np.ndarray:
        return np.array([self.mu_min, self.mu_max, self.feasible_mu_threshold,
                         1.0 / math.log(self.mu_max / self.mu_min), band_eps])


def find_contacts(frame: RigidTransform, depth: float, points: Array,
                  normals: Array, gripper: GripperModel,
                  band_eps: float) -> ContactPair:
    """Contact pair for one grasp against an object's surface points.

    The closing region is the finger sweep: approach coordinate in
    [depth - finger_length, depth], |height| <= finger_height/2,
    |closing| <= max_width/2.  Contact bands are ``band_eps`` slabs at the
    extreme closing coordinates (conventionally 2x the surface sampling
    spacing); the representative contact is the band point closest to the
    approach axis.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    nrm = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    rel = pts - frame.translation
    local = rel @ frame.rotation  # columns u, v, w
    u, v, w = local[:, 0], local[:, 1], local[:, 2]
    member = ((u >= depth - gripper.finger_length) & (u <= depth)
              & (np.abs(v) <= gripper.max_width / 2.0)
              & (np.abs(w) <= gripper.finger_height / 2.0))
    sel = np.flatnonzero(member)
    if sel.size == 0:
        return ContactPair.invalid()
    vs = v[sel]
    cmin = vs.min()
    cmax = vs.max()
    width = float(cmax - cmin)
    if width <= 0.0 or width > gripper.max_width:
        return ContactPair.invalid()
    rad2 = vs * vs + w[sel] * w[sel]
    lband = np.flatnonzero(vs <= cmin + band_eps)
    rband = np.flatnonzero(vs >= cmax - band_eps)
    li = sel[lband[int(np.argmin(rad2[lband]))]]
    ri = sel[rband[int(np.argmin(rad2[rband]))]]
    return ContactPair(pts[li], pts[ri], nrm[li], nrm[ri], width, True)


def min_antipodal_friction(contacts: ContactPair) -> float:
    """Smallest friction coefficient making the pair antipodal (inf if none).

    Each contact's inward normal must make an angle < 90 degrees with the
    closing line toward the opposite contact; the needed friction is the worse
    of the two tangents.
    """
    if not contacts.valid:
        return math.inf
    g = np.asarray(contacts.right_point) - np.asarray(contacts.left_point)
    gn = np.linalg.norm(g)
    if gn < 1e-12:
        return math.inf
    ghat = g / gn
    tans = []
    for normal, toward in ((contacts.left_normal, ghat), (contacts.right_normal, -ghat)):
        cos = float(np.dot(-np.asarray(normal), toward))
        if cos <= 0.0:
            return math.inf
        sin = float(np.linalg.norm(np.cross(-np.asarray(normal), toward)))
        tans.append(sin / cos)
    return max(tans)


def grasp_score(mu_star: float, mu_min: float = 0.1, mu_max: float = 1.0) -> float:
    """Log-scale quality in [0, 1]; 1 at mu_min and below, 0 from mu_max up."""
    if not 0 < mu_min < mu_max:
        raise ValueError("need 0 < mu_min < mu_max")
    if mu_star > mu_max:
        return 0.0
    mu_c = min(max(mu_star, mu_min), mu_max)
    return min(1.0, math.log(mu_max / mu_c) / math.log(mu_max / mu_min))


@dataclass
class CandidateGrid:
    """Per-cell results over the (view, angle, depth) candidate grid."""

    mu_star: Array  # (V, A, D), inf where no valid contact pair
    score: Array  # raw quality, not collision-masked
    width: Array
    valid: Array  # uint8: contact pair valid
    collision_free: Array  # uint8: 1 where free (or not evaluated)
    feasible_mu_threshold: float

    @property
    def feasible(self) -> Array:
        return (self.valid == 1) & (self.mu_star < self.feasible_mu_threshold) \
            & (self.collision_free == 1)


def evaluate_candidate_grid(point: Array, views: Array, angles: int,
                            depths: Array, object_points: Array,
                            object_normals: Array, gripper: GripperModel,
                            quality: QualityConfig, band_eps: float,
                            scene_points: Array | None = None,
                            width_clearance: float = 0.01) -> CandidateGrid:
    """Evaluate the full V x A x D candidate grid at one point.

    Contacts come from ``object_points``; if ``scene_points`` is given each
    valid cell also gets a collision-free flag against it.
    """
    point = np.asarray(point, dtype=np.float64).reshape(3)
    views = np.atleast_2d(np.asarray(views, dtype=np.float64))
    nv = len(views)
    obj = np.ascontiguousarray(object_points, dtype=np.float64).reshape(-1, 3)
    nrm = np.ascontiguousarray(object_normals, dtype=np.float64).reshape(-1, 3)
    pts = np.tile(point, (nv, 1))
    frames = view_frames(views)
    n_obj = len(obj)
    own_idx = np.tile(np.arange(n_obj, dtype=np.int64), nv)
    own_off = np.arange(nv + 1, dtype=np.int64) * n_obj
    if scene_points is not None:
        scn = np.ascontiguousarray(scene_points, dtype=np.float64).reshape(-1, 3)
        n_scn = len(scn)
        col_idx = np.tile(np.arange(n_scn, dtype=np.int64), nv)
        col_off = np.arange(nv + 1, dtype=np.int64) * n_scn
        use_collision = 1
    else:
        scn = np.zeros((0, 3))
        col_idx = np.zeros(0, dtype=np.int64)
        col_off = np.zeros(nv + 1, dtype=np.int64)
        use_collision = 0
    cos_a, sin_a = angle_tables(angles)
    mu, q, w, valid, cfree = kernels.cell_eval(
        pts, frames, own_idx, own_off, obj, nrm, col_idx, col_off, scn,
        cos_a, sin_a, np.asarray(depths, dtype=np.float64),
        gripper.kernel_params(width_clearance), quality.kernel_params(band_eps),
        np.int64(use_collision))
    return CandidateGrid(mu, q, w, valid, cfree, quality.feasible_mu_threshold)


def angle_tables(angles: int) -> tuple[Array, Array]:
    """cos/sin of the in-plane angle bins k*pi/A, k = 0..A-1."""
    if angles < 1:
        raise ValueError("need at least one angle bin")
    a = np.arange(angles, dtype=np.float64) * (np.pi / angles)
    return np.cos(a), np.sin(a)


def angle_values(angles: int) -> Array:
    return np.arange(angles, dtype=np.float64) * (np.pi / angles)
