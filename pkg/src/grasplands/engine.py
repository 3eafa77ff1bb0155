"""Graspness landscapes: dense candidate-grid evaluation over scenes.

For every object model point and every approach view, the engine counts which
(angle, depth) candidates admit an antipodal grasp — optionally requiring the
gripper to be collision-free against the rest of the scene — and aggregates
the counts into per-point and per-view scores, normalized per scene, then
projected onto rendered partial clouds by nearest-neighbor association.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .geometry import Array, PointCloud, fibonacci_sphere
from .gripper import GripperModel, collision_radius, contact_radius, view_frames
from .quality import QualityConfig, angle_tables
from .scene import AssembledScene

AGGREGATION_MODES = {"feasible-ratio": 0, "mean-score": 1, "max-score": 2}


@dataclass(frozen=True)
class GridConfig:
    """Candidate grid: V views x A in-plane angles x D approach depths."""

    views: int = 300
    angles: int = 12
    depths: tuple[float, ...] = (0.01, 0.02, 0.03, 0.04)

    def __post_init__(self):
        if self.views < 1 or self.angles < 1 or len(self.depths) < 1:
            raise ValueError("grid needs at least one view, angle and depth")

    @property
    def cells_per_view(self) -> int:
        return self.angles * len(self.depths)

    def view_directions(self) -> Array:
        return fibonacci_sphere(self.views)


@dataclass
class GraspableLandscape:
    """Raw (and optionally normalized) graspness over a set of points."""

    positions: Array  # (N, 3)
    normals: Array
    object_id: Array  # (N,) int32
    views: Array  # (V, 3)
    aggregation: str
    point_raw: Array  # (N,) feasible-candidate fraction
    view_raw: Array  # (N, V) per-view scores under `aggregation`
    point_norm: Array | None = None
    view_norm: Array | None = None

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def normalized(self) -> bool:
        return self.point_norm is not None


def _ball_csr(tree: cKDTree, queries: Array, radius: float,
              keep=None) -> tuple[Array, Array]:
    """CSR (flat ascending indices, offsets) of in-radius neighbors.

    ``keep(row, candidate_indices)`` may prune candidates per query row.
    """
    lists = tree.query_ball_point(queries, radius)
    idx_parts = []
    off = np.zeros(len(queries) + 1, dtype=np.int64)
    for i, lst in enumerate(lists):
        cand = np.sort(np.asarray(lst, dtype=np.int64))
        if keep is not None:
            cand = keep(i, cand)
        idx_parts.append(cand)
        off[i + 1] = off[i] + len(cand)
    idx = np.concatenate(idx_parts) if idx_parts else np.zeros(0, dtype=np.int64)
    return idx, off


def compute_landscape(assembled: AssembledScene, grid: GridConfig,
                      quality: QualityConfig, gripper: GripperModel,
                      aggregation: str = "feasible-ratio", *,
                      use_collision: bool = True,
                      width_clearance: float = 0.01) -> GraspableLandscape:
    """Raw graspness over all object model points of an assembled scene.

    ``use_collision=True`` is the scene-level landscape: every candidate must
    keep the gripper clear of the other objects and the table.  Contacts are
    always found against the owning object only.
    """
    if aggregation not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation {aggregation!r}")
    cloud = assembled.cloud
    if cloud.normals is None:
        raise ValueError("assembled cloud lacks normals")
    obj_rows = assembled.object_points
    eval_pts = np.ascontiguousarray(cloud.positions[obj_rows])
    eval_ids = cloud.channels["object_id"][obj_rows]
    n = len(eval_pts)
    mdl_pts = eval_pts
    mdl_nrm = np.ascontiguousarray(cloud.normals[obj_rows])

    r_contact = contact_radius(gripper, grid.depths)
    own_idx = np.zeros(0, dtype=np.int64)
    own_off = np.zeros(n + 1, dtype=np.int64)
    idx_parts = []
    # contacts: per-object neighborhoods, indices global into mdl_pts
    for oid, sl in assembled.object_slices.items():
        rows = np.arange(sl.start, sl.stop, dtype=np.int64)
        if rows.size == 0:
            continue
        tree = cKDTree(mdl_pts[rows])
        sub_idx, sub_off = _ball_csr(tree, mdl_pts[rows], r_contact)
        idx_parts.append((rows, rows[sub_idx], sub_off))
    if idx_parts:
        own_off = np.zeros(n + 1, dtype=np.int64)
        flat = [np.zeros(0, dtype=np.int64)] * n
        for rows, gidx, sub_off in idx_parts:
            for j, row in enumerate(rows):
                flat[row] = gidx[sub_off[j]:sub_off[j + 1]]
        own_off[1:] = np.cumsum([len(f) for f in flat])
        own_idx = np.concatenate(flat) if n else np.zeros(0, dtype=np.int64)

    scn_pts = np.ascontiguousarray(cloud.positions)
    if use_collision:
        r_col = collision_radius(gripper, grid.depths)
        scene_ids = cloud.channels["object_id"]
        scene_tree = cKDTree(scn_pts)

        def drop_own(row, cand):
            return cand[scene_ids[cand] != eval_ids[row]]

        col_idx, col_off = _ball_csr(scene_tree, eval_pts, r_col, keep=drop_own)
    else:
        col_idx = np.zeros(0, dtype=np.int64)
        col_off = np.zeros(n + 1, dtype=np.int64)

    views = grid.view_directions()
    frames = view_frames(views)
    cos_a, sin_a = angle_tables(grid.angles)
    depths = np.asarray(grid.depths, dtype=np.float64)
    band_eps = 2.0 * assembled.spacing
    view_raw, point_raw = kernels.landscape_eval(
        eval_pts, own_idx, own_off, mdl_pts, mdl_nrm, col_idx, col_off,
        scn_pts, frames, cos_a, sin_a, depths,
        gripper.kernel_params(width_clearance), quality.kernel_params(band_eps),
        np.int64(AGGREGATION_MODES[aggregation]), np.int64(1 if use_collision else 0))
    return GraspableLandscape(eval_pts, mdl_nrm, np.asarray(eval_ids, dtype=np.int32),
                              views, aggregation, point_raw, view_raw)


def scene_graspness(assembled: AssembledScene, grid: GridConfig,
                    quality: QualityConfig, gripper: GripperModel,
                    aggregation: str = "feasible-ratio") -> GraspableLandscape:
    return compute_landscape(assembled, grid, quality, gripper, aggregation,
                             use_collision=True)


def object_graspness(assembled: AssembledScene, grid: GridConfig,
                     quality: QualityConfig, gripper: GripperModel,
                     aggregation: str = "feasible-ratio") -> GraspableLandscape:
    """Object-level landscape: candidates ignore the table and other objects."""
    return compute_landscape(assembled, grid, quality, gripper, aggregation,
                             use_collision=False)


def _minmax(values: Array, axis=None) -> Array:
    lo = values.min(axis=axis, keepdims=axis is not None)
    hi = values.max(axis=axis, keepdims=axis is not None)
    span = hi - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (values - lo) / span
    if axis is None:
        if span == 0.0:
            return np.zeros_like(values)
        return out
    out = np.where(span == 0.0, 0.0, out)
    return out


def normalize_landscape(landscape: GraspableLandscape) -> GraspableLandscape:
    """Min-max normalization: points over the scene, views per view column.

    Degenerate (constant) populations map to zeros.
    """
    if len(landscape) == 0:
        raise ValueError("cannot normalize an empty landscape")
    point_norm = _minmax(landscape.point_raw)
    view_norm = _minmax(landscape.view_raw, axis=0)
    return replace(landscape, point_norm=point_norm, view_norm=view_norm)


def project_to_view(landscape: GraspableLandscape, partial: PointCloud,
                    cutoff: float = 0.01) -> tuple[PointCloud, Array]:
    """Copy normalized scores onto a rendered partial cloud.

    Each object point of ``partial`` takes the scores of the nearest model
    point with the same object id, if within ``cutoff``; everything else
    (background, orphans) gets zero.  Returns (cloud with a ``graspness``
    channel, per-point view-score matrix).
    """
    if not landscape.normalized:
        raise ValueError("normalize the landscape before projecting")
    if "object_id" not in partial.channels:
        raise ValueError("partial cloud lacks object_id channel")
    ids = np.asarray(partial.channels["object_id"])
    known = set(np.unique(landscape.object_id).tolist())
    foreign = set(np.unique(ids[ids >= 0]).tolist()) - known
    if foreign:
        raise ValueError(f"partial cloud references unknown object ids {sorted(foreign)}")
    n = len(partial)
    graspness = np.zeros(n)
    view_scores = np.zeros((n, len(landscape.views)))
    for oid in sorted(known):
        rows = np.flatnonzero(ids == oid)
        if rows.size == 0:
            continue
        model_rows = np.flatnonzero(landscape.object_id == oid)
        tree = cKDTree(landscape.positions[model_rows])
        dist, nn = tree.query(partial.positions[rows])
        ok = dist <= cutoff
        src = model_rows[nn[ok]]
        graspness[rows[ok]] = landscape.point_norm[src]
        view_scores[rows[ok]] = landscape.view_norm[src]
    out = PointCloud(partial.positions.copy(),
                     None if partial.normals is None else partial.normals.copy(),
                     {k: v.copy() for k, v in partial.channels.items()})
    out.channels["graspness"] = graspness
    return out, view_scores
