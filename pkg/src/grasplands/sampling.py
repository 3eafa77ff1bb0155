"""Seed-point sampling strategies, view selection, and grasp extraction.

Strategies mirror the usual ablation axes: uniform / farthest-point sampling
over the whole cloud versus the same restricted to high-graspness points, and
view choice by surface normal, by top score, or drawn proportionally to the
per-view scores (probabilistic view selection).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Array, PointCloud, farthest_point_sampling
from .gripper import (GripperModel, GraspPose, collision_radius,
                      contact_radius, grasp_collides, grasp_frame)
from .quality import QualityConfig, angle_values, evaluate_candidate_grid
from .scene import AssembledScene

POINT_STRATEGIES = ("uniform-random", "fps", "graspable-random", "graspable-fps")
VIEW_STRATEGIES = ("normal", "top-1", "pvs")

DEFAULT_DEPTHS = (0.01, 0.02, 0.03, 0.04)


@dataclass(frozen=True)
class SamplingConfig:
    point_strategy: str = "graspable-fps"
    view_strategy: str = "pvs"
    count: int = 1024
    graspness_threshold: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.point_strategy not in POINT_STRATEGIES:
            raise ValueError(f"unknown point strategy {self.point_strategy!r}")
        if self.view_strategy not in VIEW_STRATEGIES:
            raise ValueError(f"unknown view strategy {self.view_strategy!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0.0 <= self.graspness_threshold < 1.0:
            raise ValueError("graspness_threshold must lie in [0, 1)")


@dataclass(frozen=True)
class SeedSet:
    """Selected seed rows of a partial cloud plus their scores."""

    indices: Array  # (m,) int64, unique
    point_scores: Array  # (m,) graspness of each seed (zeros if unavailable)
    view_scores: Array | None = None  # (m, V)

    def __len__(self) -> int:
        return len(self.indices)


def _needs_graspness(strategy: str) -> bool:
    return strategy.startswith("graspable")


def _top_up(chosen: Array, scores: Array, n: int, missing: int) -> Array:
    """Append the `missing` highest-scoring unchosen rows (ties: lowest index)."""
    mask = np.ones(n, dtype=bool)
    mask[chosen] = False
    rest = np.flatnonzero(mask)
    order = np.lexsort((rest, -scores[rest]))
    return np.concatenate([chosen, rest[order[:missing]]])


def sample_seeds(cloud: PointCloud, config: SamplingConfig,
                 view_scores: Array | None = None, *,
                 rng: np.random.Generator | None = None) -> SeedSet:
    """Select up to `config.count` seed rows of `cloud` per the point strategy.

    Graspness-aware strategies restrict candidates to points with graspness
    above the threshold; when that leaves fewer than the requested count, the
    shortfall is filled by descending graspness from the remainder.
    """
    n = len(cloud)
    if n == 0:
        raise ValueError("cannot sample seeds from an empty cloud")
    strategy = config.point_strategy
    if _needs_graspness(strategy) and "graspness" not in cloud.channels:
        raise ValueError(f"{strategy} requires a graspness channel")
    scores = np.asarray(cloud.channels.get("graspness", np.zeros(n)), dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.rng_seed))
    m = min(config.count, n)

    if _needs_graspness(strategy):
        candidates = np.flatnonzero(scores > config.graspness_threshold)
    else:
        candidates = np.arange(n, dtype=np.int64)

    if len(candidates) <= m:
        chosen = candidates.astype(np.int64)
        if len(chosen) < m:
            chosen = _top_up(chosen, scores, n, m - len(chosen))
    elif strategy in ("uniform-random", "graspable-random"):
        chosen = np.sort(rng.choice(candidates, size=m, replace=False)).astype(np.int64)
    else:  # fps variants
        start = int(rng.integers(len(candidates)))
        local = farthest_point_sampling(cloud.positions[candidates], m, start)
        chosen = candidates[local].astype(np.int64)

    views = None if view_scores is None else np.asarray(view_scores)[chosen]
    return SeedSet(chosen, scores[chosen], views)


def select_view(view_scores: Array, views: Array, strategy: str, *,
                normal: Array | None = None,
                rng: np.random.Generator | None = None) -> int:
    """Pick one approach-view index for a seed.

    ``pvs`` draws proportionally to the scores (uniform when all are zero),
    ``top-1`` takes the argmax, and ``normal`` takes the view best aligned
    with the inward surface normal.
    """
    scores = np.asarray(view_scores, dtype=np.float64)
    if strategy == "top-1":
        return int(np.argmax(scores))
    if strategy == "pvs":
        if rng is None:
            raise ValueError("pvs needs an explicit generator")
        total = scores.sum()
        if total <= 0.0:
            probs = np.full(len(scores), 1.0 / len(scores))
        else:
            probs = scores / total
        return int(rng.choice(len(scores), p=probs))
    if strategy == "normal":
        if normal is None:
            raise ValueError("normal strategy needs the seed normal")
        return int(np.argmax(np.asarray(views) @ (-np.asarray(normal, dtype=np.float64))))
    raise ValueError(f"unknown view strategy {strategy!r}")


def _owning_object(assembled: AssembledScene, seed: Array) -> int:
    rows = assembled.object_points
    pts = assembled.cloud.positions[rows]
    if len(pts) == 0:
        return -1
    d2 = np.einsum("ij,ij->i", pts - seed, pts - seed)
    return int(assembled.cloud.channels["object_id"][rows][np.argmin(d2)])


def best_grasp_at_seed(seed: Array, view: Array, assembled: AssembledScene,
                       gripper: GripperModel, quality: QualityConfig, *,
                       object_id: int | None = None, angles: int = 12,
                       depths=DEFAULT_DEPTHS, width_clearance: float = 0.01,
                       band_eps: float | None = None) -> GraspPose | None:
    """Highest-scoring collision-free candidate at one (seed, view).

    Scans the full in-plane-angle x depth grid; ties resolve to the lowest
    (angle index, depth index).  The reported width adds the clearance to the
    achieved contact width, clamped to the gripper opening.  Returns ``None``
    when no candidate is feasible (including seeds on the table/background).
    """
    seed = np.asarray(seed, dtype=np.float64)
    oid = _owning_object(assembled, seed) if object_id is None else int(object_id)
    if oid < 0:
        return None
    sl = assembled.object_slices[oid]
    cloud = assembled.cloud
    own_pts = cloud.positions[sl]
    own_nrm = cloud.normals[sl]
    # Reach bounds: points farther than these radii cannot touch any candidate.
    rel = own_pts - seed
    near = np.einsum("ij,ij->i", rel, rel) <= contact_radius(gripper, depths) ** 2
    own_pts, own_nrm = own_pts[near], own_nrm[near]
    other = cloud.positions[np.flatnonzero(cloud.channels["object_id"] != oid)]
    rel = other - seed
    other = other[np.einsum("ij,ij->i", rel, rel)
                  <= collision_radius(gripper, depths) ** 2]
    eps = 2.0 * assembled.spacing if band_eps is None else band_eps
    grid = evaluate_candidate_grid(
        seed, np.asarray(view, dtype=np.float64)[None, :], angles,
        np.asarray(depths, dtype=np.float64), own_pts, own_nrm, gripper,
        quality, eps, scene_points=other, width_clearance=width_clearance)
    feasible = grid.feasible[0]
    if not feasible.any():
        return None
    score = np.where(feasible, grid.score[0], -np.inf)
    flat = int(np.argmax(score))
    a, d = divmod(flat, score.shape[1])
    angle = float(angle_values(angles)[a])
    # The measured contact interval is generally off-center relative to the
    # seed; shift the stored center to its midpoint so a gripper closing
    # symmetrically about the pose reproduces the contacts.
    frame = grasp_frame(seed, np.asarray(view, dtype=np.float64), angle)
    local = (own_pts - seed) @ frame.rotation  # columns: approach/closing/height
    u, va, wa = local[:, 0], local[:, 1], local[:, 2]
    member = ((np.abs(va) <= gripper.max_width / 2.0)
              & (np.abs(wa) <= gripper.finger_height / 2.0)
              & (u >= depths[d] - gripper.finger_length) & (u <= depths[d]))
    mid = float(va[member].min() + va[member].max()) / 2.0
    center = seed + mid * frame.rotation[:, 1]
    width = min(float(grid.width[0, a, d]) + width_clearance, gripper.max_width)
    return GraspPose(center=center, view=np.asarray(view, dtype=np.float64),
                     in_plane_angle=angle, depth=float(depths[d]), width=width,
                     score=float(grid.score[0, a, d]))


def best_grasps(seeds: SeedSet, cloud: PointCloud, assembled: AssembledScene,
                views: Array, gripper: GripperModel, quality: QualityConfig, *,
                view_strategy: str = "top-1", rng_seed: int = 0,
                angles: int = 12, depths=DEFAULT_DEPTHS,
                width_clearance: float = 0.01) -> list[GraspPose | None]:
    """One best grasp (or ``None``) per seed, with per-seed view selection.

    Each seed draws from its own generator derived by seed position in the
    set, so results do not depend on evaluation order or worker count.
    """
    if seeds.view_scores is None:
        raise ValueError("seed set lacks view scores")
    ids = cloud.channels.get("object_id")
    normals = cloud.normals
    out: list[GraspPose | None] = []
    for i, row in enumerate(seeds.indices):
        rng = None
        if view_strategy == "pvs":
            rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(i,)))
        normal = None if normals is None else normals[row]
        v = select_view(seeds.view_scores[i], views, view_strategy,
                        normal=normal, rng=rng)
        oid = None if ids is None else int(ids[row])
        if oid is not None and oid < 0:
            out.append(None)
            continue
        out.append(best_grasp_at_seed(
            cloud.positions[row], views[v], assembled, gripper, quality,
            object_id=oid, angles=angles, depths=depths,
            width_clearance=width_clearance))
    return out


def _rotation_angle(r1: Array, r2: Array) -> float:
    cos = (np.trace(r1.T @ r2) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def grasp_nms(grasps: list[GraspPose], translation_threshold: float = 0.03,
              rotation_threshold: float = np.deg2rad(30.0)) -> list[GraspPose]:
    """Greedy non-maximum suppression over a score-sorted grasp list.

    A grasp is dropped iff some already-kept grasp is simultaneously closer
    than the translation threshold and rotated by less than the rotation
    threshold.
    """
    kept: list[GraspPose] = []
    kept_rots: list[Array] = []
    for g in grasps:
        rot = g.frame().rotation
        suppressed = False
        for other, orot in zip(kept, kept_rots):
            if (np.linalg.norm(g.center - other.center) < translation_threshold
                    and _rotation_angle(rot, orot) < rotation_threshold):
                suppressed = True
                break
        if not suppressed:
            kept.append(g)
            kept_rots.append(rot)
    return kept


def collision_filter(grasps: list[GraspPose], scene_index,
                     gripper: GripperModel) -> list[GraspPose]:
    """Keep the grasps whose swept gripper volume contains no scene point."""
    return [g for g in grasps if not grasp_collides(gripper, g, scene_index)]
