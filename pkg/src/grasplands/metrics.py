"""Evaluation metrics and the seed-sampling strategy benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .engine import (GraspableLandscape, GridConfig, normalize_landscape,
                     project_to_view, scene_graspness)
from .geometry import Array, PointCloud, SpatialIndex, voxel_downsample
from .gripper import GripperModel, GraspPose, grasp_collides
from .quality import QualityConfig, find_contacts, min_antipodal_friction
from .render import render_depth_view
from .sampling import SamplingConfig, best_grasps, sample_seeds
from .scene import AssembledScene, Scene, assemble_scene

DEFAULT_RANK_BINS = 20


def rank_scores(values: Array, bins: int = DEFAULT_RANK_BINS) -> np.ndarray:
    """Discretize scores in [0, 1] into `bins` ranks; exact 1.0 clamps to the
    top rank."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    v = np.asarray(values, dtype=np.float64)
    return np.clip(np.floor(v * bins), 0, bins - 1).astype(np.int64)


def ranking_error(pred: Array, label: Array, bins: int = DEFAULT_RANK_BINS) -> float:
    """Mean absolute rank distance between two score fields, scaled by 1/bins.

    Symmetric, zero iff both sides land in the same bin everywhere, and at
    most (bins - 1) / bins.
    """
    pred = np.asarray(pred, dtype=np.float64)
    label = np.asarray(label, dtype=np.float64)
    if pred.shape != label.shape:
        raise ValueError("pred and label must have identical shape")
    if pred.size == 0:
        raise ValueError("ranking_error needs at least one value")
    diff = np.abs(rank_scores(pred, bins) - rank_scores(label, bins))
    return float(diff.mean() / bins)


def graspable_fraction(scores: Array, threshold: float = 0.3) -> float:
    """Fraction of points whose graspness exceeds the threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("graspable_fraction needs at least one point")
    return float(np.count_nonzero(scores > threshold) / scores.size)


def _nearest_object_id(assembled: AssembledScene, point: Array) -> int:
    rows = assembled.object_points
    pts = assembled.cloud.positions[rows]
    rel = pts - point
    d2 = np.einsum("ij,ij->i", rel, rel)
    return int(assembled.cloud.channels["object_id"][rows][np.argmin(d2)])


def grasp_friction(grasp: GraspPose, assembled: AssembledScene,
                   gripper: GripperModel, band_eps: float | None = None) -> float:
    """Minimum friction coefficient that holds the grasp against its nearest
    object (infinite when no valid antipodal contact pair exists)."""
    oid = _nearest_object_id(assembled, grasp.center)
    sl = assembled.object_slices[oid]
    eps = 2.0 * assembled.spacing if band_eps is None else band_eps
    contacts = find_contacts(grasp.frame(), grasp.depth,
                             assembled.cloud.positions[sl],
                             assembled.cloud.normals[sl], gripper, eps)
    return min_antipodal_friction(contacts)


def precision_at_k(grasps: list[GraspPose], assembled: AssembledScene,
                   gripper: GripperModel, thresholds, k: int, *,
                   scene_index: SpatialIndex | None = None,
                   band_eps: float | None = None) -> dict[float, float]:
    """Per-friction-threshold precision of the top-k grasps.

    A grasp counts at threshold t when its swept volume is free of scene
    points and its recomputed contact friction is <= t.  `grasps` must
    already be sorted by descending score.
    """
    if len(grasps) == 0:
        raise ValueError("precision_at_k needs at least one grasp")
    if k < 1 or k > len(grasps):
        raise ValueError("k must satisfy 1 <= k <= len(grasps)")
    if scene_index is None:
        scene_index = SpatialIndex(assembled.cloud.positions)
    hits = np.zeros(len(thresholds), dtype=np.int64)
    for g in grasps[:k]:
        if grasp_collides(gripper, g, scene_index):
            continue
        mu = grasp_friction(g, assembled, gripper, band_eps)
        for j, t in enumerate(thresholds):
            if mu <= t:
                hits[j] += 1
    return {float(t): float(hits[j] / k) for j, t in enumerate(thresholds)}


@dataclass(frozen=True)
class BenchScene:
    """Everything one benchmark scene needs: the assembled model cloud, the
    rendered partial cloud with ground-truth graspness, and the view grid."""

    name: str
    assembled: AssembledScene
    cloud: PointCloud  # partial, with graspness + object_id channels
    view_scores: Array  # (N, V), normalized
    views: Array  # (V, 3)
    landscape: GraspableLandscape


def prepare_bench_scene(scene: Scene, grid: GridConfig, quality: QualityConfig,
                        gripper: GripperModel, *, name: str = "scene",
                        spacing: float = 0.005, voxel_size: float = 0.005,
                        projection_cutoff: float = 0.01,
                        assembly_seed: int = 0,
                        aggregation: str = "feasible-ratio") -> BenchScene:
    """Run the full landscape pipeline for one scene with a camera."""
    if scene.camera is None:
        raise ValueError("benchmark scenes need a camera")
    assembled = assemble_scene(scene, spacing, seed=assembly_seed)
    land = normalize_landscape(
        scene_graspness(assembled, grid, quality, gripper, aggregation))
    partial = voxel_downsample(render_depth_view(assembled.scene), voxel_size)
    labeled, view_scores = project_to_view(land, partial, projection_cutoff)
    return BenchScene(name, assembled, labeled, view_scores,
                      land.views, land)


@dataclass(frozen=True)
class BenchRow:
    scene: str
    strategy: str
    trial: int
    seed_graspness: float  # mean ground-truth graspness over the seeds
    feasible_fraction: float  # seeds admitting >= 1 collision-free grasp
    coverage: float  # objects receiving >= 1 seed
    precision: tuple[float, ...]  # precision@k at the report's thresholds
    wall_clock: float  # seconds; excluded from CSV so outputs stay stable


@dataclass(frozen=True)
class BenchReport:
    strategies: tuple[str, ...]
    scene_names: tuple[str, ...]
    trials: int
    precision_k: int
    precision_thresholds: tuple[float, ...]
    rows: tuple[BenchRow, ...]

    METRICS = ("seed_graspness", "feasible_fraction", "coverage")

    def aggregate(self) -> dict[str, dict[str, tuple[float, float]]]:
        """Per-strategy mean and standard deviation of each scalar metric."""
        out: dict[str, dict[str, tuple[float, float]]] = {}
        for strat in self.strategies:
            vals = {m: [] for m in self.METRICS}
            for row in self.rows:
                if row.strategy != strat:
                    continue
                for m in self.METRICS:
                    vals[m].append(getattr(row, m))
            out[strat] = {m: (float(np.mean(v)), float(np.std(v)))
                          for m, v in vals.items()}
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.csv_text())

    def csv_text(self) -> str:
        cols = ["scene", "strategy", "trial", "seed_graspness",
                "feasible_fraction", "coverage"]
        cols += [f"precision_at_{self.precision_k}_mu_{t:g}"
                 for t in self.precision_thresholds]
        lines = [",".join(cols)]
        for row in self.rows:
            cells = [row.scene, row.strategy, str(row.trial),
                     repr(row.seed_graspness), repr(row.feasible_fraction),
                     repr(row.coverage)]
            cells += [repr(p) for p in row.precision]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        agg = self.aggregate()
        lines = [f"{'strategy':<18} {'seed-graspness':>18} "
                 f"{'feasible-frac':>18} {'coverage':>18}"]
        for strat in self.strategies:
            cells = [f"{strat:<18}"]
            for m in self.METRICS:
                mean, std = agg[strat][m]
                cells.append(f"{mean:>10.4f} ± {std:<5.4f}")
            lines.append(" ".join(cells))
        return "\n".join(lines)


def run_sampling_benchmark(scenes: list[BenchScene], strategies,
                           gripper: GripperModel, quality: QualityConfig, *,
                           count: int = 1024, trials: int = 1,
                           rng_seed: int = 0, graspness_threshold: float = 0.1,
                           angles: int = 12,
                           depths=(0.01, 0.02, 0.03, 0.04),
                           precision_k: int = 10,
                           precision_thresholds=(0.8,)) -> BenchReport:
    """Compare seed-sampling strategies over scenes x trials.

    Each (scene, strategy, trial) task derives its own generator from the
    root seed, so the report is bit-identical across runs and worker counts.
    View choice inside the benchmark is fixed to top-1 to keep the comparison
    deterministic.
    """
    if not scenes:
        raise ValueError("benchmark needs at least one scene")
    strategies = tuple(strategies)
    rows: list[BenchRow] = []
    for si, bench in enumerate(scenes):
        n_objects = len(bench.assembled.object_slices)
        ids = bench.cloud.channels["object_id"]
        scene_index = SpatialIndex(bench.assembled.cloud.positions)
        for ki, strat in enumerate(strategies):
            cfg = SamplingConfig(point_strategy=strat, view_strategy="top-1",
                                 count=count,
                                 graspness_threshold=graspness_threshold)
            for trial in range(trials):
                t0 = time.perf_counter()
                rng = np.random.default_rng(
                    np.random.SeedSequence(rng_seed, spawn_key=(si, ki, trial)))
                seeds = sample_seeds(bench.cloud, cfg, bench.view_scores, rng=rng)
                grasps = best_grasps(seeds, bench.cloud, bench.assembled,
                                     bench.views, gripper, quality,
                                     view_strategy="top-1", angles=angles,
                                     depths=depths)
                found = [g for g in grasps if g is not None]
                found.sort(key=lambda g: -g.score)
                hit_ids = np.unique(ids[seeds.indices])
                coverage = (float(np.count_nonzero(hit_ids >= 0) / n_objects)
                            if n_objects else 0.0)
                if found:
                    k = min(precision_k, len(found))
                    prec = precision_at_k(found, bench.assembled, gripper,
                                          precision_thresholds, k,
                                          scene_index=scene_index)
                    prec_row = tuple(prec[float(t)] for t in precision_thresholds)
                else:
                    prec_row = tuple(float("nan") for _ in precision_thresholds)
                rows.append(BenchRow(
                    scene=bench.name, strategy=strat, trial=trial,
                    seed_graspness=float(np.mean(seeds.point_scores)),
                    feasible_fraction=float(len(found) / len(seeds)),
                    coverage=coverage, precision=prec_row,
                    wall_clock=time.perf_counter() - t0))
    return BenchReport(strategies, tuple(b.name for b in scenes), trials,
                       precision_k, tuple(float(t) for t in precision_thresholds),
                       tuple(rows))
