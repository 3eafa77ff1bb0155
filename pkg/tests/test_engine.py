"""Landscape engine vs an independently written brute-force reference.

The reference (tests/oracles.py) walks every point / view / angle / depth with
plain nested loops in world coordinates; the engine must agree bit for bit on
the default feasible-ratio aggregation.
"""

import numpy as np
import pytest

from grasplands.engine import (
    GridConfig,
    compute_landscape,
    normalize_landscape,
    object_graspness,
    project_to_view,
    scene_graspness,
)
from grasplands.geometry import PointCloud, RigidTransform
from grasplands.quality import QualityConfig
from grasplands.scene import ObjectInstance, Scene, assemble_scene
from grasplands.shapes import Box

from oracles import naive_landscape


def test_grid_config():
    grid = GridConfig()
    assert grid.views == 300 and grid.angles == 12
    assert grid.cells_per_view == 48
    dirs = grid.view_directions()
    assert dirs.shape == (300, 3)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    with pytest.raises(ValueError):
        GridConfig(views=0)
    with pytest.raises(ValueError):
        GridConfig(depths=())


def test_unknown_aggregation_rejected(toy_scenes, toy_grid, quality, gripper):
    with pytest.raises(ValueError):
        compute_landscape(toy_scenes[0], toy_grid, quality, gripper, "median")


@pytest.mark.parametrize("idx", [0, 1, 2])
class TestAgainstNaiveReference:
    def test_scene_graspness_bitwise(self, idx, toy_scenes, toy_grid, quality, gripper):
        assembled = toy_scenes[idx]
        land = scene_graspness(assembled, toy_grid, quality, gripper)
        ref_view, ref_point = naive_landscape(
            assembled, land.views, toy_grid.angles, toy_grid.depths,
            quality, gripper, use_collision=True)
        assert np.array_equal(land.view_raw, ref_view)
        assert np.array_equal(land.point_raw, ref_point)

    def test_object_graspness_bitwise(self, idx, toy_scenes, toy_grid, quality, gripper):
        assembled = toy_scenes[idx]
        land = object_graspness(assembled, toy_grid, quality, gripper)
        ref_view, ref_point = naive_landscape(
            assembled, land.views, toy_grid.angles, toy_grid.depths,
            quality, gripper, use_collision=False)
        assert np.array_equal(land.view_raw, ref_view)
        assert np.array_equal(land.point_raw, ref_point)

    def test_scene_never_exceeds_object(self, idx, toy_scenes, toy_grid, quality, gripper):
        assembled = toy_scenes[idx]
        scene = scene_graspness(assembled, toy_grid, quality, gripper)
        obj = object_graspness(assembled, toy_grid, quality, gripper)
        assert (scene.view_raw <= obj.view_raw).all()
        assert (scene.point_raw <= obj.point_raw).all()


@pytest.mark.parametrize("aggregation", ["mean-score", "max-score"])
def test_score_aggregations_match_reference(aggregation, toy_scenes, toy_grid,
                                            quality, gripper):
    assembled = toy_scenes[0]
    land = compute_landscape(assembled, toy_grid, quality, gripper, aggregation)
    ref_view, ref_point = naive_landscape(
        assembled, land.views, toy_grid.angles, toy_grid.depths,
        quality, gripper, aggregation=aggregation)
    assert np.abs(land.view_raw - ref_view).max() <= 1e-12
    assert np.array_equal(land.point_raw, ref_point)


def test_box_scene_matches_reference_with_tighter_mu(toy_grid, gripper):
    # grid-sampled box faces can produce contact pairs whose required friction
    # is exactly 1.0; keep mu_max off that value so feasibility is unambiguous
    quality = QualityConfig(mu_max=0.9)
    inst = [
        ObjectInstance(Box((0.025, 0.02, 0.03)), RigidTransform(np.eye(3), [0.0, 0.0, 0.031]), 0),
        ObjectInstance(Box((0.02, 0.03, 0.02)), RigidTransform(np.eye(3), [0.07, 0.01, 0.021]), 1),
    ]
    assembled = assemble_scene(Scene(inst, table_radius=0.12), spacing=0.012, seed=3)
    land = scene_graspness(assembled, toy_grid, quality, gripper)
    ref_view, ref_point = naive_landscape(
        assembled, land.views, toy_grid.angles, toy_grid.depths, quality, gripper)
    assert np.array_equal(land.view_raw, ref_view)
    assert np.array_equal(land.point_raw, ref_point)
    assert land.point_raw.max() > 0.0


class TestNormalize:
    def test_attains_bounds(self, toy_scenes, toy_grid, quality, gripper):
        land = normalize_landscape(
            scene_graspness(toy_scenes[0], toy_grid, quality, gripper))
        assert land.normalized
        assert land.point_norm.min() == 0.0
        assert land.point_norm.max() == 1.0
        for col, raw in zip(land.view_norm.T, land.view_raw.T):
            if raw.max() > raw.min():
                assert col.min() == 0.0 and col.max() == 1.0
            else:
                assert (col == 0.0).all()

    def test_degenerate_maps_to_zeros(self, toy_scenes, toy_grid, quality, gripper):
        land = scene_graspness(toy_scenes[0], toy_grid, quality, gripper)
        land.point_raw = np.full_like(land.point_raw, 0.25)
        land.view_raw = np.full_like(land.view_raw, 0.4)
        out = normalize_landscape(land)
        assert (out.point_norm == 0.0).all()
        assert (out.view_norm == 0.0).all()

    def test_empty_raises(self, toy_scenes, toy_grid, quality, gripper):
        land = scene_graspness(toy_scenes[0], toy_grid, quality, gripper)
        land.positions = land.positions[:0]
        land.point_raw = land.point_raw[:0]
        with pytest.raises(ValueError):
            normalize_landscape(land)


class TestProjectToView:
    @pytest.fixture()
    def normalized(self, toy_scenes, toy_grid, quality, gripper):
        return normalize_landscape(
            scene_graspness(toy_scenes[0], toy_grid, quality, gripper))

    def partial_from(self, land, shift=(1e-5, 0.0, 0.0)):
        """Synthetic partial cloud: every model point nudged by ``shift``,
        plus one background point and one orphan far from any model point."""
        pos = np.concatenate([land.positions + np.asarray(shift),
                              [[0.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]]])
        ids = np.concatenate([land.object_id,
                              [-1], [int(land.object_id[0])]]).astype(np.int32)
        return PointCloud(pos, channels={"object_id": ids})

    def test_scores_copied_from_nearest(self, normalized):
        partial = self.partial_from(normalized)
        out, view_scores = project_to_view(normalized, partial, cutoff=0.01)
        n = len(normalized)
        g = out.channels["graspness"]
        assert np.array_equal(g[:n], normalized.point_norm)
        assert np.array_equal(view_scores[:n], normalized.view_norm)
        # background and orphan points score zero
        assert g[n] == 0.0 and g[n + 1] == 0.0
        assert (view_scores[n:] == 0.0).all()
        # input cloud is untouched
        assert "graspness" not in partial.channels

    def test_cutoff_zeroes_far_points(self, normalized):
        partial = self.partial_from(normalized, shift=(0.0, 0.0, 0.5))
        out, _ = project_to_view(normalized, partial, cutoff=0.01)
        assert (out.channels["graspness"] == 0.0).all()

    def test_foreign_id_raises(self, normalized):
        partial = self.partial_from(normalized)
        partial.channels["object_id"][0] = 99
        with pytest.raises(ValueError, match="unknown object ids"):
            project_to_view(normalized, partial)

    def test_requires_normalized_and_ids(self, normalized, toy_scenes, toy_grid,
                                         quality, gripper):
        raw = scene_graspness(toy_scenes[0], toy_grid, quality, gripper)
        partial = self.partial_from(normalized)
        with pytest.raises(ValueError, match="normalize"):
            project_to_view(raw, partial)
        bare = PointCloud(partial.positions.copy())
        with pytest.raises(ValueError, match="object_id"):
            project_to_view(normalized, bare)
