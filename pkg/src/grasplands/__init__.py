"""grasplands: geometric graspness landscapes for parallel-jaw grasping.

The package evaluates dense grasp-candidate grids over synthetic tabletop
scenes, scores every surface point and approach view by the fraction of
antipodal, collision-free candidates it admits, and benchmarks sampling
strategies that exploit those scores.
"""

from .config import Config, EngineConfig, load_config
from .engine import (GraspableLandscape, GridConfig, normalize_landscape,
                     object_graspness, project_to_view, scene_graspness)
from .geometry import (PointCloud, RigidTransform, SpatialIndex,
                       estimate_normals, farthest_point_sampling,
                       fibonacci_sphere, voxel_downsample)
from .gripper import (GraspPose, GripperModel, check_collision, cylinder_crop,
                      grasp_collides, gripper_bodies, view_frame_axes)
from .metrics import (BenchReport, BenchScene, graspable_fraction,
                      precision_at_k, prepare_bench_scene, ranking_error,
                      run_sampling_benchmark)
from .quality import (ContactPair, QualityConfig, evaluate_candidate_grid,
                      find_contacts, grasp_score, min_antipodal_friction)
from .render import camera_rays, render_depth_view
from .sampling import (SamplingConfig, SeedSet, best_grasp_at_seed,
                       best_grasps, collision_filter, grasp_nms, sample_seeds,
                       select_view)
from .scene import (AssembledScene, CameraModel, ObjectInstance, Scene,
                    assemble_scene, load_scene, sample_table, save_scene)
from .shapes import Box, Cylinder, Sphere, TriMesh, sample_surface

__version__ = "0.1.0"

__all__ = [
    "AssembledScene", "BenchReport", "BenchScene", "Box", "CameraModel",
    "Config", "ContactPair", "Cylinder", "EngineConfig", "GraspPose",
    "GraspableLandscape", "GridConfig", "GripperModel", "ObjectInstance",
    "PointCloud", "QualityConfig", "RigidTransform", "SamplingConfig",
    "Scene", "SeedSet", "SpatialIndex", "Sphere", "TriMesh",
    "assemble_scene", "best_grasp_at_seed", "best_grasps", "camera_rays",
    "check_collision", "collision_filter", "cylinder_crop",
    "estimate_normals", "evaluate_candidate_grid", "farthest_point_sampling",
    "fibonacci_sphere", "find_contacts", "grasp_collides", "grasp_nms",
    "grasp_score", "graspable_fraction", "gripper_bodies", "load_config",
    "load_scene", "min_antipodal_friction", "normalize_landscape",
    "object_graspness", "precision_at_k", "prepare_bench_scene",
    "project_to_view", "ranking_error", "render_depth_view",
    "run_sampling_benchmark", "sample_seeds", "sample_surface",
    "sample_table", "save_scene", "scene_graspness", "select_view",
    "view_frame_axes", "voxel_downsample",
]
