"""Command-line front end for the grasp-landscape pipeline.

Subcommands:
  scene-gen  build a scene file (from a hand-written spec or randomly)
  render     sphere-trace a depth view and write the partial cloud (PLY)
  graspness  compute a landscape and project it onto the rendered view
  sample     extract, de-duplicate and collision-filter grasps (CSV)
  eval       ranking error between two labeled clouds
  bench      compare seed-sampling strategies across scenes

All randomness stems from one root seed (``--seed`` / config ``seed``).
Fixed task indices namespace the derived streams: 0 = object placement,
1 = view-axis reserved, 2 = seed sampling, and per-seed view selection
spawns from the root by seed position.  Exit codes: 0 success, 2 bad
input or config, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import kernels
from .config import Config, load_config
from .engine import (normalize_landscape, object_graspness, project_to_view,
                     scene_graspness)
from .geometry import PointCloud, SpatialIndex, voxel_downsample
from .io import (load_cloud, load_view_scores, save_cloud, save_grasps,
                 save_view_scores)
from .metrics import prepare_bench_scene, ranking_error, run_sampling_benchmark
from .render import render_depth_view
from .sampling import (POINT_STRATEGIES, best_grasps, collision_filter,
                       grasp_nms, sample_seeds)
from .scene import (CameraModel, ObjectInstance, Scene, assemble_scene,
                    load_scene, save_scene)
from .shapes import Box, Cylinder, Sphere

PLACEMENT_ATTEMPTS = 10_000
_TASK_PLACEMENT = 0
_TASK_SEEDS = 2


def _task_rng(seed: int, task: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(task,)))


def _parse_vec3(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z triple, got {text!r}")
    return np.array([float(p) for p in parts])


def _sidecar_path(output: str) -> str:
    return (output[:-4] if output.endswith(".ply") else output) + ".gsv"


def _random_shape(rng: np.random.Generator):
    kind = int(rng.integers(3))
    if kind == 0:
        he = rng.uniform(0.015, 0.04, size=3)
        return Box(tuple(he)), float(he[2]), float(np.hypot(he[0], he[1]))
    if kind == 1:
        r = float(rng.uniform(0.015, 0.035))
        return Sphere(r), r, r
    r = float(rng.uniform(0.015, 0.03))
    hh = float(rng.uniform(0.015, 0.04))
    return Cylinder(r, hh), hh, r


def _yaw(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_scene(n_objects: int, seed: int, *, table_radius: float = 0.5,
                 clearance: float = 0.005) -> Scene:
    """Drop upright primitives on the table without overlap (rejection
    sampling on bounding circles); placement failure raises."""
    from .geometry import RigidTransform

    rng = _task_rng(seed, _TASK_PLACEMENT)
    camera = CameraModel.look_at(np.array([0.55, -0.55, 0.65]), np.zeros(3))
    placed: list[tuple[float, float, float]] = []  # x, y, bounding radius
    instances = []
    attempts = 0
    for oid in range(n_objects):
        while True:
            attempts += 1
            if attempts > PLACEMENT_ATTEMPTS:
                raise ValueError(
                    f"could not place {n_objects} objects in "
                    f"{PLACEMENT_ATTEMPTS} attempts")
            shape, height, circle = _random_shape(rng)
            limit = table_radius - circle - clearance
            x, y = rng.uniform(-limit, limit, size=2)
            if np.hypot(x, y) > limit:
                continue
            if any(np.hypot(x - px, y - py) < circle + pr + clearance
                   for px, py, pr in placed):
                continue
            rot = np.eye(3) if isinstance(shape, Sphere) else _yaw(
                float(rng.uniform(0.0, 2.0 * np.pi)))
            pose = RigidTransform(rot, np.array([x, y, height]))
            instances.append(ObjectInstance(shape, pose, oid))
            placed.append((x, y, circle))
            break
    return Scene(instances, table_radius=table_radius, camera=camera)


def _camera_from_args(scene: Scene, args) -> CameraModel | None:
    camera = scene.camera
    if args.eye is not None or args.target is not None:
        eye = _parse_vec3(args.eye) if args.eye else np.array([0.55, -0.55, 0.65])
        target = _parse_vec3(args.target) if args.target else np.zeros(3)
        width = camera.width if camera else 320
        height = camera.height if camera else 240
        camera = CameraModel.look_at(eye, target, width=width, height=height)
    return camera


def _pipeline(scene: Scene, config: Config, *, level: str = "scene"):
    """Assemble, compute + normalize the landscape, render, project."""
    eng = config.engine
    assembled = assemble_scene(scene, eng.spacing, seed=config.seed)
    compute = scene_graspness if level == "scene" else object_graspness
    land = normalize_landscape(compute(assembled, config.grid, config.quality,
                                       config.gripper, eng.aggregation))
    partial = voxel_downsample(render_depth_view(assembled.scene), eng.voxel_size)
    labeled, view_scores = project_to_view(land, partial, eng.projection_cutoff)
    return assembled, land, labeled, view_scores


def cmd_scene_gen(args, config: Config) -> int:
    if (args.spec is None) == (args.random is None):
        raise ValueError("scene-gen needs exactly one of --spec or --random")
    if args.spec is not None:
        scene = load_scene(args.spec)  # validates the schema
    else:
        if args.random < 0:
            raise ValueError("--random must be >= 0")
        scene = random_scene(args.random, config.seed)
    save_scene(scene, args.output or "scene.json")
    return 0


def cmd_render(args, config: Config) -> int:
    scene = load_scene(args.scene)
    camera = _camera_from_args(scene, args)
    if camera is not None:
        scene = dataclasses.replace(scene, camera=camera)
    cloud = render_depth_view(scene)
    cloud = voxel_downsample(cloud, config.engine.voxel_size)
    save_cloud(args.output or "partial.ply", cloud, binary=not args.ascii)
    return 0


def cmd_graspness(args, config: Config) -> int:
    scene = load_scene(args.scene)
    if scene.camera is None:
        raise ValueError("scene has no camera; projection needs one")
    assembled, land, labeled, view_scores = _pipeline(scene, config,
                                                     level=args.level)
    output = args.output or "landscape.ply"
    save_cloud(output, labeled, binary=not args.ascii)
    save_view_scores(_sidecar_path(output), view_scores)
    if args.model_output:
        model = PointCloud(land.positions.copy(), land.normals.copy(), {
            "objectness": np.ones(len(land), dtype=np.uint8),
            "object_id": land.object_id.copy(),
            "graspness": land.point_norm.copy(),
        })
        save_cloud(args.model_output, model, binary=not args.ascii)
        save_view_scores(_sidecar_path(args.model_output), land.view_norm)
    return 0


def cmd_sample(args, config: Config) -> int:
    scene = load_scene(args.scene)
    if scene.camera is None:
        raise ValueError("scene has no camera")
    assembled, land, labeled, view_scores = _pipeline(scene, config)
    seeds = sample_seeds(labeled, config.sampling, view_scores,
                         rng=_task_rng(config.seed, _TASK_SEEDS))
    grasps = best_grasps(seeds, labeled, assembled, land.views, config.gripper,
                         config.quality,
                         view_strategy=config.sampling.view_strategy,
                         rng_seed=config.seed, angles=config.grid.angles,
                         depths=config.grid.depths)
    found = [g for g in grasps if g is not None]
    found.sort(key=lambda g: -g.score)
    found = grasp_nms(found, args.nms_translation, np.deg2rad(args.nms_rotation))
    if not args.keep_colliding:
        found = collision_filter(found, SpatialIndex(labeled.positions),
                                 config.gripper)
    save_grasps(args.output or "grasps.csv", found)
    return 0


def cmd_eval(args, config: Config) -> int:
    pred = load_cloud(args.pred)
    label = load_cloud(args.label)
    if "graspness" not in pred.channels or "graspness" not in label.channels:
        raise ValueError("both clouds need a graspness channel")
    err = ranking_error(pred.channels["graspness"], label.channels["graspness"],
                        args.bins)
    print(f"ranking_error {err!r}")
    return 0


def cmd_bench(args, config: Config) -> int:
    strategies = args.strategies.split(",")
    for s in strategies:
        if s not in POINT_STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}")
    eng = config.engine
    scenes = []
    for path in args.scenes:
        scene = load_scene(path)
        name = path.rsplit("/", 1)[-1]
        name = name[:-5] if name.endswith(".json") else name
        scenes.append(prepare_bench_scene(
            scene, config.grid, config.quality, config.gripper, name=name,
            spacing=eng.spacing, voxel_size=eng.voxel_size,
            projection_cutoff=eng.projection_cutoff, assembly_seed=config.seed,
            aggregation=eng.aggregation))
    report = run_sampling_benchmark(
        scenes, strategies, config.gripper, config.quality,
        count=args.count or config.sampling.count, trials=args.trials,
        rng_seed=config.seed,
        graspness_threshold=config.sampling.graspness_threshold,
        angles=config.grid.angles, depths=config.grid.depths,
        precision_k=args.k, precision_thresholds=tuple(
            float(t) for t in args.thresholds.split(",")))
    report.to_csv(args.output or "bench.csv")
    print(report.summary_text())
    total = sum(r.wall_clock for r in report.rows)
    print(f"total benchmark time: {total:.1f} s", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int, help="root RNG seed (u64)")
    common.add_argument("--jobs", type=int, help="worker threads for kernels")
    common.add_argument("--output", help="output path")

    parser = argparse.ArgumentParser(prog="grasplands",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scene-gen", parents=[common],
                       help="write a scene file")
    p.add_argument("--spec", help="existing scene JSON to validate and copy")
    p.add_argument("--random", type=int, help="number of random objects")
    p.set_defaults(func=cmd_scene_gen)

    p = sub.add_parser("render", parents=[common],
                       help="render a partial cloud")
    p.add_argument("scene")
    p.add_argument("--eye", help="camera eye as x,y,z")
    p.add_argument("--target", help="camera target as x,y,z")
    p.add_argument("--ascii", action="store_true", help="write ASCII PLY")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("graspness", parents=[common],
                       help="landscape projected onto the rendered view")
    p.add_argument("scene")
    p.add_argument("--level", choices=("scene", "object"), default="scene")
    p.add_argument("--model-output",
                   help="also write the full model-point landscape here")
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_graspness)

    p = sub.add_parser("sample", parents=[common], help="extract grasps")
    p.add_argument("scene")
    p.add_argument("--nms-translation", type=float, default=0.03)
    p.add_argument("--nms-rotation", type=float, default=30.0,
                   help="degrees")
    p.add_argument("--keep-colliding", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", parents=[common],
                       help="ranking error between two labeled clouds")
    p.add_argument("--pred", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", parents=[common],
                       help="seed-sampling strategy benchmark")
    p.add_argument("scenes", nargs="+")
    p.add_argument("--strategies", default=",".join(POINT_STRATEGIES))
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--count", type=int, help="seeds per trial")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--thresholds", default="0.8")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else Config()
        if args.seed is not None:
            if args.seed < 0:
                raise ValueError("--seed must be non-negative")
            config = dataclasses.replace(config, seed=args.seed)
        if args.jobs is not None:
            if args.jobs < 1:
                raise ValueError("--jobs must be >= 1")
            kernels.set_num_threads(args.jobs)
        return args.func(args, config)
    except (ValueError, KeyError, OSError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failures
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
