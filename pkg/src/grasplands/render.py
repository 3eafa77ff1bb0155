"""Virtual depth camera: sphere-traced rendering into partial point clouds."""

from __future__ import annotations

import numpy as np

from . import kernels
from .geometry import PointCloud
from .scene import CameraModel, Scene, scene_kernel_arrays
from .shapes import sdf_and_normal

MAX_STEPS = 128
HIT_TOL = 1e-5
MAX_RANGE = 5.0


def camera_rays(camera: CameraModel) -> np.ndarray:
    """World-frame unit ray directions in row-major pixel order."""
    xs = (np.arange(camera.width) + 0.5 - camera.cx) / camera.fx
    ys = (np.arange(camera.height) + 0.5 - camera.cy) / camera.fy
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    dirs = np.stack([gx.ravel(), gy.ravel(), np.ones(gx.size)], axis=1)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs @ camera.pose.rotation.T


def render_depth_view(scene: Scene, camera: CameraModel | None = None, *,
                      world_frame: bool = True, depth_noise_sigma: float = 0.0,
                      noise_seed: int = 0) -> PointCloud:
    """Render a single-view partial cloud with analytic surface normals.

    Channels: ``object_id`` (instance id, -1 for the table) and ``objectness``.
    Misses produce no point.  Optional Gaussian depth noise perturbs hit
    distances along the ray (off by default; normals stay analytic).
    """
    if camera is None:
        camera = scene.camera
    if camera is None:
        raise ValueError("no camera: pass one or set scene.camera")
    pack = scene_kernel_arrays(scene)
    dirs = np.ascontiguousarray(camera_rays(camera))
    origin = np.ascontiguousarray(camera.position, dtype=np.float64)
    t, kind = kernels.render_rays(
        origin, dirs, pack["shape_type"], pack["shape_params"],
        pack["rot_w2o"], pack["tr_w2o"], pack["tri_start"], pack["tri_end"],
        pack["mesh_verts"], pack["mesh_tris"], pack["table_radius"],
        np.int64(MAX_STEPS), HIT_TOL, MAX_RANGE)

    hit = kind != -2
    t = t[hit]
    kind = kind[hit]
    dirs = dirs[hit]
    if depth_noise_sigma > 0.0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(noise_seed)))
        t = t + depth_noise_sigma * rng.standard_normal(t.shape)
    positions = origin + t[:, None] * dirs

    normals = np.zeros_like(positions)
    object_id = np.full(len(positions), -1, dtype=np.int32)
    normals[kind == -1] = (0.0, 0.0, 1.0)  # table
    for k, inst in enumerate(scene.instances):
        rows = np.flatnonzero(kind == k)
        if rows.size == 0:
            continue
        local = inst.pose.inverse().apply(positions[rows])
        _, n_local = sdf_and_normal(inst.shape, local)
        normals[rows] = inst.pose.rotate(n_local)
        object_id[rows] = inst.id

    cloud = PointCloud(positions, normals, {
        "object_id": object_id,
        "objectness": (object_id >= 0).astype(np.uint8),
    })
    if not world_frame:
        cloud = cloud.transformed(camera.pose.inverse())
    return cloud
