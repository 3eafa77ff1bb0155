"""Scene model: posed object instances, finite table, camera, JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import Array, PointCloud, RigidTransform
from .shapes import Box, Cylinder, Shape, Sphere, TriMesh, kernel_pack, SHAPE_MESH

TABLE_CONTACT_TOL = 1e-3  # instances may sink at most this far into the table
DEFAULT_TABLE_RADIUS = 0.5


@dataclass(frozen=True)
class ObjectInstance:
    shape: Shape
    pose: RigidTransform
    id: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("instance id must be non-negative")


@dataclass(frozen=True)
class CameraModel:
    pose: RigidTransform  # camera -> world; camera looks along +z, image y down
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point outside image")

    @staticmethod
    def look_at(eye: Array, target: Array, width: int = 320, height: int = 240,
                focal: float = 277.0, up: Array = (0.0, 0.0, 1.0)) -> "CameraModel":
        eye = np.asarray(eye, dtype=np.float64)
        fwd = np.asarray(target, dtype=np.float64) - eye
        fwd = fwd / np.linalg.norm(fwd)
        upv = np.asarray(up, dtype=np.float64)
        x = np.cross(fwd, upv)
        nx = np.linalg.norm(x)
        if nx < 1e-9:
            upv = np.array([0.0, 1.0, 0.0])
            x = np.cross(fwd, upv)
            nx = np.linalg.norm(x)
        x = x / nx
        y = np.cross(fwd, x)
        rot = np.stack([x, y, fwd], axis=1)
        return CameraModel(RigidTransform(rot, eye), width, height,
                           focal, focal, width / 2.0, height / 2.0)

    @property
    def position(self) -> Array:
        return self.pose.translation


@dataclass
class Scene:
    instances: list[ObjectInstance]
    table_radius: float | None = DEFAULT_TABLE_RADIUS
    camera: CameraModel | None = None

    def __post_init__(self):
        ids = [inst.id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate instance ids in scene")

    @property
    def has_table(self) -> bool:
        return self.table_radius is not None and self.table_radius > 0


@dataclass
class AssembledScene:
    """Scene plus its sampled full cloud (object model points + table)."""

    scene: Scene
    cloud: PointCloud  # objects first (instance order), then table points
    object_slices: dict[int, slice]  # instance id -> rows in cloud
    table_slice: slice
    spacing: float

    @property
    def object_points(self) -> slice:
        stop = self.table_slice.start
        return slice(0, stop)

    def object_cloud(self, instance_id: int) -> PointCloud:
        return self.cloud.select(np.arange(*self.object_slices[instance_id].indices(len(self.cloud))))

    def instance_of(self, instance_id: int) -> ObjectInstance:
        for inst in self.scene.instances:
            if inst.id == instance_id:
                return inst
        raise KeyError(instance_id)


def sample_table(radius: float, spacing: float) -> PointCloud:
    """Concentric-ring samples of the table disk at z = 0, normals +z."""
    pts = [np.zeros((1, 3))]
    nr = max(1, round(radius / spacing))
    for i in range(nr):
        rho = (i + 0.5) * radius / nr
        nphi = max(1, round(2 * np.pi * rho / spacing))
        phi = (np.arange(nphi) + 0.5) * (2 * np.pi / nphi)
        ring = np.stack([rho * np.cos(phi), rho * np.sin(phi), np.zeros(nphi)], axis=1)
        pts.append(ring)
    pos = np.concatenate(pts)
    normals = np.zeros_like(pos)
    normals[:, 2] = 1.0
    return PointCloud(pos, normals)


def assemble_scene(scene: Scene, spacing: float, seed: int = 0) -> AssembledScene:
    """Sample every instance surface, pose into world, append table points.

    Channels: ``objectness`` (1 on objects), ``object_id`` (-1 on the table).
    Raises if a mesh object is not watertight or an instance sinks into the
    table past the contact tolerance.
    """
    from .shapes import sample_surface

    clouds: list[PointCloud] = []
    slices: dict[int, slice] = {}
    start = 0
    for inst in scene.instances:
        if isinstance(inst.shape, TriMesh) and not inst.shape.watertight:
            raise ValueError(f"instance {inst.id}: mesh is not watertight")
        local = sample_surface(inst.shape, spacing,
                               np.random.SeedSequence([seed, inst.id]).generate_state(1)[0])
        world = local.transformed(inst.pose)
        if scene.has_table and len(world) and world.positions[:, 2].min() < -TABLE_CONTACT_TOL:
            raise ValueError(f"instance {inst.id} penetrates the table")
        n = len(world)
        world.channels["objectness"] = np.ones(n, dtype=np.uint8)
        world.channels["object_id"] = np.full(n, inst.id, dtype=np.int32)
        slices[inst.id] = slice(start, start + n)
        start += n
        clouds.append(world)
    if scene.has_table:
        table = sample_table(scene.table_radius, spacing)
    else:
        table = PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))
    tn = len(table)
    table.channels["objectness"] = np.zeros(tn, dtype=np.uint8)
    table.channels["object_id"] = np.full(tn, -1, dtype=np.int32)
    clouds.append(table)
    full = PointCloud.concatenate(clouds)
    return AssembledScene(scene, full, slices, slice(start, start + tn), spacing)


def scene_kernel_arrays(scene: Scene) -> dict[str, np.ndarray]:
    """Pack instances into the flat arrays the render kernels consume."""
    k = len(scene.instances)
    shape_type = np.zeros(k, dtype=np.int64)
    shape_params = np.zeros((k, 4))
    rot_w2o = np.zeros((k, 3, 3))
    tr_w2o = np.zeros((k, 3))
    tri_start = np.zeros(k, dtype=np.int64)
    tri_end = np.zeros(k, dtype=np.int64)
    verts: list[np.ndarray] = []
    tris: list[np.ndarray] = []
    nv = 0
    nt = 0
    for i, inst in enumerate(scene.instances):
        code, params = kernel_pack(inst.shape)
        shape_type[i] = code
        shape_params[i] = params
        inv = inst.pose.inverse()
        rot_w2o[i] = inv.rotation
        tr_w2o[i] = inv.translation
        if code == SHAPE_MESH:
            verts.append(inst.shape.vertices)
            tris.append(inst.shape.triangles + nv)
            tri_start[i] = nt
            nt += len(inst.shape.triangles)
            tri_end[i] = nt
            nv += len(inst.shape.vertices)
    mesh_verts = np.concatenate(verts) if verts else np.zeros((0, 3))
    mesh_tris = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=np.int64)
    return {
        "shape_type": shape_type,
        "shape_params": shape_params,
        "rot_w2o": rot_w2o,
        "tr_w2o": tr_w2o,
        "tri_start": tri_start,
        "tri_end": tri_end,
        "mesh_verts": np.ascontiguousarray(mesh_verts),
        "mesh_tris": np.ascontiguousarray(mesh_tris),
        "table_radius": float(scene.table_radius) if scene.has_table else -1.0,
    }


# ---------------------------------------------------------------------------
# JSON serialization (field names are part of the file-format contract)


def _shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Box):
        return {"type": "box", "half_extents": list(shape.half_extents)}
    if isinstance(shape, Sphere):
        return {"type": "sphere", "radius": shape.radius}
    if isinstance(shape, Cylinder):
        return {"type": "cylinder", "radius": shape.radius, "half_height": shape.half_height}
    if isinstance(shape, TriMesh):
        return {"type": "mesh", "vertices": shape.vertices.tolist(),
                "triangles": shape.triangles.tolist()}
    raise TypeError(type(shape))


def _shape_from_dict(d: dict) -> Shape:
    t = d.get("type")
    if t == "box":
        return Box(tuple(float(x) for x in d["half_extents"]))
    if t == "sphere":
        return Sphere(float(d["radius"]))
    if t == "cylinder":
        return Cylinder(float(d["radius"]), float(d["half_height"]))
    if t == "mesh":
        return TriMesh(np.asarray(d["vertices"], dtype=np.float64),
                       np.asarray(d["triangles"], dtype=np.int64))
    raise ValueError(f"unknown shape type {t!r}")


def _pose_to_dict(rt: RigidTransform) -> dict:
    return {"rotation": [float(x) for x in rt.rotation.ravel()],
            "translation": [float(x) for x in rt.translation]}


def _pose_from_dict(d: dict) -> RigidTransform:
    return RigidTransform(np.asarray(d["rotation"], dtype=np.float64).reshape(3, 3),
                          np.asarray(d["translation"], dtype=np.float64))


def scene_to_dict(scene: Scene) -> dict:
    out: dict = {
        "objects": [
            {"id": inst.id, "shape": _shape_to_dict(inst.shape), "pose": _pose_to_dict(inst.pose)}
            for inst in scene.instances
        ],
        "table": {"radius": float(scene.table_radius)} if scene.has_table else None,
    }
    if scene.camera is not None:
        cam = scene.camera
        out["camera"] = {
            "pose": _pose_to_dict(cam.pose),
            "image_size": [cam.width, cam.height],
            "focal": [cam.fx, cam.fy],
            "principal": [cam.cx, cam.cy],
        }
    return out


def scene_from_dict(d: dict) -> Scene:
    try:
        instances = [
            ObjectInstance(_shape_from_dict(o["shape"]), _pose_from_dict(o["pose"]), int(o["id"]))
            for o in d.get("objects", [])
        ]
        table = d.get("table")
        table_radius = float(table["radius"]) if table else None
        camera = None
        if "camera" in d and d["camera"] is not None:
            c = d["camera"]
            w, h = (int(x) for x in c["image_size"])
            fx, fy = (float(x) for x in c["focal"])
            cx, cy = (float(x) for x in c["principal"])
            camera = CameraModel(_pose_from_dict(c["pose"]), w, h, fx, fy, cx, cy)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed scene description: {exc}") from exc
    return Scene(instances, table_radius, camera)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as f:
        json.dump(scene_to_dict(scene), f, indent=1)
        f.write("\n")


def load_scene(path) -> Scene:
    with open(path) as f:
        return scene_from_dict(json.load(f))
