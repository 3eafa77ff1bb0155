"""Shared fixtures: small generic scenes sized for brute-force cross-checks.

The toy scenes deliberately avoid box primitives: grid-sampled box faces
produce contact pairs at exactly 45 degrees, i.e. mu* sitting on the
feasibility threshold to the last ulp, where two correct implementations may
legitimately disagree.  Spheres, cylinders (lattice sizes chosen so no two
sample directions are an exact quarter turn apart) and randomly rotated
tetrahedra keep every decision boundary generic.  Boxes get their own
coverage with the threshold moved off the coincidence (see test_engine).
"""

from __future__ import annotations

import numpy as np
import pytest

from grasplands import (
    Cylinder,
    GridConfig,
    GripperModel,
    ObjectInstance,
    PointCloud,
    QualityConfig,
    RigidTransform,
    Scene,
    Sphere,
    TriMesh,
    assemble_scene,
)
from grasplands.scene import AssembledScene

from oracles import random_rotation

TETRA_VERTICES = [[0.0, 0.0, 0.0], [0.045, 0.0, 0.0],
                  [0.0, 0.05, 0.0], [0.0, 0.0, 0.042]]
TETRA_TRIANGLES = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]


def plate_scene(with_wall: bool = False) -> AssembledScene:
    """Hand-built assembled scene: two parallel plates (object 0) facing each
    other across the origin, optionally a wall (object 1) running through the
    finger sweep of the natural top-down grasp."""
    xs, zs = np.meshgrid(np.linspace(-0.018, 0.018, 9),
                         np.linspace(-0.008, 0.008, 5))
    n = xs.size
    pts, nrm = [], []
    for side in (-1.0, 1.0):
        pts.append(np.stack([xs.ravel(), np.full(n, side * 0.025), zs.ravel()],
                            axis=1))
        plate_n = np.zeros((n, 3))
        plate_n[:, 1] = side
        nrm.append(plate_n)
    slices = {0: slice(0, 2 * n)}
    if with_wall:
        wall = np.array([[0.0, 0.035, z] for z in np.linspace(-0.05, 0.05, 40)])
        pts.append(wall)
        nrm.append(np.tile([0.0, 1.0, 0.0], (len(wall), 1)))
        slices[1] = slice(2 * n, 2 * n + len(wall))
    pos = np.concatenate(pts)
    ids = np.zeros(len(pos), dtype=np.int32)
    ids[2 * n:] = 1
    cloud = PointCloud(pos, np.concatenate(nrm),
                       {"object_id": ids,
                        "objectness": np.ones(len(pos), dtype=np.int32)})
    total = len(pos)
    return AssembledScene(Scene([], table_radius=None), cloud, slices,
                          slice(total, total), spacing=0.001)


def build_toy_assembled(idx: int):
    """Three generic <=200-point scenes: sphere pair, sphere+cylinder,
    cylinder+tetrahedron on a small table."""
    rng = np.random.default_rng(200 + idx)
    if idx == 0:
        shapes = [Sphere(0.03), Sphere(0.024)]
        offsets = [(0.0, 0.0, 0.10), (0.058, 0.008, 0.105)]
        table = None
        spacing = 0.012
    elif idx == 1:
        shapes = [Sphere(0.03), Cylinder(0.02, 0.025)]
        offsets = [(0.0, 0.0, 0.10), (0.06, -0.005, 0.105)]
        table = None
        spacing = 0.012
    elif idx == 2:
        shapes = [Cylinder(0.021, 0.022), TriMesh(TETRA_VERTICES, TETRA_TRIANGLES)]
        offsets = [(-0.02, 0.0, 0.034), (0.02, 0.01, 0.055)]
        table = 0.06
        spacing = 0.015
    else:
        raise ValueError(idx)
    instances = [ObjectInstance(s, RigidTransform(random_rotation(rng), o), i)
                 for i, (s, o) in enumerate(zip(shapes, offsets))]
    return assemble_scene(Scene(instances, table), spacing=spacing, seed=7)


@pytest.fixture(scope="session")
def gripper():
    return GripperModel()


@pytest.fixture(scope="session")
def quality():
    return QualityConfig()


@pytest.fixture(scope="session")
def toy_grid():
    return GridConfig(views=8, angles=4, depths=(0.02, 0.04))


@pytest.fixture(scope="session")
def toy_scenes():
    return [build_toy_assembled(i) for i in range(3)]
