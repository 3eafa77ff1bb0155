"""Core geometry: rigid transforms, point clouds, spatial index, sampling primitives.

Conventions used throughout the package:

* positions are float64 arrays of shape (N, 3), meters, world frame unless noted
* normals are unit float64 arrays of shape (N, 3), outward from surfaces
* integer channels: ``objectness`` in {0, 1}, ``object_id`` with -1 = background
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels

Array = np.ndarray

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))

#: channels carrying integer labels; voxel downsampling majority-votes these
#: (everything else is averaged).
INTEGER_CHANNELS = ("objectness", "object_id", "normal_valid")


def unit(v: Array) -> Array:
    """Normalize the last axis; raises on zero-norm input."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < 1e-300):
        raise ValueError("cannot normalize zero-length vector")
    return v / n


def require_unit(v: Array, tol: float = 1e-9) -> Array:
    v = np.asarray(v, dtype=np.float64)
    if abs(float(np.linalg.norm(v)) - 1.0) > tol:
        raise ValueError(f"expected unit vector, got norm {np.linalg.norm(v)}")
    return v


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion: x -> rotation @ x + translation."""

    rotation: Array
    translation: Array

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        tr = np.array(self.translation, dtype=np.float64).reshape(3)
        err = np.abs(rot @ rot.T - np.eye(3)).max()
        if err > 1e-9:
            raise ValueError(f"rotation not orthonormal (error {err:.3e})")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("rotation determinant is not +1")
        rot.flags.writeable = False
        tr.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def apply(self, points: Array) -> Array:
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def rotate(self, vectors: Array) -> Array:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return self ∘ other, i.e. apply ``other`` first."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)


@dataclass
class PointCloud:
    """Positions with optional normals and named per-point scalar channels."""

    positions: Array
    normals: Array | None = None
    channels: dict[str, Array] = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.ascontiguousarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(self.normals) != len(self.positions):
                raise ValueError("normals length mismatch")
        for name, ch in list(self.channels.items()):
            ch = np.asarray(ch)
            if ch.shape[0] != len(self.positions):
                raise ValueError(f"channel {name!r} length mismatch")
            self.channels[name] = ch

    def __len__(self) -> int:
        return len(self.positions)

    def validate_labels(self) -> None:
        """Check objectness=0 => object_id=-1 when both channels exist."""
        if "objectness" in self.channels and "object_id" in self.channels:
            bad = (self.channels["objectness"] == 0) & (self.channels["object_id"] != -1)
            if np.any(bad):
                raise ValueError("background points must carry object_id = -1")

    def select(self, idx: Array) -> "PointCloud":
        return PointCloud(
            self.positions[idx],
            None if self.normals is None else self.normals[idx],
            {k: v[idx] for k, v in self.channels.items()},
        )

    def transformed(self, rt: RigidTransform) -> "PointCloud":
        return PointCloud(
            rt.apply(self.positions),
            None if self.normals is None else rt.rotate(self.normals),
            {k: v.copy() for k, v in self.channels.items()},
        )

    @staticmethod
    def concatenate(clouds: list["PointCloud"]) -> "PointCloud":
        if not clouds:
            return PointCloud(np.zeros((0, 3)))
        pos = np.concatenate([c.positions for c in clouds])
        normals = None
        if all(c.normals is not None for c in clouds):
            normals = np.concatenate([c.normals for c in clouds])
        keys = set(clouds[0].channels)
        for c in clouds[1:]:
            keys &= set(c.channels)
        channels = {k: np.concatenate([c.channels[k] for c in clouds]) for k in keys}
        return PointCloud(pos, normals, channels)


def fibonacci_sphere(count: int) -> Array:
    """Deterministic low-discrepancy unit directions (golden-angle lattice).

    For k = 0..count-1:
        z_k   = 1 - (2k + 1)/count
        r_k   = sqrt(1 - z_k^2)
        phi_k = k * pi * (3 - sqrt(5))
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    k = np.arange(count, dtype=np.float64)
    z = 1.0 - (2.0 * k + 1.0) / count
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = k * GOLDEN_ANGLE
    out = np.empty((count, 3), dtype=np.float64)
    out[:, 0] = r * np.cos(phi)
    out[:, 1] = r * np.sin(phi)
    out[:, 2] = z
    return out


def farthest_point_sampling(positions: Array, count: int, start_index: int = 0) -> Array:
    """Greedy FPS indices; ties broken by lowest index; deterministic."""
    pos = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 3)
    n = len(pos)
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    if not 0 <= start_index < n:
        raise ValueError("start_index out of range")
    return kernels.fps_select(pos, int(count), int(start_index))


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """One output point per occupied voxel at the member centroid.

    Float channels (and normals) are averaged — normals renormalized afterwards;
    integer channels take the majority value, ties resolved toward the lowest
    value.  Output voxels are ordered by their integer grid key, so the result
    is deterministic and downsampling is idempotent.
    """
    if voxel_size <= 0:
        raise ValueError("voxel_size must be positive")
    n = len(cloud)
    if n == 0:
        return PointCloud(np.zeros((0, 3)), cloud.normals, dict(cloud.channels))
    keys = np.floor(cloud.positions / voxel_size).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    m = len(uniq)
    counts = np.bincount(inverse, minlength=m).astype(np.float64)

    def mean_rows(arr: Array) -> Array:
        out = np.zeros((m, arr.shape[1]), dtype=np.float64)
        np.add.at(out, inverse, arr)
        return out / counts[:, None]

    positions = mean_rows(cloud.positions)
    normals = None
    if cloud.normals is not None:
        normals = mean_rows(cloud.normals)
        norm = np.linalg.norm(normals, axis=1)
        # renormalize only when meaningfully off-unit: keeps the op idempotent
        fix = norm > 1e-12
        adjust = fix & (np.abs(norm - 1.0) > 1e-12)
        normals[adjust] /= norm[adjust, None]
        normals[~fix] = 0.0

    channels: dict[str, Array] = {}
    for name, ch in cloud.channels.items():
        if name in INTEGER_CHANNELS or np.issubdtype(np.asarray(ch).dtype, np.integer):
            channels[name] = _majority_per_group(inverse, np.asarray(ch), m)
        else:
            vals = np.zeros(m, dtype=np.float64)
            np.add.at(vals, inverse, np.asarray(ch, dtype=np.float64))
            channels[name] = vals / counts
    return PointCloud(positions, normals, channels)


def _majority_per_group(group: Array, values: Array, n_groups: int) -> Array:
    """Per-group most frequent value; ties go to the lowest value."""
    values = np.asarray(values)
    order = np.lexsort((values, group))
    g, v = group[order], values[order]
    # run-length encode (group, value) pairs
    new_run = np.ones(len(g), dtype=bool)
    new_run[1:] = (g[1:] != g[:-1]) | (v[1:] != v[:-1])
    run_starts = np.flatnonzero(new_run)
    run_group = g[run_starts]
    run_value = v[run_starts]
    run_count = np.diff(np.append(run_starts, len(g)))
    # within each group pick max count; value ascending within group, so a
    # stable "strictly greater" scan keeps the lowest value on ties
    out = np.zeros(n_groups, dtype=values.dtype)
    best = np.full(n_groups, -1, dtype=np.int64)
    for grp, val, cnt in zip(run_group, run_value, run_count):
        if cnt > best[grp]:
            best[grp] = cnt
            out[grp] = val
    return out


class SpatialIndex:
    """k-d tree with brute-force-identical query semantics.

    Distance ties are broken by lowest point index, matching a linear scan.
    """

    def __init__(self, positions: Array):
        self.positions = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 3)
        self._tree = cKDTree(self.positions) if len(self.positions) else None

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            raise ValueError("index is empty")
        return self._tree

    def nearest(self, query: Array, k: int = 1) -> tuple[Array, Array]:
        """k nearest (indices, distances), sorted by (distance, index)."""
        if self._tree is None:
            raise ValueError("nearest neighbor query on empty index")
        if k < 1:
            raise ValueError("k must be >= 1")
        n = len(self.positions)
        k = min(k, n)
        q = np.asarray(query, dtype=np.float64).reshape(3)
        kq = min(n, k + 16)
        dist, idx = self._tree.query(q, k=kq)
        dist = np.atleast_1d(dist)
        idx = np.atleast_1d(idx)
        if kq > k and dist[kq - 1] <= dist[k - 1]:
            # ties may extend past the fetch window; fall back to an exact
            # radius query at the k-th distance
            idx = np.asarray(self._tree.query_ball_point(q, dist[k - 1] * (1 + 1e-12)), dtype=np.int64)
        d = self.positions[idx] - q
        d2 = np.einsum("ij,ij->i", d, d)
        order = np.lexsort((idx, d2))[:k]
        return idx[order].astype(np.int64), np.sqrt(d2[order])

    def within(self, query: Array, radius: float) -> Array:
        """Indices of points with distance <= radius, ascending."""
        if self._tree is None:
            return np.zeros(0, dtype=np.int64)
        q = np.asarray(query, dtype=np.float64).reshape(3)
        out = self._tree.query_ball_point(q, radius)
        return np.sort(np.asarray(out, dtype=np.int64))


def estimate_normals(cloud: PointCloud, k_neighbors: int, reference: Array) -> PointCloud:
    """PCA normals from the k-NN neighborhood, oriented toward ``reference``.

    Adds a ``normal_valid`` channel; a neighborhood of rank < 2 (collinear)
    marks the point invalid with a zero normal.
    """
    n = len(cloud)
    if not n >= k_neighbors >= 3:
        raise ValueError("need |cloud| >= k_neighbors >= 3")
    ref = np.asarray(reference, dtype=np.float64).reshape(3)
    tree = cKDTree(cloud.positions)
    _, idx = tree.query(cloud.positions, k=k_neighbors)
    neigh = cloud.positions[idx]  # (n, k, 3)
    centered = neigh - neigh.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered)
    w, v = np.linalg.eigh(cov)
    normals = v[:, :, 0].copy()
    valid = (w[:, 1] > np.maximum(1e-10 * w[:, 2], 1e-24)) & (w[:, 2] > 1e-24)
    normals[~valid] = 0.0
    flip = np.einsum("ij,ij->i", normals, ref - cloud.positions) < 0.0
    normals[flip] *= -1.0
    out = PointCloud(cloud.positions.copy(), normals, {k: c.copy() for k, c in cloud.channels.items()})
    out.channels["normal_valid"] = valid.astype(np.uint8)
    return out
