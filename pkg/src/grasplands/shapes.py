"""Object shapes: analytic primitives and triangle meshes.

Each shape lives in its own local frame and provides a signed distance (with
outward normal), total surface area, and near-uniform surface sampling with
analytic normals.  Primitives evaluate exactly; meshes use closest-triangle
distance with a winding-number sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Array, PointCloud, fibonacci_sphere
from .kernels import backend_numpy as _ref

SHAPE_BOX = _ref.SHAPE_BOX
SHAPE_SPHERE = _ref.SHAPE_SPHERE
SHAPE_CYLINDER = _ref.SHAPE_CYLINDER
SHAPE_MESH = _ref.SHAPE_MESH


@dataclass(frozen=True)
class Box:
    half_extents: tuple[float, float, float]

    def __post_init__(self):
        if any(h <= 0 for h in self.half_extents):
            raise ValueError("box half extents must be positive")

    @property
    def area(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * (hx * hy + hy * hz + hz * hx)

    def sdf(self, points: Array) -> Array:
        p = np.atleast_2d(points)
        hx, hy, hz = self.half_extents
        return _ref._sd_box(p[:, 0], p[:, 1], p[:, 2], hx, hy, hz)

    def normal(self, points: Array) -> Array:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        he = np.asarray(self.half_extents)
        q = np.abs(p) - he
        m = np.maximum(q, 0.0)
        out = np.zeros_like(p)
        outside = np.linalg.norm(m, axis=1) > 1e-12
        sgn = np.where(p >= 0.0, 1.0, -1.0)
        out[outside] = (sgn * m)[outside] / np.linalg.norm(m[outside], axis=1, keepdims=True)
        # inside (or on a face): nearest face wins, ties prefer +z then +y
        ins = ~outside
        if np.any(ins):
            axis = 2 - np.argmax(q[ins][:, ::-1], axis=1)
            rows = np.flatnonzero(ins)
            out[rows, axis] = sgn[rows, axis]
        return out

    def sample(self, spacing: float, rng: np.random.Generator) -> PointCloud:
        hx, hy, hz = self.half_extents
        pts, nrm = [], []
        for axis, (ha, hb, hc) in enumerate([(hx, hy, hz), (hy, hz, hx), (hz, hx, hy)]):
            nb = max(1, round(2 * hb / spacing))
            nc = max(1, round(2 * hc / spacing))
            b = -hb + (np.arange(nb) + 0.5) * (2 * hb / nb)
            c = -hc + (np.arange(nc) + 0.5) * (2 * hc / nc)
            bb, cc = np.meshgrid(b, c, indexing="ij")
            for sign in (1.0, -1.0):
                face = np.empty((nb * nc, 3))
                face[:, axis] = sign * ha
                face[:, (axis + 1) % 3] = bb.ravel()
                face[:, (axis + 2) % 3] = cc.ravel()
                n = np.zeros((nb * nc, 3))
                n[:, axis] = sign
                pts.append(face)
                nrm.append(n)
        return PointCloud(np.concatenate(pts), np.concatenate(nrm))


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.radius**2

    def sdf(self, points: Array) -> Array:
        p = np.atleast_2d(points)
        return _ref._sd_sphere(p[:, 0], p[:, 1], p[:, 2], self.radius)

    def normal(self, points: Array) -> Array:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n = np.linalg.norm(p, axis=1, keepdims=True)
        out = np.where(n > 1e-12, p / np.maximum(n, 1e-300), 0.0)
        out[(n <= 1e-12).ravel()] = (0.0, 0.0, 1.0)
        return out

    def sample(self, spacing: float, rng: np.random.Generator) -> PointCloud:
        count = max(8, round(self.area / spacing**2))
        dirs = fibonacci_sphere(count)
        return PointCloud(dirs * self.radius, dirs.copy())


@dataclass(frozen=True)
class Cylinder:
    radius: float
    half_height: float

    def __post_init__(self):
        if self.radius <= 0 or self.half_height <= 0:
            raise ValueError("cylinder dimensions must be positive")

    @property
    def area(self) -> float:
        return 2.0 * np.pi * self.radius * (2.0 * self.half_height) + 2.0 * np.pi * self.radius**2

    def sdf(self, points: Array) -> Array:
        p = np.atleast_2d(points)
        return _ref._sd_cylinder(p[:, 0], p[:, 1], p[:, 2], self.radius, self.half_height)

    def normal(self, points: Array) -> Array:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        rho = np.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2)
        rr = rho - self.radius
        zz = np.abs(p[:, 2]) - self.half_height
        out = np.zeros_like(p)
        ux = np.where(rho > 1e-12, p[:, 0] / np.maximum(rho, 1e-300), 1.0)
        uy = np.where(rho > 1e-12, p[:, 1] / np.maximum(rho, 1e-300), 0.0)
        sz = np.where(p[:, 2] >= 0.0, 1.0, -1.0)
        mr = np.maximum(rr, 0.0)
        mz = np.maximum(zz, 0.0)
        norm = np.sqrt(mr * mr + mz * mz)
        outer = norm > 1e-12
        out[outer, 0] = (mr * ux)[outer] / norm[outer]
        out[outer, 1] = (mr * uy)[outer] / norm[outer]
        out[outer, 2] = (mz * sz)[outer] / norm[outer]
        ins = ~outer
        lateral = ins & (rr >= zz)
        out[lateral, 0] = ux[lateral]
        out[lateral, 1] = uy[lateral]
        cap = ins & ~lateral
        out[cap, 2] = sz[cap]
        return out

    def sample(self, spacing: float, rng: np.random.Generator) -> PointCloud:
        r, hh = self.radius, self.half_height
        pts, nrm = [], []
        # lateral surface
        ntheta = max(3, round(2 * np.pi * r / spacing))
        nz = max(1, round(2 * hh / spacing))
        theta = (np.arange(ntheta) + 0.5) * (2 * np.pi / ntheta)
        z = -hh + (np.arange(nz) + 0.5) * (2 * hh / nz)
        tt, zz = np.meshgrid(theta, z, indexing="ij")
        lat = np.stack([r * np.cos(tt).ravel(), r * np.sin(tt).ravel(), zz.ravel()], axis=1)
        lat_n = np.stack([np.cos(tt).ravel(), np.sin(tt).ravel(), np.zeros(tt.size)], axis=1)
        pts.append(lat)
        nrm.append(lat_n)
        # caps as concentric rings
        nr = max(1, round(r / spacing))
        for sign in (1.0, -1.0):
            for i in range(nr):
                rho = (i + 0.5) * r / nr
                nphi = max(1, round(2 * np.pi * rho / spacing))
                phi = (np.arange(nphi) + 0.5) * (2 * np.pi / nphi)
                ring = np.stack([rho * np.cos(phi), rho * np.sin(phi),
                                 np.full(nphi, sign * hh)], axis=1)
                n = np.zeros((nphi, 3))
                n[:, 2] = sign
                pts.append(ring)
                nrm.append(n)
        return PointCloud(np.concatenate(pts), np.concatenate(nrm))


@dataclass(frozen=True)
class TriMesh:
    vertices: Array
    triangles: Array
    watertight: bool = field(init=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) == 0 or len(v) < 3:
            raise ValueError("mesh needs at least one triangle")
        if t.min() < 0 or t.max() >= len(v):
            raise ValueError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "watertight", self._check_watertight())

    def _check_watertight(self) -> bool:
        # closed + consistently oriented: every directed edge appears exactly
        # once and its reverse exactly once
        edges = set()
        for a, b, c in self.triangles:
            for e in ((a, b), (b, c), (c, a)):
                if e in edges:
                    return False
                edges.add(e)
        for a, b in edges:
            if (b, a) not in edges:
                return False
        return True

    @property
    def face_normals(self) -> Array:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(norm, 1e-300)

    @property
    def face_areas(self) -> Array:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @property
    def area(self) -> float:
        return float(self.face_areas.sum())

    def _nearest_triangle(self, points: Array) -> tuple[Array, Array]:
        """(squared distance, triangle index) of the closest triangle."""
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        best = np.full(len(p), np.inf)
        tri = np.zeros(len(p), dtype=np.int64)
        v, t = self.vertices, self.triangles
        for k in range(len(t)):
            ia, ib, ic = t[k]
            d2 = _ref._tri_dist2(p[:, 0], p[:, 1], p[:, 2],
                                 v[ia, 0], v[ia, 1], v[ia, 2],
                                 v[ib, 0], v[ib, 1], v[ib, 2],
                                 v[ic, 0], v[ic, 1], v[ic, 2])
            upd = d2 < best
            best = np.where(upd, d2, best)
            tri = np.where(upd, k, tri)
        return best, tri

    def winding_number(self, points: Array) -> Array:
        """Generalized winding number (~1 inside, ~0 outside for closed meshes)."""
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        total = np.zeros(len(p))
        v, t = self.vertices, self.triangles
        for k in range(len(t)):
            a = v[t[k, 0]] - p
            b = v[t[k, 1]] - p
            c = v[t[k, 2]] - p
            la = np.linalg.norm(a, axis=1)
            lb = np.linalg.norm(b, axis=1)
            lc = np.linalg.norm(c, axis=1)
            det = np.einsum("ij,ij->i", a, np.cross(b, c))
            denom = (la * lb * lc + np.einsum("ij,ij->i", a, b) * lc
                     + np.einsum("ij,ij->i", b, c) * la
                     + np.einsum("ij,ij->i", c, a) * lb)
            total += 2.0 * np.arctan2(det, denom)
        return total / (4.0 * np.pi)

    def sdf(self, points: Array) -> Array:
        d2, _ = self._nearest_triangle(points)
        sign = np.where(np.abs(self.winding_number(points)) > 0.5, -1.0, 1.0)
        return sign * np.sqrt(d2)

    def normal(self, points: Array) -> Array:
        _, tri = self._nearest_triangle(points)
        return self.face_normals[tri]

    def sample(self, spacing: float, rng: np.random.Generator) -> PointCloud:
        count = max(1, round(self.area / spacing**2))
        areas = self.face_areas
        faces = rng.choice(len(self.triangles), size=count, p=areas / areas.sum())
        r1 = np.sqrt(rng.random(count))
        r2 = rng.random(count)
        a = self.vertices[self.triangles[faces, 0]]
        b = self.vertices[self.triangles[faces, 1]]
        c = self.vertices[self.triangles[faces, 2]]
        pts = (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c
        return PointCloud(pts, self.face_normals[faces])


Shape = Box | Sphere | Cylinder | TriMesh


def sdf_and_normal(shape: Shape, points: Array) -> tuple[Array, Array]:
    """Signed distance (negative inside) and outward normal, shape frame."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return shape.sdf(pts), shape.normal(pts)


def sample_surface(shape: Shape, target_spacing: float, rng_seed: int = 0) -> PointCloud:
    """Near-uniform on-surface samples with analytic normals; seeded."""
    if target_spacing <= 0:
        raise ValueError("target_spacing must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(rng_seed)))
    return shape.sample(target_spacing, rng)


def kernel_pack(shape: Shape) -> tuple[int, np.ndarray]:
    """(type code, 4-float parameter row) for the render kernels."""
    params = np.zeros(4)
    if isinstance(shape, Box):
        params[:3] = shape.half_extents
        return SHAPE_BOX, params
    if isinstance(shape, Sphere):
        params[0] = shape.radius
        return SHAPE_SPHERE, params
    if isinstance(shape, Cylinder):
        params[0] = shape.radius
        params[1] = shape.half_height
        return SHAPE_CYLINDER, params
    if isinstance(shape, TriMesh):
        return SHAPE_MESH, params
    raise TypeError(f"unknown shape {type(shape)!r}")
