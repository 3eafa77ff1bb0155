"""Artifact I/O: point-cloud PLY files, per-view score sidecars, grasp CSVs.

The PLY layout is fixed: positions, optional normals, and the optional
``objectness`` / ``object_id`` / ``graspness`` channels, in that order.
Per-view score matrices live in a small binary sidecar (magic ``GSNV1``)
because a 300-float list property per vertex is hostile to most PLY readers.
"""

from __future__ import annotations

import struct

import numpy as np

from .geometry import PointCloud
from .gripper import GraspPose

_SIDECAR_MAGIC = b"GSNV1"

_PROPERTY_TYPES = {
    "x": "float", "y": "float", "z": "float",
    "nx": "float", "ny": "float", "nz": "float",
    "objectness": "uchar",
    "object_id": "int",
    "graspness": "float",
}
_NUMPY_OF = {"float": "<f4", "uchar": "u1", "int": "<i4"}

GRASP_CSV_HEADER = ("center_x,center_y,center_z,view_x,view_y,view_z,"
                    "angle,depth,width,score")


def _cloud_properties(cloud: PointCloud) -> list[str]:
    props = ["x", "y", "z"]
    if cloud.normals is not None:
        props += ["nx", "ny", "nz"]
    for name in ("objectness", "object_id", "graspness"):
        if name in cloud.channels:
            props.append(name)
    return props


def _cloud_columns(cloud: PointCloud, props: list[str]) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for axis, name in enumerate("xyz"):
        cols[name] = cloud.positions[:, axis]
    if cloud.normals is not None:
        for axis, name in enumerate(("nx", "ny", "nz")):
            cols[name] = cloud.normals[:, axis]
    for name in props:
        if name in cloud.channels:
            cols[name] = cloud.channels[name]
    return cols


def save_cloud(path, cloud: PointCloud, *, binary: bool = True) -> None:
    """Write a cloud as PLY (binary little-endian by default)."""
    props = _cloud_properties(cloud)
    cols = _cloud_columns(cloud, props)
    fmt = "binary_little_endian" if binary else "ascii"
    header = ["ply", f"format {fmt} 1.0", f"element vertex {len(cloud)}"]
    header += [f"property {_PROPERTY_TYPES[p]} {p}" for p in props]
    header.append("end_header")
    record = np.dtype([(p, _NUMPY_OF[_PROPERTY_TYPES[p]]) for p in props])
    data = np.zeros(len(cloud), dtype=record)
    for p in props:
        data[p] = cols[p]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(data.tobytes())
        else:
            for row in data:
                cells = []
                for p in props:
                    v = row[p]
                    cells.append(f"{float(v):.9g}" if _PROPERTY_TYPES[p] == "float"
                                 else str(int(v)))
                fh.write((" ".join(cells) + "\n").encode("ascii"))


def _parse_header(fh) -> tuple[bool, int, list[str]]:
    if fh.readline().strip() != b"ply":
        raise ValueError("not a PLY file")
    binary = None
    count = None
    props: list[str] = []
    while True:
        line = fh.readline()
        if not line:
            raise ValueError("truncated PLY header")
        parts = line.decode("ascii").strip().split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] == "binary_little_endian":
                binary = True
            elif parts[1] == "ascii":
                binary = False
            else:
                raise ValueError(f"unsupported PLY format {parts[1]!r}")
        elif parts[0] == "element":
            if parts[1] != "vertex" or count is not None:
                raise ValueError("only a single vertex element is supported")
            count = int(parts[2])
        elif parts[0] == "property":
            if len(parts) != 3 or parts[2] not in _PROPERTY_TYPES:
                raise ValueError(f"unsupported property {' '.join(parts[1:])!r}")
            if _PROPERTY_TYPES[parts[2]] != parts[1]:
                raise ValueError(f"property {parts[2]} must be {_PROPERTY_TYPES[parts[2]]}")
            props.append(parts[2])
        elif parts[0] == "end_header":
            break
        else:
            raise ValueError(f"unsupported header line {parts[0]!r}")
    if binary is None or count is None:
        raise ValueError("PLY header lacks format or vertex element")
    if props[:3] != ["x", "y", "z"]:
        raise ValueError("PLY must start with x, y, z properties")
    return binary, count, props


def load_cloud(path) -> PointCloud:
    with open(path, "rb") as fh:
        binary, count, props = _parse_header(fh)
        record = np.dtype([(p, _NUMPY_OF[_PROPERTY_TYPES[p]]) for p in props])
        if binary:
            data = np.frombuffer(fh.read(record.itemsize * count), dtype=record,
                                 count=count)
        else:
            rows = [fh.readline().split() for _ in range(count)]
            data = np.zeros(count, dtype=record)
            for i, row in enumerate(rows):
                if len(row) != len(props):
                    raise ValueError(f"ASCII vertex row {i} malformed")
                for p, cell in zip(props, row):
                    data[i][p] = float(cell)
    positions = np.stack([data[p].astype(np.float64) for p in "xyz"], axis=1)
    normals = None
    if "nx" in props:
        normals = np.stack([data[p].astype(np.float64)
                            for p in ("nx", "ny", "nz")], axis=1)
    channels = {}
    if "objectness" in props:
        channels["objectness"] = data["objectness"].astype(np.uint8)
    if "object_id" in props:
        channels["object_id"] = data["object_id"].astype(np.int32)
    if "graspness" in props:
        channels["graspness"] = data["graspness"].astype(np.float64)
    return PointCloud(positions, normals, channels)


def save_view_scores(path, scores: np.ndarray) -> None:
    """Write an (N, V) per-view score matrix as the binary sidecar."""
    scores = np.asarray(scores, dtype=np.float32)
    if scores.ndim != 2:
        raise ValueError("view scores must be a 2-d array")
    with open(path, "wb") as fh:
        fh.write(_SIDECAR_MAGIC)
        fh.write(struct.pack("<II", scores.shape[0], scores.shape[1]))
        fh.write(np.ascontiguousarray(scores, dtype="<f4").tobytes())


def load_view_scores(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(len(_SIDECAR_MAGIC)) != _SIDECAR_MAGIC:
            raise ValueError("bad sidecar magic")
        n, v = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(4 * n * v), dtype="<f4")
        if data.size != n * v:
            raise ValueError("truncated sidecar payload")
    return data.reshape(n, v).astype(np.float64)


def save_grasps(path, grasps: list[GraspPose]) -> None:
    lines = [GRASP_CSV_HEADER]
    for g in grasps:
        cells = [*g.center, *g.view, g.in_plane_angle, g.depth, g.width, g.score]
        lines.append(",".join(repr(float(c)) for c in cells))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_grasps(path) -> list[GraspPose]:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != GRASP_CSV_HEADER:
            raise ValueError("unexpected grasp CSV header")
        out = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vals = [float(c) for c in line.split(",")]
            if len(vals) != 10:
                raise ValueError("grasp CSV row must have 10 columns")
            out.append(GraspPose(center=np.array(vals[0:3]),
                                 view=np.array(vals[3:6]),
                                 in_plane_angle=vals[6], depth=vals[7],
                                 width=vals[8], score=vals[9]))
    return out
