"""Independent brute-force references used to validate the fast paths.

Everything here trades speed for obviousness: explicit loops over every
candidate, world-space arithmetic, no spatial indices and no candidate
pruning.  The grasp-frame convention (approach = view direction, closing axis
from the smallest rotation taking +z onto the view) is shared with the
package because outputs can only match under the same convention; the
evaluation logic — membership, contact picking, friction, collision and
aggregation — is written from scratch.
"""

from __future__ import annotations

import math

import numpy as np

STRICT_SLACK = 1e-9  # matches the documented strict point-in-box slack


def frame_axes(view):
    """Rows (approach, closing at angle 0, height at angle 0) for one view."""
    v = np.asarray(view, dtype=np.float64)
    if v[2] < -1.0 + 1e-12:
        return np.array([[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]])
    # smallest rotation taking +z onto the view, applied to +y:
    #   y0 = y_hat - (vy / (1 + vz)) * (v + z_hat)
    scale = v[1] / (1.0 + v[2])
    y0 = np.array([0.0, 1.0, 0.0]) - scale * (v + np.array([0.0, 0.0, 1.0]))
    z0 = np.cross(v, y0)
    return np.stack([v, y0, z0])


def naive_score(mu_star, mu_min, mu_max):
    if mu_star > mu_max:
        return 0.0
    mu_c = min(max(mu_star, mu_min), mu_max)
    return math.log(mu_max / mu_c) / math.log(mu_max / mu_min)


def _pair_friction(pl, pr, nl, nr):
    """World-space minimum friction for a left/right contact pair (inf if the
    closing line leaves either friction cone's open half-space)."""
    g = pr - pl
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        return math.inf
    ghat = g / gn
    worst = 0.0
    for normal, toward in ((nl, ghat), (nr, -ghat)):
        cos = float(np.dot(-normal, toward))
        if cos <= 0.0:
            return math.inf
        sin = float(np.linalg.norm(np.cross(-normal, toward)))
        worst = max(worst, sin / cos)
    return worst


def _boxes_hit(cu, cva, cwa, u_lo, u_hi, gripper, width, clearance):
    """Any scene point strictly inside a finger or the palm (and not in the
    between-the-fingers exclusion region)."""
    s = STRICT_SLACK
    ft = gripper.finger_thickness
    pd = gripper.palm_depth
    half_h = gripper.finger_height / 2.0
    hw = min(width + clearance, gripper.max_width) / 2.0
    in_u = (cu > u_lo + s) & (cu < u_hi - s)
    in_w = np.abs(cwa) < half_h - s
    left = in_u & in_w & (cva > -hw - ft + s) & (cva < -hw - s)
    right = in_u & in_w & (cva > hw + s) & (cva < hw + ft - s)
    palm = ((cu > u_lo - pd + s) & (cu < u_lo - s) & in_w
            & (cva > -hw - ft + s) & (cva < hw + ft - s))
    excl = in_u & in_w & (np.abs(cva) < hw - s)
    return bool(np.any((left | right | palm) & ~excl))


def naive_landscape(assembled, views, angles, depths, quality, gripper,
                    aggregation="feasible-ratio", use_collision=True,
                    width_clearance=0.01, band_eps=None, eval_indices=None):
    """Brute-force graspness over every object point of an assembled scene.

    Returns (view_raw (N, V), point_raw (N,)) with the same aggregation
    semantics as the engine: per view, the feasible-candidate count (or mean /
    max score) over the angle x depth cells; per point, the feasible fraction
    over all cells.  Candidate contacts come from the point's own object only;
    collision is tested against every other point in the scene.

    ``eval_indices`` restricts evaluation to a subset of object points (the
    per-point cost is unchanged, which makes timing extrapolation linear);
    the returned arrays then cover only those rows.
    """
    mode = {"feasible-ratio": 0, "mean-score": 1, "max-score": 2}[aggregation]
    if band_eps is None:
        band_eps = 2.0 * assembled.spacing
    cloud = assembled.cloud
    pos = cloud.positions
    nrm = cloud.normals
    ids = np.asarray(cloud.channels["object_id"])
    n_eval = assembled.object_points.stop
    views = np.atleast_2d(np.asarray(views, dtype=np.float64))
    depths = [float(d) for d in depths]
    half_w = gripper.max_width / 2.0
    half_h = gripper.finger_height / 2.0
    c = quality.score_threshold_c
    mu_thresh = quality.mu_max if c == 0.0 else \
        quality.mu_max ** (1.0 - c) * quality.mu_min ** c

    l_cells = float(angles * len(depths))
    vl_cells = float(len(views) * angles * len(depths))
    if eval_indices is None:
        eval_indices = range(n_eval)
    eval_indices = [int(e) for e in eval_indices]
    view_raw = np.zeros((len(eval_indices), len(views)))
    point_raw = np.zeros(len(eval_indices))

    for row, e in enumerate(eval_indices):
        own = np.flatnonzero(ids == ids[e])
        other = np.flatnonzero(ids != ids[e])
        rel = pos[own] - pos[e]
        crel = pos[other] - pos[e]
        total = 0
        for j, view in enumerate(views):
            axes = frame_axes(view)
            count = 0
            acc = 0.0
            best = 0.0
            for a in range(angles):
                alpha = a * math.pi / angles
                ca, sa = math.cos(alpha), math.sin(alpha)
                ax_u = axes[0]
                ax_v = ca * axes[1] + sa * axes[2]
                ax_w = -sa * axes[1] + ca * axes[2]
                u = rel @ ax_u
                va = rel @ ax_v
                wa = rel @ ax_w
                gate = (np.abs(va) <= half_w) & (np.abs(wa) <= half_h)
                if use_collision:
                    cu = crel @ ax_u
                    cva = crel @ ax_v
                    cwa = crel @ ax_w
                for d in depths:
                    u_lo = d - gripper.finger_length
                    member = gate & (u >= u_lo) & (u <= d)
                    sel = np.flatnonzero(member)
                    if sel.size == 0:
                        continue
                    mva = va[sel]
                    cmin = float(mva.min())
                    cmax = float(mva.max())
                    width = cmax - cmin
                    if width <= 0.0 or width > gripper.max_width:
                        continue
                    rad2 = mva * mva + wa[sel] * wa[sel]
                    lpos = np.flatnonzero(mva <= cmin + band_eps)
                    rpos = np.flatnonzero(mva >= cmax - band_eps)
                    gl = own[sel[lpos[int(np.argmin(rad2[lpos]))]]]
                    gr = own[sel[rpos[int(np.argmin(rad2[rpos]))]]]
                    mu_star = _pair_friction(pos[gl], pos[gr], nrm[gl], nrm[gr])
                    feasible = mu_star < mu_thresh
                    q = 0.0
                    if mode != 0:
                        q = naive_score(mu_star, quality.mu_min, quality.mu_max)
                    cfree = True
                    if use_collision:
                        cfree = not _boxes_hit(cu, cva, cwa, u_lo, d,
                                               gripper, width, width_clearance)
                    if feasible and cfree:
                        count += 1
                    if mode == 1 and cfree:
                        acc += q
                    elif mode == 2 and cfree and q > best:
                        best = q
            total += count
            if mode == 0:
                view_raw[row, j] = count / l_cells
            elif mode == 1:
                view_raw[row, j] = acc / l_cells
            else:
                view_raw[row, j] = best
        point_raw[row] = total / vl_cells
    return view_raw, point_raw


def mu_grid_cone_scan(left_point, right_point, left_normal, right_normal,
                      step=1e-4, mu_limit=16.0):
    """Smallest grid friction value whose cones contain the closing line.

    Scans mu = step, 2*step, ... and tests cone membership through the cosine
    form (cos(theta) >= 1/sqrt(1 + mu^2)), never through a tangent formula, so
    it cross-checks the analytic minimum independently.  Returns inf when no
    grid value up to ``mu_limit`` admits the pair.
    """
    g = np.asarray(right_point, dtype=np.float64) - np.asarray(left_point, dtype=np.float64)
    gn = np.linalg.norm(g)
    if gn == 0.0:
        return math.inf
    ghat = g / gn
    cos_l = float(np.dot(-np.asarray(left_normal, dtype=np.float64), ghat))
    cos_r = float(np.dot(-np.asarray(right_normal, dtype=np.float64), -ghat))
    if cos_l <= 0.0 or cos_r <= 0.0:
        return math.inf
    mus = np.arange(step, mu_limit + step, step)
    need = 1.0 / np.sqrt(1.0 + mus * mus)
    ok = (min(cos_l, cos_r) >= need)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return math.inf
    return float(mus[hits[0]])


def brute_fps(points, count, start):
    """Greedy farthest-point selection with explicit loops; first max wins."""
    pts = np.asarray(points, dtype=np.float64)
    chosen = [int(start)]
    dist2 = [float(np.dot(p - pts[start], p - pts[start])) for p in pts]
    while len(chosen) < count:
        best_i, best_d = 0, -1.0
        for i, d in enumerate(dist2):
            if d > best_d:
                best_i, best_d = i, d
        chosen.append(best_i)
        for i, p in enumerate(pts):
            d = float(np.dot(p - pts[best_i], p - pts[best_i]))
            if d < dist2[i]:
                dist2[i] = d
    return np.asarray(chosen, dtype=np.int64)


def brute_nearest(points, query, k):
    """(indices, distances) of the k nearest points, ties by lowest index."""
    pts = np.asarray(points, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    d2 = [(float(np.dot(p - q, p - q)), i) for i, p in enumerate(pts)]
    d2.sort()
    picked = d2[:k]
    return (np.asarray([i for _, i in picked], dtype=np.int64),
            np.asarray([math.sqrt(d) for d, _ in picked]))


def brute_within(points, query, radius):
    pts = np.asarray(points, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    out = [i for i, p in enumerate(pts)
           if math.sqrt(float(np.dot(p - q, p - q))) <= radius]
    return np.asarray(out, dtype=np.int64)


def rotation_angle(r1, r2):
    cos = (np.trace(r1.T @ r2) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, cos)))


def brute_nms(centers, rotations, scores, translation, rotation):
    """Greedy suppression: drop a pose iff both distances to an already kept
    higher-scoring pose fall below their thresholds.  Assumes descending
    scores on input; returns kept indices in input order."""
    order = np.argsort(-np.asarray(scores), kind="stable")
    kept: list[int] = []
    for i in order:
        ok = True
        for j in kept:
            dt = float(np.linalg.norm(centers[i] - centers[j]))
            dr = rotation_angle(rotations[i], rotations[j])
            if dt < translation and dr < rotation:
                ok = False
                break
        if ok:
            kept.append(int(i))
    return sorted(kept)


def bounding_circle_radius(shape):
    """Circumradius of the shape's footprint for any yaw-only pose."""
    name = type(shape).__name__
    if name == "Box":
        hx, hy, _ = shape.half_extents
        return math.hypot(hx, hy)
    if name == "Sphere":
        return shape.radius
    if name == "Cylinder":
        return shape.radius
    raise TypeError(name)


def random_rotation(rng):
    """Uniform random rotation matrix from a normalized quaternion."""
    q = rng.normal(size=4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
