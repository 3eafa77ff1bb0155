"""Pure-numpy backend.

This is the reference implementation of the hot kernels.  The numba backend
mirrors it operation-for-operation (same expressions, same association, same
scan order) so the two produce identical bits; keep them in sync.

Shared data layout:

* CSR neighborhoods: ``idx`` flat int64 candidate indices (ascending per row),
  ``off`` int64 offsets of length N+1.
* grasp frames: (3, 3) rows = (approach axis, closing axis at angle 0,
  height axis at angle 0); the in-plane rotation mixes rows 1 and 2.
* ``grip``: [finger_length, finger_thickness, finger_height, palm_depth,
  max_width, width_clearance]
* ``qual``: [mu_min, mu_max, mu_feasible_threshold, 1/ln(mu_max/mu_min),
  contact_band_eps]
* aggregation ``mode``: 0 = feasible-ratio, 1 = mean score, 2 = max score
"""

from __future__ import annotations

import math

import numpy as np

SLACK = 1e-9  # strict-inside slack for point-in-box collision tests
MISS = -2
TABLE_HIT = -1

SHAPE_BOX = 0
SHAPE_SPHERE = 1
SHAPE_CYLINDER = 2
SHAPE_MESH = 3


def fps_select(points: np.ndarray, count: int, start: int) -> np.ndarray:
    px, py, pz = points[:, 0], points[:, 1], points[:, 2]
    out = np.empty(count, dtype=np.int64)
    out[0] = start
    dx = px - px[start]
    dy = py - py[start]
    dz = pz - pz[start]
    d2 = (dx * dx + dy * dy) + dz * dz
    for m in range(1, count):
        j = int(np.argmax(d2))
        out[m] = j
        dx = px - px[j]
        dy = py - py[j]
        dz = pz - pz[j]
        nd2 = (dx * dx + dy * dy) + dz * dz
        d2 = np.minimum(d2, nd2)
    return out


# ---------------------------------------------------------------------------
# signed distances (vectorized over points, one shape at a time)


def _sd_box(x, y, z, hx, hy, hz):
    qx = np.abs(x) - hx
    qy = np.abs(y) - hy
    qz = np.abs(z) - hz
    mx = np.maximum(qx, 0.0)
    my = np.maximum(qy, 0.0)
    mz = np.maximum(qz, 0.0)
    outer = np.sqrt((mx * mx + my * my) + mz * mz)
    inner = np.minimum(np.maximum(qx, np.maximum(qy, qz)), 0.0)
    return outer + inner


def _sd_sphere(x, y, z, r):
    return np.sqrt((x * x + y * y) + z * z) - r


def _sd_cylinder(x, y, z, r, hh):
    rr = np.sqrt(x * x + y * y) - r
    zz = np.abs(z) - hh
    mr = np.maximum(rr, 0.0)
    mz = np.maximum(zz, 0.0)
    outer = np.sqrt(mr * mr + mz * mz)
    inner = np.minimum(np.maximum(rr, zz), 0.0)
    return outer + inner


def _d_table(x, y, z, radius):
    rr = np.sqrt(x * x + y * y) - radius
    mr = np.maximum(rr, 0.0)
    return np.sqrt(mr * mr + z * z)


def _tri_dist2(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    """Squared distance from points to one triangle (Ericson regions)."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = (abx * apx + aby * apy) + abz * apz
    d2 = (acx * apx + acy * apy) + acz * apz
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = (abx * bpx + aby * bpy) + abz * bpz
    d4 = (acx * bpx + acy * bpy) + acz * bpz
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = (abx * cpx + aby * cpy) + abz * cpz
    d6 = (acx * cpx + acy * cpy) + acz * cpz
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = va + vb + vc
        vv = vb / denom
        ww = vc / denom

    m1 = (d1 <= 0.0) & (d2 <= 0.0)
    m2 = (d3 >= 0.0) & (d4 <= d3)
    m3 = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    m4 = (d6 >= 0.0) & (d5 <= d6)
    m5 = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    m6 = (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)

    # interior (fallback)
    qx = (ax + abx * vv) + acx * ww
    qy = (ay + aby * vv) + acy * ww
    qz = (az + abz * vv) + acz * ww
    # apply regions in reverse priority so earlier regions overwrite
    sel = m6 & ~(m1 | m2 | m3 | m4 | m5)
    qx = np.where(sel, bx + t_bc * (cx - bx), qx)
    qy = np.where(sel, by + t_bc * (cy - by), qy)
    qz = np.where(sel, bz + t_bc * (cz - bz), qz)
    sel = m5 & ~(m1 | m2 | m3 | m4)
    qx = np.where(sel, ax + t_ac * acx, qx)
    qy = np.where(sel, ay + t_ac * acy, qy)
    qz = np.where(sel, az + t_ac * acz, qz)
    sel = m4 & ~(m1 | m2 | m3)
    qx = np.where(sel, cx, qx)
    qy = np.where(sel, cy, qy)
    qz = np.where(sel, cz, qz)
    sel = m3 & ~(m1 | m2)
    qx = np.where(sel, ax + t_ab * abx, qx)
    qy = np.where(sel, ay + t_ab * aby, qy)
    qz = np.where(sel, az + t_ab * abz, qz)
    sel = m2 & ~m1
    qx = np.where(sel, bx, qx)
    qy = np.where(sel, by, qy)
    qz = np.where(sel, bz, qz)
    qx = np.where(m1, ax, qx)
    qy = np.where(m1, ay, qy)
    qz = np.where(m1, az, qz)

    dx, dy, dz = px - qx, py - qy, pz - qz
    return (dx * dx + dy * dy) + dz * dz


def _mesh_dist(px, py, pz, verts, tris, t0, t1):
    best = np.full(px.shape, np.inf)
    for t in range(t0, t1):
        ia, ib, ic = tris[t, 0], tris[t, 1], tris[t, 2]
        d2 = _tri_dist2(
            px, py, pz,
            verts[ia, 0], verts[ia, 1], verts[ia, 2],
            verts[ib, 0], verts[ib, 1], verts[ib, 2],
            verts[ic, 0], verts[ic, 1], verts[ic, 2],
        )
        best = np.minimum(best, d2)
    return np.sqrt(best)


def _scene_distance(px, py, pz, shape_type, shape_params, rot_w2o, tr_w2o,
                    tri_start, tri_end, mesh_verts, mesh_tris, table_radius):
    """Min distance over instances (+ table); returns (dist, first-argmin id)."""
    n = px.shape[0]
    dmin = np.full(n, np.inf)
    kind = np.full(n, MISS, dtype=np.int64)
    for k in range(shape_type.shape[0]):
        r = rot_w2o[k]
        t = tr_w2o[k]
        lx = ((r[0, 0] * px + r[0, 1] * py) + r[0, 2] * pz) + t[0]
        ly = ((r[1, 0] * px + r[1, 1] * py) + r[1, 2] * pz) + t[1]
        lz = ((r[2, 0] * px + r[2, 1] * py) + r[2, 2] * pz) + t[2]
        st = shape_type[k]
        if st == SHAPE_BOX:
            d = _sd_box(lx, ly, lz, shape_params[k, 0], shape_params[k, 1], shape_params[k, 2])
        elif st == SHAPE_SPHERE:
            d = _sd_sphere(lx, ly, lz, shape_params[k, 0])
        elif st == SHAPE_CYLINDER:
            d = _sd_cylinder(lx, ly, lz, shape_params[k, 0], shape_params[k, 1])
        else:
            d = _mesh_dist(lx, ly, lz, mesh_verts, mesh_tris, tri_start[k], tri_end[k])
        upd = d < dmin
        dmin = np.where(upd, d, dmin)
        kind = np.where(upd, k, kind)
    if table_radius >= 0.0:
        d = _d_table(px, py, pz, table_radius)
        upd = d < dmin
        dmin = np.where(upd, d, dmin)
        kind = np.where(upd, TABLE_HIT, kind)
    return dmin, kind


def render_rays(origin, dirs, shape_type, shape_params, rot_w2o, tr_w2o,
                tri_start, tri_end, mesh_verts, mesh_tris, table_radius,
                max_steps, hit_tol, max_range):
    """Sphere-trace all rays; returns (t, hit kind) with kind -2 = miss, -1 = table."""
    nrays = dirs.shape[0]
    t = np.zeros(nrays)
    kind = np.full(nrays, MISS, dtype=np.int64)
    active = np.ones(nrays, dtype=bool)
    ox, oy, oz = origin[0], origin[1], origin[2]
    for _ in range(max_steps):
        ai = np.flatnonzero(active)
        if ai.size == 0:
            break
        ta = t[ai]
        px = ox + ta * dirs[ai, 0]
        py = oy + ta * dirs[ai, 1]
        pz = oz + ta * dirs[ai, 2]
        d, k = _scene_distance(px, py, pz, shape_type, shape_params, rot_w2o,
                               tr_w2o, tri_start, tri_end, mesh_verts,
                               mesh_tris, table_radius)
        hit = d < hit_tol
        kind[ai[hit]] = k[hit]
        active[ai[hit]] = False
        adv = ~hit
        tn = ta[adv] + d[adv]
        t[ai[adv]] = tn
        over = tn > max_range
        active[ai[adv][over]] = False
    return t, kind


# ---------------------------------------------------------------------------
# grasp-candidate grid evaluation


def _cell_quality(u, va, wa, nx, nva, nwa, member, eps, max_w):
    """Contacts + friction for one (angle, depth) cell.

    Returns (mu, width, valid).  ``member`` marks closing-region points.
    """
    mva = va[member]
    if mva.size == 0:
        return np.inf, 0.0, False
    cmin = float(mva.min())
    cmax = float(mva.max())
    width = cmax - cmin
    if width <= 0.0 or width > max_w:
        return np.inf, width, False
    mwa = wa[member]
    mu_ = u[member]
    rad2 = mva * mva + mwa * mwa
    lsel = np.flatnonzero(mva <= cmin + eps)
    rsel = np.flatnonzero(mva >= cmax - eps)
    li = lsel[int(np.argmin(rad2[lsel]))]
    ri = rsel[int(np.argmin(rad2[rsel]))]
    gx = mu_[ri] - mu_[li]
    gy = mva[ri] - mva[li]
    gz = mwa[ri] - mwa[li]
    gn2 = (gx * gx + gy * gy) + gz * gz
    mnx = nx[member]
    mnva = nva[member]
    mnwa = nwa[member]
    dot_l = (mnx[li] * gx + mnva[li] * gy) + mnwa[li] * gz
    dot_r = (mnx[ri] * gx + mnva[ri] * gy) + mnwa[ri] * gz
    if dot_l < 0.0 and dot_r > 0.0:
        tan_l = math.sqrt(max(gn2 - dot_l * dot_l, 0.0)) / (-dot_l)
        tan_r = math.sqrt(max(gn2 - dot_r * dot_r, 0.0)) / dot_r
        mu_star = max(tan_l, tan_r)
    else:
        mu_star = np.inf
    return mu_star, width, True


def _cell_collides(cu, cva, cwa, u_lo, u_hi, half_h, width, ft, pd, max_w, clearance):
    if cu.size == 0:
        return False
    wc = width + clearance
    if wc > max_w:
        wc = max_w
    hw = 0.5 * wc
    in_u = (cu > u_lo + SLACK) & (cu < u_hi - SLACK)
    in_w = (cwa > -half_h + SLACK) & (cwa < half_h - SLACK)
    left = (cva > (-hw - ft) + SLACK) & (cva < -hw - SLACK) & in_u & in_w
    right = (cva > hw + SLACK) & (cva < (hw + ft) - SLACK) & in_u & in_w
    palm_u = (cu > (u_lo - pd) + SLACK) & (cu < u_lo - SLACK)
    palm = palm_u & (cva > (-hw - ft) + SLACK) & (cva < (hw + ft) - SLACK) & in_w
    excl = in_u & (np.abs(cva) < hw - SLACK) & in_w
    return bool(np.any((left | right | palm) & ~excl))


def _score(mu_star, qual):
    mu_min, mu_max, inv_lr = qual[0], qual[1], qual[3]
    if mu_star <= mu_max:
        mu_c = min(max(mu_star, mu_min), mu_max)
        return math.log(mu_max / mu_c) * inv_lr
    return 0.0


def _point_view_frame_coords(frame, relx, rely, relz):
    u = (frame[0, 0] * relx + frame[0, 1] * rely) + frame[0, 2] * relz
    v0 = (frame[1, 0] * relx + frame[1, 1] * rely) + frame[1, 2] * relz
    w0 = (frame[2, 0] * relx + frame[2, 1] * rely) + frame[2, 2] * relz
    return u, v0, w0


def landscape_eval(eval_pts, own_idx, own_off, mdl_pts, mdl_nrm,
                   col_idx, col_off, scn_pts, frames, cos_a, sin_a, depths,
                   grip, qual, mode, use_collision):
    """Raw graspness over eval points x views.

    Returns (view_raw (N, V), point_raw (N,)).  point_raw is always the
    feasible-candidate fraction; view_raw depends on ``mode``.
    """
    n = eval_pts.shape[0]
    nv = frames.shape[0]
    na = cos_a.shape[0]
    nd = depths.shape[0]
    lf, ft, fh, pd, max_w, clearance = grip[0], grip[1], grip[2], grip[3], grip[4], grip[5]
    half_w = 0.5 * max_w
    half_h = 0.5 * fh
    eps = qual[4]
    mu_thresh = qual[2]
    l_cells = float(na * nd)
    vl_cells = float(nv * na * nd)

    view_raw = np.zeros((n, nv))
    point_raw = np.zeros(n)

    for i in range(n):
        o0, o1 = own_off[i], own_off[i + 1]
        sel = own_idx[o0:o1]
        p = eval_pts[i]
        relx = mdl_pts[sel, 0] - p[0]
        rely = mdl_pts[sel, 1] - p[1]
        relz = mdl_pts[sel, 2] - p[2]
        nmx = mdl_nrm[sel, 0]
        nmy = mdl_nrm[sel, 1]
        nmz = mdl_nrm[sel, 2]
        if use_collision:
            c0, c1 = col_off[i], col_off[i + 1]
            csel = col_idx[c0:c1]
            crx = scn_pts[csel, 0] - p[0]
            cry = scn_pts[csel, 1] - p[1]
            crz = scn_pts[csel, 2] - p[2]
        total = 0
        for j in range(nv):
            fr = frames[j]
            u, v0, w0 = _point_view_frame_coords(fr, relx, rely, relz)
            nx = (fr[0, 0] * nmx + fr[0, 1] * nmy) + fr[0, 2] * nmz
            nv0 = (fr[1, 0] * nmx + fr[1, 1] * nmy) + fr[1, 2] * nmz
            nw0 = (fr[2, 0] * nmx + fr[2, 1] * nmy) + fr[2, 2] * nmz
            if use_collision:
                cu, cv0, cw0 = _point_view_frame_coords(fr, crx, cry, crz)
            count = 0
            acc = 0.0
            best = 0.0
            for a in range(na):
                ca, sa = cos_a[a], sin_a[a]
                va = ca * v0 + sa * w0
                wa = -sa * v0 + ca * w0
                nva = ca * nv0 + sa * nw0
                nwa = -sa * nv0 + ca * nw0
                gate = (np.abs(va) <= half_w) & (np.abs(wa) <= half_h)
                if use_collision:
                    cva = ca * cv0 + sa * cw0
                    cwa = -sa * cv0 + ca * cw0
                for di in range(nd):
                    d = depths[di]
                    u_lo = d - lf
                    member = gate & (u >= u_lo) & (u <= d)
                    mu_star, width, valid = _cell_quality(
                        u, va, wa, nx, nva, nwa, member, eps, max_w)
                    if not valid:
                        continue
                    feasible = mu_star < mu_thresh
                    q = 0.0
                    if mode != 0:
                        q = _score(mu_star, qual)
                    cfree = True
                    if use_collision and (feasible or q > 0.0):
                        cfree = not _cell_collides(cu, cva, cwa, u_lo, d, half_h,
                                                   width, ft, pd, max_w, clearance)
                    if feasible and cfree:
                        count += 1
                    if mode == 1:
                        if cfree:
                            acc += q
                    elif mode == 2:
                        if cfree and q > best:
                            best = q
            total += count
            if mode == 0:
                view_raw[i, j] = count / l_cells
            elif mode == 1:
                view_raw[i, j] = acc / l_cells
            else:
                view_raw[i, j] = best
        point_raw[i] = total / vl_cells
    return view_raw, point_raw


def cell_eval(pts, frames, own_idx, own_off, mdl_pts, mdl_nrm,
              col_idx, col_off, scn_pts, cos_a, sin_a, depths,
              grip, qual, use_collision):
    """Per-cell quality for a batch of (point, frame) pairs.

    Returns (mu (S,A,D), q (S,A,D), width (S,A,D), valid u8, cfree u8).
    Collision is evaluated for every valid-contact cell; invalid cells report
    cfree = 1 (vacuous).  q is the raw score, not masked by collision.
    """
    s = pts.shape[0]
    na = cos_a.shape[0]
    nd = depths.shape[0]
    lf, ft, fh, pd, max_w, clearance = grip[0], grip[1], grip[2], grip[3], grip[4], grip[5]
    half_w = 0.5 * max_w
    half_h = 0.5 * fh
    eps = qual[4]

    mu_out = np.full((s, na, nd), np.inf)
    q_out = np.zeros((s, na, nd))
    w_out = np.zeros((s, na, nd))
    valid_out = np.zeros((s, na, nd), dtype=np.uint8)
    cfree_out = np.ones((s, na, nd), dtype=np.uint8)

    for i in range(s):
        o0, o1 = own_off[i], own_off[i + 1]
        sel = own_idx[o0:o1]
        p = pts[i]
        relx = mdl_pts[sel, 0] - p[0]
        rely = mdl_pts[sel, 1] - p[1]
        relz = mdl_pts[sel, 2] - p[2]
        nmx = mdl_nrm[sel, 0]
        nmy = mdl_nrm[sel, 1]
        nmz = mdl_nrm[sel, 2]
        fr = frames[i]
        u, v0, w0 = _point_view_frame_coords(fr, relx, rely, relz)
        nx = (fr[0, 0] * nmx + fr[0, 1] * nmy) + fr[0, 2] * nmz
        nv0 = (fr[1, 0] * nmx + fr[1, 1] * nmy) + fr[1, 2] * nmz
        nw0 = (fr[2, 0] * nmx + fr[2, 1] * nmy) + fr[2, 2] * nmz
        if use_collision:
            c0, c1 = col_off[i], col_off[i + 1]
            csel = col_idx[c0:c1]
            crx = scn_pts[csel, 0] - p[0]
            cry = scn_pts[csel, 1] - p[1]
            crz = scn_pts[csel, 2] - p[2]
            cu, cv0, cw0 = _point_view_frame_coords(fr, crx, cry, crz)
        for a in range(na):
            ca, sa = cos_a[a], sin_a[a]
            va = ca * v0 + sa * w0
            wa = -sa * v0 + ca * w0
            nva = ca * nv0 + sa * nw0
            nwa = -sa * nv0 + ca * nw0
            gate = (np.abs(va) <= half_w) & (np.abs(wa) <= half_h)
            if use_collision:
                cva = ca * cv0 + sa * cw0
                cwa = -sa * cv0 + ca * cw0
            for di in range(nd):
                d = depths[di]
                u_lo = d - lf
                member = gate & (u >= u_lo) & (u <= d)
                mu_star, width, valid = _cell_quality(
                    u, va, wa, nx, nva, nwa, member, eps, max_w)
                w_out[i, a, di] = width
                if not valid:
                    continue
                valid_out[i, a, di] = 1
                mu_out[i, a, di] = mu_star
                q_out[i, a, di] = _score(mu_star, qual)
                if use_collision:
                    hit = _cell_collides(cu, cva, cwa, u_lo, d, half_h,
                                         width, ft, pd, max_w, clearance)
                    cfree_out[i, a, di] = 0 if hit else 1
    return mu_out, q_out, w_out, valid_out, cfree_out
