"""Numba backend: scalar mirrors of backend_numpy compiled with ``@njit``.

Every arithmetic expression here keeps the exact association and scan order
of the numpy reference so outputs agree bit-for-bit.  fastmath stays off for
that reason.  Parallel loops write disjoint slots only, so results do not
depend on the thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

SLACK = 1e-9
MISS = -2
TABLE_HIT = -1

SHAPE_BOX = 0
SHAPE_SPHERE = 1
SHAPE_CYLINDER = 2
SHAPE_MESH = 3


@njit(cache=True)
def fps_select(points, count, start):
    n = points.shape[0]
    out = np.empty(count, dtype=np.int64)
    out[0] = start
    d2 = np.empty(n, dtype=np.float64)
    for i in range(n):
        dx = points[i, 0] - points[start, 0]
        dy = points[i, 1] - points[start, 1]
        dz = points[i, 2] - points[start, 2]
        d2[i] = (dx * dx + dy * dy) + dz * dz
    for m in range(1, count):
        best = -1.0
        bi = 0
        for i in range(n):
            if d2[i] > best:
                best = d2[i]
                bi = i
        out[m] = bi
        for i in range(n):
            dx = points[i, 0] - points[bi, 0]
            dy = points[i, 1] - points[bi, 1]
            dz = points[i, 2] - points[bi, 2]
            nd2 = (dx * dx + dy * dy) + dz * dz
            if nd2 < d2[i]:
                d2[i] = nd2
    return out


@njit(cache=True)
def _sd_box(x, y, z, hx, hy, hz):
    qx = abs(x) - hx
    qy = abs(y) - hy
    qz = abs(z) - hz
    mx = max(qx, 0.0)
    my = max(qy, 0.0)
    mz = max(qz, 0.0)
    outer = math.sqrt((mx * mx + my * my) + mz * mz)
    inner = min(max(qx, max(qy, qz)), 0.0)
    return outer + inner


@njit(cache=True)
def _sd_sphere(x, y, z, r):
    return math.sqrt((x * x + y * y) + z * z) - r


@njit(cache=True)
def _sd_cylinder(x, y, z, r, hh):
    rr = math.sqrt(x * x + y * y) - r
    zz = abs(z) - hh
    mr = max(rr, 0.0)
    mz = max(zz, 0.0)
    outer = math.sqrt(mr * mr + mz * mz)
    inner = min(max(rr, zz), 0.0)
    return outer + inner


@njit(cache=True)
def _d_table(x, y, z, radius):
    rr = math.sqrt(x * x + y * y) - radius
    mr = max(rr, 0.0)
    return math.sqrt(mr * mr + z * z)


@njit(cache=True)
def _tri_dist2(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    abx = bx - ax
    aby = by - ay
    abz = bz - az
    acx = cx - ax
    acy = cy - ay
    acz = cz - az
    apx = px - ax
    apy = py - ay
    apz = pz - az
    d1 = (abx * apx + aby * apy) + abz * apz
    d2 = (acx * apx + acy * apy) + acz * apz
    bpx = px - bx
    bpy = py - by
    bpz = pz - bz
    d3 = (abx * bpx + aby * bpy) + abz * bpz
    d4 = (acx * bpx + acy * bpy) + acz * bpz
    cpx = px - cx
    cpy = py - cy
    cpz = pz - cz
    d5 = (abx * cpx + aby * cpy) + abz * cpz
    d6 = (acx * cpx + acy * cpy) + acz * cpz
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    if d1 <= 0.0 and d2 <= 0.0:
        qx, qy, qz = ax, ay, az
    elif d3 >= 0.0 and d4 <= d3:
        qx, qy, qz = bx, by, bz
    elif vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        qx = ax + t * abx
        qy = ay + t * aby
        qz = az + t * abz
    elif d6 >= 0.0 and d5 <= d6:
        qx, qy, qz = cx, cy, cz
    elif vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        qx = ax + t * acx
        qy = ay + t * acy
        qz = az + t * acz
    elif va <= 0.0 and d4 - d3 >= 0.0 and d5 - d6 >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        qx = bx + t * (cx - bx)
        qy = by + t * (cy - by)
        qz = bz + t * (cz - bz)
    else:
        denom = va + vb + vc
        vv = vb / denom
        ww = vc / denom
        qx = (ax + abx * vv) + acx * ww
        qy = (ay + aby * vv) + acy * ww
        qz = (az + abz * vv) + acz * ww

    dx = px - qx
    dy = py - qy
    dz = pz - qz
    return (dx * dx + dy * dy) + dz * dz


@njit(cache=True)
def _mesh_dist(px, py, pz, verts, tris, t0, t1):
    best = np.inf
    for t in range(t0, t1):
        ia = tris[t, 0]
        ib = tris[t, 1]
        ic = tris[t, 2]
        d2 = _tri_dist2(px, py, pz,
                        verts[ia, 0], verts[ia, 1], verts[ia, 2],
                        verts[ib, 0], verts[ib, 1], verts[ib, 2],
                        verts[ic, 0], verts[ic, 1], verts[ic, 2])
        if d2 < best:
            best = d2
    return math.sqrt(best)


@njit(cache=True)
def _scene_distance(px, py, pz, shape_type, shape_params, rot_w2o, tr_w2o,
                    tri_start, tri_end, mesh_verts, mesh_tris, table_radius):
    dmin = np.inf
    kind = MISS
    for k in range(shape_type.shape[0]):
        lx = ((rot_w2o[k, 0, 0] * px + rot_w2o[k, 0, 1] * py) + rot_w2o[k, 0, 2] * pz) + tr_w2o[k, 0]
        ly = ((rot_w2o[k, 1, 0] * px + rot_w2o[k, 1, 1] * py) + rot_w2o[k, 1, 2] * pz) + tr_w2o[k, 1]
        lz = ((rot_w2o[k, 2, 0] * px + rot_w2o[k, 2, 1] * py) + rot_w2o[k, 2, 2] * pz) + tr_w2o[k, 2]
        st = shape_type[k]
        if st == SHAPE_BOX:
            d = _sd_box(lx, ly, lz, shape_params[k, 0], shape_params[k, 1], shape_params[k, 2])
        elif st == SHAPE_SPHERE:
            d = _sd_sphere(lx, ly, lz, shape_params[k, 0])
        elif st == SHAPE_CYLINDER:
            d = _sd_cylinder(lx, ly, lz, shape_params[k, 0], shape_params[k, 1])
        else:
            d = _mesh_dist(lx, ly, lz, mesh_verts, mesh_tris, tri_start[k], tri_end[k])
        if d < dmin:
            dmin = d
            kind = k
    if table_radius >= 0.0:
        d = _d_table(px, py, pz, table_radius)
        if d < dmin:
            dmin = d
            kind = TABLE_HIT
    return dmin, kind


@njit(cache=True, parallel=True)
def render_rays(origin, dirs, shape_type, shape_params, rot_w2o, tr_w2o,
                tri_start, tri_end, mesh_verts, mesh_tris, table_radius,
                max_steps, hit_tol, max_range):
    nrays = dirs.shape[0]
    t_out = np.zeros(nrays, dtype=np.float64)
    kind_out = np.full(nrays, MISS, dtype=np.int64)
    for r in prange(nrays):
        t = 0.0
        kind = MISS
        for _ in range(max_steps):
            px = origin[0] + t * dirs[r, 0]
            py = origin[1] + t * dirs[r, 1]
            pz = origin[2] + t * dirs[r, 2]
            d, k = _scene_distance(px, py, pz, shape_type, shape_params,
                                   rot_w2o, tr_w2o, tri_start, tri_end,
                                   mesh_verts, mesh_tris, table_radius)
            if d < hit_tol:
                kind = k
                break
            t = t + d
            if t > max_range:
                break
        t_out[r] = t
        kind_out[r] = kind
    return t_out, kind_out


@njit(cache=True)
def _cell_quality_scalar(n_own, u, va, wa, nx, nva, nwa, gate, u_lo, u_hi,
                         eps, max_w,
                         m_u, m_va, m_wa, m_nx, m_nva, m_nwa):
    """Compact closing-region members, then contacts + friction.

    Returns (mu, width, valid); member data is staged through the m_* scratch
    arrays in candidate order.
    """
    nm = 0
    cmin = np.inf
    cmax = -np.inf
    for t in range(n_own):
        if gate[t] == 1 and u[t] >= u_lo and u[t] <= u_hi:
            m_u[nm] = u[t]
            m_va[nm] = va[t]
            m_wa[nm] = wa[t]
            m_nx[nm] = nx[t]
            m_nva[nm] = nva[t]
            m_nwa[nm] = nwa[t]
            if va[t] < cmin:
                cmin = va[t]
            if va[t] > cmax:
                cmax = va[t]
            nm += 1
    if nm == 0:
        return np.inf, 0.0, False
    width = cmax - cmin
    if width <= 0.0 or width > max_w:
        return np.inf, width, False
    lband = cmin + eps
    rband = cmax - eps
    li = -1
    ri = -1
    lbest = np.inf
    rbest = np.inf
    for t in range(nm):
        rad2 = m_va[t] * m_va[t] + m_wa[t] * m_wa[t]
        if m_va[t] <= lband and rad2 < lbest:
            lbest = rad2
            li = t
        if m_va[t] >= rband and rad2 < rbest:
            rbest = rad2
            ri = t
    gx = m_u[ri] - m_u[li]
    gy = m_va[ri] - m_va[li]
    gz = m_wa[ri] - m_wa[li]
    gn2 = (gx * gx + gy * gy) + gz * gz
    dot_l = (m_nx[li] * gx + m_nva[li] * gy) + m_nwa[li] * gz
    dot_r = (m_nx[ri] * gx + m_nva[ri] * gy) + m_nwa[ri] * gz
    if dot_l < 0.0 and dot_r > 0.0:
        tan_l = math.sqrt(max(gn2 - dot_l * dot_l, 0.0)) / (-dot_l)
        tan_r = math.sqrt(max(gn2 - dot_r * dot_r, 0.0)) / dot_r
        mu_star = max(tan_l, tan_r)
    else:
        mu_star = np.inf
    return mu_star, width, True


@njit(cache=True)
def _cell_collides_scalar(n_col, cu, cva, cwa, u_lo, u_hi, half_h, width,
                          ft, pd, max_w, clearance):
    if n_col == 0:
        return False
    wc = width + clearance
    if wc > max_w:
        wc = max_w
    hw = 0.5 * wc
    for t in range(n_col):
        in_u = cu[t] > u_lo + SLACK and cu[t] < u_hi - SLACK
        in_w = cwa[t] > -half_h + SLACK and cwa[t] < half_h - SLACK
        left = cva[t] > (-hw - ft) + SLACK and cva[t] < -hw - SLACK and in_u and in_w
        right = cva[t] > hw + SLACK and cva[t] < (hw + ft) - SLACK and in_u and in_w
        palm_u = cu[t] > (u_lo - pd) + SLACK and cu[t] < u_lo - SLACK
        palm = palm_u and cva[t] > (-hw - ft) + SLACK and cva[t] < (hw + ft) - SLACK and in_w
        excl = in_u and abs(cva[t]) < hw - SLACK and in_w
        if (left or right or palm) and not excl:
            return True
    return False


@njit(cache=True)
def _score(mu_star, mu_min, mu_max, inv_lr):
    if mu_star <= mu_max:
        mu_c = min(max(mu_star, mu_min), mu_max)
        return math.log(mu_max / mu_c) * inv_lr
    return 0.0


@njit(cache=True, parallel=True)
def landscape_eval(eval_pts, own_idx, own_off, mdl_pts, mdl_nrm,
                   col_idx, col_off, scn_pts, frames, cos_a, sin_a, depths,
                   grip, qual, mode, use_collision):
    n = eval_pts.shape[0]
    nv = frames.shape[0]
    na = cos_a.shape[0]
    nd = depths.shape[0]
    lf = grip[0]
    ft = grip[1]
    fh = grip[2]
    pd = grip[3]
    max_w = grip[4]
    clearance = grip[5]
    half_w = 0.5 * max_w
    half_h = 0.5 * fh
    mu_min = qual[0]
    mu_max = qual[1]
    mu_thresh = qual[2]
    inv_lr = qual[3]
    eps = qual[4]
    l_cells = float(na * nd)
    vl_cells = float(nv * na * nd)

    view_raw = np.zeros((n, nv), dtype=np.float64)
    point_raw = np.zeros(n, dtype=np.float64)

    for i in prange(n):
        o0 = own_off[i]
        o1 = own_off[i + 1]
        n_own = o1 - o0
        relx = np.empty(n_own, dtype=np.float64)
        rely = np.empty(n_own, dtype=np.float64)
        relz = np.empty(n_own, dtype=np.float64)
        nmx = np.empty(n_own, dtype=np.float64)
        nmy = np.empty(n_own, dtype=np.float64)
        nmz = np.empty(n_own, dtype=np.float64)
        for t in range(n_own):
            s = own_idx[o0 + t]
            relx[t] = mdl_pts[s, 0] - eval_pts[i, 0]
            rely[t] = mdl_pts[s, 1] - eval_pts[i, 1]
            relz[t] = mdl_pts[s, 2] - eval_pts[i, 2]
            nmx[t] = mdl_nrm[s, 0]
            nmy[t] = mdl_nrm[s, 1]
            nmz[t] = mdl_nrm[s, 2]
        n_col = 0
        if use_collision == 1:
            c0 = col_off[i]
            c1 = col_off[i + 1]
            n_col = c1 - c0
        crx = np.empty(n_col, dtype=np.float64)
        cry = np.empty(n_col, dtype=np.float64)
        crz = np.empty(n_col, dtype=np.float64)
        if use_collision == 1:
            c0 = col_off[i]
            for t in range(n_col):
                s = col_idx[c0 + t]
                crx[t] = scn_pts[s, 0] - eval_pts[i, 0]
                cry[t] = scn_pts[s, 1] - eval_pts[i, 1]
                crz[t] = scn_pts[s, 2] - eval_pts[i, 2]

        u = np.empty(n_own, dtype=np.float64)
        v0 = np.empty(n_own, dtype=np.float64)
        w0 = np.empty(n_own, dtype=np.float64)
        nx = np.empty(n_own, dtype=np.float64)
        nv0 = np.empty(n_own, dtype=np.float64)
        nw0 = np.empty(n_own, dtype=np.float64)
        va = np.empty(n_own, dtype=np.float64)
        wa = np.empty(n_own, dtype=np.float64)
        nva = np.empty(n_own, dtype=np.float64)
        nwa = np.empty(n_own, dtype=np.float64)
        gate = np.empty(n_own, dtype=np.uint8)
        m_u = np.empty(n_own, dtype=np.float64)
        m_va = np.empty(n_own, dtype=np.float64)
        m_wa = np.empty(n_own, dtype=np.float64)
        m_nx = np.empty(n_own, dtype=np.float64)
        m_nva = np.empty(n_own, dtype=np.float64)
        m_nwa = np.empty(n_own, dtype=np.float64)
        cu = np.empty(n_col, dtype=np.float64)
        cv0 = np.empty(n_col, dtype=np.float64)
        cw0 = np.empty(n_col, dtype=np.float64)
        cva = np.empty(n_col, dtype=np.float64)
        cwa = np.empty(n_col, dtype=np.float64)

        total = 0
        for j in range(nv):
            f00 = frames[j, 0, 0]
            f01 = frames[j, 0, 1]
            f02 = frames[j, 0, 2]
            f10 = frames[j, 1, 0]
            f11 = frames[j, 1, 1]
            f12 = frames[j, 1, 2]
            f20 = frames[j, 2, 0]
            f21 = frames[j, 2, 1]
            f22 = frames[j, 2, 2]
            for t in range(n_own):
                u[t] = (f00 * relx[t] + f01 * rely[t]) + f02 * relz[t]
                v0[t] = (f10 * relx[t] + f11 * rely[t]) + f12 * relz[t]
                w0[t] = (f20 * relx[t] + f21 * rely[t]) + f22 * relz[t]
                nx[t] = (f00 * nmx[t] + f01 * nmy[t]) + f02 * nmz[t]
                nv0[t] = (f10 * nmx[t] + f11 * nmy[t]) + f12 * nmz[t]
                nw0[t] = (f20 * nmx[t] + f21 * nmy[t]) + f22 * nmz[t]
            if use_collision == 1:
                for t in range(n_col):
                    cu[t] = (f00 * crx[t] + f01 * cry[t]) + f02 * crz[t]
                    cv0[t] = (f10 * crx[t] + f11 * cry[t]) + f12 * crz[t]
                    cw0[t] = (f20 * crx[t] + f21 * cry[t]) + f22 * crz[t]
            count = 0
            acc = 0.0
            best = 0.0
            for a in range(na):
                ca = cos_a[a]
                sa = sin_a[a]
                for t in range(n_own):
                    va[t] = ca * v0[t] + sa * w0[t]
                    wa[t] = -sa * v0[t] + ca * w0[t]
                    nva[t] = ca * nv0[t] + sa * nw0[t]
                    nwa[t] = -sa * nv0[t] + ca * nw0[t]
                    if abs(va[t]) <= half_w and abs(wa[t]) <= half_h:
                        gate[t] = 1
                    else:
                        gate[t] = 0
                if use_collision == 1:
                    for t in range(n_col):
                        cva[t] = ca * cv0[t] + sa * cw0[t]
                        cwa[t] = -sa * cv0[t] + ca * cw0[t]
                for di in range(nd):
                    d = depths[di]
                    u_lo = d - lf
                    mu_star, width, valid = _cell_quality_scalar(
                        n_own, u, va, wa, nx, nva, nwa, gate, u_lo, d,
                        eps, max_w, m_u, m_va, m_wa, m_nx, m_nva, m_nwa)
                    if not valid:
                        continue
                    feasible = mu_star < mu_thresh
                    q = 0.0
                    if mode != 0:
                        q = _score(mu_star, mu_min, mu_max, inv_lr)
                    cfree = True
                    if use_collision == 1 and (feasible or q > 0.0):
                        cfree = not _cell_collides_scalar(
                            n_col, cu, cva, cwa, u_lo, d, half_h, width,
                            ft, pd, max_w, clearance)
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


@njit(cache=True, parallel=True)
def cell_eval(pts, frames, own_idx, own_off, mdl_pts, mdl_nrm,
              col_idx, col_off, scn_pts, cos_a, sin_a, depths,
              grip, qual, use_collision):
    s_n = pts.shape[0]
    na = cos_a.shape[0]
    nd = depths.shape[0]
    lf = grip[0]
    ft = grip[1]
    fh = grip[2]
    pd = grip[3]
    max_w = grip[4]
    clearance = grip[5]
    half_w = 0.5 * max_w
    half_h = 0.5 * fh
    mu_min = qual[0]
    mu_max = qual[1]
    inv_lr = qual[3]
    eps = qual[4]

    mu_out = np.full((s_n, na, nd), np.inf)
    q_out = np.zeros((s_n, na, nd))
    w_out = np.zeros((s_n, na, nd))
    valid_out = np.zeros((s_n, na, nd), dtype=np.uint8)
    cfree_out = np.ones((s_n, na, nd), dtype=np.uint8)

    for i in prange(s_n):
        o0 = own_off[i]
        o1 = own_off[i + 1]
        n_own = o1 - o0
        n_col = 0
        if use_collision == 1:
            n_col = col_off[i + 1] - col_off[i]
        u = np.empty(n_own, dtype=np.float64)
        v0 = np.empty(n_own, dtype=np.float64)
        w0 = np.empty(n_own, dtype=np.float64)
        nx = np.empty(n_own, dtype=np.float64)
        nv0 = np.empty(n_own, dtype=np.float64)
        nw0 = np.empty(n_own, dtype=np.float64)
        f00 = frames[i, 0, 0]
        f01 = frames[i, 0, 1]
        f02 = frames[i, 0, 2]
        f10 = frames[i, 1, 0]
        f11 = frames[i, 1, 1]
        f12 = frames[i, 1, 2]
        f20 = frames[i, 2, 0]
        f21 = frames[i, 2, 1]
        f22 = frames[i, 2, 2]
        for t in range(n_own):
            s = own_idx[o0 + t]
            rx = mdl_pts[s, 0] - pts[i, 0]
            ry = mdl_pts[s, 1] - pts[i, 1]
            rz = mdl_pts[s, 2] - pts[i, 2]
            u[t] = (f00 * rx + f01 * ry) + f02 * rz
            v0[t] = (f10 * rx + f11 * ry) + f12 * rz
            w0[t] = (f20 * rx + f21 * ry) + f22 * rz
            ax = mdl_nrm[s, 0]
            ay = mdl_nrm[s, 1]
            az = mdl_nrm[s, 2]
            nx[t] = (f00 * ax + f01 * ay) + f02 * az
            nv0[t] = (f10 * ax + f11 * ay) + f12 * az
            nw0[t] = (f20 * ax + f21 * ay) + f22 * az
        cu = np.empty(n_col, dtype=np.float64)
        cv0 = np.empty(n_col, dtype=np.float64)
        cw0 = np.empty(n_col, dtype=np.float64)
        if use_collision == 1:
            c0 = col_off[i]
            for t in range(n_col):
                s = col_idx[c0 + t]
                rx = scn_pts[s, 0] - pts[i, 0]
                ry = scn_pts[s, 1] - pts[i, 1]
                rz = scn_pts[s, 2] - pts[i, 2]
                cu[t] = (f00 * rx + f01 * ry) + f02 * rz
                cv0[t] = (f10 * rx + f11 * ry) + f12 * rz
                cw0[t] = (f20 * rx + f21 * ry) + f22 * rz

        va = np.empty(n_own, dtype=np.float64)
        wa = np.empty(n_own, dtype=np.float64)
        nva = np.empty(n_own, dtype=np.float64)
        nwa = np.empty(n_own, dtype=np.float64)
        gate = np.empty(n_own, dtype=np.uint8)
        m_u = np.empty(n_own, dtype=np.float64)
        m_va = np.empty(n_own, dtype=np.float64)
        m_wa = np.empty(n_own, dtype=np.float64)
        m_nx = np.empty(n_own, dtype=np.float64)
        m_nva = np.empty(n_own, dtype=np.float64)
        m_nwa = np.empty(n_own, dtype=np.float64)
        cva = np.empty(n_col, dtype=np.float64)
        cwa = np.empty(n_col, dtype=np.float64)

        for a in range(na):
            ca = cos_a[a]
            sa = sin_a[a]
            for t in range(n_own):
                va[t] = ca * v0[t] + sa * w0[t]
                wa[t] = -sa * v0[t] + ca * w0[t]
                nva[t] = ca * nv0[t] + sa * nw0[t]
                nwa[t] = -sa * nv0[t] + ca * nw0[t]
                if abs(va[t]) <= half_w and abs(wa[t]) <= half_h:
                    gate[t] = 1
                else:
                    gate[t] = 0
            if use_collision == 1:
                for t in range(n_col):
                    cva[t] = ca * cv0[t] + sa * cw0[t]
                    cwa[t] = -sa * cv0[t] + ca * cw0[t]
            for di in range(nd):
                d = depths[di]
                u_lo = d - lf
                mu_star, width, valid = _cell_quality_scalar(
                    n_own, u, va, wa, nx, nva, nwa, gate, u_lo, d,
                    eps, max_w, m_u, m_va, m_wa, m_nx, m_nva, m_nwa)
                w_out[i, a, di] = width
                if not valid:
                    continue
                valid_out[i, a, di] = 1
                mu_out[i, a, di] = mu_star
                q_out[i, a, di] = _score(mu_star, mu_min, mu_max, inv_lr)
                if use_collision == 1:
                    hit = _cell_collides_scalar(
                        n_col, cu, cva, cwa, u_lo, d, half_h, width,
                        ft, pd, max_w, clearance)
                    if hit:
                        cfree_out[i, a, di] = 0
    return mu_out, q_out, w_out, valid_out, cfree_out
