"""Compiled max-plus loops.

Arrays are indexed ``[row, col]`` with row = second lattice coordinate.
All kernels release the GIL so replicate workers run concurrently.
"""
from __future__ import annotations

import numpy as np
from numba import njit

NEG = np.int64(-(1 << 60))

_jit = dict(cache=True, nogil=True)


@njit(**_jit)
def forward_bulk(w, ay, ax):
    h, wd = w.shape
    nh = h - ay
    nw = wd - ax
    g = np.empty((nh, nw), dtype=np.int64)
    g[0, 0] = w[ay, ax]
    for i in range(1, nw):
        g[0, i] = g[0, i - 1] + w[ay, ax + i]
    for j in range(1, nh):
        g[j, 0] = g[j - 1, 0] + w[ay + j, ax]
        for i in range(1, nw):
            a = g[j - 1, i]
            b = g[j, i - 1]
            g[j, i] = (a if a > b else b) + w[ay + j, ax + i]
    return g


@njit(**_jit)
def reverse_bulk(w, ay, ax):
    g = np.empty((ay + 1, ax + 1), dtype=np.int64)
    g[ay, ax] = w[ay, ax]
    for i in range(ax - 1, -1, -1):
        g[ay, i] = g[ay, i + 1] + w[ay, i]
    for j in range(ay - 1, -1, -1):
        g[j, ax] = g[j + 1, ax] + w[j, ax]
        for i in range(ax - 1, -1, -1):
            a = g[j + 1, i]
            b = g[j, i + 1]
            g[j, i] = (a if a > b else b) + w[j, i]
    return g


@njit(**_jit)
def sw_grid(w, I, J):
    h, wd = w.shape
    g = np.empty((h, wd), dtype=np.int64)
    g[0, 0] = 0
    for i in range(1, wd):
        g[0, i] = g[0, i - 1] + I[i - 1]
    for j in range(1, h):
        g[j, 0] = g[j - 1, 0] + J[j - 1]
        for i in range(1, wd):
            a = g[j - 1, i]
            b = g[j, i - 1]
            g[j, i] = (a if a > b else b) + w[j, i]
    return g


@njit(**_jit)
def ne_grid(w, Ih, Jh):
    h, wd = w.shape
    g = np.empty((h, wd), dtype=np.int64)
    g[h - 1, wd - 1] = 0
    for i in range(1, wd):
        g[h - 1, wd - 1 - i] = g[h - 1, wd - i] + Ih[i - 1]
    for j in range(1, h):
        y = h - 1 - j
        g[y, wd - 1] = g[y + 1, wd - 1] + Jh[j - 1]
        for x in range(wd - 2, -1, -1):
            a = g[y + 1, x]
            b = g[y, x + 1]
            g[y, x] = (a if a > b else b) + w[y, x]
    return g


@njit(**_jit)
def sw_exit(w, I, J, ty, tx):
    """Exit indicators for the boundary model with corner at index (0, 0).

    Returns (value, horizontal hits for k=1..tx, vertical hits for l=1..ty).
    """
    # bulk passage from (i, j) to the target over the open quadrant
    rev = np.empty((ty + 1, tx + 1), dtype=np.int64)
    rev[ty, tx] = w[ty, tx]
    for i in range(tx - 1, 0, -1):
        rev[ty, i] = rev[ty, i + 1] + w[ty, i]
    for j in range(ty - 1, 0, -1):
        rev[j, tx] = rev[j + 1, tx] + w[j, tx]
        for i in range(tx - 1, 0, -1):
            a = rev[j + 1, i]
            b = rev[j, i + 1]
            rev[j, i] = (a if a > b else b) + w[j, i]
    hv = np.empty(tx, dtype=np.int64)
    vv = np.empty(ty, dtype=np.int64)
    acc = np.int64(0)
    best = NEG
    for k in range(1, tx + 1):
        acc += I[k - 1]
        hv[k - 1] = acc + rev[1, k]
        if hv[k - 1] > best:
            best = hv[k - 1]
    acc = np.int64(0)
    for l in range(1, ty + 1):
        acc += J[l - 1]
        vv[l - 1] = acc + rev[l, 1]
        if vv[l - 1] > best:
            best = vv[l - 1]
    return best, hv == best, vv == best


@njit(**_jit)
def sw_exit_extremes(w, I, J, ty, tx):
    """(value, z_e1, z_e2) without materialising the exit set."""
    best, hh, vh = sw_exit(w, I, J, ty, tx)
    zmax = 0
    zmin = 0
    for k in range(tx, 0, -1):
        if hh[k - 1]:
            zmax = k
            break
    if zmax == 0:
        for l in range(1, ty + 1):
            if vh[l - 1]:
                zmax = -l
                break
    for l in range(ty, 0, -1):
        if vh[l - 1]:
            zmin = -l
            break
    if zmin == 0:
        for k in range(1, tx + 1):
            if hh[k - 1]:
                zmin = k
                break
    return best, zmax, zmin


@njit(**_jit)
def trace(rev, fy, fx, ty, tx, prefer_e1):
    """Greedy walk on a reverse table from (fx, fy) to (tx, ty)."""
    n = (tx - fx) + (ty - fy) + 1
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    x = fx
    y = fy
    xs[0] = x
    ys[0] = y
    for k in range(1, n):
        if x == tx:
            y += 1
        elif y == ty:
            x += 1
        else:
            a = rev[y, x + 1]
            b = rev[y + 1, x]
            if a > b or (a == b and prefer_e1):
                x += 1
            else:
                y += 1
        xs[k] = x
        ys[k] = y
    return xs, ys


@njit(**_jit)
def path_weight(w, xs, ys):
    s = np.int64(0)
    for k in range(xs.shape[0]):
        s += w[ys[k], xs[k]]
    return s


@njit(**_jit)
def forward_column(w, ay, ax, cx, out):
    """Passage values from (ax, ay) to column cx, rows ay.., written into out."""
    h = w.shape[0]
    for j in range(out.shape[0]):
        out[j] = NEG
    acc = np.int64(0)
    for j in range(ay, h):
        acc += w[j, ax]
        out[j] = acc
    for x in range(ax + 1, cx + 1):
        out[ay] = out[ay] + w[ay, x]
        for j in range(ay + 1, h):
            a = out[j - 1]
            b = out[j]
            out[j] = (a if a > b else b) + w[j, x]


@njit(**_jit)
def reverse_column(w, vy, vx, cx, out):
    """Passage values from column cx, rows ..vy, to (vx, vy), written into out."""
    for j in range(out.shape[0]):
        out[j] = NEG
    acc = np.int64(0)
    for j in range(vy, -1, -1):
        acc += w[j, vx]
        out[j] = acc
    for x in range(vx - 1, cx - 1, -1):
        out[vy] = out[vy] + w[vy, x]
        for j in range(vy - 1, -1, -1):
            a = out[j + 1]
            b = out[j]
            out[j] = (a if a > b else b) + w[j, x]


@njit(**_jit)
def edge_usage_any(w, us, vs, c0, r0):
    """True iff some pair (u, v) has a geodesic through (c0, r0) -> (c0 + 1, r0).

    ``us`` and ``vs`` hold array indices (col, row).  One column per anchor is
    kept, so memory is |anchors| * height.
    """
    h = w.shape[0]
    nu = us.shape[0]
    nv = vs.shape[0]
    A = np.empty((nu, h), dtype=np.int64)
    B = np.empty((nv, h), dtype=np.int64)
    for k in range(nu):
        forward_column(w, us[k, 1], us[k, 0], c0, A[k])
    for k in range(nv):
        reverse_column(w, vs[k, 1], vs[k, 0], c0 + 1, B[k])
    for a in range(nu):
        lo = us[a, 1]
        for b in range(nv):
            hi = vs[b, 1]
            through = A[a, r0] + B[b, r0]
            best = NEG
            for j in range(lo, hi + 1):
                v = A[a, j] + B[b, j]
                if v > best:
                    best = v
            if through == best:
                return True
    return False


@njit(**_jit)
def lindley(a, s, t0):
    n = a.shape[0]
    t = np.empty(n, dtype=np.int64)
    d = np.empty(n, dtype=np.int64)
    sc = np.empty(n, dtype=np.int64)
    prev = np.int64(t0)
    for j in range(n):
        x = prev - a[j]
        if x < 0:
            x = 0
        t[j] = x + s[j]
        d[j] = t[j] + a[j] - prev
        sc[j] = a[j] if a[j] < prev else prev
        prev = t[j]
    return t, d, sc


@njit(**_jit)
def enumerate_paths(w, uy, ux, vy, vx, ey, ex):
    """Brute force over every up-right path from u to v.

    Returns (best weight, best weight among paths that step from (ex, ey)
    to (ex + 1, ey)); the second value is NEG when no path can use that edge.
    Depth-first with an explicit stack; no dynamic programming.
    """
    nsteps = (vx - ux) + (vy - uy)
    best = NEG
    best_edge = NEG
    # stack of (x, y, weight, used_edge, next_choice)
    sx = np.empty(nsteps + 1, dtype=np.int64)
    sy = np.empty(nsteps + 1, dtype=np.int64)
    sw = np.empty(nsteps + 1, dtype=np.int64)
    su = np.zeros(nsteps + 1, dtype=np.int64)
    sc = np.zeros(nsteps + 1, dtype=np.int64)
    depth = 0
    sx[0] = ux
    sy[0] = uy
    sw[0] = w[uy, ux]
    su[0] = 0
    sc[0] = 0
    while depth >= 0:
        x = sx[depth]
        y = sy[depth]
        if depth == nsteps:
            if sw[depth] > best:
                best = sw[depth]
            if su[depth] == 1 and sw[depth] > best_edge:
                best_edge = sw[depth]
            depth -= 1
            continue
        c = sc[depth]
        if c >= 2:
            depth -= 1
            continue
        sc[depth] = c + 1
        if c == 0:
            if x == vx:
                continue
            nx = x + 1
            ny = y
        else:
            if y == vy:
                continue
            nx = x
            ny = y + 1
        depth += 1
        sx[depth] = nx
        sy[depth] = ny
        sw[depth] = sw[depth - 1] + w[ny, nx]
        used = su[depth - 1]
        if c == 0 and x == ex and y == ey:
            used = 1
        su[depth] = used
        sc[depth] = 0
    return best, best_edge
