"""Compiled per-drop association and scheduling kernels."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _build_grid(xy, radius, h):
    side = int(math.ceil(2.0 * radius / h)) + 1
    n = xy.shape[0]
    cell = np.empty(n, np.int64)
    counts = np.zeros(side * side + 1, np.int64)
    for i in range(n):
        cx = min(max(int((xy[i, 0] + radius) / h), 0), side - 1)
        cy = min(max(int((xy[i, 1] + radius) / h), 0), side - 1)
        c = cx * side + cy
        cell[i] = c
        counts[c + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    order = np.empty(n, np.int64)
    for i in range(n):
        order[fill[cell[i]]] = i
        fill[cell[i]] += 1
    return start, order, side


@njit(cache=True)
def _nearest(qx, qy, xy, start, order, side, radius, h):
    cx = min(max(int((qx + radius) / h), 0), side - 1)
    cy = min(max(int((qy + radius) / h), 0), side - 1)
    best = -1
    bd = np.inf
    r = 0
    while r <= side:
        for ix in range(cx - r, cx + r + 1):
            if ix < 0 or ix >= side:
                continue
            edge_x = ix == cx - r or ix == cx + r
            step = 1 if edge_x else 2 * r
            iy = cy - r
            while iy <= cy + r:
                if 0 <= iy < side:
                    c = ix * side + iy
                    for k in range(start[c], start[c + 1]):
                        j = order[k]
                        dx = xy[j, 0] - qx
                        dy = xy[j, 1] - qy
                        d = dx * dx + dy * dy
                        if d < bd:
                            bd = d
                            best = j
                if step == 0:
                    break
                iy += step
        if best >= 0 and (r * h) * (r * h) >= bd:
            break
        r += 1
    return best, bd


@njit(cache=True)
def associate_drop(uxy, mxy, pxy, radius, hm, hp, log_p1, log_p2, alpha1, alpha2, log_bias,
                   u_sched_m, u_sched_p, key_p):
    """Associate, schedule and rank IN candidates for one drop.

    User 0 is the typical user and is always scheduled by its serving BS.
    Offloaded candidates of a macro are ranked by the random key of their
    pico; selecting the U lowest ranks is a uniform U-subset.
    """
    nu = uxy.shape[0]
    nm = mxy.shape[0]
    npc = pxy.shape[0]
    sm, om, sidem = _build_grid(mxy, radius, hm)
    sp, op, sidep = _build_grid(pxy, radius, hp)
    near_m = np.empty(nu, np.int64)
    near_p = np.empty(nu, np.int64)
    dm2 = np.empty(nu)
    dp2 = np.empty(nu)
    tier = np.empty(nu, np.int8)
    off = np.zeros(nu, np.bool_)
    m_load = np.zeros(nm, np.int64)
    p_load = np.zeros(npc, np.int64)
    p_off_load = np.zeros(npc, np.int64)
    for i in range(nu):
        jm, d1 = _nearest(uxy[i, 0], uxy[i, 1], mxy, sm, om, sidem, radius, hm)
        jp, d2 = _nearest(uxy[i, 0], uxy[i, 1], pxy, sp, op, sidep, radius, hp)
        near_m[i] = jm
        near_p[i] = jp
        dm2[i] = d1
        dp2[i] = d2
        lm = log_p1 - 0.5 * alpha1 * math.log(d1) if d1 > 0 else np.inf
        lp = log_p2 - 0.5 * alpha2 * math.log(d2) if d2 > 0 else np.inf
        if lp + log_bias > lm:
            tier[i] = 2
            p_load[jp] += 1
            if lm >= lp:
                off[i] = True
                p_off_load[jp] += 1
        else:
            tier[i] = 1
            m_load[jm] += 1

    # per-BS user lists by counting sort, preserving user order
    m_start = np.zeros(nm + 1, np.int64)
    p_start = np.zeros(npc + 1, np.int64)
    for i in range(nu):
        if tier[i] == 1:
            m_start[near_m[i] + 1] += 1
        else:
            p_start[near_p[i] + 1] += 1
    m_start = np.cumsum(m_start)
    p_start = np.cumsum(p_start)
    m_fill = m_start[:-1].copy()
    p_fill = p_start[:-1].copy()
    m_list = np.empty(m_start[-1], np.int64)
    p_list = np.empty(p_start[-1], np.int64)
    for i in range(nu):
        if tier[i] == 1:
            m_list[m_fill[near_m[i]]] = i
            m_fill[near_m[i]] += 1
        else:
            p_list[p_fill[near_p[i]]] = i
            p_fill[near_p[i]] += 1

    m_sched = np.full(nm, -1, np.int64)
    p_sched = np.full(npc, -1, np.int64)
    for j in range(nm):
        n = m_load[j]
        if n > 0:
            m_sched[j] = m_list[m_start[j] + min(int(u_sched_m[j] * n), n - 1)]
    for j in range(npc):
        n = p_load[j]
        if n > 0:
            p_sched[j] = p_list[p_start[j] + min(int(u_sched_p[j] * n), n - 1)]
    if tier[0] == 1:
        m_sched[near_m[0]] = 0
    else:
        p_sched[near_p[0]] = 0

    # active offloaded users per macro, and their rank by key
    act = np.zeros(nm, np.int64)
    for j in range(npc):
        s = p_sched[j]
        if s >= 0 and off[s]:
            act[near_m[s]] += 1
    rank = np.full(nu, -1, np.int64)
    for j in range(npc):
        s = p_sched[j]
        if s >= 0 and off[s]:
            r = 0
            for k in range(npc):
                t = p_sched[k]
                if k != j and t >= 0 and off[t] and near_m[t] == near_m[s]:
                    if key_p[k] < key_p[j]:
                        r += 1
            rank[s] = r
    return (tier, off, near_m, near_p, dm2, dp2, m_load, p_load, p_off_load, m_sched,
            p_sched, act, rank)


@njit(cache=True)
def interference_sums(mxy, pxy, gm, gp, p1, p2, alpha1, alpha2, skip_m, skip_p):
    """Macro and pico interference at the origin, omitting one BS of each tier."""
    im = 0.0
    for j in range(mxy.shape[0]):
        if j != skip_m:
            d2 = mxy[j, 0] ** 2 + mxy[j, 1] ** 2
            im += gm[j] * d2 ** (-0.5 * alpha1)
    ip = 0.0
    for j in range(pxy.shape[0]):
        if j != skip_p:
            d2 = pxy[j, 0] ** 2 + pxy[j, 1] ** 2
            ip += gp[j] * d2 ** (-0.5 * alpha2)
    return p1 * im, p2 * ip
