"""Loop bodies for the parallel phases, compiled with ``nogil`` so pooled threads overlap.

Kernels touch arrays only through scalar indexing and ``len``.  That keeps
their ``py_func`` usable on traced arrays.  Every parameter name is a stable
label for the array it receives; the race checker keys accesses by those names.
"""

import numba
import numpy as np

UNREACHED = np.iinfo(np.int64).max
INDEX_MAX = np.iinfo(np.int64).max

_jit = numba.njit(cache=True, nogil=True)


@_jit
def init_fill(d, owner, lo, hi, owner_sentinel):
    for u in range(lo, hi):
        d[u] = UNREACHED
        owner[u] = owner_sentinel


@_jit
def gather_degrees(offsets, frontier, edge_sum, lo, hi):
    for u in range(lo, hi):
        x = frontier[u]
        edge_sum[u] = offsets[x + 1] - offsets[x]


@_jit
def scan_local(values, lo, hi, totals, flags, w):
    s = 0
    for i in range(lo, hi):
        v = values[i]
        if v > INDEX_MAX - s:
            flags[w] = 0
            return
        s += v
        values[i] = s
    totals[w] = s


@_jit
def add_offset(values, lo, hi, offsets, w):
    off = offsets[w]
    for i in range(lo, hi):
        values[i] = values[i] + off


@_jit
def start_points_range(edge_sum, e_l, workers, lo, hi, sp_vertex, sp_offset):
    # Worker t starts at global edge floor(t * e_l / workers).  Frontier entry u
    # covers edges [s, e), so it hosts the starts of workers
    # ceil(s * workers / e_l) .. ceil(e * workers / e_l) - 1.
    for u in range(lo, hi):
        s = 0
        if u > 0:
            s = edge_sum[u - 1]
        e = edge_sum[u]
        if s == e:
            continue
        t_s = (s * workers + e_l - 1) // e_l
        t_e = (e * workers + e_l - 1) // e_l - 1
        if t_e > workers - 1:
            t_e = workers - 1
        for t in range(t_s, t_e + 1):
            sp_vertex[t] = u
            sp_offset[t] = t * e_l // workers - s


@_jit
def explore_segment(
    offsets, neighbors, frontier, sp_vertex, sp_offset, t, workers, e_l,
    d, owner, level, queue, cap, counts, scanned,
):
    # Worker t owns global edges [t * e_l // workers, (t + 1) * e_l // workers).
    u = sp_vertex[t]
    remaining = (t + 1) * e_l // workers - t * e_l // workers
    if u < 0 or remaining == 0:
        counts[t] = 0
        scanned[t] = 0
        return
    off = sp_offset[t]
    base_q = t * cap
    q = 0
    done = 0
    while remaining > 0:
        x = frontier[u]
        base = offsets[x]
        take = offsets[x + 1] - base - off
        if take > remaining:
            take = remaining
        for k in range(base + off, base + off + take):
            v = neighbors[k]
            if d[v] == UNREACHED:
                d[v] = level
                owner[v] = t
                queue[base_q + q] = v
                q += 1
        remaining -= take
        done += take
        u += 1
        off = 0
    counts[t] = q
    scanned[t] = done


@_jit
def dedup_filter(owner, queue, cap, counts, sizes, t):
    base = t * cap
    kept = 0
    for j in range(counts[t]):
        v = queue[base + j]
        if owner[v] == t:
            queue[base + kept] = v
            kept += 1
    sizes[t] = kept


@_jit
def linearize_copy(queue, cap, sizes, t, out):
    start = 0
    if t > 0:
        start = sizes[t - 1]
    base = t * cap
    for j in range(sizes[t] - start):
        out[start + j] = queue[base + j]
