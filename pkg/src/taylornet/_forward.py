"""Compiled forward-evaluation engine for computation graphs.

Evaluation walks nodes in topological order with a small matrix of value
"slots" instead of one row per node: a liveness pass assigns each node a slot
that is recycled once its last consumer has run, so the working set stays
cache-sized even for graphs with millions of nodes.  Nodes with large sorted
fan-in (the final summation node of a synthesized net) are accumulated
incrementally as their sources complete, which keeps their source values from
being pinned alive until the end.  The accumulation order equals the incoming
edge order in both paths, so results are bit-identical to a naive
node-by-node interpreter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

# Fan-in at or above this (with non-decreasing source ids) switches a node to
# streamed accumulation.
BIG_FANIN = 64

# Lanes processed per kernel call; a chunk of points shares one slot matrix.
DEFAULT_CHUNK = 128

# Soft ceiling for the slot matrix, in bytes.
_VALUES_BUDGET = 1_500_000_000


@njit(cache=True)
def _longest_path(d, indptr, srcs):
    """Depth of every id: inputs 0, node = 1 + max over its sources."""
    n = indptr.shape[0] - 1
    depth = np.zeros(d + n, np.int64)
    for i in range(n):
        m = 0
        for e in range(indptr[i], indptr[i + 1]):
            ds = depth[srcs[e]]
            if ds > m:
                m = ds
        depth[d + i] = m + 1
    return depth


@njit(cache=True)
def _mark_ancestors(d, indptr, srcs, out_ids):
    """Reachability (as int8 flags) of every id looking backwards from the outputs."""
    n = indptr.shape[0] - 1
    keep = np.zeros(d + n, np.int8)
    for j in range(out_ids.shape[0]):
        keep[out_ids[j]] = 1
    # Sources always precede their node, so one reverse sweep suffices.
    for i in range(n - 1, -1, -1):
        if keep[d + i]:
            for e in range(indptr[i], indptr[i + 1]):
                keep[srcs[e]] = 1
    return keep


@njit(cache=True)
def _last_use(d, n, indptr, srcs, big, out_ids):
    last = np.empty(d + n, np.int64)
    for k in range(d):
        last[k] = -1
    for i in range(n):
        last[d + i] = i
    for i in range(n):
        if big[i]:
            # Streamed edges read each source right when it completes, so
            # they do not extend the source's lifetime.
            continue
        for e in range(indptr[i], indptr[i + 1]):
            s = srcs[e]
            if last[s] < i:
                last[s] = i
    for j in range(out_ids.shape[0]):
        last[out_ids[j]] = n
    return last


@njit(cache=True)
def _assign_slots(d, n, slot, reserved, order, starts, ends, first_dynamic):
    free = np.empty(d + n, np.int64)
    top = 0
    next_slot = first_dynamic
    for i in range(n):
        g = d + i
        if slot[g] < 0:
            if top > 0:
                top -= 1
                slot[g] = free[top]
            else:
                slot[g] = next_slot
                next_slot += 1
        for idx in range(starts[i], ends[i]):
            g2 = order[idx]
            if not reserved[g2]:
                free[top] = slot[g2]
                top += 1
    return next_slot


@njit(cache=True)
def _forward_chunk(
    d,
    act,
    bias,
    big,
    norm_indptr,
    norm_src_slot,
    norm_w,
    node_slot,
    stream_indptr,
    stream_dst_slot,
    stream_w,
    big_gids,
    V,
    Xc,
):
    C = Xc.shape[0]
    n = act.shape[0]
    for k in range(d):
        for p in range(C):
            V[k, p] = Xc[p, k]
    for j in range(big_gids.shape[0]):
        g = big_gids[j]
        sl = node_slot[g]
        b = bias[g - d]
        for p in range(C):
            V[sl, p] = b
    for g in range(d):
        for e in range(stream_indptr[g], stream_indptr[g + 1]):
            dsl = stream_dst_slot[e]
            w = stream_w[e]
            for p in range(C):
                V[dsl, p] += w * V[g, p]
    for i in range(n):
        g = d + i
        sl = node_slot[g]
        if not big[i]:
            b = bias[i]
            for p in range(C):
                V[sl, p] = b
            for e in range(norm_indptr[i], norm_indptr[i + 1]):
                ssl = norm_src_slot[e]
                w = norm_w[e]
                for p in range(C):
                    V[sl, p] += w * V[ssl, p]
        a = act[i]
        if a == 1:
            for p in range(C):
                v = V[sl, p]
                V[sl, p] = v if v > 0.0 else 0.0
        elif a == 2:
            for p in range(C):
                v = V[sl, p]
                V[sl, p] = v * v
        for e in range(stream_indptr[g], stream_indptr[g + 1]):
            dsl = stream_dst_slot[e]
            w = stream_w[e]
            for p in range(C):
                V[dsl, p] += w * V[sl, p]


@dataclass
class EvalPlan:
    """Precomputed slot assignment and edge tables for one graph."""

    d: int
    act: np.ndarray
    bias: np.ndarray
    big: np.ndarray
    norm_indptr: np.ndarray
    norm_src_slot: np.ndarray
    norm_w: np.ndarray
    node_slot: np.ndarray
    stream_indptr: np.ndarray
    stream_dst_slot: np.ndarray
    stream_w: np.ndarray
    big_gids: np.ndarray
    out_slots: np.ndarray
    n_slots: int


def build_plan(d, act, bias, indptr, srcs, ws, outputs) -> EvalPlan:
    n = int(act.shape[0])
    total = d + n
    out_ids = np.asarray(outputs, dtype=np.int64)
    fan = np.diff(indptr)

    nondec = np.ones(n, dtype=bool)
    if srcs.size > 1:
        diffs_ok = np.diff(srcs) >= 0
        row_of_edge = np.repeat(np.arange(n, dtype=np.int64), fan)
        bad = np.flatnonzero(~diffs_ok)
        if bad.size:
            same_row = row_of_edge[bad] == row_of_edge[bad + 1]
            nondec[row_of_edge[bad[same_row]]] = False

    big = (fan >= BIG_FANIN) & nondec
    big_gids = (d + np.flatnonzero(big)).astype(np.int64)

    last = _last_use(d, n, indptr, srcs, big, out_ids)

    slot = np.full(total, -1, dtype=np.int64)
    slot[:d] = np.arange(d)
    first_dynamic = d + big_gids.size
    slot[big_gids] = np.arange(d, first_dynamic)
    reserved = np.zeros(total, dtype=bool)
    reserved[:d] = True
    reserved[big_gids] = True

    order = np.argsort(last, kind="stable").astype(np.int64)
    sorted_last = last[order]
    positions = np.arange(n, dtype=np.int64)
    starts = np.searchsorted(sorted_last, positions, side="left").astype(np.int64)
    ends = np.searchsorted(sorted_last, positions, side="right").astype(np.int64)

    n_slots = int(_assign_slots(d, n, slot, reserved, order, starts, ends, first_dynamic))

    if n == 0:
        edge_is_stream = np.zeros(0, dtype=bool)
    else:
        edge_is_stream = np.repeat(big, fan)
    norm_fan = fan.copy()
    norm_fan[big] = 0
    norm_indptr = np.concatenate(([0], np.cumsum(norm_fan))).astype(np.int64)
    norm_src_slot = slot[srcs[~edge_is_stream]].astype(np.int64)
    norm_w = np.ascontiguousarray(ws[~edge_is_stream])

    s_src = srcs[edge_is_stream]
    s_w = ws[edge_is_stream]
    if n == 0:
        s_dst = np.zeros(0, dtype=np.int64)
    else:
        row_of_edge = np.repeat(np.arange(n, dtype=np.int64), fan)
        s_dst = d + row_of_edge[edge_is_stream]
    ord2 = np.argsort(s_src, kind="stable")
    s_src = s_src[ord2]
    stream_dst_slot = slot[s_dst[ord2]].astype(np.int64)
    stream_w = np.ascontiguousarray(s_w[ord2])
    stream_counts = np.bincount(s_src, minlength=total) if s_src.size else np.zeros(total, np.int64)
    stream_indptr = np.concatenate(([0], np.cumsum(stream_counts))).astype(np.int64)

    return EvalPlan(
        d=d,
        act=act,
        bias=bias,
        big=big,
        norm_indptr=norm_indptr,
        norm_src_slot=norm_src_slot,
        norm_w=norm_w,
        node_slot=slot,
        stream_indptr=stream_indptr,
        stream_dst_slot=stream_dst_slot,
        stream_w=stream_w,
        big_gids=big_gids,
        out_slots=slot[out_ids].astype(np.int64),
        n_slots=max(n_slots, 1),
    )


def run_plan(plan: EvalPlan, X: np.ndarray, chunk: int | None = None) -> np.ndarray:
    """Evaluate all outputs over points X of shape (P, d); returns (n_out, P)."""
    P = X.shape[0]
    if chunk is None:
        chunk = DEFAULT_CHUNK
        max_lanes = _VALUES_BUDGET // (8 * plan.n_slots)
        if max_lanes < chunk:
            chunk = max(1, int(max_lanes))
    out = np.empty((plan.out_slots.shape[0], P), dtype=np.float64)
    V = np.empty((plan.n_slots, chunk), dtype=np.float64)
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        if hi - lo != V.shape[1]:
            V = np.empty((plan.n_slots, hi - lo), dtype=np.float64)
        Xc = np.ascontiguousarray(X[lo:hi], dtype=np.float64)
        _forward_chunk(
            plan.d,
            plan.act,
            plan.bias,
            plan.big,
            plan.norm_indptr,
            plan.norm_src_slot,
            plan.norm_w,
            plan.node_slot,
            plan.stream_indptr,
            plan.stream_dst_slot,
            plan.stream_w,
            plan.big_gids,
            V,
            Xc,
        )
        for j in range(plan.out_slots.shape[0]):
            out[j, lo:hi] = V[plan.out_slots[j], : hi - lo]
    return out
