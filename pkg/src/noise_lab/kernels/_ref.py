"""Reference kernels in numpy/scipy.

This module is the fallback used when the compiled extension is unavailable,
and the behavioural reference the extension is tested against.  Every kernel
returns integers, booleans, or floats generated by the shared counter-based
generator, so the two implementations agree bit for bit.

Random values are counter-based: the uniform for edge ``e`` of trial ``t``
under stream ``s`` is a pure function of ``(seed, t, s, e)``.  Streams keep
independent randomness within one trial apart (base weights, re-sampling
masks, nested inner draws); estimators document the streams they use.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

IMPL = "python"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U64_GAMMA = np.uint64(_GAMMA)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_U64_30 = np.uint64(30)
_U64_27 = np.uint64(27)
_U64_31 = np.uint64(31)
_U64_11 = np.uint64(11)
_INV_2_53 = 2.0 ** -53


def _mix64(z: int) -> int:
    """One splitmix64 step on a plain Python integer."""
    z = (z + _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _U64_GAMMA
        z = (z ^ (z >> _U64_30)) * _U64_MIX1
        z = (z ^ (z >> _U64_27)) * _U64_MIX2
        return z ^ (z >> _U64_31)


def trial_key(seed: int, trial: int, stream: int) -> int:
    """64-bit key identifying one trial's stream."""
    k = _mix64(seed & _MASK64)
    k = _mix64(k ^ (trial & _MASK64))
    return _mix64(k ^ (stream & _MASK64))


def fill_uniforms(seed: int, trial: int, stream: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1), one per counter 0..count-1, 53-bit resolution."""
    key = trial_key(seed, trial, stream)
    z = np.uint64(key) ^ np.arange(count, dtype=np.uint64)
    z = _mix64_vec(z)
    return (z >> _U64_11).astype(np.float64) * _INV_2_53


def _component_labels(present, eu, ev, nv):
    k = present.astype(bool)
    a = eu[k]
    b = ev[k]
    g = sparse.coo_matrix(
        (np.ones(a.size, dtype=np.int8), (a, b)), shape=(nv, nv)
    ).tocsr()
    _, labels = csgraph.connected_components(g, directed=False)
    return labels


def connected(present, eu, ev, nv, src, dst) -> bool:
    """True iff some src vertex and some dst vertex share a component."""
    labels = _component_labels(present, eu, ev, nv)
    return bool(np.intersect1d(labels[src], labels[dst]).size > 0)


def reach(present, eu, ev, nv, src) -> np.ndarray:
    """uint8 mask over vertices reachable from src through present edges."""
    labels = _component_labels(present, eu, ev, nv)
    return np.isin(labels, np.unique(labels[src])).astype(np.uint8)


def bfs_levels(present, eu, ev, indptr, nbr_v, nbr_e, nv, src) -> np.ndarray:
    """Round-by-round growth levels from the src set; -1 means never reached.

    Level k is the round at which a vertex joins the explored set (src = 0).
    The CSR arguments are accepted for signature parity with the compiled
    kernel; this implementation works off the edge arrays.
    """
    pb = present.astype(bool)
    levels = np.full(nv, -1, dtype=np.int32)
    levels[src] = 0
    frontier = np.zeros(nv, dtype=bool)
    frontier[src] = True
    lvl = 0
    while True:
        hit_u = pb & frontier[eu] & (levels[ev] < 0)
        hit_v = pb & frontier[ev] & (levels[eu] < 0)
        if not (hit_u.any() or hit_v.any()):
            return levels
        lvl += 1
        frontier = np.zeros(nv, dtype=bool)
        frontier[ev[hit_u]] = True
        frontier[eu[hit_v]] = True
        levels[frontier] = lvl


def queried_edges(levels, eu, ev, max_round=None) -> np.ndarray:
    """Edges the exploration queries, from growth levels.

    An edge is queried at round k when exactly one endpoint sits inside the
    explored set after round k-1.  That happens iff the endpoint levels
    differ and the smaller one is finite; with a round cutoff only rounds
    up to max_round count.
    """
    big = np.int64(1) << 40
    la = np.where(levels[eu] < 0, big, levels[eu].astype(np.int64))
    lb = np.where(levels[ev] < 0, big, levels[ev].astype(np.int64))
    lo = np.minimum(la, lb)
    q = (la != lb) & (lo < big)
    if max_round is not None:
        q &= lo <= max_round - 1
    return q.astype(np.uint8)


def count_crossings(seed, t0, t1, stream, p, eu, ev, nv, src, dst) -> int:
    total = 0
    ne = eu.shape[0]
    for t in range(t0, t1):
        u = fill_uniforms(seed, t, stream, ne)
        total += connected(u <= p, eu, ev, nv, src, dst)
    return total


def flip_counts(seed, t0, t1, p_lo, p_hi, eu, ev, nv, src, dst):
    """Coupled crossing comparison at two thresholds on shared weights."""
    flips = lo_cross = hi_cross = 0
    ne = eu.shape[0]
    for t in range(t0, t1):
        u = fill_uniforms(seed, t, 0, ne)
        x = connected(u <= p_lo, eu, ev, nv, src, dst)
        y = connected(u <= p_hi, eu, ev, nv, src, dst)
        flips += x != y
        lo_cross += x
        hi_cross += y
    return flips, lo_cross, hi_cross


def noise_pair_counts(seed, t0, t1, p, eps, eu, ev, nv, src, dst):
    """Counts (xy, x, y) for crossings of a config and its eps-resample.

    Streams: 0 base weights, 1 re-sample mask, 2 fresh replacement weights.
    """
    n11 = nx = ny = 0
    ne = eu.shape[0]
    for t in range(t0, t1):
        base = fill_uniforms(seed, t, 0, ne) <= p
        mask = fill_uniforms(seed, t, 1, ne) <= eps
        fresh = fill_uniforms(seed, t, 2, ne) <= p
        other = np.where(mask, fresh, base)
        x = connected(base, eu, ev, nv, src, dst)
        y = connected(other, eu, ev, nv, src, dst)
        n11 += x and y
        nx += x
        ny += y
    return n11, nx, ny


def pivotal_mask(present, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar):
    """Outcome-flipping edges of one config, via reachable-set analysis.

    With a crossing present, an edge flips the outcome iff its removal opens
    a top-bottom path of absent-edge duals; the candidates are present edges
    whose dual endpoints split between the bottom-reachable and top-reachable
    dual sets.  Without a crossing, the candidates are absent edges whose
    endpoints split between the left-reachable and right-reachable sets.
    """
    pb = present.astype(bool)
    has_dual = dual_u >= 0
    if connected(pb, eu, ev, nv, left, right):
        dpres = (~pb) & has_dual
        du = np.where(has_dual, dual_u, 0)
        dv = np.where(has_dual, dual_v, 0)
        rb = reach(dpres, du, dv, ndv, np.asarray([bstar], dtype=np.int32)).astype(bool)
        rt = reach(dpres, du, dv, ndv, np.asarray([tstar], dtype=np.int32)).astype(bool)
        split = (rb[du] & rt[dv]) | (rt[du] & rb[dv])
        return (pb & has_dual & split).astype(np.uint8)
    rl = reach(pb, eu, ev, nv, left).astype(bool)
    rr = reach(pb, eu, ev, nv, right).astype(bool)
    split = (rl[eu] & rr[ev]) | (rr[eu] & rl[ev])
    return ((~pb) & split).astype(np.uint8)


def pivotal_sizes(seed, t0, t1, p, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar):
    ne = eu.shape[0]
    out = np.empty(t1 - t0, dtype=np.int64)
    for t in range(t0, t1):
        u = fill_uniforms(seed, t, 0, ne)
        mask = pivotal_mask(u <= p, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar)
        out[t - t0] = int(mask.sum())
    return out


def central_pivotal_count(seed, t0, t1, p, edge_id, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar) -> int:
    ne = eu.shape[0]
    total = 0
    for t in range(t0, t1):
        u = fill_uniforms(seed, t, 0, ne)
        mask = pivotal_mask(u <= p, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar)
        total += int(mask[edge_id])
    return total


def inner_crossing_counts(seed, t0, t1, m, r, q, eu, ev, nv, src, dst):
    """Per outer trial: crossings of psi&xi over m inner draws.

    Streams: 0 for the outer psi, 1+j for inner draw j.
    """
    ne = eu.shape[0]
    out = np.empty(t1 - t0, dtype=np.int64)
    for t in range(t0, t1):
        psi = fill_uniforms(seed, t, 0, ne) <= r
        c = 0
        for j in range(m):
            xi = fill_uniforms(seed, t, 1 + j, ne) <= q
            c += connected(psi & xi, eu, ev, nv, src, dst)
        out[t - t0] = c
    return out


def inner_dual_counts(seed, t0, t1, m, r, q, ne, dualh_u, dualh_v, has_dual, ndv, lstar, rstar):
    """Per outer trial: dual left-right crossings of psi&xi over m inner draws.

    The dual config opens exactly the duals of absent primal edges.
    """
    out = np.empty(t1 - t0, dtype=np.int64)
    du = np.where(has_dual, dualh_u, 0)
    dv = np.where(has_dual, dualh_v, 0)
    sl = np.asarray([lstar], dtype=np.int32)
    sr = np.asarray([rstar], dtype=np.int32)
    for t in range(t0, t1):
        psi = fill_uniforms(seed, t, 0, ne) <= r
        c = 0
        for j in range(m):
            xi = fill_uniforms(seed, t, 1 + j, ne) <= q
            dual_present = (~(psi & xi)) & has_dual
            c += connected(dual_present, du, dv, ndv, sl, sr)
        out[t - t0] = c
    return out


def subgraph_noise_counts(seed, t0, t1, m, r, q, eps, eu, ev, nv, src, dst):
    """Per outer psi: (xy, x, y) counts for paired inner configs.

    Streams: 0 psi; then 1+3j, 2+3j, 3+3j for inner draw j (base, mask,
    fresh).
    """
    ne = eu.shape[0]
    out = np.zeros((t1 - t0, 3), dtype=np.int64)
    for t in range(t0, t1):
        psi = fill_uniforms(seed, t, 0, ne) <= r
        for j in range(m):
            base = fill_uniforms(seed, t, 1 + 3 * j, ne) <= q
            mask = fill_uniforms(seed, t, 2 + 3 * j, ne) <= eps
            fresh = fill_uniforms(seed, t, 3 + 3 * j, ne) <= q
            other = np.where(mask, fresh, base)
            x = connected(psi & base, eu, ev, nv, src, dst)
            y = connected(psi & other, eu, ev, nv, src, dst)
            out[t - t0, 0] += x and y
            out[t - t0, 1] += x
            out[t - t0, 2] += y
    return out


def revealment_counts(seed, psi_trial, xi_t0, xi_t1, r, q, eu, ev, indptr, nbr_v, nbr_e, nv, src, dst):
    """Query counts per edge for one psi over a range of inner xi draws.

    Runs the growth exploration to its fixpoint for each psi&xi config and
    accumulates which edges were queried.  Also counts how often the far
    side was reached.  Streams: 0 psi, 1+j inner draw j.
    """
    ne = eu.shape[0]
    psi = fill_uniforms(seed, psi_trial, 0, ne) <= r
    counts = np.zeros(ne, dtype=np.int64)
    crossings = 0
    for j in range(xi_t0, xi_t1):
        xi = fill_uniforms(seed, psi_trial, 1 + j, ne) <= q
        levels = bfs_levels(psi & xi, eu, ev, indptr, nbr_v, nbr_e, nv, src)
        counts += queried_edges(levels, eu, ev)
        crossings += bool((levels[dst] >= 0).any())
    return counts, crossings


def crossing_table(eu, ev, nv, src, dst, n_edges) -> np.ndarray:
    """Crossing indicator for every edge subset, as uint8[2^n_edges].

    Bit e of the subset index marks edge e present.  Vectorised over all
    subsets at once: per config a vertex bitmask of reached vertices grows
    until stable.  Needs nv <= 60.
    """
    if nv > 60:
        raise ValueError("crossing_table supports at most 60 vertices")
    total = 1 << n_edges
    cfg = np.arange(total, dtype=np.uint64)
    src_bits = np.uint64(0)
    for v in src:
        src_bits |= np.uint64(1) << np.uint64(int(v))
    dst_bits = np.uint64(0)
    for v in dst:
        dst_bits |= np.uint64(1) << np.uint64(int(v))
    one = np.uint64(1)
    reach_bits = np.full(total, src_bits, dtype=np.uint64)
    while True:
        new = reach_bits.copy()
        for e in range(n_edges):
            has = ((cfg >> np.uint64(e)) & one).astype(bool)
            a = np.uint64(int(eu[e]))
            b = np.uint64(int(ev[e]))
            a_in = has & (((new >> a) & one) == one)
            b_in = has & (((new >> b) & one) == one)
            new[a_in] |= one << b
            new[b_in] |= one << a
        if np.array_equal(new, reach_bits):
            break
        reach_bits = new
    return ((reach_bits & dst_bits) != 0).astype(np.uint8)
