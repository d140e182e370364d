# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels; mirrors _ref.py function for function.

Identical counter arithmetic and identical integer outputs: the generator
is splitmix64 on (seed, trial, stream, edge) keys and every uniform is
(z >> 11) * 2^-53, so thresholded configurations match the reference
bit for bit and so do all aggregated counts.
"""

import numpy as np

from libc.string cimport memset

ctypedef unsigned long long u64
ctypedef unsigned char u8

IMPL = "compiled"

_M64 = (1 << 64) - 1

cdef double _INV53 = 1.0 / 9007199254740992.0  # 2^-53, exact


cdef inline u64 _mix(u64 z) nogil:
    z = z + <u64>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline u64 _key(u64 seed, u64 trial, u64 stream) nogil:
    cdef u64 k = _mix(seed)
    k = _mix(k ^ trial)
    return _mix(k ^ stream)


cdef inline double _uniform(u64 key, u64 counter) nogil:
    return <double>(_mix(key ^ counter) >> 11) * _INV53


def trial_key(seed, trial, stream):
    """64-bit key identifying one trial's stream."""
    return int(_key(<u64>(seed & _M64), <u64>(trial & _M64), <u64>(stream & _M64)))


def fill_uniforms(seed, trial, stream, count):
    """Uniforms in [0, 1), one per counter 0..count-1, 53-bit resolution."""
    cdef u64 key = _key(<u64>(seed & _M64), <u64>(trial & _M64), <u64>(stream & _M64))
    out = np.empty(int(count), dtype=np.float64)
    cdef double[::1] mv = out
    cdef Py_ssize_t i, n = mv.shape[0]
    with nogil:
        for i in range(n):
            mv[i] = _uniform(key, <u64>i)
    return out


# ---------------------------------------------------------------------------
# union-find over vertices

cdef inline int _find(int* parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef inline void _union(int* parent, int a, int b) nogil:
    cdef int ra = _find(parent, a)
    cdef int rb = _find(parent, b)
    if ra != rb:
        parent[ra] = rb


cdef void _uf_build(u8* pres, int* eu, int* ev, Py_ssize_t ne, int* parent, int nv) nogil:
    cdef Py_ssize_t e
    cdef int v
    for v in range(nv):
        parent[v] = v
    for e in range(ne):
        if pres[e]:
            _union(parent, eu[e], ev[e])


cdef bint _uf_linked(int* parent, u8* flag, int nv,
                     int* src, Py_ssize_t ns, int* dst, Py_ssize_t nd) nogil:
    cdef Py_ssize_t i
    memset(flag, 0, nv)
    for i in range(ns):
        flag[_find(parent, src[i])] = 1
    for i in range(nd):
        if flag[_find(parent, dst[i])]:
            return 1
    return 0


cdef bint _conn(u8* pres, int* eu, int* ev, Py_ssize_t ne, int* parent, u8* flag,
                int nv, int* src, Py_ssize_t ns, int* dst, Py_ssize_t nd) nogil:
    _uf_build(pres, eu, ev, ne, parent, nv)
    return _uf_linked(parent, flag, nv, src, ns, dst, nd)


def connected(present, eu, ev, nv, src, dst):
    """True iff some src vertex and some dst vertex share a component."""
    cdef u8[::1] pres = present
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef bint out
    with nogil:
        out = _conn(&pres[0], &ceu[0], &cev[0], ceu.shape[0], &parent[0], &flag[0],
                    cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
    return bool(out)


def reach(present, eu, ev, nv, src):
    """uint8 mask over vertices reachable from src through present edges."""
    cdef u8[::1] pres = present
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int cnv = nv
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    out_arr = np.empty(cnv, dtype=np.uint8)
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef u8[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int v
    with nogil:
        _uf_build(&pres[0], &ceu[0], &cev[0], ceu.shape[0], &parent[0], cnv)
        memset(&flag[0], 0, cnv)
        for i in range(csrc.shape[0]):
            flag[_find(&parent[0], csrc[i])] = 1
        for v in range(cnv):
            out[v] = flag[_find(&parent[0], v)]
    return out_arr


# ---------------------------------------------------------------------------
# breadth-first growth levels over the CSR adjacency

cdef void _bfs(u8* pres, int* indptr, int* nbr_v, int* nbr_e, int nv,
               int* src, Py_ssize_t ns, int* levels, int* queue) nogil:
    cdef Py_ssize_t head = 0, tail = 0, i
    cdef int v, w, lv
    cdef Py_ssize_t k
    for v in range(nv):
        levels[v] = -1
    for i in range(ns):
        v = src[i]
        if levels[v] < 0:
            levels[v] = 0
            queue[tail] = v
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        lv = levels[v]
        for k in range(indptr[v], indptr[v + 1]):
            if pres[nbr_e[k]]:
                w = nbr_v[k]
                if levels[w] < 0:
                    levels[w] = lv + 1
                    queue[tail] = w
                    tail += 1


def bfs_levels(present, eu, ev, indptr, nbr_v, nbr_e, nv, src):
    """Round-by-round growth levels from the src set; -1 means never reached."""
    cdef u8[::1] pres = present
    cdef int[::1] cindptr = indptr
    cdef int[::1] cnbr_v = nbr_v
    cdef int[::1] cnbr_e = nbr_e
    cdef int[::1] csrc = src
    cdef int cnv = nv
    levels_arr = np.empty(cnv, dtype=np.int32)
    queue_arr = np.empty(cnv, dtype=np.int32)
    cdef int[::1] levels = levels_arr
    cdef int[::1] queue = queue_arr
    with nogil:
        _bfs(&pres[0], &cindptr[0], &cnbr_v[0], &cnbr_e[0], cnv,
             &csrc[0], csrc.shape[0], &levels[0], &queue[0])
    return levels_arr


# ---------------------------------------------------------------------------
# Monte Carlo trial loops

def count_crossings(seed, t0, t1, stream, p, eu, ev, nv, src, dst):
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cp = p
    cdef u64 cseed = <u64>(seed & _M64)
    cdef u64 cstream = <u64>(stream & _M64)
    cdef long long a = t0, b = t1, t, total = 0
    pres_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    cdef u8[::1] pres = pres_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef u64 key
    cdef Py_ssize_t e
    with nogil:
        for t in range(a, b):
            key = _key(cseed, <u64>t, cstream)
            for e in range(ne):
                pres[e] = _uniform(key, <u64>e) <= cp
            total += _conn(&pres[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                           cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
    return int(total)


def flip_counts(seed, t0, t1, p_lo, p_hi, eu, ev, nv, src, dst):
    """Coupled crossing comparison at two thresholds on shared weights."""
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double lo = p_lo, hi = p_hi, u
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, flips = 0, lo_cross = 0, hi_cross = 0
    pres_lo_arr = np.empty(ne, dtype=np.uint8)
    pres_hi_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    cdef u8[::1] pres_lo = pres_lo_arr
    cdef u8[::1] pres_hi = pres_hi_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef u64 key
    cdef Py_ssize_t e
    cdef bint x, y
    with nogil:
        for t in range(a, b):
            key = _key(cseed, <u64>t, 0)
            for e in range(ne):
                u = _uniform(key, <u64>e)
                pres_lo[e] = u <= lo
                pres_hi[e] = u <= hi
            x = _conn(&pres_lo[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                      cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
            y = _conn(&pres_hi[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                      cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
            flips += x != y
            lo_cross += x
            hi_cross += y
    return int(flips), int(lo_cross), int(hi_cross)


def noise_pair_counts(seed, t0, t1, p, eps, eu, ev, nv, src, dst):
    """Counts (xy, x, y) for crossings of a config and its eps-resample.

    Streams: 0 base weights, 1 re-sample mask, 2 fresh replacement weights.
    """
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cp = p, ceps = eps
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, n11 = 0, nx = 0, ny = 0
    base_arr = np.empty(ne, dtype=np.uint8)
    other_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    cdef u8[::1] base = base_arr
    cdef u8[::1] other = other_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef u64 kb, km, kf
    cdef Py_ssize_t e
    cdef bint x, y, resample
    with nogil:
        for t in range(a, b):
            kb = _key(cseed, <u64>t, 0)
            km = _key(cseed, <u64>t, 1)
            kf = _key(cseed, <u64>t, 2)
            for e in range(ne):
                base[e] = _uniform(kb, <u64>e) <= cp
                resample = _uniform(km, <u64>e) <= ceps
                if resample:
                    other[e] = _uniform(kf, <u64>e) <= cp
                else:
                    other[e] = base[e]
            x = _conn(&base[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                      cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
            y = _conn(&other[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                      cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
            n11 += x and y
            nx += x
            ny += y
    return int(n11), int(nx), int(ny)


# ---------------------------------------------------------------------------
# pivotal edges via reachable sets on the primal or dual graph

cdef void _pivotal(u8* pres, int* eu, int* ev, Py_ssize_t ne, int nv,
                   int* left, Py_ssize_t nl, int* right, Py_ssize_t nr,
                   int* du, int* dv, int ndv, int bstar, int tstar,
                   int* parent, u8* flagl, u8* flagr, int* dparent,
                   u8* piv) nogil:
    cdef Py_ssize_t e, i
    cdef int v, ra, rb, broot, troot
    _uf_build(pres, eu, ev, ne, parent, nv)
    if _uf_linked(parent, flagl, nv, left, nl, right, nr):
        # crossing present: a present edge flips the outcome iff removing it
        # opens a bottom-top path of duals of absent edges
        for v in range(ndv):
            dparent[v] = v
        for e in range(ne):
            if du[e] >= 0 and not pres[e]:
                _union(dparent, du[e], dv[e])
        broot = _find(dparent, bstar)
        troot = _find(dparent, tstar)
        for e in range(ne):
            piv[e] = 0
            if pres[e] and du[e] >= 0:
                ra = _find(dparent, du[e])
                rb = _find(dparent, dv[e])
                if (ra == broot and rb == troot) or (ra == troot and rb == broot):
                    piv[e] = 1
    else:
        # no crossing: an absent edge flips the outcome iff it joins the
        # left-reachable and right-reachable vertex sets
        memset(flagl, 0, nv)
        memset(flagr, 0, nv)
        for i in range(nl):
            flagl[_find(parent, left[i])] = 1
        for i in range(nr):
            flagr[_find(parent, right[i])] = 1
        for e in range(ne):
            piv[e] = 0
            if not pres[e]:
                ra = _find(parent, eu[e])
                rb = _find(parent, ev[e])
                if (flagl[ra] and flagr[rb]) or (flagr[ra] and flagl[rb]):
                    piv[e] = 1


def pivotal_mask(present, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar):
    """Outcome-flipping edges of one config, via reachable-set analysis."""
    cdef u8[::1] pres = present
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] cleft = left
    cdef int[::1] cright = right
    cdef int[::1] cdu = dual_u
    cdef int[::1] cdv = dual_v
    cdef int cnv = nv, cndv = ndv, cb = bstar, ct = tstar
    cdef Py_ssize_t ne = ceu.shape[0]
    parent_arr = np.empty(cnv, dtype=np.int32)
    flagl_arr = np.empty(cnv, dtype=np.uint8)
    flagr_arr = np.empty(cnv, dtype=np.uint8)
    dparent_arr = np.empty(cndv, dtype=np.int32)
    out_arr = np.empty(ne, dtype=np.uint8)
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flagl = flagl_arr
    cdef u8[::1] flagr = flagr_arr
    cdef int[::1] dparent = dparent_arr
    cdef u8[::1] out = out_arr
    with nogil:
        _pivotal(&pres[0], &ceu[0], &cev[0], ne, cnv,
                 &cleft[0], cleft.shape[0], &cright[0], cright.shape[0],
                 &cdu[0], &cdv[0], cndv, cb, ct,
                 &parent[0], &flagl[0], &flagr[0], &dparent[0], &out[0])
    return out_arr


def pivotal_sizes(seed, t0, t1, p, eu, ev, nv, left, right, dual_u, dual_v, ndv, bstar, tstar):
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] cleft = left
    cdef int[::1] cright = right
    cdef int[::1] cdu = dual_u
    cdef int[::1] cdv = dual_v
    cdef int cnv = nv, cndv = ndv, cb = bstar, ct = tstar
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cp = p
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, s
    pres_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flagl_arr = np.empty(cnv, dtype=np.uint8)
    flagr_arr = np.empty(cnv, dtype=np.uint8)
    dparent_arr = np.empty(cndv, dtype=np.int32)
    piv_arr = np.empty(ne, dtype=np.uint8)
    out_arr = np.empty(b - a, dtype=np.int64)
    cdef u8[::1] pres = pres_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flagl = flagl_arr
    cdef u8[::1] flagr = flagr_arr
    cdef int[::1] dparent = dparent_arr
    cdef u8[::1] piv = piv_arr
    cdef long long[::1] out = out_arr
    cdef u64 key
    cdef Py_ssize_t e
    with nogil:
        for t in range(a, b):
            key = _key(cseed, <u64>t, 0)
            for e in range(ne):
                pres[e] = _uniform(key, <u64>e) <= cp
            _pivotal(&pres[0], &ceu[0], &cev[0], ne, cnv,
                     &cleft[0], cleft.shape[0], &cright[0], cright.shape[0],
                     &cdu[0], &cdv[0], cndv, cb, ct,
                     &parent[0], &flagl[0], &flagr[0], &dparent[0], &piv[0])
            s = 0
            for e in range(ne):
                s += piv[e]
            out[t - a] = s
    return out_arr


def central_pivotal_count(seed, t0, t1, p, edge_id, eu, ev, nv, left, right,
                          dual_u, dual_v, ndv, bstar, tstar):
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] cleft = left
    cdef int[::1] cright = right
    cdef int[::1] cdu = dual_u
    cdef int[::1] cdv = dual_v
    cdef int cnv = nv, cndv = ndv, cb = bstar, ct = tstar
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef Py_ssize_t target = edge_id
    cdef double cp = p
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, total = 0
    pres_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flagl_arr = np.empty(cnv, dtype=np.uint8)
    flagr_arr = np.empty(cnv, dtype=np.uint8)
    dparent_arr = np.empty(cndv, dtype=np.int32)
    piv_arr = np.empty(ne, dtype=np.uint8)
    cdef u8[::1] pres = pres_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flagl = flagl_arr
    cdef u8[::1] flagr = flagr_arr
    cdef int[::1] dparent = dparent_arr
    cdef u8[::1] piv = piv_arr
    cdef u64 key
    cdef Py_ssize_t e
    with nogil:
        for t in range(a, b):
            key = _key(cseed, <u64>t, 0)
            for e in range(ne):
                pres[e] = _uniform(key, <u64>e) <= cp
            _pivotal(&pres[0], &ceu[0], &cev[0], ne, cnv,
                     &cleft[0], cleft.shape[0], &cright[0], cright.shape[0],
                     &cdu[0], &cdv[0], cndv, cb, ct,
                     &parent[0], &flagl[0], &flagr[0], &dparent[0], &piv[0])
            total += piv[target]
    return int(total)


# ---------------------------------------------------------------------------
# nested two-scale loops

def inner_crossing_counts(seed, t0, t1, m, r, q, eu, ev, nv, src, dst):
    """Per outer trial: crossings of psi&xi over m inner draws.

    Streams: 0 for the outer psi, 1+j for inner draw j.
    """
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cr = r, cq = q
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, j, cm = m, c
    psi_arr = np.empty(ne, dtype=np.uint8)
    pres_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    out_arr = np.empty(b - a, dtype=np.int64)
    cdef u8[::1] psi = psi_arr
    cdef u8[::1] pres = pres_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef long long[::1] out = out_arr
    cdef u64 kpsi, kxi
    cdef Py_ssize_t e
    with nogil:
        for t in range(a, b):
            kpsi = _key(cseed, <u64>t, 0)
            for e in range(ne):
                psi[e] = _uniform(kpsi, <u64>e) <= cr
            c = 0
            for j in range(cm):
                kxi = _key(cseed, <u64>t, <u64>(1 + j))
                for e in range(ne):
                    pres[e] = psi[e] and _uniform(kxi, <u64>e) <= cq
                c += _conn(&pres[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                           cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
            out[t - a] = c
    return out_arr


def inner_dual_counts(seed, t0, t1, m, r, q, ne, dualh_u, dualh_v, has_dual, ndv, lstar, rstar):
    """Per outer trial: dual left-right crossings of psi&xi over m inner draws.

    The dual config opens exactly the duals of absent primal edges.
    """
    cdef int[::1] cdu = dualh_u
    cdef int[::1] cdv = dualh_v
    cdef u8[::1] chas = has_dual
    cdef int cndv = ndv, cl = lstar, crr = rstar
    cdef Py_ssize_t cne = ne
    cdef double cr = r, cq = q
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, j, cm = m, c
    psi_arr = np.empty(cne, dtype=np.uint8)
    dparent_arr = np.empty(cndv, dtype=np.int32)
    out_arr = np.empty(b - a, dtype=np.int64)
    cdef u8[::1] psi = psi_arr
    cdef int[::1] dparent = dparent_arr
    cdef long long[::1] out = out_arr
    cdef u64 kpsi, kxi
    cdef Py_ssize_t e
    cdef int v
    with nogil:
        for t in range(a, b):
            kpsi = _key(cseed, <u64>t, 0)
            for e in range(cne):
                psi[e] = _uniform(kpsi, <u64>e) <= cr
            c = 0
            for j in range(cm):
                kxi = _key(cseed, <u64>t, <u64>(1 + j))
                for v in range(cndv):
                    dparent[v] = v
                for e in range(cne):
                    if chas[e] and not (psi[e] and _uniform(kxi, <u64>e) <= cq):
                        _union(&dparent[0], cdu[e], cdv[e])
                c += _find(&dparent[0], cl) == _find(&dparent[0], crr)
            out[t - a] = c
    return out_arr


def subgraph_noise_counts(seed, t0, t1, m, r, q, eps, eu, ev, nv, src, dst):
    """Per outer psi: (xy, x, y) counts for paired inner configs.

    Streams: 0 psi; then 1+3j, 2+3j, 3+3j for inner draw j (base, mask,
    fresh).
    """
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cr = r, cq = q, ceps = eps
    cdef u64 cseed = <u64>(seed & _M64)
    cdef long long a = t0, b = t1, t, j, cm = m
    psi_arr = np.empty(ne, dtype=np.uint8)
    pa_arr = np.empty(ne, dtype=np.uint8)
    pb_arr = np.empty(ne, dtype=np.uint8)
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    out_arr = np.zeros((b - a, 3), dtype=np.int64)
    cdef u8[::1] psi = psi_arr
    cdef u8[::1] pa = pa_arr
    cdef u8[::1] pb = pb_arr
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef long long[:, ::1] out = out_arr
    cdef u64 kpsi, kbase, kmask, kfresh
    cdef Py_ssize_t e
    cdef bint x, y, bb, resample
    with nogil:
        for t in range(a, b):
            kpsi = _key(cseed, <u64>t, 0)
            for e in range(ne):
                psi[e] = _uniform(kpsi, <u64>e) <= cr
            for j in range(cm):
                kbase = _key(cseed, <u64>t, <u64>(1 + 3 * j))
                kmask = _key(cseed, <u64>t, <u64>(2 + 3 * j))
                kfresh = _key(cseed, <u64>t, <u64>(3 + 3 * j))
                for e in range(ne):
                    bb = _uniform(kbase, <u64>e) <= cq
                    resample = _uniform(kmask, <u64>e) <= ceps
                    pa[e] = psi[e] and bb
                    if resample:
                        pb[e] = psi[e] and _uniform(kfresh, <u64>e) <= cq
                    else:
                        pb[e] = pa[e]
                x = _conn(&pa[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                          cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
                y = _conn(&pb[0], &ceu[0], &cev[0], ne, &parent[0], &flag[0],
                          cnv, &csrc[0], csrc.shape[0], &cdst[0], cdst.shape[0])
                out[t - a, 0] += x and y
                out[t - a, 1] += x
                out[t - a, 2] += y
    return out_arr


def revealment_counts(seed, psi_trial, xi_t0, xi_t1, r, q, eu, ev, indptr, nbr_v, nbr_e, nv, src, dst):
    """Query counts per edge for one psi over a range of inner xi draws.

    Streams: 0 psi, 1+j inner draw j.  An edge is queried iff its endpoint
    growth levels differ and at least one is finite.
    """
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] cindptr = indptr
    cdef int[::1] cnbr_v = nbr_v
    cdef int[::1] cnbr_e = nbr_e
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = ceu.shape[0]
    cdef double cr = r, cq = q
    cdef u64 cseed = <u64>(seed & _M64)
    cdef u64 ctrial = <u64>(psi_trial & _M64)
    cdef long long a = xi_t0, b = xi_t1, j, crossings = 0
    psi_arr = np.empty(ne, dtype=np.uint8)
    pres_arr = np.empty(ne, dtype=np.uint8)
    levels_arr = np.empty(cnv, dtype=np.int32)
    queue_arr = np.empty(cnv, dtype=np.int32)
    counts_arr = np.zeros(ne, dtype=np.int64)
    cdef u8[::1] psi = psi_arr
    cdef u8[::1] pres = pres_arr
    cdef int[::1] levels = levels_arr
    cdef int[::1] queue = queue_arr
    cdef long long[::1] counts = counts_arr
    cdef u64 kpsi, kxi
    cdef Py_ssize_t e, i
    cdef int la, lb
    cdef bint crossed
    kpsi = _key(cseed, ctrial, 0)
    with nogil:
        for e in range(ne):
            psi[e] = _uniform(kpsi, <u64>e) <= cr
        for j in range(a, b):
            kxi = _key(cseed, ctrial, <u64>(1 + j))
            for e in range(ne):
                pres[e] = psi[e] and _uniform(kxi, <u64>e) <= cq
            _bfs(&pres[0], &cindptr[0], &cnbr_v[0], &cnbr_e[0], cnv,
                 &csrc[0], csrc.shape[0], &levels[0], &queue[0])
            for e in range(ne):
                la = levels[ceu[e]]
                lb = levels[cev[e]]
                if la != lb and not (la < 0 and lb < 0):
                    counts[e] += 1
            crossed = 0
            for i in range(cdst.shape[0]):
                if levels[cdst[i]] >= 0:
                    crossed = 1
                    break
            crossings += crossed
    return counts_arr, int(crossings)


def crossing_table(eu, ev, nv, src, dst, n_edges):
    """Crossing indicator for every edge subset, as uint8[2^n_edges].

    Bit e of the subset index marks edge e present.  Needs nv <= 60 (parity
    with the reference implementation).
    """
    if nv > 60:
        raise ValueError("crossing_table supports at most 60 vertices")
    cdef int[::1] ceu = eu
    cdef int[::1] cev = ev
    cdef int[::1] csrc = src
    cdef int[::1] cdst = dst
    cdef int cnv = nv
    cdef Py_ssize_t ne = n_edges
    cdef Py_ssize_t total = (<Py_ssize_t>1) << ne
    parent_arr = np.empty(cnv, dtype=np.int32)
    flag_arr = np.empty(cnv, dtype=np.uint8)
    out_arr = np.empty(total, dtype=np.uint8)
    cdef int[::1] parent = parent_arr
    cdef u8[::1] flag = flag_arr
    cdef u8[::1] out = out_arr
    cdef Py_ssize_t cfg, e, i
    cdef int v
    cdef bint hit
    with nogil:
        for cfg in range(total):
            for v in range(cnv):
                parent[v] = v
            for e in range(ne):
                if (cfg >> e) & 1:
                    _union(&parent[0], ceu[e], cev[e])
            memset(&flag[0], 0, cnv)
            for i in range(csrc.shape[0]):
                flag[_find(&parent[0], csrc[i])] = 1
            hit = 0
            for i in range(cdst.shape[0]):
                if flag[_find(&parent[0], cdst[i])]:
                    hit = 1
                    break
            out[cfg] = hit
    return out_arr
