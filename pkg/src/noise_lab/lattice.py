"""Rectangle lattice geometry: vertices, edge indexing, dual graphs.

The rectangle with corners (0,0) and (n,m) carries (n+1)(m+1) vertices.
Edges are indexed canonically:

  horizontal (i,j)-(i+1,j)  ->  j*n + i            (0 <= i < n, 0 <= j <= m)
  vertical   (i,j)-(i,j+1)  ->  n*(m+1) + j*(n+1) + i   (0 <= i <= n, 0 <= j < m)

so edge_count = n*(m+1) + m*(n+1).

Two dual graphs are precomputed on the face centres, one per crossing
orientation.  For the top-bottom dual (the partner of the primal left-right
crossing) the faces below and above the rectangle are merged into single
bottom/top terminals; every horizontal primal edge has a dual, vertical
primal edges only in interior columns.  The left-right dual is the mirror
construction.  A dual edge is open exactly when the primal edge it crosses
is absent.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class RectLattice:
    """Geometry and index arrays for the n-by-m rectangle."""

    def __init__(self, n: int, m: int):
        if n < 1 or m < 1:
            raise ValueError(f"lattice sides must be >= 1, got {n}x{m}")
        self.n = int(n)
        self.m = int(m)

    def __repr__(self):
        return f"RectLattice({self.n}, {self.m})"

    def __eq__(self, other):
        return isinstance(other, RectLattice) and (self.n, self.m) == (other.n, other.m)

    def __hash__(self):
        return hash((self.n, self.m))

    @property
    def vertex_count(self) -> int:
        return (self.n + 1) * (self.m + 1)

    @property
    def horizontal_edge_count(self) -> int:
        return self.n * (self.m + 1)

    @property
    def edge_count(self) -> int:
        return self.n * (self.m + 1) + self.m * (self.n + 1)

    def vertex_index(self, i: int, j: int) -> int:
        if not (0 <= i <= self.n and 0 <= j <= self.m):
            raise ValueError(f"vertex ({i},{j}) outside {self!r}")
        return j * (self.n + 1) + i

    def horizontal_edge_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.n and 0 <= j <= self.m):
            raise ValueError(f"horizontal edge ({i},{j}) outside {self!r}")
        return j * self.n + i

    def vertical_edge_index(self, i: int, j: int) -> int:
        if not (0 <= i <= self.n and 0 <= j < self.m):
            raise ValueError(f"vertical edge ({i},{j}) outside {self!r}")
        return self.n * (self.m + 1) + j * (self.n + 1) + i

    def edge_endpoints(self, e: int):
        """((i,j), (i',j')) endpoints of edge e."""
        n, m = self.n, self.m
        if not (0 <= e < self.edge_count):
            raise ValueError(f"edge {e} outside {self!r}")
        if e < n * (m + 1):
            j, i = divmod(e, n)
            return (i, j), (i + 1, j)
        e -= n * (m + 1)
        j, i = divmod(e, n + 1)
        return (i, j), (i, j + 1)

    @cached_property
    def edge_u(self) -> np.ndarray:
        n, m = self.n, self.m
        hi = np.arange(n * (m + 1))
        hj, hii = np.divmod(hi, n)
        vi = np.arange(m * (n + 1))
        vj, vii = np.divmod(vi, n + 1)
        return np.concatenate([hj * (n + 1) + hii, vj * (n + 1) + vii]).astype(np.int32)

    @cached_property
    def edge_v(self) -> np.ndarray:
        n, m = self.n, self.m
        hi = np.arange(n * (m + 1))
        hj, hii = np.divmod(hi, n)
        vi = np.arange(m * (n + 1))
        vj, vii = np.divmod(vi, n + 1)
        return np.concatenate(
            [hj * (n + 1) + hii + 1, (vj + 1) * (n + 1) + vii]
        ).astype(np.int32)

    @cached_property
    def left_ids(self) -> np.ndarray:
        return (np.arange(self.m + 1, dtype=np.int32) * (self.n + 1)).astype(np.int32)

    @cached_property
    def right_ids(self) -> np.ndarray:
        return (np.arange(self.m + 1, dtype=np.int32) * (self.n + 1) + self.n).astype(np.int32)

    @cached_property
    def bottom_ids(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=np.int32)

    @cached_property
    def top_ids(self) -> np.ndarray:
        return (self.m * (self.n + 1) + np.arange(self.n + 1, dtype=np.int32)).astype(np.int32)

    @cached_property
    def edge_mid_x(self) -> np.ndarray:
        n, m = self.n, self.m
        hx = np.tile(np.arange(n) + 0.5, m + 1)
        vx = np.tile(np.arange(n + 1, dtype=float), m)
        return np.concatenate([hx, vx])

    @cached_property
    def edge_mid_y(self) -> np.ndarray:
        n, m = self.n, self.m
        hy = np.repeat(np.arange(m + 1, dtype=float), n)
        vy = np.repeat(np.arange(m) + 0.5, n + 1)
        return np.concatenate([hy, vy])

    @cached_property
    def adjacency(self):
        """CSR arrays (indptr, nbr_vertex, nbr_edge) over undirected edges."""
        nv = self.vertex_count
        eu, ev = self.edge_u, self.edge_v
        deg = np.bincount(eu, minlength=nv) + np.bincount(ev, minlength=nv)
        indptr = np.zeros(nv + 1, dtype=np.int32)
        np.cumsum(deg, out=indptr[1:])
        nbr_v = np.empty(indptr[-1], dtype=np.int32)
        nbr_e = np.empty(indptr[-1], dtype=np.int32)
        cursor = indptr[:-1].copy()
        for e in range(eu.shape[0]):
            a, b = eu[e], ev[e]
            nbr_v[cursor[a]] = b
            nbr_e[cursor[a]] = e
            cursor[a] += 1
            nbr_v[cursor[b]] = a
            nbr_e[cursor[b]] = e
            cursor[b] += 1
        return indptr, nbr_v, nbr_e

    # Dual for the left-right primal crossing: faces plus bottom/top terminals.
    @cached_property
    def dual_tb(self):
        """(dual_u, dual_v, ndv, bottom_star, top_star); -1 marks no dual edge."""
        n, m = self.n, self.m
        nf = n * m
        bstar, tstar = nf, nf + 1
        du = np.full(self.edge_count, -1, dtype=np.int32)
        dv = np.full(self.edge_count, -1, dtype=np.int32)
        for j in range(m + 1):
            for i in range(n):
                e = self.horizontal_edge_index(i, j)
                du[e] = bstar if j == 0 else (j - 1) * n + i
                dv[e] = tstar if j == m else j * n + i
        for j in range(m):
            for i in range(1, n):
                e = self.vertical_edge_index(i, j)
                du[e] = j * n + (i - 1)
                dv[e] = j * n + i
        return du, dv, nf + 2, bstar, tstar

    # Dual for the top-bottom primal crossing: faces plus left/right terminals.
    @cached_property
    def dual_lr(self):
        """(dual_u, dual_v, ndv, left_star, right_star); -1 marks no dual edge."""
        n, m = self.n, self.m
        nf = n * m
        lstar, rstar = nf, nf + 1
        du = np.full(self.edge_count, -1, dtype=np.int32)
        dv = np.full(self.edge_count, -1, dtype=np.int32)
        for j in range(m):
            for i in range(n + 1):
                e = self.vertical_edge_index(i, j)
                du[e] = lstar if i == 0 else j * n + (i - 1)
                dv[e] = rstar if i == n else j * n + i
        for j in range(1, m):
            for i in range(n):
                e = self.horizontal_edge_index(i, j)
                du[e] = (j - 1) * n + i
                dv[e] = j * n + i
        return du, dv, nf + 2, lstar, rstar

    @cached_property
    def transpose_perm(self) -> np.ndarray:
        """perm[e] = index of edge e inside the transposed (m-by-n) lattice."""
        n, m = self.n, self.m
        other = RectLattice(m, n)
        perm = np.empty(self.edge_count, dtype=np.int64)
        for j in range(m + 1):
            for i in range(n):
                perm[self.horizontal_edge_index(i, j)] = other.vertical_edge_index(j, i)
        for j in range(m):
            for i in range(n + 1):
                perm[self.vertical_edge_index(i, j)] = other.horizontal_edge_index(j, i)
        return perm

    @cached_property
    def mirror_perm(self) -> np.ndarray:
        """perm[e] = index of edge e after the left-right flip i -> n-i."""
        n, m = self.n, self.m
        perm = np.empty(self.edge_count, dtype=np.int64)
        for j in range(m + 1):
            for i in range(n):
                perm[self.horizontal_edge_index(i, j)] = self.horizontal_edge_index(n - 1 - i, j)
        for j in range(m):
            for i in range(n + 1):
                perm[self.vertical_edge_index(i, j)] = self.vertical_edge_index(n - i, j)
        return perm

    def central_edge(self) -> int:
        """The horizontal edge nearest the rectangle centre (ties go left/down)."""
        return self.horizontal_edge_index((self.n - 1) // 2, self.m // 2)


@dataclass
class EdgeConfig:
    """One deterministic edge configuration on a lattice."""

    lattice: RectLattice
    present: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.present = np.asarray(self.present, dtype=bool)
        if self.present.shape != (self.lattice.edge_count,):
            raise ValueError(
                f"config length {self.present.shape} does not match "
                f"{self.lattice.edge_count} edges of {self.lattice!r}"
            )

    @classmethod
    def from_mask(cls, lattice: RectLattice, mask: int) -> "EdgeConfig":
        e = lattice.edge_count
        bits = (mask >> np.arange(e, dtype=np.uint64)) & 1
        return cls(lattice, bits.astype(bool))

    def __and__(self, other: "EdgeConfig") -> "EdgeConfig":
        if other.lattice != self.lattice:
            raise ValueError("configs live on different lattices")
        return EdgeConfig(self.lattice, self.present & other.present)

    def transpose(self) -> "EdgeConfig":
        out = np.empty(self.lattice.edge_count, dtype=bool)
        out[self.lattice.transpose_perm] = self.present
        return EdgeConfig(RectLattice(self.lattice.m, self.lattice.n), out)

    def mirror(self) -> "EdgeConfig":
        out = np.empty(self.lattice.edge_count, dtype=bool)
        out[self.lattice.mirror_perm] = self.present
        return EdgeConfig(self.lattice, out)


@dataclass
class WeightedConfig:
    """Coupled uniform weights, one per edge, from the counter generator."""

    lattice: RectLattice
    weights: np.ndarray = field(repr=False)
    seed: int | None = None
    trial: int | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.lattice.edge_count,):
            raise ValueError("one weight per edge required")
        if self.weights.size and (self.weights.min() < 0.0 or self.weights.max() >= 1.0):
            raise ValueError("weights must lie in [0, 1)")

    def config_at(self, p: float) -> EdgeConfig:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"threshold p={p} outside [0, 1]")
        return EdgeConfig(self.lattice, self.weights <= p)
