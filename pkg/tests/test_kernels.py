"""Kernel contract tests.

The generator contract is frozen here: splitmix64 mixing, key chaining, and
the 53-bit uniform construction are reimplemented inline as an independent
oracle, and a few concrete values are pinned outright.  The compiled kernels
must agree with the pure-python ones bit for bit, so the parity sweep checks
exact equality, never closeness.
"""

import numpy as np
import pytest

from noise_lab.kernels import _ref
from noise_lab.lattice import RectLattice

try:
    from noise_lab.kernels import _core
except ImportError:
    _core = None

M64 = (1 << 64) - 1


def _mix_oracle(z):
    z = (z + 0x9E3779B97F4A7C15) & M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def _key_oracle(seed, trial, stream):
    k = _mix_oracle(seed & M64)
    k = _mix_oracle(k ^ (trial & M64))
    return _mix_oracle(k ^ (stream & M64))


class TestRngContract:
    def test_trial_key_frozen_values(self):
        assert _ref.trial_key(0, 0, 0) == 2558736989570252433
        assert _ref.trial_key(1, 2, 3) == 15020427595393229491
        assert _ref.trial_key(123456789, 42, 1) == 3875464109189100022

    def test_trial_key_matches_inline_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            s, t, st = (int(x) for x in rng.integers(0, 2**63, 3))
            assert _ref.trial_key(s, t, st) == _key_oracle(s, t, st)

    def test_uniforms_match_inline_oracle(self):
        key = _key_oracle(987654321, 7, 2)
        want = np.array([(_mix_oracle(key ^ i) >> 11) * 2.0**-53 for i in range(64)])
        got = _ref.fill_uniforms(987654321, 7, 2, 64)
        assert np.array_equal(got, want)

    def test_uniforms_in_unit_interval(self):
        u = _ref.fill_uniforms(11, 0, 0, 10000)
        assert u.min() >= 0.0 and u.max() < 1.0
        # 53-bit resolution: mean near 1/2 on a big block
        assert abs(u.mean() - 0.5) < 0.02

    def test_streams_are_distinct(self):
        a = _ref.fill_uniforms(5, 0, 0, 32)
        b = _ref.fill_uniforms(5, 0, 1, 32)
        c = _ref.fill_uniforms(5, 1, 0, 32)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_seed_wraps_at_64_bits(self):
        assert _ref.trial_key(2**64 + 5, 0, 0) == _ref.trial_key(5, 0, 0)


class TestGraphPrimitives:
    def setup_method(self):
        self.lat = RectLattice(3, 2)
        self.eu, self.ev = self.lat.edge_u, self.lat.edge_v
        self.nv = self.lat.vertex_count
        self.indptr, self.nbr_v, self.nbr_e = self.lat.adjacency

    def test_connected_empty_and_full(self):
        ne = self.eu.shape[0]
        none = np.zeros(ne, dtype=np.uint8)
        full = np.ones(ne, dtype=np.uint8)
        L, R = self.lat.left_ids, self.lat.right_ids
        assert not _ref.connected(none, self.eu, self.ev, self.nv, L, R)
        assert _ref.connected(full, self.eu, self.ev, self.nv, L, R)

    def test_reach_full_config_reaches_everything(self):
        full = np.ones(self.eu.shape[0], dtype=np.uint8)
        r = _ref.reach(full, self.eu, self.ev, self.nv, self.lat.left_ids)
        assert r.all()

    def test_bfs_levels_zero_on_sources_only_when_empty(self):
        none = np.zeros(self.eu.shape[0], dtype=np.uint8)
        lv = _ref.bfs_levels(none, self.eu, self.ev, self.indptr, self.nbr_v,
                             self.nbr_e, self.nv, self.lat.left_ids)
        src = set(self.lat.left_ids.tolist())
        for v in range(self.nv):
            assert lv[v] == (0 if v in src else -1)

    def test_bfs_levels_are_graph_distances(self):
        # full config: level of (i, j) from the left column is i
        full = np.ones(self.eu.shape[0], dtype=np.uint8)
        lv = _ref.bfs_levels(full, self.eu, self.ev, self.indptr, self.nbr_v,
                             self.nbr_e, self.nv, self.lat.left_ids)
        for j in range(self.lat.m + 1):
            for i in range(self.lat.n + 1):
                assert lv[self.lat.vertex_index(i, j)] == i

    def test_queried_edges_semantics(self):
        eu = np.array([0, 1, 2, 0], dtype=np.int32)
        ev = np.array([1, 2, 3, 3], dtype=np.int32)
        levels = np.array([3, 0, 1, -1], dtype=np.int32)
        q = _ref.queried_edges(levels, eu, ev)
        # differing finite levels, and reached-vs-unreached pairs, count
        assert q.tolist() == [1, 1, 1, 1]
        levels2 = np.array([-1, 0, 0, -1], dtype=np.int32)
        q2 = _ref.queried_edges(levels2, eu, ev)
        # equal levels and double-unreached edges do not
        assert q2.tolist() == [1, 0, 1, 0]

    def test_queried_edges_round_cutoff(self):
        eu = np.array([0, 1, 2], dtype=np.int32)
        ev = np.array([1, 2, 3], dtype=np.int32)
        levels = np.array([0, 1, 2, -1], dtype=np.int32)
        assert _ref.queried_edges(levels, eu, ev).tolist() == [1, 1, 1]
        assert _ref.queried_edges(levels, eu, ev, max_round=2).tolist() == [1, 1, 0]
        assert _ref.queried_edges(levels, eu, ev, max_round=1).tolist() == [1, 0, 0]

    def test_crossing_table_unit_square(self):
        lat = RectLattice(1, 1)
        t = _ref.crossing_table(lat.edge_u, lat.edge_v, lat.vertex_count,
                                lat.left_ids, lat.right_ids, lat.edge_count)
        # crossing iff either horizontal edge is present
        want = [(1 if cfg & 3 else 0) for cfg in range(16)]
        assert t.tolist() == want

    def test_crossing_table_vertex_cap(self):
        lat = RectLattice(8, 8)
        with pytest.raises(ValueError):
            _ref.crossing_table(lat.edge_u, lat.edge_v, lat.vertex_count,
                                lat.left_ids, lat.right_ids, lat.edge_count)


def test_count_crossings_deterministic():
    lat = RectLattice(4, 4)
    args = (77, 0, 200, 0, 0.5, lat.edge_u, lat.edge_v, lat.vertex_count,
            lat.left_ids, lat.right_ids)
    assert _ref.count_crossings(*args) == _ref.count_crossings(*args)


def test_flip_counts_monotone_in_threshold():
    lat = RectLattice(4, 4)
    flips, lo, hi = _ref.flip_counts(77, 0, 300, 0.45, 0.6, lat.edge_u, lat.edge_v,
                                     lat.vertex_count, lat.left_ids, lat.right_ids)
    # coupled thresholds: every flip is an upward flip
    assert hi - lo == flips
    assert flips >= 0


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
class TestCompiledParity:
    """The compiled kernels must match the reference exactly, not closely."""

    def test_scalar_rng(self):
        for seed, trial, stream in [(0, 0, 0), (1, 2, 3), (2**64 - 1, 2**63, 17)]:
            assert _core.trial_key(seed, trial, stream) == _ref.trial_key(seed, trial, stream)
        assert np.array_equal(_core.fill_uniforms(99, 5, 2, 4096),
                              _ref.fill_uniforms(99, 5, 2, 4096))

    @pytest.mark.parametrize("n,m", [(1, 1), (2, 2), (3, 2), (5, 4)])
    def test_per_config_kernels(self, n, m):
        lat = RectLattice(n, m)
        eu, ev, nv = lat.edge_u, lat.edge_v, lat.vertex_count
        indptr, nbr_v, nbr_e = lat.adjacency
        du, dv, ndv, bstar, tstar = lat.dual_tb
        L, R = lat.left_ids, lat.right_ids
        rng = np.random.default_rng(n * 100 + m)
        for _ in range(4):
            pres = (rng.random(eu.shape[0]) < rng.uniform(0.2, 0.8)).astype(np.uint8)
            assert _core.connected(pres, eu, ev, nv, L, R) == _ref.connected(pres, eu, ev, nv, L, R)
            assert np.array_equal(_core.reach(pres, eu, ev, nv, L),
                                  _ref.reach(pres, eu, ev, nv, L))
            assert np.array_equal(
                _core.bfs_levels(pres, eu, ev, indptr, nbr_v, nbr_e, nv, L),
                _ref.bfs_levels(pres, eu, ev, indptr, nbr_v, nbr_e, nv, L))
            assert np.array_equal(
                _core.pivotal_mask(pres, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar),
                _ref.pivotal_mask(pres, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar))

    @pytest.mark.parametrize("n,m", [(2, 2), (5, 4)])
    def test_trial_loop_kernels(self, n, m):
        lat = RectLattice(n, m)
        eu, ev, nv = lat.edge_u, lat.edge_v, lat.vertex_count
        ne = eu.shape[0]
        indptr, nbr_v, nbr_e = lat.adjacency
        du, dv, ndv, bstar, tstar = lat.dual_tb
        dul, dvl, ndvl, lstar, rstar = lat.dual_lr
        hdl = (dul >= 0).astype(np.uint8)
        L, R = lat.left_ids, lat.right_ids
        sd = 1000 + n * 10 + m
        assert _core.count_crossings(sd, 0, 50, 0, 0.5, eu, ev, nv, L, R) == \
            _ref.count_crossings(sd, 0, 50, 0, 0.5, eu, ev, nv, L, R)
        assert _core.flip_counts(sd, 3, 53, 0.48, 0.55, eu, ev, nv, L, R) == \
            _ref.flip_counts(sd, 3, 53, 0.48, 0.55, eu, ev, nv, L, R)
        assert _core.noise_pair_counts(sd, 0, 50, 0.5, 0.13, eu, ev, nv, L, R) == \
            _ref.noise_pair_counts(sd, 0, 50, 0.5, 0.13, eu, ev, nv, L, R)
        assert np.array_equal(
            _core.pivotal_sizes(sd, 0, 40, 0.5, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar),
            _ref.pivotal_sizes(sd, 0, 40, 0.5, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar))
        eid = lat.central_edge()
        assert _core.central_pivotal_count(sd, 0, 40, 0.5, eid, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar) == \
            _ref.central_pivotal_count(sd, 0, 40, 0.5, eid, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar)
        assert np.array_equal(
            _core.inner_crossing_counts(sd, 0, 6, 5, 0.8, 0.625, eu, ev, nv, L, R),
            _ref.inner_crossing_counts(sd, 0, 6, 5, 0.8, 0.625, eu, ev, nv, L, R))
        assert np.array_equal(
            _core.inner_dual_counts(sd, 0, 6, 5, 0.8, 0.625, ne, dul, dvl, hdl, ndvl, lstar, rstar),
            _ref.inner_dual_counts(sd, 0, 6, 5, 0.8, 0.625, ne, dul, dvl, hdl, ndvl, lstar, rstar))
        assert np.array_equal(
            _core.subgraph_noise_counts(sd, 0, 4, 6, 0.9, 0.5 / 0.9, 0.1, eu, ev, nv, L, R),
            _ref.subgraph_noise_counts(sd, 0, 4, 6, 0.9, 0.5 / 0.9, 0.1, eu, ev, nv, L, R))
        ca, na = _core.revealment_counts(sd, 2, 0, 20, 0.9, 0.5 / 0.9, eu, ev,
                                         indptr, nbr_v, nbr_e, nv, L, R)
        cb, nb = _ref.revealment_counts(sd, 2, 0, 20, 0.9, 0.5 / 0.9, eu, ev,
                                        indptr, nbr_v, nbr_e, nv, L, R)
        assert np.array_equal(ca, cb) and na == nb

    def test_crossing_table_parity(self):
        for n, m in [(1, 1), (2, 1), (2, 2)]:
            lat = RectLattice(n, m)
            assert np.array_equal(
                _core.crossing_table(lat.edge_u, lat.edge_v, lat.vertex_count,
                                     lat.left_ids, lat.right_ids, lat.edge_count),
                _ref.crossing_table(lat.edge_u, lat.edge_v, lat.vertex_count,
                                    lat.left_ids, lat.right_ids, lat.edge_count))


def test_env_override_forces_python_impl():
    import subprocess
    import sys
    out = subprocess.run(
        [sys.executable, "-c", "import noise_lab.kernels as K; print(K.IMPL)"],
        env={"NOISE_LAB_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True, text=True)
    assert out.stdout.strip() == "python"
