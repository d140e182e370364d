"""Percolation operation tests.

Exact values come from exhaustive enumeration on small rectangles; Monte
Carlo estimators are checked against those within 4 standard errors (one
seed retry), and everything seeded must be reproducible and independent of
the worker count.
"""

import numpy as np
import pytest

from conftest import retry_once
from noise_lab import kernels
from noise_lab.cube import build_function, noise_correlation
from noise_lab.lattice import EdgeConfig, RectLattice
from noise_lab.percolation import (
    aux_seed,
    config_at,
    estimate_crossing,
    estimate_four_arm,
    estimate_pivotal_mean,
    estimate_revealment,
    exact_crossing_probability,
    exact_flip_probability,
    exact_pivotal_mean,
    explore,
    has_horizontal_crossing,
    near_critical_flip_probability,
    noise_correlation_crossing,
    pivotal_edges,
    rsw_two_scale_check,
    sample_weights,
    subgraph_noise_correlation,
    two_scale_crossing_variance,
)
from noise_lab.two_scale import TwoScalePair, two_scale_variance


def _crossing_fn(n, m):
    return build_function(f"crossing:{n}:{m}")


class TestExactValues:
    def test_unit_square_crossing(self):
        assert abs(exact_crossing_probability(RectLattice(1, 1), 0.5) - 0.75) < 1e-12

    def test_self_dual_strip(self):
        # the (n+1)-by-n rectangle crosses with probability exactly 1/2
        assert abs(exact_crossing_probability(RectLattice(2, 1), 0.5) - 0.5) < 1e-12
        assert abs(exact_crossing_probability(RectLattice(3, 2), 0.5) - 0.5) < 1e-12

    def test_endpoints(self):
        lat = RectLattice(2, 2)
        assert exact_crossing_probability(lat, 0.0) == 0.0
        assert exact_crossing_probability(lat, 1.0) == 1.0

    def test_monotone_in_p(self):
        lat = RectLattice(2, 2)
        vals = [exact_crossing_probability(lat, p) for p in np.linspace(0.05, 0.95, 10)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_edge_cap(self):
        with pytest.raises(ValueError):
            exact_crossing_probability(RectLattice(4, 4), 0.5)
        with pytest.raises(ValueError):
            exact_pivotal_mean(RectLattice(3, 3), 0.5)

    def test_unit_square_pivotal_mean(self):
        assert abs(exact_pivotal_mean(RectLattice(1, 1), 0.5) - 1.0) < 1e-12

    def test_flip_probability_identity(self):
        lat = RectLattice(2, 2)
        for r in (0.4, 0.5, 0.62):
            want = abs(exact_crossing_probability(lat, max(0.5, r))
                       - exact_crossing_probability(lat, min(0.5, r)))
            assert abs(exact_flip_probability(lat, r) - want) < 1e-12
        assert exact_flip_probability(lat, 0.5) == 0.0

    def test_spectral_route_agrees(self):
        # crossing probability via the function table's expectation
        lat = RectLattice(2, 2)
        f = _crossing_fn(2, 2)
        from noise_lab.cube import expectation
        for p in (0.3, 0.5, 0.7):
            assert abs(exact_crossing_probability(lat, p) - expectation(f, p)) < 1e-12


class TestPivotalEdges:
    def test_all_absent_unit_square(self):
        lat = RectLattice(1, 1)
        cfg = EdgeConfig.from_mask(lat, 0)
        piv = pivotal_edges(cfg)
        assert sorted(np.flatnonzero(piv).tolist()) == [0, 1]

    def test_fast_matches_baseline_random(self):
        lat = RectLattice(3, 2)
        rng = np.random.default_rng(17)
        for _ in range(300):
            cfg = EdgeConfig(lat, rng.random(lat.edge_count) < rng.uniform(0.2, 0.8))
            fast = pivotal_edges(cfg, method="fast")
            base = pivotal_edges(cfg, method="baseline")
            assert np.array_equal(fast, base)

    def test_pivotal_commutes_with_mirror(self):
        lat = RectLattice(3, 3)
        rng = np.random.default_rng(23)
        perm = lat.mirror_perm
        for _ in range(100):
            cfg = EdgeConfig(lat, rng.random(lat.edge_count) < 0.5)
            piv = pivotal_edges(cfg)
            piv_m = pivotal_edges(cfg.mirror())
            want = np.empty_like(piv)
            want[perm] = piv
            assert np.array_equal(piv_m, want)

    def test_unknown_method(self):
        cfg = EdgeConfig.from_mask(RectLattice(1, 1), 0)
        with pytest.raises(ValueError):
            pivotal_edges(cfg, method="guess")


class TestExplore:
    def _random_pair(self, lat, rng, r=0.8):
        psi = EdgeConfig(lat, rng.random(lat.edge_count) < r)
        xi = EdgeConfig(lat, rng.random(lat.edge_count) < 0.5 / r)
        return psi, xi

    def test_crossing_flag_matches_oracle(self):
        lat = RectLattice(4, 3)
        rng = np.random.default_rng(41)
        for _ in range(150):
            psi, xi = self._random_pair(lat, rng)
            want = has_horizontal_crossing(psi & xi)
            for side in ("left", "right"):
                for stop in ("fixpoint", "early"):
                    assert explore(psi, xi, side=side, stop=stop).crossing == want

    def test_early_queries_subset_of_fixpoint(self):
        lat = RectLattice(4, 3)
        rng = np.random.default_rng(43)
        for _ in range(150):
            psi, xi = self._random_pair(lat, rng)
            full = explore(psi, xi, stop="fixpoint")
            early = explore(psi, xi, stop="early")
            assert not (early.queried & ~full.queried).any()
            assert early.rounds <= full.rounds
            if not full.crossing:
                assert np.array_equal(early.queried, full.queried)
                assert early.rounds == full.rounds

    def test_fixpoint_rounds_is_max_level_plus_one(self):
        lat = RectLattice(3, 2)
        rng = np.random.default_rng(47)
        for _ in range(50):
            psi, xi = self._random_pair(lat, rng)
            tr = explore(psi, xi, stop="fixpoint")
            assert tr.rounds == int(tr.levels.max()) + 1

    def test_queried_edges_touch_reached_vertices(self):
        lat = RectLattice(4, 2)
        rng = np.random.default_rng(53)
        for _ in range(50):
            psi, xi = self._random_pair(lat, rng)
            tr = explore(psi, xi)
            for e in np.flatnonzero(tr.queried):
                la = tr.levels[lat.edge_u[e]]
                lb = tr.levels[lat.edge_v[e]]
                assert max(la, lb) >= 0 and la != lb

    def test_validation(self):
        a = EdgeConfig.from_mask(RectLattice(2, 2), 0)
        b = EdgeConfig.from_mask(RectLattice(2, 1), 0)
        with pytest.raises(ValueError):
            explore(a, b)
        with pytest.raises(ValueError):
            explore(a, a, side="top")
        with pytest.raises(ValueError):
            explore(a, a, stop="never")


class TestEstimators:
    def test_crossing_matches_exact(self):
        lat = RectLattice(2, 2)
        exact = exact_crossing_probability(lat, 0.5)

        def check(seed):
            est = estimate_crossing(lat, 0.5, trials=20000, seed=seed)
            assert abs(est.estimate - exact) <= 4 * est.stderr

        retry_once(check, 711)

    def test_pivotal_mean_matches_exact(self):
        lat = RectLattice(1, 1)

        def check(seed):
            est = estimate_pivotal_mean(lat, 0.5, trials=20000, seed=seed)
            assert abs(est.estimate - 1.0) <= 4 * est.stderr

        retry_once(check, 713)

    def test_near_critical_vs_exact(self):
        lat = RectLattice(2, 2)
        r = 0.58
        exact = exact_flip_probability(lat, r)

        def check(seed):
            res = near_critical_flip_probability(lat, r, trials=20000, seed=seed)
            assert abs(res.estimate - exact) <= 4 * res.stderr
            # comparator identity against its own pivotal estimate
            piv = estimate_pivotal_mean(lat, 0.5, 20000, aux_seed(seed))
            assert abs(res.union_bound - 0.08 * piv.estimate) < 1e-12

        retry_once(check, 715)

    def test_near_critical_below_half(self):
        # densities under 1/2 use the absolute gap
        lat = RectLattice(2, 2)
        res = near_critical_flip_probability(lat, 0.42, trials=2000, seed=99)
        piv = estimate_pivotal_mean(lat, 0.5, 2000, aux_seed(99))
        assert res.estimate >= 0.0
        assert abs(res.union_bound - 0.08 * piv.estimate) < 1e-12
        assert abs(res.union_bound_stderr - 0.08 * piv.stderr) < 1e-12

    def test_noise_correlation_vs_exact(self):
        lat = RectLattice(2, 2)
        f = _crossing_fn(2, 2)
        exact = noise_correlation(f, 0.5, 0.2)

        def check(seed):
            res = noise_correlation_crossing(lat, 0.5, 0.2, trials=40000, seed=seed)
            assert abs(res.estimate - exact) <= 4 * res.stderr

        retry_once(check, 717)

    def test_noise_correlation_eps_boundaries(self):
        lat = RectLattice(2, 2)
        full = noise_correlation_crossing(lat, 0.5, 1.0, trials=4000, seed=5)
        # independent pair: covariance near zero
        assert abs(full.estimate) < 0.05
        none = noise_correlation_crossing(lat, 0.5, 0.0, trials=4000, seed=5)
        # identical pair: sample variance of the crossing indicator
        p_hat = estimate_crossing(lat, 0.5, trials=4000, seed=5).estimate
        assert abs(none.estimate - p_hat * (1 - p_hat)) < 1e-12

    def test_subgraph_noise_at_r_one_matches_plain(self):
        lat = RectLattice(2, 2)
        f = _crossing_fn(2, 2)
        exact = noise_correlation(f, 0.5, 0.2)

        def check(seed):
            res = subgraph_noise_correlation(lat, 1.0, 0.2, n_psi=64, inner=256, seed=seed)
            se = max(res.stderr, 1e-3)
            assert abs(res.estimate - exact) <= 5 * se

        retry_once(check, 719)

    def test_subgraph_noise_validates_r(self):
        lat = RectLattice(2, 2)
        with pytest.raises(ValueError):
            subgraph_noise_correlation(lat, 0.5, 0.1, n_psi=4, inner=4, seed=1)

    def test_two_scale_variance_vs_exact(self):
        lat = RectLattice(2, 2)
        r = 0.75
        f = _crossing_fn(2, 2)
        exact = two_scale_variance(f, TwoScalePair(0.5, r)).two_scale_var

        def check(seed):
            res = two_scale_crossing_variance(lat, r, outer=400, inner=400, seed=seed)
            assert abs(res.estimate - exact) <= 4 * res.stderr

        retry_once(check, 721)

    def test_four_arm_basic(self):
        est = estimate_four_arm(2, trials=2000, seed=3)
        assert 0.0 <= est.estimate <= 1.0
        with pytest.raises(ValueError):
            estimate_four_arm(1, trials=10, seed=3)


class TestRevealment:
    def test_report_invariants(self):
        rep = estimate_revealment(RectLattice(4, 3), r=0.9, trials_psi=16,
                                  trials_xi=64, seed=29)
        lat = RectLattice(4, 3)
        assert rep.edge_probs.min() >= 0.0 and rep.edge_probs.max() <= 1.0
        assert rep.per_psi_delta.shape == (16,)
        assert rep.delta_q50 <= rep.delta_q90 <= rep.delta_max + 1e-12
        assert 0.0 <= rep.crossing_rate <= 1.0
        assert lat.edge_mid_x[rep.far_quarter_edge] >= 3 * lat.n / 4

    def test_right_side_flips_far_quarter(self):
        lat = RectLattice(4, 3)
        rep = estimate_revealment(lat, r=0.9, trials_psi=8, trials_xi=32,
                                  seed=31, side="right")
        assert lat.edge_mid_x[rep.far_quarter_edge] <= lat.n / 4
        assert rep.side == "right"


class TestRsw:
    def test_report_shape(self):
        rep = rsw_two_scale_check(2, 0.9, trials_psi=12, trials_xi=40, seed=37)
        assert rep.low_confidence
        assert 0.0 <= rep.mean_conditional <= 1.0
        assert set(rep.band_fractions) == {0.01, 0.05}
        assert all(0.0 <= v <= 1.0 for v in rep.band_fractions.values())
        assert rep.per_psi.shape == (12,)
        # the wider band never holds more mass than the narrower one
        assert rep.band_fractions[0.05] <= rep.band_fractions[0.01] + 1e-12

    def test_confidence_flag_threshold(self):
        assert rsw_two_scale_check(4, 0.9, trials_psi=4, trials_xi=8, seed=1).low_confidence is False

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            rsw_two_scale_check(0, 0.9, 4, 4, seed=1)
        with pytest.raises(ValueError):
            rsw_two_scale_check(2, 0.5, 4, 4, seed=1)


class TestDeterminism:
    def test_worker_count_is_invisible(self):
        lat = RectLattice(3, 3)
        a = estimate_crossing(lat, 0.5, trials=10000, seed=271, workers=1)
        b = estimate_crossing(lat, 0.5, trials=10000, seed=271, workers=3)
        assert a == b
        ra = two_scale_crossing_variance(lat, 0.75, outer=130, inner=50, seed=271, workers=1)
        rb = two_scale_crossing_variance(lat, 0.75, outer=130, inner=50, seed=271, workers=2)
        assert ra == rb

    def test_same_seed_same_weights(self):
        lat = RectLattice(2, 2)
        w1 = sample_weights(lat, seed=5, trial=9)
        w2 = sample_weights(lat, seed=5, trial=9)
        assert np.array_equal(w1.weights, w2.weights)
        cfg = config_at(w1, 0.5)
        assert np.array_equal(cfg.present, w1.weights <= 0.5)

    def test_aux_seed_is_fixed_stream(self):
        assert aux_seed(5) == kernels.trial_key(5, 0, 3)
        assert aux_seed(5) != 5
