"""Bond percolation on rectangles: crossings, pivotal edges, estimators.

Each edge of the rectangle carries an independent uniform weight from the
counter generator; the configuration at density p keeps the edges whose
weight is at most p, so configurations at increasing p are nested along a
single coupled draw.  Estimators consume trial ranges in fixed blocks and
reduce integer counts in block order, which makes every result a pure
function of (parameters, seed) regardless of the worker count or kernel
implementation.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels, stats
from .cube import measure_weights
from .lattice import EdgeConfig, RectLattice, WeightedConfig

TRIAL_BLOCK = 8192
OUTER_BLOCK = 64

# Stream used to decorrelate auxiliary estimates (the pivotal-mean run
# inside the near-critical comparator) from the primary trial stream.
AUX_STREAM = 3


def aux_seed(seed: int) -> int:
    """Seed for auxiliary estimates, independent of the primary streams."""
    return kernels.trial_key(seed, 0, AUX_STREAM)


def _kernel_call(args):
    return getattr(kernels, args[0])(*args[1:])


def _run_blocks(tasks: list[tuple], workers: int) -> list:
    """Run kernel task tuples, preserving order; fork out if workers > 1."""
    if workers <= 1 or len(tasks) <= 1:
        return [_kernel_call(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_kernel_call, tasks))


def _blocks(total: int, block: int) -> list[tuple[int, int]]:
    return [(t0, min(t0 + block, total)) for t0 in range(0, total, block)]


def sample_weights(lat: RectLattice, seed: int, trial: int) -> WeightedConfig:
    """Edge weights of one trial (stream 0 of the counter generator)."""
    w = kernels.fill_uniforms(seed, trial, 0, lat.edge_count)
    return WeightedConfig(lat, w, seed=seed, trial=trial)


def config_at(weighted: WeightedConfig, p: float) -> EdgeConfig:
    return weighted.config_at(p)


def _u8(cfg: EdgeConfig) -> np.ndarray:
    return cfg.present.astype(np.uint8)


def has_horizontal_crossing(cfg: EdgeConfig) -> bool:
    lat = cfg.lattice
    return kernels.connected(
        _u8(cfg), lat.edge_u, lat.edge_v, lat.vertex_count, lat.left_ids, lat.right_ids
    )


def has_vertical_crossing(cfg: EdgeConfig) -> bool:
    lat = cfg.lattice
    return kernels.connected(
        _u8(cfg), lat.edge_u, lat.edge_v, lat.vertex_count, lat.bottom_ids, lat.top_ids
    )


def _dual_connected(cfg: EdgeConfig, dual) -> bool:
    du, dv, ndv, a_star, b_star = dual
    has_dual = du >= 0
    dual_present = ((~cfg.present) & has_dual).astype(np.uint8)
    return kernels.connected(
        dual_present,
        np.where(has_dual, du, 0).astype(np.int32),
        np.where(has_dual, dv, 0).astype(np.int32),
        ndv,
        np.asarray([a_star], dtype=np.int32),
        np.asarray([b_star], dtype=np.int32),
    )


def has_dual_horizontal_crossing(cfg: EdgeConfig) -> bool:
    """Left-right path of open dual edges (duals of absent primal edges)."""
    return _dual_connected(cfg, cfg.lattice.dual_lr)


def has_dual_vertical_crossing(cfg: EdgeConfig) -> bool:
    """Bottom-top path of open dual edges; the complement of the primal
    left-right crossing on every config."""
    return _dual_connected(cfg, cfg.lattice.dual_tb)


def pivotal_edges(cfg: EdgeConfig, method: str = "fast") -> np.ndarray:
    """Boolean mask of edges whose flip changes the left-right crossing.

    The baseline re-checks the crossing with each edge flipped.  The fast
    method classifies via reachable sets (and the dual graph when a
    crossing is present); the two agree on every config.
    """
    lat = cfg.lattice
    if method == "baseline":
        base = has_horizontal_crossing(cfg)
        out = np.zeros(lat.edge_count, dtype=bool)
        for e in range(lat.edge_count):
            flipped = cfg.present.copy()
            flipped[e] = ~flipped[e]
            out[e] = has_horizontal_crossing(EdgeConfig(lat, flipped)) != base
        return out
    if method != "fast":
        raise ValueError(f"unknown pivotal method {method!r}")
    du, dv, ndv, bstar, tstar = lat.dual_tb
    mask = kernels.pivotal_mask(
        _u8(cfg),
        lat.edge_u,
        lat.edge_v,
        lat.vertex_count,
        lat.left_ids,
        lat.right_ids,
        du,
        dv,
        ndv,
        bstar,
        tstar,
    )
    return mask.astype(bool)


@lru_cache(maxsize=8)
def _cached_crossing_table(n: int, m: int) -> np.ndarray:
    lat = RectLattice(n, m)
    return kernels.crossing_table(
        lat.edge_u, lat.edge_v, lat.vertex_count, lat.left_ids, lat.right_ids, lat.edge_count
    )


def exact_crossing_probability(lat: RectLattice, p: float) -> float:
    """Exhaustive left-right crossing probability; needs edge_count <= 24."""
    if lat.edge_count > 24:
        raise ValueError(
            f"exact enumeration is capped at 24 edges, {lat!r} has {lat.edge_count}"
        )
    table = _cached_crossing_table(lat.n, lat.m)
    if p == 0.0:
        return float(table[0])
    if p == 1.0:
        return float(table[-1])
    return float(measure_weights(lat.edge_count, p) @ table)


def exact_flip_probability(lat: RectLattice, r_n: float) -> float:
    """Exact P(crossing at 1/2 differs from crossing at r_n) under coupling.

    Nesting makes the flip event equal to crossing at the larger density
    minus crossing at the smaller, so two exact crossing probabilities
    suffice.  Capped at 24 edges like exact_crossing_probability.
    """
    lo, hi = min(0.5, r_n), max(0.5, r_n)
    return exact_crossing_probability(lat, hi) - exact_crossing_probability(lat, lo)


def exact_pivotal_mean(lat: RectLattice, p: float) -> float:
    """Exhaustive E_p of the pivotal-edge count; needs edge_count <= 16."""
    if lat.edge_count > 16:
        raise ValueError("exact pivotal enumeration is capped at 16 edges")
    du, dv, ndv, bstar, tstar = lat.dual_tb
    w = measure_weights(lat.edge_count, p)
    total = 0.0
    for mask in range(1 << lat.edge_count):
        cfg = EdgeConfig.from_mask(lat, mask)
        piv = kernels.pivotal_mask(
            _u8(cfg), lat.edge_u, lat.edge_v, lat.vertex_count, lat.left_ids,
            lat.right_ids, du, dv, ndv, bstar, tstar,
        )
        total += w[mask] * int(piv.sum())
    return total


@dataclass
class ExplorationTrace:
    """Result of the growth exploration from one side of the rectangle."""

    crossing: bool
    queried: np.ndarray = field(repr=False)
    rounds: int
    levels: np.ndarray = field(repr=False)


def explore(psi: EdgeConfig, xi: EdgeConfig, side: str = "left", stop: str = "fixpoint") -> ExplorationTrace:
    """Grow the explored set from one full side through psi*xi-present edges.

    Round k queries every edge with exactly one endpoint inside the current
    set and admits the outside endpoints of the open ones.  With
    stop="fixpoint" the growth runs until nothing new joins; with
    stop="early" it stops at the end of the first round that reaches the
    opposite side.  The crossing flag matches the connectivity oracle in
    both modes.
    """
    if psi.lattice != xi.lattice:
        raise ValueError("psi and xi live on different lattices")
    lat = psi.lattice
    if side == "left":
        src, dst = lat.left_ids, lat.right_ids
    elif side == "right":
        src, dst = lat.right_ids, lat.left_ids
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if stop not in ("fixpoint", "early"):
        raise ValueError(f"stop must be 'fixpoint' or 'early', got {stop!r}")
    present = (psi.present & xi.present).astype(np.uint8)
    indptr, nbr_v, nbr_e = lat.adjacency
    levels = kernels.bfs_levels(
        present, lat.edge_u, lat.edge_v, indptr, nbr_v, nbr_e, lat.vertex_count, src
    )
    reached = levels[dst][levels[dst] >= 0]
    crossing = reached.size > 0
    if stop == "early" and crossing:
        k_star = int(reached.min())
        queried = kernels.queried_edges(levels, lat.edge_u, lat.edge_v, max_round=k_star)
        rounds = k_star
    else:
        queried = kernels.queried_edges(levels, lat.edge_u, lat.edge_v)
        rounds = int(levels.max()) + 1
    return ExplorationTrace(
        crossing=crossing, queried=queried.astype(bool), rounds=rounds, levels=levels
    )


@dataclass
class MeanEstimate:
    estimate: float
    stderr: float
    trials: int


def estimate_crossing(lat: RectLattice, p: float, trials: int, seed: int, workers: int = 1) -> MeanEstimate:
    """Monte Carlo left-right crossing probability at density p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density p={p} outside [0, 1]")
    tasks = [
        ("count_crossings", seed, t0, t1, 0, p, lat.edge_u, lat.edge_v,
         lat.vertex_count, lat.left_ids, lat.right_ids)
        for t0, t1 in _blocks(trials, TRIAL_BLOCK)
    ]
    count = sum(_run_blocks(tasks, workers))
    mean, se = stats.binary_mean_stderr(count, trials)
    return MeanEstimate(mean, se, trials)


def estimate_pivotal_mean(lat: RectLattice, p: float, trials: int, seed: int, workers: int = 1) -> MeanEstimate:
    """Monte Carlo E_p of the pivotal-edge count."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density p={p} outside [0, 1]")
    du, dv, ndv, bstar, tstar = lat.dual_tb
    tasks = [
        ("pivotal_sizes", seed, t0, t1, p, lat.edge_u, lat.edge_v, lat.vertex_count,
         lat.left_ids, lat.right_ids, du, dv, ndv, bstar, tstar)
        for t0, t1 in _blocks(trials, TRIAL_BLOCK)
    ]
    sizes = np.concatenate(_run_blocks(tasks, workers))
    mean, se = stats.values_mean_stderr(sizes)
    return MeanEstimate(mean, se, trials)


def estimate_four_arm(n: int, trials: int, seed: int, workers: int = 1) -> MeanEstimate:
    """P at density 1/2 that the central edge of the 2n-by-2n square is
    pivotal for its left-right crossing."""
    if n < 2:
        raise ValueError(f"four-arm estimation needs n >= 2, got {n}")
    lat = RectLattice(2 * n, 2 * n)
    du, dv, ndv, bstar, tstar = lat.dual_tb
    central = lat.central_edge()
    tasks = [
        ("central_pivotal_count", seed, t0, t1, 0.5, central, lat.edge_u, lat.edge_v,
         lat.vertex_count, lat.left_ids, lat.right_ids, du, dv, ndv, bstar, tstar)
        for t0, t1 in _blocks(trials, TRIAL_BLOCK)
    ]
    count = sum(_run_blocks(tasks, workers))
    mean, se = stats.binary_mean_stderr(count, trials)
    return MeanEstimate(mean, se, trials)


@dataclass
class NearCriticalResult:
    estimate: float
    stderr: float
    union_bound: float
    union_bound_stderr: float
    trials: int


def near_critical_flip_probability(
    lat: RectLattice,
    r_n: float,
    trials: int,
    seed: int,
    workers: int = 1,
    pivotal_mean: MeanEstimate | None = None,
) -> NearCriticalResult:
    """P(crossing at 1/2 differs from crossing at r_n) on coupled weights.

    The comparator |r_n - 1/2| * E|pivotal| (estimated at bias 1/2 on the
    decorrelated auxiliary seed) bounds the flip probability from above.
    A grid of r_n values can pass the same precomputed pivotal_mean, which
    must come from estimate_pivotal_mean(lat, 0.5, trials, aux_seed(seed)).
    """
    if not 0.0 <= r_n <= 1.0:
        raise ValueError(f"density r_n={r_n} outside [0, 1]")
    lo, hi = min(0.5, r_n), max(0.5, r_n)
    tasks = [
        ("flip_counts", seed, t0, t1, lo, hi, lat.edge_u, lat.edge_v,
         lat.vertex_count, lat.left_ids, lat.right_ids)
        for t0, t1 in _blocks(trials, TRIAL_BLOCK)
    ]
    flips = sum(r[0] for r in _run_blocks(tasks, workers))
    mean, se = stats.binary_mean_stderr(flips, trials)
    if pivotal_mean is None:
        pivotal_mean = estimate_pivotal_mean(lat, 0.5, trials, aux_seed(seed), workers=workers)
    gap = abs(r_n - 0.5)
    return NearCriticalResult(
        estimate=mean,
        stderr=se,
        union_bound=gap * pivotal_mean.estimate,
        union_bound_stderr=gap * pivotal_mean.stderr,
        trials=trials,
    )


def noise_correlation_crossing(
    lat: RectLattice, p: float, eps: float, trials: int, seed: int, workers: int = 1
) -> MeanEstimate:
    """Monte Carlo Cov(crossing(omega), crossing(omega^eps)) at density p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"density p={p} outside (0, 1)")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise level eps={eps} outside [0, 1]")
    tasks = [
        ("noise_pair_counts", seed, t0, t1, p, eps, lat.edge_u, lat.edge_v,
         lat.vertex_count, lat.left_ids, lat.right_ids)
        for t0, t1 in _blocks(trials, TRIAL_BLOCK)
    ]
    parts = _run_blocks(tasks, workers)
    n11 = sum(r[0] for r in parts)
    nx = sum(r[1] for r in parts)
    ny = sum(r[2] for r in parts)
    theta, se = stats.covariance_delta(n11, nx, ny, trials)
    return MeanEstimate(theta, se, trials)


@dataclass
class SubgraphNoiseResult:
    estimate: float
    stderr: float
    per_psi: np.ndarray = field(repr=False)


def subgraph_noise_correlation(
    lat: RectLattice, r: float, eps: float, n_psi: int, inner: int, seed: int, workers: int = 1
) -> SubgraphNoiseResult:
    """Noise covariance of the crossing on an observed bias-r subgraph.

    Conditions on n_psi sampled subgraphs psi; within each, inner paired
    draws (xi, xi^eps) at the subgraph-critical bias 1/(2r) estimate the
    conditional covariance.  Reports the average over psi with its
    across-psi stderr.
    """
    if not 0.5 < r <= 1.0:
        raise ValueError(f"subgraph bias needs r in (1/2, 1], got {r}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise level eps={eps} outside [0, 1]")
    q = 0.5 / r
    tasks = [
        ("subgraph_noise_counts", seed, t0, t1, inner, r, q, eps, lat.edge_u,
         lat.edge_v, lat.vertex_count, lat.left_ids, lat.right_ids)
        for t0, t1 in _blocks(n_psi, OUTER_BLOCK)
    ]
    counts = np.concatenate(_run_blocks(tasks, workers), axis=0).astype(np.float64)
    per_psi = counts[:, 0] / inner - (counts[:, 1] / inner) * (counts[:, 2] / inner)
    mean, se = stats.values_mean_stderr(per_psi)
    return SubgraphNoiseResult(mean, se, per_psi)


@dataclass
class NestedVarianceResult:
    estimate: float
    stderr: float
    between: float
    within_mean: float
    outer: int
    inner: int


def two_scale_crossing_variance(
    lat: RectLattice, r: float, outer: int, inner: int, seed: int, workers: int = 1
) -> NestedVarianceResult:
    """Variance over psi of P(crossing of psi*xi | psi) at inner bias 1/(2r).

    The product configuration has density 1/2.  Between-group variance of
    the inner means minus (mean within-group variance)/inner corrects the
    inner sampling noise; a negative corrected value is reported as is.
    Stderr comes from an outer-level bootstrap.
    """
    if not 0.5 < r < 1.0:
        raise ValueError(f"observed bias needs r in (1/2, 1), got {r}")
    q = 0.5 / r
    tasks = [
        ("inner_crossing_counts", seed, t0, t1, inner, r, q, lat.edge_u, lat.edge_v,
         lat.vertex_count, lat.left_ids, lat.right_ids)
        for t0, t1 in _blocks(outer, OUTER_BLOCK)
    ]
    counts = np.concatenate(_run_blocks(tasks, workers))
    means = counts / inner
    gvars = stats.binary_group_vars(counts, inner)
    est, between, within = stats.nested_variance(means, gvars, inner)
    se = stats.bootstrap_nested_stderr(means, gvars, inner, seed)
    return NestedVarianceResult(est, se, between, within, outer, inner)


@dataclass
class RevealmentReport:
    """Per-edge query rates of the growth exploration, with far-side maxima."""

    side: str
    r: float
    trials_psi: int
    trials_xi: int
    edge_probs: np.ndarray = field(repr=False)
    per_psi_delta: np.ndarray = field(repr=False)
    delta_mean: float
    delta_max: float
    delta_q50: float
    delta_q90: float
    far_quarter_max: float
    far_quarter_stderr: float
    far_quarter_edge: int
    crossing_rate: float


def estimate_revealment(
    lat: RectLattice,
    r: float,
    trials_psi: int,
    trials_xi: int,
    seed: int,
    side: str = "left",
    workers: int = 1,
) -> RevealmentReport:
    """Query probabilities of the exploration on psi*xi, xi at bias 1/(2r).

    For each sampled psi the exploration runs to its fixpoint over trials_xi
    inner draws; the conditional query probability of an edge is its query
    rate within one psi.  delta is the max conditional rate over the half of
    the rectangle opposite the start side (edges with midpoint on that half;
    the centre column belongs to both halves).  far_quarter_* summarises the
    quarter farthest from the start.
    """
    if not 0.5 < r <= 1.0:
        raise ValueError(f"observed bias needs r in (1/2, 1], got {r}")
    if side == "left":
        src, dst = lat.left_ids, lat.right_ids
        half_mask = lat.edge_mid_x >= lat.n / 2.0
        quarter_mask = lat.edge_mid_x >= 3.0 * lat.n / 4.0
    elif side == "right":
        src, dst = lat.right_ids, lat.left_ids
        half_mask = lat.edge_mid_x <= lat.n / 2.0
        quarter_mask = lat.edge_mid_x <= lat.n / 4.0
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    q = 0.5 / r
    indptr, nbr_v, nbr_e = lat.adjacency
    tasks = [
        ("revealment_counts", seed, t, 0, trials_xi, r, q, lat.edge_u, lat.edge_v,
         indptr, nbr_v, nbr_e, lat.vertex_count, src, dst)
        for t in range(trials_psi)
    ]
    parts = _run_blocks(tasks, workers)
    per_psi_counts = np.stack([p[0] for p in parts]).astype(np.float64)
    crossings = sum(p[1] for p in parts)
    per_psi_probs = per_psi_counts / trials_xi
    edge_probs = per_psi_probs.mean(axis=0)
    per_psi_delta = per_psi_probs[:, half_mask].max(axis=1)
    far_probs = edge_probs.copy()
    far_probs[~quarter_mask] = -1.0
    far_edge = int(np.argmax(far_probs))
    far_samples = per_psi_probs[:, far_edge]
    far_mean, far_se = stats.values_mean_stderr(far_samples)
    return RevealmentReport(
        side=side,
        r=r,
        trials_psi=trials_psi,
        trials_xi=trials_xi,
        edge_probs=edge_probs,
        per_psi_delta=per_psi_delta,
        delta_mean=float(per_psi_delta.mean()),
        delta_max=float(per_psi_delta.max()),
        delta_q50=float(np.quantile(per_psi_delta, 0.5)),
        delta_q90=float(np.quantile(per_psi_delta, 0.9)),
        far_quarter_max=far_mean,
        far_quarter_stderr=far_se,
        far_quarter_edge=far_edge,
        crossing_rate=crossings / (trials_psi * trials_xi),
    )


@dataclass
class RswReport:
    n: int
    r: float
    mean_conditional: float
    band_fractions: dict[float, float]
    per_psi: np.ndarray = field(repr=False)
    low_confidence: bool


def rsw_two_scale_check(
    n: int, r: float, trials_psi: int, trials_xi: int, seed: int, workers: int = 1
) -> RswReport:
    """Conditional dual-crossing probabilities of the 3n-by-n rectangle.

    For each observed psi at bias r, estimates the conditional probability
    of a left-right dual crossing of psi*xi at inner bias 1/(2r), and
    reports the fraction of psi whose estimate stays inside (c, 1-c) for
    c in {0.01, 0.05}.  Small rectangles are flagged low-confidence.
    """
    if n < 1:
        raise ValueError(f"rectangle scale must be >= 1, got {n}")
    if not 0.5 < r <= 1.0:
        raise ValueError(f"observed bias needs r in (1/2, 1], got {r}")
    lat = RectLattice(3 * n, n)
    q = 0.5 / r
    du, dv, ndv, lstar, rstar = lat.dual_lr
    has_dual = (du >= 0).astype(np.uint8)
    tasks = [
        ("inner_dual_counts", seed, t0, t1, trials_xi, r, q, lat.edge_count,
         du, dv, has_dual, ndv, lstar, rstar)
        for t0, t1 in _blocks(trials_psi, OUTER_BLOCK)
    ]
    counts = np.concatenate(_run_blocks(tasks, workers))
    per_psi = counts / trials_xi
    bands = {
        c: float(((per_psi > c) & (per_psi < 1.0 - c)).mean()) for c in (0.01, 0.05)
    }
    return RswReport(
        n=n,
        r=r,
        mean_conditional=float(per_psi.mean()),
        band_fractions=bands,
        per_psi=per_psi,
        low_confidence=n < 4,
    )
