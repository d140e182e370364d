"""Shared estimator arithmetic: stderr formulas, nested variance, bootstrap.

Every function here works from integer counts or fixed-order arrays, so
results do not depend on scheduling or on which kernel implementation
produced the inputs.
"""

import numpy as np

from . import kernels

# Stream id reserved for bootstrap index draws; far above any inner-draw
# stream an estimator uses.
BOOTSTRAP_STREAM = 1 << 32


def close(a: float, b: float, rel: float = 1e-10, abs_: float = 1e-12) -> bool:
    """|a-b| within the larger of a relative and an absolute tolerance."""
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_)


def binary_mean_stderr(count: int, trials: int) -> tuple[float, float]:
    if trials < 2:
        raise ValueError("stderr needs at least 2 trials")
    mean = count / trials
    var = mean * (1.0 - mean) * trials / (trials - 1)
    return mean, float(np.sqrt(var / trials))


def values_mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError("stderr needs at least 2 trials")
    mean = float(values.mean())
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def covariance_delta(n11: int, nx: int, ny: int, trials: int) -> tuple[float, float]:
    """Estimate Cov(X, Y) = E[XY] - E[X]E[Y] for paired binary samples.

    The stderr comes from the delta method on the joint sample means of
    (XY, X, Y); all moments reduce to the three counts.
    """
    if trials < 2:
        raise ValueError("stderr needs at least 2 trials")
    t = float(trials)
    z, x, y = n11 / t, nx / t, ny / t
    theta = z - x * y
    var_z = z * (1.0 - z)
    var_x = x * (1.0 - x)
    var_y = y * (1.0 - y)
    cov_zx = z * (1.0 - x)
    cov_zy = z * (1.0 - y)
    cov_xy = z - x * y
    var_theta = (
        var_z
        + y * y * var_x
        + x * x * var_y
        - 2.0 * y * cov_zx
        - 2.0 * x * cov_zy
        + 2.0 * x * y * cov_xy
    )
    return theta, float(np.sqrt(max(var_theta, 0.0) / (trials - 1)))


def nested_variance(group_means: np.ndarray, group_vars: np.ndarray, inner: int) -> tuple[float, float, float]:
    """Unbiased estimate of the variance of the group-level means.

    Each group holds `inner` conditionally iid draws.  The between-group
    sample variance of the inner means overshoots the target by (mean
    within-group variance)/inner, so that term is subtracted; a negative
    result is reported as is.

    Returns (estimate, between_group_variance, mean_within_variance).
    """
    group_means = np.asarray(group_means, dtype=np.float64)
    group_vars = np.asarray(group_vars, dtype=np.float64)
    if group_means.size < 2:
        raise ValueError("nested variance needs at least 2 groups")
    if inner < 2:
        raise ValueError("nested variance needs at least 2 inner draws")
    between = float(group_means.var(ddof=1))
    within_mean = float(group_vars.mean())
    return between - within_mean / inner, between, within_mean


def binary_group_vars(counts: np.ndarray, inner: int) -> np.ndarray:
    """Within-group sample variances for binary draws with k successes of m."""
    counts = np.asarray(counts, dtype=np.float64)
    return counts * (inner - counts) / (inner * (inner - 1.0))


def bootstrap_nested_stderr(
    counts_or_means: np.ndarray,
    group_vars: np.ndarray,
    inner: int,
    seed: int,
    replicates: int = 500,
) -> float:
    """Outer-level bootstrap stderr of the nested variance estimate.

    Groups are resampled with replacement; index draws come from the
    counter generator so reruns match exactly.
    """
    means = np.asarray(counts_or_means, dtype=np.float64)
    gvars = np.asarray(group_vars, dtype=np.float64)
    ngroups = means.size
    out = np.empty(replicates)
    for b in range(replicates):
        u = kernels.fill_uniforms(seed, b, BOOTSTRAP_STREAM, ngroups)
        idx = np.minimum((u * ngroups).astype(np.int64), ngroups - 1)
        est, _, _ = nested_variance(means[idx], gvars[idx], inner)
        out[b] = est
    return float(out.std(ddof=1))
