"""Two-scale analysis: observe a bias-r thinning, average over the rest.

Draw psi with bias r and xi with bias q = p/r independently; the product
psi*xi has bias p.  Conditioning f(psi*xi) on the observed coarse scale psi
gives the averaged function

    h(psi) = E[f(psi * xi) | psi],

a function on the cube in its own right, studied under bias r.  Its
coefficients are those of f contracted level by level:

    h_hat_r(S) = rho^(|S|/2) f_hat_p(S),   rho = (p/r) (1-r) / (1-p),

so Var_r(h) = sum over nonempty S of rho^|S| f_hat_p(S)^2, squeezed between
rho^n Var_p(f) and rho Var_p(f).  With r = p / (1 - eps (1-p)) one gets
rho = 1 - eps and Var_r(h) equals the eps-noise covariance of f at bias p.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, stats
from .cube import (
    BoolFn,
    Spectrum,
    check_bias,
    fourier_transform,
    level_weights,
    measure_weights,
    noise_correlation,
    variance,
)


@dataclass(frozen=True)
class TwoScalePair:
    """A pair of biases 0 < p < r <= 1 for the two observation scales."""

    p: float
    r: float

    def __post_init__(self):
        check_bias(self.p)
        r = float(self.r)
        if not 0.0 < r <= 1.0 or not math.isfinite(r):
            raise ValueError(f"outer bias r must lie in (0, 1], got {r}")
        if self.p >= r:
            raise ValueError(f"need p < r, got p={self.p}, r={r}")

    @property
    def q(self) -> float:
        """The inner bias p/r of the unobserved scale."""
        return self.p / self.r

    @property
    def contraction(self) -> float:
        """The per-level factor rho = (p/r)(1-r)/(1-p)."""
        return (self.p / self.r) * (1.0 - self.r) / (1.0 - self.p)


@dataclass
class TwoScaleReport:
    """Variance of the conditional mean, with its spectral decomposition."""

    pair: TwoScalePair
    var_p_f: float
    two_scale_var: float
    upper: float
    lower: float
    per_level: np.ndarray = field(repr=False)


def conditional_mean(f: BoolFn, pair: TwoScalePair) -> BoolFn:
    """Table of h(psi) = E[f(psi*xi) | psi], xi of bias q = p/r, O(n 2^n).

    Coordinate passes are independent: where psi has bit 0 the product bit
    is 0 regardless of xi, where psi has bit 1 the bit is xi's, so the pair
    (f0, f1) maps to (f0, (1-q) f0 + q f1).
    """
    q = pair.q
    a = f.values.copy()
    for i in range(f.n):
        pairs = a.reshape(-1, 2, 1 << i)
        f0 = pairs[:, 0, :].copy()
        f1 = pairs[:, 1, :]
        pairs[:, 1, :] = (1.0 - q) * f0 + q * f1
        a = pairs.reshape(-1)
    return BoolFn(f.n, a)


def conditional_mean_direct(f: BoolFn, pair: TwoScalePair) -> BoolFn:
    """The same table from the defining sum over xi, O(4^n); n <= 10."""
    if f.n > 10:
        raise ValueError("direct conditional mean is capped at 10 coordinates")
    n = f.n
    w = measure_weights(n, pair.q)
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.empty(1 << n)
    for psi in range(1 << n):
        out[psi] = w @ f.values[psi & masks]
    return BoolFn(n, out)


def spectrum_scaling(f: BoolFn, pair: TwoScalePair) -> tuple[Spectrum, np.ndarray, float]:
    """Compare the spectrum of h at bias r against the contracted spectrum of f.

    Returns (spectrum of h, predicted coefficients rho^(|S|/2) f_hat(S),
    max absolute deviation).
    """
    if pair.r >= 1.0:
        raise ValueError("spectral comparison needs r < 1")
    from .cube import popcounts

    spec_h = fourier_transform(conditional_mean(f, pair), pair.r)
    spec_f = fourier_transform(f, pair.p)
    rho = pair.contraction
    half_powers = np.exp(0.5 * np.arange(f.n + 1) * math.log(rho))
    predicted = spec_f.coeffs * half_powers[popcounts(f.n)]
    dev = float(np.abs(spec_h.coeffs - predicted).max())
    return spec_h, predicted, dev


def two_scale_variance(f: BoolFn, pair: TwoScalePair) -> TwoScaleReport:
    """Var_r(h) with its per-level spectral split and the sandwich bounds.

    The value is computed both directly (variance of the averaged table at
    bias r) and spectrally (contracted level weights of f); the two must
    agree to 1e-10, which is re-checked here on every call.
    """
    if pair.r >= 1.0:
        raise ValueError("two-scale variance needs r < 1")
    rho = pair.contraction
    direct = variance(conditional_mean(f, pair), pair.r)
    lw = level_weights(fourier_transform(f, pair.p))
    per_level = lw * np.exp(np.arange(f.n + 1) * math.log(rho))
    per_level[0] = 0.0
    spectral = float(per_level.sum())
    if not stats.close(direct, spectral, rel=1e-10, abs_=1e-12):
        raise ArithmeticError(
            f"two-scale variance self-check failed: direct {direct!r} vs spectral {spectral!r}"
        )
    var_p = variance(f, pair.p)
    return TwoScaleReport(
        pair=pair,
        var_p_f=var_p,
        two_scale_var=direct,
        upper=rho * var_p,
        lower=rho**f.n * var_p,
        per_level=per_level,
    )


def noise_to_subgraph_bias(p: float, eps: float) -> float:
    """The outer bias r = p / (1 - eps (1-p)) matching eps-noise at bias p."""
    p = check_bias(p)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"noise level must lie strictly inside (0, 1), got {eps}")
    return p / (1.0 - eps * (1.0 - p))


def subgraph_bias_to_noise(p: float, r: float) -> float:
    """Inverse map: eps = (1 - p/r) / (1 - p)."""
    p = check_bias(p)
    if not p < r <= 1.0:
        raise ValueError(f"need p < r <= 1, got p={p}, r={r}")
    return (1.0 - p / r) / (1.0 - p)


def noise_two_scale_identity(f: BoolFn, p: float, eps: float) -> tuple[float, float, float]:
    """Noise covariance vs two-scale variance at the matched bias.

    Returns (covariance, Var_r(h), absolute difference); the difference is
    zero in exact arithmetic.
    """
    r = noise_to_subgraph_bias(p, eps)
    lhs = noise_correlation(f, p, eps, mode="spectral")
    rhs = two_scale_variance(f, TwoScalePair(p, r)).two_scale_var
    return lhs, rhs, abs(lhs - rhs)


@dataclass
class TransferRow:
    descriptor: str
    r1_var: float
    r2_var: float
    ratio_bound: float
    low_level_mass: np.ndarray = field(repr=False)


def scale_transfer_report(fs: dict[str, BoolFn], p: float, r1: float, r2: float) -> list[TransferRow]:
    """Compare two outer scales r1, r2 for a family of functions.

    For rho2 <= rho1 every function satisfies
    Var_{r2}(h) <= (rho2/rho1) Var_{r1}(h), since the level-k contraction
    ratio (rho2/rho1)^k is largest at k = 1.  Rows also record the mass of
    the first three levels at bias p, the part that transfers most slowly.
    """
    pair1 = TwoScalePair(p, r1)
    pair2 = TwoScalePair(p, r2)
    rows = []
    for name, f in fs.items():
        rep1 = two_scale_variance(f, pair1)
        rep2 = two_scale_variance(f, pair2)
        lw = level_weights(fourier_transform(f, p))
        top = min(3, f.n)
        rows.append(
            TransferRow(
                descriptor=name,
                r1_var=rep1.two_scale_var,
                r2_var=rep2.two_scale_var,
                ratio_bound=(pair2.contraction / pair1.contraction) * rep1.two_scale_var,
                low_level_mass=np.cumsum(lw[1 : top + 1]),
            )
        )
    return rows


def estimate_two_scale_variance(
    f: BoolFn, p: float, r: float, outer: int, inner: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo Var_r(E[f(psi*xi) | psi]) with the nested bias correction.

    Outer draw t takes psi from stream 0 and an inner block of xi draws
    from stream 1.  Returns (estimate, bootstrap stderr).
    """
    pair = TwoScalePair(p, r)
    q = pair.q
    n = f.n
    bit_values = (np.int64(1) << np.arange(n, dtype=np.int64))
    means = np.empty(outer)
    gvars = np.empty(outer)
    for t in range(outer):
        psi_bits = kernels.fill_uniforms(seed, t, 0, n) <= r
        psi_mask = int(bit_values[psi_bits].sum())
        u = kernels.fill_uniforms(seed, t, 1, inner * n).reshape(inner, n)
        xi_masks = ((u <= q) * bit_values).sum(axis=1)
        vals = f.values[np.int64(psi_mask) & xi_masks]
        means[t] = vals.mean()
        gvars[t] = vals.var(ddof=1)
    est, _, _ = stats.nested_variance(means, gvars, inner)
    se = stats.bootstrap_nested_stderr(means, gvars, inner, seed)
    return est, se
