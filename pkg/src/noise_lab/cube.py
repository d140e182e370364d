"""Functions on the discrete cube under a product measure with bias p.

A function f: {0,1}^n -> R is held as a table of 2^n values; entry k is
f at the point whose coordinate i equals bit i of k.  The orthonormal basis
under the bias-p product measure is built from the single-coordinate
characters

    chi_i(omega) = sqrt(p/(1-p))        if omega_i = 0
    chi_i(omega) = -sqrt((1-p)/p)       if omega_i = 1

with chi_S the product over S and chi_empty = 1.  At p = 1/2 these are the
usual +-1 characters.  Coefficients are expectations f_hat(S) = E[f chi_S];
the set S is encoded as a bitmask, aligned with the point masks.

Tables are capped at 24 coordinates by default; callers may pass a smaller
or (explicitly) larger cap.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .lattice import RectLattice

DEFAULT_MAX_BITS = 24


def check_bias(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0 or not math.isfinite(p):
        raise ValueError(f"bias must lie strictly inside (0, 1), got {p}")
    return p


def char_values(p: float) -> tuple[float, float]:
    """(value at bit 0, value at bit 1) of a single-coordinate character."""
    p = check_bias(p)
    return math.sqrt(p / (1.0 - p)), -math.sqrt((1.0 - p) / p)


def _check_bits(n: int, max_bits: int | None = None) -> int:
    cap = DEFAULT_MAX_BITS if max_bits is None else int(max_bits)
    if n < 0:
        raise ValueError(f"coordinate count must be >= 0, got {n}")
    if n > cap:
        raise ValueError(f"{n} coordinates exceed the cap of {cap}")
    return n


def popcounts(n: int) -> np.ndarray:
    """Number of set bits for every mask 0..2^n-1, as uint8."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.uint8)


def measure_weights(n: int, p: float) -> np.ndarray:
    """Probability of each point mask under the bias-p product measure."""
    p = check_bias(p)
    k = np.arange(n + 1)
    per_level = p**k * (1.0 - p) ** (n - k)
    return per_level[popcounts(n)]


@dataclass
class BoolFn:
    """A real-valued function on {0,1}^n held as its full value table."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (1 << self.n,):
            raise ValueError(
                f"table for n={self.n} needs {1 << self.n} entries, got {self.values.shape}"
            )
        if not np.isfinite(self.values).all():
            raise ValueError("table entries must all be finite")

    @cached_property
    def is_boolean(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    @cached_property
    def is_monotone(self) -> bool:
        a = self.values
        for i in range(self.n):
            pairs = a.reshape(-1, 2, 1 << i)
            if np.any(pairs[:, 0, :] > pairs[:, 1, :]):
                return False
        return True

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])


@dataclass
class Spectrum:
    """Coefficients of a function in the bias-p character basis."""

    n: int
    p: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.p = check_bias(self.p)
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (1 << self.n,):
            raise ValueError("one coefficient per subset mask required")


@dataclass
class SpectralSampleDist:
    """The size-biased subset distribution of squared half-bias coefficients."""

    n: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.weights.shape != (1 << self.n,):
            raise ValueError("one weight per subset mask required")

    def mean_size(self) -> float:
        return float(self.weights @ popcounts(self.n).astype(np.float64))

    def marginals(self) -> np.ndarray:
        """P(i in S) for each coordinate i."""
        out = np.empty(self.n)
        for i in range(self.n):
            w = self.weights.reshape(-1, 2, 1 << i)
            out[i] = w[:, 1, :].sum()
        return out


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ValueError(f"{what} must be an integer, got {token!r}") from None


def build_function(descriptor: str, max_bits: int | None = None) -> BoolFn:
    """Build a function table from a descriptor string.

    Forms: dictator:n, parity:n, majority:n (n odd), and:n, or:n, chi:n:p,
    tribes:k:m (m blocks of k coordinates, value 1 when some block is all
    ones), crossing:n:m (left-right crossing indicator of the n-by-m
    rectangle, one coordinate per edge), table:<path> (first token n, then
    2^n values in mask order).
    """
    parts = descriptor.split(":")
    kind = parts[0]
    if kind == "table":
        if len(parts) < 2:
            raise ValueError("table descriptor needs a path: table:<path>")
        return load_table(descriptor.split(":", 1)[1], max_bits=max_bits)

    if kind in ("dictator", "parity", "majority", "and", "or"):
        if len(parts) != 2:
            raise ValueError(f"{kind} descriptor takes one parameter: {kind}:n")
        n = _check_bits(_parse_int(parts[1], "n"), max_bits)
        if n < 1:
            raise ValueError(f"{kind}:{n} needs at least one coordinate")
        masks = np.arange(1 << n, dtype=np.uint32)
        if kind == "dictator":
            vals = (masks & 1).astype(np.float64)
        elif kind == "parity":
            vals = (np.bitwise_count(masks) & 1).astype(np.float64)
        elif kind == "majority":
            if n % 2 == 0:
                raise ValueError(f"majority needs an odd coordinate count, got {n}")
            vals = (np.bitwise_count(masks) > n // 2).astype(np.float64)
        elif kind == "and":
            vals = (masks == (1 << n) - 1).astype(np.float64)
        else:
            vals = (masks != 0).astype(np.float64)
        return BoolFn(n, vals)

    if kind == "chi":
        if len(parts) != 3:
            raise ValueError("chi descriptor takes two parameters: chi:n:p")
        n = _check_bits(_parse_int(parts[1], "n"), max_bits)
        try:
            p = float(parts[2])
        except ValueError:
            raise ValueError(f"chi bias must be a real number, got {parts[2]!r}") from None
        c0, c1 = char_values(p)
        vals = np.ones(1 << n)
        for i in range(n):
            v = vals.reshape(-1, 2, 1 << i)
            v[:, 0, :] *= c0
            v[:, 1, :] *= c1
        return BoolFn(n, vals)

    if kind == "tribes":
        if len(parts) != 3:
            raise ValueError("tribes descriptor takes two parameters: tribes:k:m")
        k = _parse_int(parts[1], "tribe size k")
        m = _parse_int(parts[2], "tribe count m")
        if k < 1 or m < 1:
            raise ValueError(f"tribes:{k}:{m} needs k >= 1 and m >= 1")
        n = _check_bits(k * m, max_bits)
        masks = np.arange(1 << n, dtype=np.uint32)
        bits = (masks[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
        vals = bits.reshape(-1, m, k).all(axis=2).any(axis=1).astype(np.float64)
        return BoolFn(n, vals)

    if kind == "crossing":
        if len(parts) != 3:
            raise ValueError("crossing descriptor takes two parameters: crossing:n:m")
        lat = RectLattice(_parse_int(parts[1], "n"), _parse_int(parts[2], "m"))
        _check_bits(lat.edge_count, max_bits)
        table = kernels.crossing_table(
            lat.edge_u, lat.edge_v, lat.vertex_count, lat.left_ids, lat.right_ids, lat.edge_count
        )
        return BoolFn(lat.edge_count, table.astype(np.float64))

    raise ValueError(f"unknown function descriptor kind {kind!r}")


def load_table(path: str, max_bits: int | None = None) -> BoolFn:
    """Read a value table: first token the coordinate count, then 2^n reals."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"table file {path!r} is empty")
    n = _check_bits(_parse_int(tokens[0], "coordinate count"), max_bits)
    vals = tokens[1:]
    if len(vals) != 1 << n:
        raise ValueError(
            f"table file {path!r} holds {len(vals)} values, expected {1 << n} for n={n}"
        )
    try:
        arr = np.array([float(v) for v in vals])
    except ValueError as exc:
        raise ValueError(f"table file {path!r} holds a non-numeric value: {exc}") from None
    if not np.isfinite(arr).all():
        raise ValueError(f"table file {path!r} holds non-finite values")
    return BoolFn(n, arr)


def biased_char(omega: int, subset: int, p: float) -> float:
    """chi_S at one point, the product of single-coordinate characters over S."""
    c0, c1 = char_values(p)
    out = 1.0
    s = subset
    while s:
        low = s & -s
        out *= c1 if omega & low else c0
        s ^= low
    return out


def expectation(f: BoolFn, p: float) -> float:
    return float(measure_weights(f.n, p) @ f.values)


def variance(f: BoolFn, p: float) -> float:
    """Var_p(f), computed directly from the measure weights."""
    w = measure_weights(f.n, p)
    mean = float(w @ f.values)
    return float(w @ (f.values - mean) ** 2)


def fourier_transform(f: BoolFn, p: float) -> Spectrum:
    """All coefficients at bias p by the per-coordinate butterfly, O(n 2^n).

    One coordinate pass maps the pair (f0, f1) = (value at bit 0, at bit 1)
    to ((1-p) f0 + p f1, sqrt(p(1-p)) (f0 - f1)): the first entry averages
    the bit out, the second is the coefficient against chi_i.
    """
    p = check_bias(p)
    s = math.sqrt(p * (1.0 - p))
    a = f.values.copy()
    for i in range(f.n):
        pairs = a.reshape(-1, 2, 1 << i)
        f0 = pairs[:, 0, :].copy()
        f1 = pairs[:, 1, :]
        pairs[:, 0, :] = (1.0 - p) * f0 + p * f1
        pairs[:, 1, :] = s * (f0 - f1)
        a = pairs.reshape(-1)
    return Spectrum(f.n, p, a)


def fourier_transform_direct(f: BoolFn, p: float) -> Spectrum:
    """Coefficients straight from the definition, O(4^n); capped at n <= 10."""
    if f.n > 10:
        raise ValueError("direct transform is capped at 10 coordinates")
    p = check_bias(p)
    n = f.n
    size = 1 << n
    c0, c1 = char_values(p)
    bits = (np.arange(size, dtype=np.uint32)[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    per_bit = np.where(bits == 1, c1, c0)
    wf = measure_weights(n, p) * f.values
    coeffs = np.empty(size)
    for subset in range(size):
        chi = np.ones(size)
        s = subset
        while s:
            low = s & -s
            chi = chi * per_bit[:, low.bit_length() - 1]
            s ^= low
        coeffs[subset] = wf @ chi
    return Spectrum(n, p, coeffs)


def inverse_transform(spec: Spectrum) -> BoolFn:
    """Rebuild the value table from coefficients, the inverse butterfly."""
    p = spec.p
    c0, c1 = char_values(p)
    a = spec.coeffs.copy()
    for i in range(spec.n):
        pairs = a.reshape(-1, 2, 1 << i)
        g0 = pairs[:, 0, :].copy()
        g1 = pairs[:, 1, :]
        pairs[:, 0, :] = g0 + c0 * g1
        pairs[:, 1, :] = g0 + c1 * g1
        a = pairs.reshape(-1)
    return BoolFn(spec.n, a)


def level_weights(spec: Spectrum) -> np.ndarray:
    """Total squared coefficient mass per subset size, length n+1."""
    return np.bincount(
        popcounts(spec.n), weights=spec.coeffs**2, minlength=spec.n + 1
    )


def noise_correlation(f: BoolFn, p: float, eps: float, mode: str = "spectral") -> float:
    """Cov(f(omega), f(omega^eps)) under bias p and eps-re-sampling noise.

    omega^eps re-samples each coordinate independently with probability eps.
    The spectral mode evaluates sum over nonempty S of f_hat(S)^2 (1-eps)^|S|;
    the direct mode sums over all (point, re-sampled point) pairs with the
    per-bit transition kernel, O(4^n), capped at n <= 12.
    """
    p = check_bias(p)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise level eps={eps} outside [0, 1]")
    if mode == "spectral":
        lw = level_weights(fourier_transform(f, p))
        factors = (1.0 - eps) ** np.arange(f.n + 1)
        return float(lw[1:] @ factors[1:])
    if mode != "direct":
        raise ValueError(f"unknown noise-correlation mode {mode!r}")
    if f.n > 12:
        raise ValueError("direct noise correlation is capped at 12 coordinates")
    n = f.n
    size = 1 << n
    # T[a, b] = P(new bit = b | old bit = a) under eps-re-sampling at bias p.
    stay0 = 1.0 - eps + eps * (1.0 - p)
    stay1 = 1.0 - eps + eps * p
    bits = (np.arange(size, dtype=np.uint32)[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    from0 = np.where(bits == 1, eps * p, stay0)
    from1 = np.where(bits == 1, stay1, eps * (1.0 - p))
    w = measure_weights(n, p)
    acc = 0.0
    for omega in range(size):
        row = np.ones(size)
        for i in range(n):
            row = row * (from1[:, i] if (omega >> i) & 1 else from0[:, i])
        acc += w[omega] * f.values[omega] * (row @ f.values)
    mean = float(w @ f.values)
    return float(acc - mean * mean)


def pivotal_set(f: BoolFn, omega: int) -> int:
    """Bitmask of coordinates whose flip changes f at the point omega."""
    if not f.is_boolean:
        raise ValueError("pivotal sets are defined for {0,1}-valued functions")
    if not 0 <= omega < (1 << f.n):
        raise ValueError(f"point {omega} outside the {f.n}-coordinate cube")
    out = 0
    base = f.values[omega]
    for i in range(f.n):
        if f.values[omega ^ (1 << i)] != base:
            out |= 1 << i
    return out


def pivotal_marginals(f: BoolFn, p: float = 0.5) -> np.ndarray:
    """P_p(coordinate i is pivotal) for each i."""
    if not f.is_boolean:
        raise ValueError("pivotal sets are defined for {0,1}-valued functions")
    w = measure_weights(f.n, p)
    out = np.empty(f.n)
    for i in range(f.n):
        vals = f.values.reshape(-1, 2, 1 << i)
        ws = w.reshape(-1, 2, 1 << i)
        differs = vals[:, 0, :] != vals[:, 1, :]
        out[i] = float((ws[:, 0, :] + ws[:, 1, :])[differs].sum())
    return out


def expected_pivotal_count(f: BoolFn, p: float) -> float:
    """E_p of the pivotal-set size."""
    return float(pivotal_marginals(f, p).sum())


def spectral_sample(f: BoolFn) -> SpectralSampleDist:
    """Subset distribution proportional to squared half-bias coefficients.

    P(S) = f_hat(S)^2 / E[f^2] at p = 1/2; the empty set keeps its mass.
    """
    coeffs = fourier_transform(f, 0.5).coeffs
    total = float(coeffs @ coeffs)
    if total == 0.0:
        raise ValueError("the zero function carries no spectral sample")
    return SpectralSampleDist(f.n, coeffs**2 / total)
