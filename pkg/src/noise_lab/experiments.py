"""Config-driven experiment runner with CSV output.

Configs are flat ``key = value`` lines (comma lists for grids, ``#``
comments).  Every run is keyed by a mandatory seed; rows are emitted in
grid order and all randomness flows through the counter generator, so the
CSV bytes depend only on (config, seed), never on the worker count.  A
failing grid point produces an ERROR row and the sweep continues.

Grid points of one run share the seed on purpose: a run over an r-grid
evaluates every r on the same coupled weight draws, which preserves exact
monotone relations (for example, near-critical flip counts are literally
nested across the grid).
"""

import csv
import io
import math
import time
from dataclasses import dataclass, field

from . import stats
from .cube import build_function, fourier_transform, noise_correlation, variance
from .lattice import RectLattice
from .percolation import (
    aux_seed,
    estimate_crossing,
    estimate_four_arm,
    estimate_pivotal_mean,
    estimate_revealment,
    exact_crossing_probability,
    exact_flip_probability,
    exact_pivotal_mean,
    near_critical_flip_probability,
    noise_correlation_crossing,
    rsw_two_scale_check,
    subgraph_noise_correlation,
    two_scale_crossing_variance,
)
from .two_scale import TwoScalePair, noise_two_scale_identity, two_scale_variance

KINDS = (
    "spectrum",
    "two-scale",
    "ns-check",
    "perc-crossing",
    "perc-pivotal",
    "perc-revealment",
    "perc-near-critical",
    "perc-two-scale",
    "perc-noise",
    "rsw-check",
    "four-arm",
)

CSV_HEADER = ("experiment", "params", "estimate", "stderr", "exact", "elapsed_s")

# Exhaustive cross-check values are filled in automatically only up to this
# many edges; the 12-edge 2x2 rectangle is the canonical exact instance and
# stays instant even on the fallback kernels.
EXACT_EDGE_CAP = 12

_GLOBAL_KEYS = {"kind", "seed", "workers", "out", "allow_aspect"}
_GEOM_KINDS = {
    "perc-crossing",
    "perc-pivotal",
    "perc-revealment",
    "perc-near-critical",
    "perc-two-scale",
    "perc-noise",
}
_KIND_KEYS = {
    "spectrum": {"function", "p"},
    "two-scale": {"function", "p", "r"},
    "ns-check": {"function", "p", "eps"},
    "perc-crossing": {"lattice", "n", "p", "trials"},
    "perc-pivotal": {"lattice", "n", "p", "trials"},
    "perc-noise": {"lattice", "n", "p", "r", "eps", "trials", "outer", "inner"},
    "perc-near-critical": {"lattice", "n", "r", "trials"},
    "perc-two-scale": {"lattice", "n", "r", "outer", "inner"},
    "perc-revealment": {"lattice", "n", "r", "outer", "inner", "side"},
    "rsw-check": {"n", "r", "outer", "inner"},
    "four-arm": {"n", "trials"},
}
_ASPECT_BAND = 3


class ConfigError(Exception):
    """Invalid experiment config; carries one message per problem."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    function: str | None = None
    lattice: tuple[int, int] | None = None
    sizes: tuple[int, ...] | None = None
    p: tuple[float, ...] | None = None
    r: tuple[float, ...] | None = None
    eps: tuple[float, ...] | None = None
    trials: int | None = None
    outer: int | None = None
    inner: int | None = None
    side: str = "left"
    workers: int = 1
    out: str | None = None
    allow_aspect: bool = False


@dataclass
class Row:
    """One CSV row; either an estimate with errors bars or an error marker."""

    experiment: str
    params: str
    estimate: float | None = None
    stderr: float | None = None
    exact: float | None = None
    elapsed: float | None = None
    error: str | None = None


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.12g" % (x + 0.0)
    return str(x)


def _params(*pairs) -> str:
    return ";".join(f"{k}={_fmt(v)}" for k, v in pairs)


def _errmsg(exc: BaseException) -> str:
    return " ".join(f"{type(exc).__name__}: {exc}".split())


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config; raises ConfigError listing every problem."""
    errors: list[str] = []
    bad_keys: set[str] = set()
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not eq or not key:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if key in entries:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        entries[key] = (val, lineno)

    given = set(entries)

    def take(key):
        return entries.pop(key, None)

    def complain(key, message):
        bad_keys.add(key)
        errors.append(message)

    def want_float_list(key, lo, hi):
        got = take(key)
        if got is None:
            return None
        val, lineno = got
        out = []
        for part in val.split(","):
            part = part.strip()
            try:
                x = float(part)
            except ValueError:
                complain(key, f"line {lineno}: {key} value {part!r} is not a number")
                return None
            if not math.isfinite(x) or not lo <= x <= hi:
                complain(key, f"line {lineno}: {key}={part} outside [{_fmt(lo)}, {_fmt(hi)}]")
                return None
            out.append(x)
        if not out:
            complain(key, f"line {lineno}: {key} needs at least one value")
            return None
        return tuple(out)

    def want_int(key, lo, hi=None):
        got = take(key)
        if got is None:
            return None
        val, lineno = got
        try:
            x = int(val)
        except ValueError:
            complain(key, f"line {lineno}: {key} value {val!r} is not an integer")
            return None
        if x < lo or (hi is not None and x > hi):
            top = f", {hi}]" if hi is not None else ", ...)"
            complain(key, f"line {lineno}: {key}={val} outside [{lo}{top}")
            return None
        return x

    kind_entry = take("kind")
    kind = None
    if kind_entry is None:
        errors.append("kind required")
    else:
        kind = kind_entry[0]
        if kind not in KINDS:
            errors.append(
                f"line {kind_entry[1]}: unknown kind {kind!r} (choose from {', '.join(KINDS)})"
            )
            kind = None

    seed = want_int("seed", 0, (1 << 64) - 1)
    if seed is None and "seed" not in given:
        errors.append("seed required (runs without an explicit seed are not reproducible)")

    workers = want_int("workers", 1)
    out_entry = take("out")
    out = out_entry[0] if out_entry else None
    if out_entry and not out:
        errors.append(f"line {out_entry[1]}: out needs a path")

    allow_aspect = False
    got = take("allow_aspect")
    if got is not None:
        val, lineno = got
        if val not in ("true", "false"):
            errors.append(f"line {lineno}: allow_aspect must be true or false, got {val!r}")
        else:
            allow_aspect = val == "true"

    function = None
    got = take("function")
    if got is not None:
        function, fn_line = got
        try:
            build_function(function)
        except Exception as exc:
            complain("function", f"line {fn_line}: bad function descriptor: {_errmsg(exc)}")

    lattice = None
    got = take("lattice")
    if got is not None:
        val, lineno = got
        parts = val.lower().split("x")
        dims = None
        if len(parts) == 2:
            try:
                dims = (int(parts[0]), int(parts[1]))
            except ValueError:
                dims = None
        if dims is None or dims[0] < 1 or dims[1] < 1:
            complain("lattice", f"line {lineno}: lattice must look like 16x15 with sides >= 1")
        else:
            lattice = dims
            w, h = dims
            aspect_ok = _ASPECT_BAND * h >= w and _ASPECT_BAND * w >= h
            if not aspect_ok and not allow_aspect:
                errors.append(
                    f"line {lineno}: lattice {w}x{h} outside the aspect band "
                    f"[1/{_ASPECT_BAND}, {_ASPECT_BAND}]; set allow_aspect = true to override"
                )

    sizes = None
    got = take("n")
    if got is not None:
        val, lineno = got
        out_sizes = []
        for part in val.split(","):
            part = part.strip()
            try:
                k = int(part)
            except ValueError:
                complain("n", f"line {lineno}: n value {part!r} is not an integer")
                out_sizes = None
                break
            if k < 1:
                complain("n", f"line {lineno}: n={k} must be >= 1")
                out_sizes = None
                break
            out_sizes.append(k)
        if out_sizes:
            sizes = tuple(out_sizes)
        elif out_sizes is not None:
            complain("n", f"line {lineno}: n needs at least one value")

    p = want_float_list("p", 0.0, 1.0)
    r = want_float_list("r", 0.0, 1.0)
    eps = want_float_list("eps", 0.0, 1.0)
    trials = want_int("trials", 1)
    outer = want_int("outer", 1)
    inner = want_int("inner", 1)

    side = "left"
    got = take("side")
    if got is not None:
        val, lineno = got
        if val not in ("left", "right"):
            complain("side", f"line {lineno}: side must be left or right, got {val!r}")
        else:
            side = val

    for key, (_, lineno) in entries.items():
        errors.append(f"line {lineno}: unknown key {key!r}")

    if kind is not None:
        present = {
            "function": function,
            "lattice": lattice,
            "n": sizes,
            "p": p,
            "r": r,
            "eps": eps,
            "trials": trials,
            "outer": outer,
            "inner": inner,
            "side": side if "side" in given else None,
        }
        allowed = _KIND_KEYS[kind]
        for key, value in present.items():
            if value is not None and key not in allowed and key in given:
                errors.append(f"key {key!r} not used by kind {kind!r}")
        required = {
            "spectrum": ("function", "p"),
            "two-scale": ("function", "p", "r"),
            "ns-check": ("function", "p", "eps"),
            "perc-crossing": ("p", "trials"),
            "perc-pivotal": ("p", "trials"),
            "perc-noise": ("eps",),
            "perc-near-critical": ("r", "trials"),
            "perc-two-scale": ("r", "outer", "inner"),
            "perc-revealment": ("r", "outer", "inner"),
            "rsw-check": ("n", "r", "outer", "inner"),
            "four-arm": ("n", "trials"),
        }[kind]
        for key in required:
            if present[key] is None and key not in bad_keys:
                errors.append(f"kind {kind!r} requires key {key!r}")
        if kind in _GEOM_KINDS and not bad_keys & {"lattice", "n"}:
            if (lattice is None) == (sizes is None):
                errors.append(f"kind {kind!r} needs exactly one of 'lattice' or 'n'")
        if kind == "perc-noise":
            if r is not None:
                for key in ("outer", "inner"):
                    if present[key] is None and key not in bad_keys:
                        errors.append("perc-noise with r (subgraph mode) requires outer and inner")
                for key in ("p", "trials"):
                    if present[key] is not None:
                        errors.append(f"perc-noise with r (subgraph mode) does not take {key!r}")
            else:
                for key in ("p", "trials"):
                    if present[key] is None and key not in bad_keys:
                        errors.append(f"perc-noise without r requires key {key!r}")
                for key in ("outer", "inner"):
                    if present[key] is not None:
                        errors.append(f"perc-noise without r does not take {key!r}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        function=function,
        lattice=lattice,
        sizes=sizes,
        p=p,
        r=r,
        eps=eps,
        trials=trials,
        outer=outer,
        inner=inner,
        side=side,
        workers=workers if workers is not None else 1,
        out=out,
        allow_aspect=allow_aspect,
    )


def _geoms(cfg: ExperimentConfig) -> list[RectLattice]:
    if cfg.lattice is not None:
        return [RectLattice(*cfg.lattice)]
    return [RectLattice(k, k) for k in cfg.sizes]


def _lat_str(lat: RectLattice) -> str:
    return f"{lat.n}x{lat.m}"


class _Point:
    """Context that turns a grid-point failure into an ERROR row."""

    def __init__(self, rows: list[Row], experiment: str, params: str, timings: bool):
        self.rows = rows
        self.experiment = experiment
        self.params = params
        self.timings = timings
        self.made: list[Row] = []

    def emit(self, experiment=None, params=None, **kw):
        self.made.append(Row(experiment or self.experiment, params or self.params, **kw))

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, etype, exc, tb):
        if exc is None:
            if self.timings:
                elapsed = time.perf_counter() - self.t0
                for row in self.made:
                    row.elapsed = elapsed
            self.rows.extend(self.made)
            return False
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            return False
        self.rows.append(Row(self.experiment, self.params, error=_errmsg(exc)))
        return True


def _crossing_fn(lat: RectLattice):
    return build_function(f"crossing:{lat.n}:{lat.m}")


def _run_spectrum(cfg, workers, timings):
    rows: list[Row] = []
    for p in cfg.p:
        with _Point(rows, "spectrum", _params(("function", cfg.function), ("p", p)), timings) as pt:
            f = build_function(cfg.function)
            coeffs = fourier_transform(f, p).coeffs
            est = float(coeffs @ coeffs - coeffs[0] * coeffs[0])
            pt.emit(estimate=est, stderr=0.0, exact=variance(f, p))
    return rows


def _run_two_scale(cfg, workers, timings):
    rows: list[Row] = []
    for p in cfg.p:
        for r in cfg.r:
            params = _params(("function", cfg.function), ("p", p), ("r", r))
            with _Point(rows, "two-scale", params, timings) as pt:
                f = build_function(cfg.function)
                rep = two_scale_variance(f, TwoScalePair(p, r))
                pt.emit(
                    estimate=rep.two_scale_var,
                    stderr=0.0,
                    exact=float(rep.per_level.sum()),
                )
    return rows


def _run_ns_check(cfg, workers, timings):
    rows: list[Row] = []
    for p in cfg.p:
        for eps in cfg.eps:
            params = _params(("function", cfg.function), ("p", p), ("eps", eps))
            with _Point(rows, "ns-check", params, timings) as pt:
                f = build_function(cfg.function)
                lhs, rhs, _ = noise_two_scale_identity(f, p, eps)
                pt.emit(estimate=lhs, stderr=0.0, exact=rhs)
    return rows


def _run_perc_crossing(cfg, workers, timings):
    rows: list[Row] = []
    for lat in _geoms(cfg):
        for p in cfg.p:
            params = _params(("lattice", _lat_str(lat)), ("p", p), ("trials", cfg.trials))
            with _Point(rows, "perc-crossing", params, timings) as pt:
                res = estimate_crossing(lat, p, cfg.trials, cfg.seed, workers)
                exact = None
                if lat.edge_count <= EXACT_EDGE_CAP:
                    exact = exact_crossing_probability(lat, p)
                pt.emit(estimate=res.estimate, stderr=res.stderr, exact=exact)
    return rows


def _run_perc_pivotal(cfg, workers, timings):
    rows: list[Row] = []
    for lat in _geoms(cfg):
        for p in cfg.p:
            params = _params(("lattice", _lat_str(lat)), ("p", p), ("trials", cfg.trials))
            with _Point(rows, "perc-pivotal", params, timings) as pt:
                res = estimate_pivotal_mean(lat, p, cfg.trials, cfg.seed, workers)
                exact = None
                if lat.edge_count <= EXACT_EDGE_CAP:
                    exact = exact_pivotal_mean(lat, p)
                pt.emit(estimate=res.estimate, stderr=res.stderr, exact=exact)
    return rows


def _run_perc_noise(cfg, workers, timings):
    rows: list[Row] = []
    subgraph = cfg.r is not None
    for lat in _geoms(cfg):
        if subgraph:
            for r in cfg.r:
                for eps in cfg.eps:
                    params = _params(
                        ("lattice", _lat_str(lat)), ("r", r), ("eps", eps),
                        ("outer", cfg.outer), ("inner", cfg.inner),
                    )
                    with _Point(rows, "perc-noise", params, timings) as pt:
                        res = subgraph_noise_correlation(
                            lat, r, eps, cfg.outer, cfg.inner, cfg.seed, workers
                        )
                        pt.emit(estimate=res.estimate, stderr=res.stderr)
        else:
            for p in cfg.p:
                for eps in cfg.eps:
                    params = _params(
                        ("lattice", _lat_str(lat)), ("p", p), ("eps", eps),
                        ("trials", cfg.trials),
                    )
                    with _Point(rows, "perc-noise", params, timings) as pt:
                        res = noise_correlation_crossing(
                            lat, p, eps, cfg.trials, cfg.seed, workers
                        )
                        exact = None
                        if lat.edge_count <= EXACT_EDGE_CAP:
                            exact = noise_correlation(_crossing_fn(lat), p, eps)
                        pt.emit(estimate=res.estimate, stderr=res.stderr, exact=exact)
    return rows


def _run_perc_near_critical(cfg, workers, timings):
    rows: list[Row] = []
    for lat in _geoms(cfg):
        piv = None
        for r in cfg.r:
            params = _params(("lattice", _lat_str(lat)), ("r", r), ("trials", cfg.trials))
            with _Point(rows, "perc-near-critical", params, timings) as pt:
                if piv is None:
                    piv = estimate_pivotal_mean(
                        lat, 0.5, cfg.trials, aux_seed(cfg.seed), workers
                    )
                res = near_critical_flip_probability(
                    lat, r, cfg.trials, cfg.seed, workers, pivotal_mean=piv
                )
                exact = None
                if lat.edge_count <= EXACT_EDGE_CAP:
                    exact = exact_flip_probability(lat, r)
                pt.emit(estimate=res.estimate, stderr=res.stderr, exact=exact)
                pt.emit(
                    experiment="perc-near-critical-bound",
                    estimate=res.union_bound,
                    stderr=res.union_bound_stderr,
                )
    return rows


def _run_perc_two_scale(cfg, workers, timings):
    rows: list[Row] = []
    for lat in _geoms(cfg):
        for r in cfg.r:
            params = _params(
                ("lattice", _lat_str(lat)), ("r", r),
                ("outer", cfg.outer), ("inner", cfg.inner),
            )
            with _Point(rows, "perc-two-scale", params, timings) as pt:
                res = two_scale_crossing_variance(
                    lat, r, cfg.outer, cfg.inner, cfg.seed, workers
                )
                exact = None
                if lat.edge_count <= EXACT_EDGE_CAP:
                    rep = two_scale_variance(_crossing_fn(lat), TwoScalePair(0.5, r))
                    exact = rep.two_scale_var
                pt.emit(estimate=res.estimate, stderr=res.stderr, exact=exact)
    return rows


def _run_perc_revealment(cfg, workers, timings):
    rows: list[Row] = []
    collected: list[tuple[int, float, float, float]] = []
    for lat in _geoms(cfg):
        for r in cfg.r:
            params = _params(
                ("lattice", _lat_str(lat)), ("r", r),
                ("outer", cfg.outer), ("inner", cfg.inner), ("side", cfg.side),
            )
            with _Point(rows, "perc-revealment", params, timings) as pt:
                rep = estimate_revealment(
                    lat, r, cfg.outer, cfg.inner, cfg.seed, cfg.side, workers
                )
                pt.emit(
                    estimate=rep.far_quarter_max,
                    stderr=rep.far_quarter_stderr,
                )
                delta_mean, delta_se = stats.values_mean_stderr(rep.per_psi_delta)
                pt.emit(
                    experiment="perc-revealment-delta",
                    estimate=delta_mean,
                    stderr=delta_se,
                )
                collected.append((lat.n, r, rep.far_quarter_max, rep.far_quarter_stderr))
    # The diagnostic needs two or more sizes per r; r values left short by
    # failed points are skipped here (their ERROR rows already explain why).
    sizes_per_r: dict[float, set[int]] = {}
    for n, r, _, _ in collected:
        sizes_per_r.setdefault(r, set()).add(n)
    usable = [e for e in collected if len(sizes_per_r[e[1]]) >= 2]
    if usable:
        for diag in diagnostic_revealment_criterion(usable):
            for n, scaled, scaled_se in zip(diag.sizes, diag.scaled, diag.scaled_stderr):
                rows.append(Row(
                    "perc-revealment-diagnostic",
                    _params(("n", n), ("r", diag.r), ("scale", "log6")),
                    estimate=scaled,
                    stderr=scaled_se,
                ))
            rows.append(Row(
                "perc-revealment-diagnostic-trend",
                _params(
                    ("r", diag.r),
                    ("sizes", "|".join(str(n) for n in diag.sizes)),
                    ("trend", diag.trend),
                ),
                estimate=diag.net_change,
            ))
    return rows


def _run_rsw_check(cfg, workers, timings):
    rows: list[Row] = []
    for n in cfg.sizes:
        for r in cfg.r:
            pairs = [("n", n), ("r", r), ("outer", cfg.outer), ("inner", cfg.inner)]
            if n < 4:
                pairs.append(("low_confidence", "true"))
            params = _params(*pairs)
            with _Point(rows, "rsw-check", params, timings) as pt:
                rep = rsw_two_scale_check(n, r, cfg.outer, cfg.inner, cfg.seed, workers)
                mean, se = stats.values_mean_stderr(rep.per_psi)
                pt.emit(estimate=mean, stderr=se)
                for c, frac in sorted(rep.band_fractions.items()):
                    band_se = math.sqrt(frac * (1.0 - frac) / cfg.outer)
                    pt.emit(
                        experiment="rsw-check-band",
                        params=_params(*pairs, ("c", c)),
                        estimate=frac,
                        stderr=band_se,
                    )
    return rows


def _run_four_arm(cfg, workers, timings):
    rows: list[Row] = []
    for n in cfg.sizes:
        params = _params(("n", n), ("trials", cfg.trials))
        alpha = None
        with _Point(rows, "four-arm", params, timings) as pt:
            alpha = estimate_four_arm(n, cfg.trials, cfg.seed, workers)
            pt.emit(estimate=alpha.estimate, stderr=alpha.stderr)
        if alpha is None:
            continue
        with _Point(rows, "four-arm-ratio", params, timings) as pt:
            piv = estimate_pivotal_mean(
                RectLattice(n, n), 0.5, cfg.trials, aux_seed(cfg.seed), workers
            )
            if alpha.estimate <= 0.0 or piv.estimate <= 0.0:
                raise ArithmeticError(
                    "pivotal-to-four-arm ratio undefined: a zero estimate "
                    f"(pivotal {piv.estimate}, four-arm {alpha.estimate})"
                )
            ratio = piv.estimate / (n * n * alpha.estimate)
            ratio_se = ratio * math.sqrt(
                (piv.stderr / piv.estimate) ** 2 + (alpha.stderr / alpha.estimate) ** 2
            )
            pt.emit(estimate=ratio, stderr=ratio_se)
    return rows


@dataclass
class RevealmentDiagnostic:
    """Scaled revealment sequence for one r over the size grid.

    A qualitative diagnostic only: the scaled values delta * (log n)^6 are
    printed with their stderrs so a reader can judge the trend; nothing
    about noise sensitivity is asserted or proved by this report.
    """

    r: float
    sizes: list[int] = field(default_factory=list)
    scaled: list[float] = field(default_factory=list)
    scaled_stderr: list[float] = field(default_factory=list)
    trend: str = "mixed"
    net_change: float = 0.0


def diagnostic_revealment_criterion(
    entries: list[tuple[int, float, float, float]],
) -> list[RevealmentDiagnostic]:
    """Scale revealment estimates by (log n)^6 and report the trend per r.

    entries holds (n, r, delta, stderr) tuples; every r needs at least two
    distinct sizes.  Logs are natural.
    """
    by_r: dict[float, list[tuple[int, float, float]]] = {}
    for n, r, delta, se in entries:
        by_r.setdefault(r, []).append((n, delta, se))
    out = []
    for r in sorted(by_r):
        group = sorted(by_r[r])
        if len({n for n, _, _ in group}) < 2:
            raise ValueError(
                f"revealment diagnostic needs >= 2 lattice sizes, r={_fmt(r)} has {len(group)}"
            )
        diag = RevealmentDiagnostic(r=r)
        for n, delta, se in group:
            factor = math.log(n) ** 6
            diag.sizes.append(n)
            diag.scaled.append(delta * factor)
            diag.scaled_stderr.append(se * factor)
        diffs = [b - a for a, b in zip(diag.scaled, diag.scaled[1:])]
        if all(d < 0 for d in diffs):
            diag.trend = "decreasing"
        elif all(d > 0 for d in diffs):
            diag.trend = "increasing"
        else:
            diag.trend = "mixed"
        diag.net_change = diag.scaled[-1] - diag.scaled[0]
        out.append(diag)
    return out


_HANDLERS = {
    "spectrum": _run_spectrum,
    "two-scale": _run_two_scale,
    "ns-check": _run_ns_check,
    "perc-crossing": _run_perc_crossing,
    "perc-pivotal": _run_perc_pivotal,
    "perc-noise": _run_perc_noise,
    "perc-near-critical": _run_perc_near_critical,
    "perc-two-scale": _run_perc_two_scale,
    "perc-revealment": _run_perc_revealment,
    "rsw-check": _run_rsw_check,
    "four-arm": _run_four_arm,
}


def run(cfg: ExperimentConfig, workers: int | None = None, timings: bool = False) -> list[Row]:
    """Execute the config's grid; returns rows in deterministic grid order.

    The elapsed column stays empty unless timings is set, because wall
    clocks and byte-identical reruns cannot both hold.
    """
    return _HANDLERS[cfg.kind](cfg, workers if workers is not None else cfg.workers, timings)


def write_csv(rows: list[Row], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        if row.error is not None:
            est, se, exact = f"ERROR({row.error})", "", ""
        else:
            est = _fmt(float(row.estimate))
            se = _fmt(float(row.stderr)) if row.stderr is not None else ""
            exact = _fmt(float(row.exact)) if row.exact is not None else ""
        elapsed = "%.3f" % row.elapsed if row.elapsed is not None else ""
        writer.writerow([row.experiment, row.params, est, se, exact, elapsed])


def csv_text(rows: list[Row]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
