"""Command-line entry point.

Two subcommands: `run` executes a config file and writes CSV; `fn` answers
one-shot exact queries about a function descriptor.  Exit codes: 0 success,
1 bad config or arguments, 2 when the run finished but some grid points
produced ERROR rows.
"""

import argparse
import sys

from .cube import build_function, fourier_transform, level_weights, variance
from .experiments import ConfigError, parse_config, run, write_csv


def _fmt(x: float) -> str:
    return "%.12g" % (x + 0.0)


def _set_str(mask: int) -> str:
    bits = []
    i = 1
    while mask:
        if mask & 1:
            bits.append(str(i))
        mask >>= 1
        i += 1
    return "{" + ",".join(bits) + "}"


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"noise-lab: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"noise-lab: config error: {msg}", file=sys.stderr)
        return 1
    rows = run(cfg, workers=args.workers, timings=args.timings)
    out_path = args.out or cfg.out
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    failed = sum(1 for r in rows if r.error is not None)
    if failed:
        print(f"noise-lab: {failed} of {len(rows)} rows failed", file=sys.stderr)
        return 2
    return 0


# Full spectra are printed only up to this many bits; above it the zero
# coefficients are suppressed to keep the output readable.
_FULL_SPECTRUM_BITS = 8


def _cmd_fn(args) -> int:
    try:
        f = build_function(args.descriptor)
    except Exception as exc:
        print(f"noise-lab: bad descriptor: {exc}", file=sys.stderr)
        return 1
    if not 0.0 < args.p < 1.0:
        print(f"noise-lab: --p must lie strictly inside (0, 1), got {args.p}", file=sys.stderr)
        return 1
    if args.op == "variance":
        print(_fmt(variance(f, args.p)))
        return 0
    spectrum = fourier_transform(f, args.p)
    if args.op == "levels":
        lw = level_weights(spectrum)
        width = len(str(f.n))
        for k, wk in enumerate(lw):
            print(f"level {k:>{width}}  {_fmt(float(wk)):>20}")
        return 0
    coeffs = spectrum.coeffs
    masks = range(coeffs.shape[0])
    if f.n > _FULL_SPECTRUM_BITS:
        masks = [m for m in masks if abs(coeffs[m]) > 1e-14]
    labels = [_set_str(m) for m in masks]
    width = max((len(s) for s in labels), default=2)
    for label, m in zip(labels, masks):
        print(f"{label:<{width}}  {_fmt(float(coeffs[m])):>20}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="noise-lab",
        description="Biased Fourier analysis and percolation noise experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config and emit CSV")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--workers", type=int, default=None, help="worker processes (default: config value or 1)")
    p_run.add_argument("--out", default=None, help="CSV output path (default: config 'out' or stdout)")
    p_run.add_argument(
        "--timings",
        action="store_true",
        help="fill the elapsed_s column (makes output non-reproducible byte for byte)",
    )
    p_run.set_defaults(fn=_cmd_run)

    p_fn = sub.add_parser("fn", help="exact one-shot queries on a function descriptor")
    p_fn.add_argument("descriptor", help="e.g. majority:5, chi:3:0.4, crossing:2:2, table:f.txt")
    p_fn.add_argument("--op", required=True, choices=("spectrum", "variance", "levels"))
    p_fn.add_argument("--p", type=float, default=0.5, help="bias (default 0.5)")
    p_fn.set_defaults(fn=_cmd_fn)

    args = parser.parse_args(argv)
    if args.command == "run" and args.workers is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
