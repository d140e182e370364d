"""Timing comparison of the compiled kernels against the pure-python ones.

Runs a few representative workloads on a mid-size lattice and prints
per-implementation wall times.  The two implementations produce identical
outputs; only the speed differs.

Usage: python3 benchmarks/bench_kernels.py [--scale N]
"""

import argparse
import time

import numpy as np

from noise_lab.lattice import RectLattice
from noise_lab.kernels import _ref

try:
    from noise_lab.kernels import _core
except ImportError:
    _core = None


def _time(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=int, default=1, help="multiply trial counts by this")
    args = ap.parse_args()

    lat = RectLattice(24, 23)
    eu, ev, nv = lat.edge_u, lat.edge_v, lat.vertex_count
    indptr, nbr_v, nbr_e = lat.adjacency
    du, dv, ndv, bstar, tstar = lat.dual_tb
    L, R = lat.left_ids, lat.right_ids
    s = args.scale

    workloads = [
        ("count_crossings (4000 trials)",
         lambda impl: impl.count_crossings(11, 0, 4000 * s, 0, 0.5, eu, ev, nv, L, R)),
        ("pivotal_sizes (800 trials)",
         lambda impl: impl.pivotal_sizes(11, 0, 800 * s, 0.5, eu, ev, nv, L, R, du, dv, ndv, bstar, tstar)),
        ("inner_crossing_counts (40x40)",
         lambda impl: impl.inner_crossing_counts(11, 0, 40 * s, 40, 0.55, 0.5 / 0.55, eu, ev, nv, L, R)),
        ("revealment_counts (600 xi)",
         lambda impl: impl.revealment_counts(11, 0, 0, 600 * s, 0.9, 0.5 / 0.9, eu, ev,
                                             indptr, nbr_v, nbr_e, nv, L, R)),
    ]

    impls = [("python", _ref)]
    if _core is not None:
        impls.append(("compiled", _core))
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"lattice 24x23, {eu.shape[0]} edges, scale {s}")
    print(f"{'workload':36s}" + "".join(f"{name:>12s}" for name, _ in impls) + f"{'speedup':>10s}")
    for label, run in workloads:
        times = []
        ref_out = None
        for name, impl in impls:
            dt, out = _time(run, impl)
            times.append(dt)
            if ref_out is None:
                ref_out = out
            else:
                a = np.asarray(ref_out[0] if isinstance(ref_out, tuple) else ref_out)
                b = np.asarray(out[0] if isinstance(out, tuple) else out)
                assert np.array_equal(a, b), f"output mismatch in {label}"
        row = f"{label:36s}" + "".join(f"{dt:11.3f}s" for dt in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
