"""Kernel selection: compiled extension if available, numpy/scipy otherwise.

Set NOISE_LAB_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the implementation-equality tests).  Both implementations expose the same
functions and produce identical output for identical arguments.
"""

import os

from . import _ref

if os.environ.get("NOISE_LAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _ref
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _ref

IMPL = _impl.IMPL

trial_key = _impl.trial_key
fill_uniforms = _impl.fill_uniforms
connected = _impl.connected
reach = _impl.reach
bfs_levels = _impl.bfs_levels
queried_edges = _ref.queried_edges
count_crossings = _impl.count_crossings
flip_counts = _impl.flip_counts
noise_pair_counts = _impl.noise_pair_counts
pivotal_mask = _impl.pivotal_mask
pivotal_sizes = _impl.pivotal_sizes
central_pivotal_count = _impl.central_pivotal_count
inner_crossing_counts = _impl.inner_crossing_counts
inner_dual_counts = _impl.inner_dual_counts
subgraph_noise_counts = _impl.subgraph_noise_counts
revealment_counts = _impl.revealment_counts
crossing_table = _impl.crossing_table
