"""Biased Fourier analysis on the cube and percolation noise experiments.

Three layers:

* cube: exact tables of functions on {0,1}^n, their biased Fourier
  spectra, noise correlation, spectral samples, pivotal sets.
* two_scale: the conditional-mean operator of an observed coarse scale,
  its coefficient contraction, and the noise-sensitivity identity.
* percolation / lattice: bond configurations on rectangles, crossings and
  duals, pivotal edges, exploration with revealment, and the Monte Carlo
  estimators tying the lattice experiments back to the exact cube results.

The experiments module drives everything from flat config files through
the `noise-lab` entry point.  Heavy kernels live in noise_lab.kernels,
which transparently prefers the compiled extension when it importable.
"""

from . import cube, experiments, kernels, lattice, percolation, stats, two_scale
from .cube import (
    BoolFn,
    Spectrum,
    SpectralSampleDist,
    build_function,
    biased_char,
    expectation,
    expected_pivotal_count,
    fourier_transform,
    inverse_transform,
    level_weights,
    noise_correlation,
    pivotal_marginals,
    pivotal_set,
    spectral_sample,
    variance,
)
from .lattice import EdgeConfig, RectLattice, WeightedConfig
from .percolation import (
    ExplorationTrace,
    MeanEstimate,
    NearCriticalResult,
    NestedVarianceResult,
    RevealmentReport,
    RswReport,
    SubgraphNoiseResult,
    config_at,
    estimate_crossing,
    estimate_four_arm,
    estimate_pivotal_mean,
    estimate_revealment,
    exact_crossing_probability,
    exact_flip_probability,
    exact_pivotal_mean,
    explore,
    has_dual_horizontal_crossing,
    has_dual_vertical_crossing,
    has_horizontal_crossing,
    has_vertical_crossing,
    near_critical_flip_probability,
    noise_correlation_crossing,
    pivotal_edges,
    rsw_two_scale_check,
    sample_weights,
    subgraph_noise_correlation,
    two_scale_crossing_variance,
)
from .two_scale import (
    TwoScalePair,
    TwoScaleReport,
    conditional_mean,
    estimate_two_scale_variance,
    noise_to_subgraph_bias,
    noise_two_scale_identity,
    scale_transfer_report,
    spectrum_scaling,
    subgraph_bias_to_noise,
    two_scale_variance,
)

__version__ = "0.1.0"
