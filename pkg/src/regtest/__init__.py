"""Regularized hypothesis testing for linear inverse problems.

The package tests a linear feature ``<phi, u>`` of an unknown density ``u``
observed through periodic deconvolution in Gaussian white noise,

    Y = T u + sigma Z,

and compares the unregularized test, plug-in tests, the oracle test and the
two-sample adaptive test in terms of their power.
"""

from regtest.spectral import (
    GridFunction,
    PeriodicGrid,
    Spectrum,
    dual_sobolev_norm,
    inverse_periodic_fourier,
    l2_inner,
    l2_norm,
    periodic_fourier,
    riesz_map,
    sobolev_norm,
)
from regtest.operator import (
    KernelSpec,
    adjoint,
    forward,
    kernel_multiplier,
    plugin_probe,
    unregularized_probe,
)
from regtest.scenario import Scenario, feature_functional, feature_value, truth
from regtest.noise import NoiseDraw, generate_data, sample_white_noise
from regtest.testing import (
    TestOutcome,
    TestSpec,
    critical_value,
    exact_power,
    j_functional,
    make_test,
    normal_cdf,
    power_from_j,
    run_test,
    std_normal_quantile,
    unregularized_power,
)
from regtest.optim import (
    PdpsConfig,
    ProbePair,
    SolveReport,
    apply_K,
    apply_K_star,
    pdps_solve,
    pdps_solve_batch,
    proj_l1_ball,
    prox_F,
    recover_probe,
    surrogate_objective,
)
from regtest.adaptive import (
    AdaptiveRun,
    PowerEstimate,
    RejectionRate,
    adaptive_rejection_rate,
    adaptive_rejection_rates,
    adaptive_test,
    empirical_power,
    power_lower_bound,
)

from regtest.experiment import ExperimentConfig, PowerRecord, emit_csv, emit_plot, read_csv, run_experiment

__version__ = "0.1.0"
