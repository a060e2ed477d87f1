"""Kernel two-sample and independence tests for panels of non-stationary time series.

Panels of independent realisations observed on a shared temporal grid are
treated as i.i.d. samples from multivariate distributions, so the unbiased
squared-MMD and HSIC statistics apply directly. Permutation calibration,
test-power-maximising bandwidth search, synthetic generators, comparison
baselines, and a real-panel ingestion pipeline round out the toolkit.
"""

from .baselines import baseline_test, sub_corr, sub_hsic
from .errors import (
    DegenerateBandwidthError,
    DegenerateNullError,
    DimensionError,
    InputError,
    PanelTestError,
    ParameterError,
    SampleSizeError,
    SearchError,
    SplitError,
)
from .estimators import hsic_u, hsic_variance, mmd2_u, mmd_variance
from .experiment import (
    ExperimentResult,
    ExperimentSpec,
    confidence_interval,
    emit_results,
    run_experiment,
)
from .ingest import (
    PanelSchema,
    RawPanel,
    aggregate_to_targets,
    impute,
    load_csv,
    to_sample_panels,
)
from .kernels import KernelConfig, cross_gram, gaussian_kernel, gram, median_heuristic
from .panels import SamplePanel
from .power import (
    PowerSearchResult,
    SearchGrid,
    hsic_power_criterion,
    median_scaled_grid,
    mmd_power_criterion,
    paper_grid,
    select_bandwidth,
    split_train_test,
)
from .synthgen import (
    GeneratorSpec,
    fourier_basis,
    gen_linear_dep,
    gen_mixed_effects,
    gen_rotation,
    gen_shared_coeff,
    generate,
    time_grid,
)
from .testing import (
    TestConfig,
    TestResult,
    gamma_null_approx,
    hsic_independence_test,
    mmd_two_sample_test,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateBandwidthError",
    "DegenerateNullError",
    "DimensionError",
    "ExperimentResult",
    "ExperimentSpec",
    "GeneratorSpec",
    "InputError",
    "KernelConfig",
    "PanelSchema",
    "PanelTestError",
    "ParameterError",
    "PowerSearchResult",
    "RawPanel",
    "SamplePanel",
    "SampleSizeError",
    "SearchError",
    "SearchGrid",
    "SplitError",
    "TestConfig",
    "TestResult",
    "aggregate_to_targets",
    "baseline_test",
    "confidence_interval",
    "cross_gram",
    "emit_results",
    "fourier_basis",
    "gamma_null_approx",
    "gaussian_kernel",
    "gen_linear_dep",
    "gen_mixed_effects",
    "gen_rotation",
    "gen_shared_coeff",
    "generate",
    "gram",
    "hsic_independence_test",
    "hsic_power_criterion",
    "hsic_u",
    "hsic_variance",
    "impute",
    "load_csv",
    "median_heuristic",
    "median_scaled_grid",
    "mmd2_u",
    "mmd_power_criterion",
    "mmd_two_sample_test",
    "mmd_variance",
    "paper_grid",
    "run_experiment",
    "select_bandwidth",
    "split_train_test",
    "sub_corr",
    "sub_hsic",
    "time_grid",
    "to_sample_panels",
]
