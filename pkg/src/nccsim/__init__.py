"""Simulation and estimation for two-arm platform trials that borrow
non-concurrent controls under a futility interim analysis."""

from .adjusted import (
    BootstrapError,
    BootstrapSettings,
    EstimateRecord,
    METHOD_SEPARATE,
    METHOD_UNADJUSTED,
    bootstrap_mae_estimates,
    bootstrap_variance,
    bootstrap_variances,
    conditional_bias_estimate,
    mae,
    method_label,
    separate_test,
    unadjusted_test,
    wald_test,
)
from .bias import (
    BiasInputs,
    bias_inputs,
    conditional_bias,
    marginal_bias,
    stop_probability,
    truncated_normal_mean,
)
from .datagen import CELLS, TrialDataset, simulate_trial, time_trend
from .design import (
    DesignConfig,
    TimeTrendSpec,
    TrendPattern,
    critical_value,
    futility_cutoff,
    ncc_weight,
    validate,
)
from .estimators import (
    InterimResult,
    RegressionFit,
    interim_z,
    model_based_estimate,
    model_based_from_means,
    model_based_variance,
    ols_fit,
    separate_estimate,
    separate_variance,
)
from .harness import (
    METHODS,
    STATISTICS,
    OperatingCharacteristics,
    ReplicateArrays,
    ReplicateResult,
    Scenario,
    Statistic,
    collect_replicates,
    replicate_stream,
    run_replicate,
    run_scenario,
    scenario_grid,
    summarize,
)
from .theta1 import (
    InformationLevels,
    Theta1Method,
    cumvue,
    cumvue_from_means,
    estimate_theta1,
    information_levels,
    theta1_period1,
    theta1_period2,
    theta1_pooled,
    umvue,
    umvue_from_means,
)

__version__ = "0.1.0"
