"""Interim decision and the unadjusted arm-2 treatment effect estimators.

Three routes to the arm-2 effect: the separate (concurrent-only) difference,
the closed-form model-based estimate that borrows trend-corrected
non-concurrent controls, and a least-squares fit of the period-adjusted
dummy regression. The latter two agree on full-rank data and are kept as
independent implementations so each checks the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import TrialDataset
from .design import DesignConfig, futility_cutoff, ncc_weight


@dataclass(frozen=True)
class InterimResult:
    """Outcome of the arm-1 futility look: continue iff ``z11 >= c1``."""

    z11: float
    c1: float
    continued: bool


@dataclass(frozen=True)
class RegressionFit:
    """Coefficients of the dummy regression
    ``E[y] = eta0 + theta1*I(arm=1) + theta2*I(arm=2) + tau*I(period=2)``."""

    eta0: float
    theta1_coef: float
    theta2_coef: float
    tau: float


def interim_z(
    data: TrialDataset, config: DesignConfig, use_pooled_variance: bool = False
) -> InterimResult:
    """One-sided z-test of arm 1 vs control on period-1 data.

    Uses the known ``sigma`` by default; ``use_pooled_variance`` swaps in the
    pooled period-1 sample standard deviation (off by default and not used
    by the simulation harness). A tie ``z11 == c1`` continues: the rule
    stops only when ``z11 < c1``.
    """
    n11 = data.count(1, 1)
    n01 = data.count(0, 1)
    if use_pooled_variance:
        y11, y01 = data.cell(1, 1), data.cell(0, 1)
        pooled = ((y11 - y11.mean()) ** 2).sum() + ((y01 - y01.mean()) ** 2).sum()
        sigma = math.sqrt(pooled / (n11 + n01 - 2))
    else:
        sigma = config.sigma
    se = sigma * math.sqrt(1.0 / n11 + 1.0 / n01)
    z11 = (data.mean(1, 1) - data.mean(0, 1)) / se
    c1 = futility_cutoff(config.alpha1)
    return InterimResult(z11=z11, c1=c1, continued=bool(z11 >= c1))


def separate_estimate(data: TrialDataset) -> float:
    """Concurrent-only estimate: mean(arm 2) - mean(control, period 2)."""
    return data.mean(2, 2) - data.mean(0, 2)


def model_based_from_means(m01, m11, m02, m12, m22, n01, n11, n02, n12):
    """Closed-form model-based estimate from the five cell means.

    The period-2 control response is estimated as a weighted average of the
    concurrent control mean and the non-concurrent control mean shifted by
    the period effect observed in arm 1. Broadcasts over arrays of means.
    """
    rho = ncc_weight(n01, n02, n11, n12)
    control_p2 = (1.0 - rho) * m02 + rho * (m01 + m12 - m11)
    return m22 - control_p2


def model_based_estimate(data: TrialDataset) -> float:
    """Model-based estimate on a full dataset; requires arm-1 period-2 data."""
    n12 = data.count(1, 2)
    if n12 == 0:
        raise ValueError(
            "arm 1 has no period-2 data, so the non-concurrent weight is zero; "
            "use separate_estimate"
        )
    return float(
        model_based_from_means(
            data.mean(0, 1),
            data.mean(1, 1),
            data.mean(0, 2),
            data.mean(1, 2),
            data.mean(2, 2),
            data.count(0, 1),
            data.count(1, 1),
            data.count(0, 2),
            n12,
        )
    )


def separate_variance(n02: int, n22: int, sigma: float) -> float:
    """Known-sigma variance of the separate estimate."""
    return sigma * sigma * (1.0 / n02 + 1.0 / n22)


def model_based_variance(n01, n11, n02, n12, n22, sigma: float) -> float:
    """Known-sigma variance of the model-based estimate.

    The weighted control estimate has variance ``(1 - rho) * sigma^2 / n02``
    because the weight is the precision-optimal combination of the two
    control routes.
    """
    rho = ncc_weight(n01, n02, n11, n12)
    return sigma * sigma * (1.0 / n22 + (1.0 - rho) / n02)


def ols_fit(data: TrialDataset) -> RegressionFit:
    """Least-squares fit of the dummy regression on the patient rows.

    Solved via SVD (numpy ``lstsq``); raises on a rank-deficient design.
    Serves as an independent check of :func:`model_based_estimate`.
    """
    x = np.column_stack(
        [
            np.ones(data.y.size),
            (data.arm == 1).astype(float),
            (data.arm == 2).astype(float),
            (data.period == 2).astype(float),
        ]
    )
    coef, _, rank, _ = np.linalg.lstsq(x, data.y, rcond=None)
    if rank < 4:
        raise ValueError(f"rank-deficient design: rank {rank} < 4")
    return RegressionFit(
        eta0=float(coef[0]),
        theta1_coef=float(coef[1]),
        theta2_coef=float(coef[2]),
        tau=float(coef[3]),
    )
