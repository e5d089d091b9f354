"""Trial design parameters and the derived quantities every analysis consumes.

The design is a two-period platform layout: arm 1 and the control recruit in
period 1; arm 2 joins at the start of period 2, when arm 1 faces a one-sided
futility interim test. Cell sample sizes are indexed as ``n<arm><period>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from . import normal


class TrendPattern(Enum):
    NONE = "none"
    LINEAR = "linear"
    STEPWISE = "stepwise"


@dataclass(frozen=True)
class TimeTrendSpec:
    """Additive drift in the mean response, identical for all arms."""

    pattern: TrendPattern = TrendPattern.NONE
    lam: float = 0.0  # trend strength; contributes nothing when pattern is NONE


@dataclass(frozen=True)
class DesignConfig:
    """All design parameters for one trial.

    ``alpha1`` is the futility bound on the interim one-sided p-value
    (0 = always stop, 1 = never stop), ``alpha`` the one-sided significance
    level of the final test, and ``sigma`` the known response standard
    deviation.
    """

    n01: int
    n11: int
    n02: int
    n12: int
    n22: int
    alpha1: float
    alpha: float = 0.025
    sigma: float = 1.0
    theta1: float = 0.0
    theta2: float = 0.0
    trend: TimeTrendSpec = field(default_factory=TimeTrendSpec)

    @property
    def period1_se(self) -> float:
        """Standard error of the period-1 arm-1 vs control mean difference."""
        return self.sigma * math.sqrt(1.0 / self.n11 + 1.0 / self.n01)

    @property
    def rho(self) -> float:
        """Weight of the non-concurrent controls in the model-based estimate."""
        return ncc_weight(self.n01, self.n02, self.n11, self.n12)

    @property
    def ratio_r(self) -> float:
        """Period-1 to period-2 sample size ratio (reporting only)."""
        return self.n01 / self.n02

    @property
    def ratio_a(self) -> float:
        """Arm-1 to control allocation ratio (reporting only)."""
        return self.n11 / self.n01

    @property
    def total_planned(self) -> int:
        """Maximum sample size, assuming arm 1 continues to period 2."""
        return self.n01 + self.n11 + self.n02 + self.n12 + self.n22


def validate(config: DesignConfig) -> DesignConfig:
    """Check all invariants; returns the config unchanged if they hold."""
    for name in ("n01", "n11", "n02", "n22"):
        value = getattr(config, name)
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
    if not isinstance(config.n12, int) or config.n12 < 0:
        raise ValueError(f"n12 must be an integer >= 0, got {config.n12!r}")
    if not 0.0 <= config.alpha1 <= 1.0:
        raise ValueError(f"alpha1 out of range [0, 1]: {config.alpha1!r}")
    if not 0.0 < config.alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {config.alpha!r}")
    if not config.sigma > 0.0:
        raise ValueError("sigma must be positive")
    for name in ("theta1", "theta2"):
        if not math.isfinite(getattr(config, name)):
            raise ValueError(f"{name} must be finite")
    if not isinstance(config.trend.pattern, TrendPattern):
        raise ValueError(f"unknown trend pattern: {config.trend.pattern!r}")
    if not math.isfinite(config.trend.lam):
        raise ValueError("trend lambda must be finite")
    return config


def critical_value(alpha1: float) -> float:
    """Interim cutoff: the standard normal quantile at ``1 - alpha1``.

    The bounds 0 and 1 are degenerate rules (always stop / never stop) and
    are rejected here; callers represent them via :func:`futility_cutoff`.
    """
    if not 0.0 < alpha1 < 1.0:
        raise ValueError(
            "alpha1 must lie strictly inside (0, 1); 0 and 1 are the "
            "always-stop / never-stop rules"
        )
    return float(normal.quantile(1.0 - alpha1))


def futility_cutoff(alpha1: float) -> float:
    """Like :func:`critical_value` but maps the degenerate bounds to +/-inf."""
    if alpha1 <= 0.0:
        return math.inf
    if alpha1 >= 1.0:
        return -math.inf
    return critical_value(alpha1)


def ncc_weight(n01, n02, n11, n12) -> float:
    """Weight of the non-concurrent control mean in the control estimate.

    Equals ``(1/n02) / (1/n01 + 1/n02 + 1/n11 + 1/n12)``, and exactly 0 when
    ``n12 == 0`` (arm 1 stopped: the model cannot use the early controls).
    Accepts non-integer sizes so analytic curves can be evaluated on a
    continuous grid.
    """
    for name, value in (("n01", n01), ("n02", n02), ("n11", n11)):
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value!r}")
    if n12 < 0:
        raise ValueError(f"n12 must be >= 0, got {n12!r}")
    if n12 == 0:
        return 0.0
    inv_total = 1.0 / n01 + 1.0 / n02 + 1.0 / n11 + 1.0 / n12
    return (1.0 / n02) / inv_total
