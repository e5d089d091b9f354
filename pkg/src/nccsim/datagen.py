"""Patient-level response generation for the two-period platform layout.

Patients are enumerated in recruitment order: the period-1 slots come first
(arm 1 and control interleaved by block randomization at the configured
allocation ratio), then the period-2 slots (control, arm 1, arm 2). The
linear time trend is evaluated on that recruitment index against the maximum
planned sample size, so the drift is balanced across concurrent arms in
expectation. The full trial, including the arm-1 period-2 cell, is always
generated; an interim stop is applied afterwards by dropping that cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import DesignConfig, TimeTrendSpec, TrendPattern

#: The five (arm, period) cells of the full design.
CELLS = ((0, 1), (1, 1), (0, 2), (1, 2), (2, 2))


def time_trend(j: int, total: int, period: int, spec: TimeTrendSpec) -> float:
    """Mean drift for the patient recruited at position ``j`` of ``total``.

    Linear: ``lam * (j - 1) / (total - 1)``; stepwise: ``lam`` in period 2;
    none: 0 regardless of ``lam``.
    """
    if not 1 <= j <= total:
        raise ValueError(f"patient index {j} outside 1..{total}")
    if spec.pattern is TrendPattern.NONE:
        return 0.0
    if spec.pattern is TrendPattern.STEPWISE:
        return spec.lam if period == 2 else 0.0
    if total < 2:
        raise ValueError("linear trend requires a total sample size of at least 2")
    return spec.lam * (j - 1) / (total - 1)


@dataclass(frozen=True)
class TrialDataset:
    """One simulated trial: per-patient rows plus cached cell summaries.

    Arrays are aligned and ordered by recruitment index ``patient`` (1-based).
    Instances are immutable and safe to share across workers.
    """

    patient: np.ndarray
    arm: np.ndarray
    period: np.ndarray
    y: np.ndarray
    _cells: dict = field(init=False, repr=False, compare=False)
    _means: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.y.size
        if not (self.patient.size == self.arm.size == self.period.size == n):
            raise ValueError("patient, arm, period and y must have equal length")
        cells = {}
        means = {}
        for k, s in CELLS:
            values = self.y[(self.arm == k) & (self.period == s)]
            values.flags.writeable = False
            cells[(k, s)] = values
            if values.size:
                means[(k, s)] = float(values.mean())
        for arr in (self.patient, self.arm, self.period, self.y):
            arr.flags.writeable = False
        object.__setattr__(self, "_cells", cells)
        object.__setattr__(self, "_means", means)

    def cell(self, arm: int, period: int) -> np.ndarray:
        return self._cells[(arm, period)]

    def count(self, arm: int, period: int) -> int:
        return self._cells[(arm, period)].size

    def mean(self, arm: int, period: int) -> float:
        if (arm, period) not in self._means:
            raise ValueError(f"cell (arm={arm}, period={period}) is empty")
        return self._means[(arm, period)]

    def drop_arm1_period2(self) -> "TrialDataset":
        """View of the trial after a futility stop: the (1, 2) cell removed."""
        keep = ~((self.arm == 1) & (self.period == 2))
        return TrialDataset(
            patient=self.patient[keep],
            arm=self.arm[keep],
            period=self.period[keep],
            y=self.y[keep],
        )


def _interleaved_arms(counts, arms, rng: np.random.Generator) -> np.ndarray:
    """Block-randomized arm sequence for one period.

    Blocks contain the smallest integer multiple of the allocation ratio and
    are shuffled independently, so every prefix is close to the target ratio.
    """
    g = math.gcd(*counts)
    block = np.repeat(np.asarray(arms, dtype=np.int64), [c // g for c in counts])
    tiled = np.tile(block, (g, 1))
    return rng.permuted(tiled, axis=1).ravel()


def simulate_trial(config: DesignConfig, seed) -> TrialDataset:
    """Draw one full trial. Identical ``(config, seed)`` give identical data.

    Responses are ``Normal(theta_k + f(j), sigma^2)`` with the control
    response in period 1 fixed at 0; all estimands are differences, so the
    baseline level is immaterial.
    """
    rng = np.random.default_rng(seed)
    arms_p1 = _interleaved_arms((config.n01, config.n11), (0, 1), rng)
    arms_p2 = _interleaved_arms((config.n02, config.n12, config.n22), (0, 1, 2), rng)
    arm = np.concatenate([arms_p1, arms_p2])
    period = np.repeat(np.array([1, 2], dtype=np.int64), [arms_p1.size, arms_p2.size])
    total = arm.size
    patient = np.arange(1, total + 1, dtype=np.int64)

    spec = config.trend
    if spec.pattern is TrendPattern.LINEAR:
        drift = spec.lam * (patient - 1) / (total - 1)
    elif spec.pattern is TrendPattern.STEPWISE:
        drift = np.where(period == 2, spec.lam, 0.0)
    else:
        drift = np.zeros(total)

    effect = np.array([0.0, config.theta1, config.theta2])
    y = effect[arm] + drift + config.sigma * rng.standard_normal(total)
    return TrialDataset(patient=patient, arm=arm, period=period, y=y)
