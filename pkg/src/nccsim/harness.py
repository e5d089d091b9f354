"""Replication engine: scenarios, deterministic seeding, parallel execution.

Every replicate is keyed by ``(master seed, scenario id, replicate index)``
through independent seed-sequence streams, so results are bit-identical for
any worker count and any execution order. Aggregation reduces per-replicate
arrays in index order.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adjusted import (
    METHOD_SEPARATE,
    METHOD_UNADJUSTED,
    BootstrapSettings,
    EstimateRecord,
    _mae_record,
    bootstrap_variances,
    method_label,
    separate_test,
    unadjusted_test,
)
from .datagen import simulate_trial
from .design import DesignConfig, TimeTrendSpec, TrendPattern, validate
from .estimators import InterimResult, interim_z
from .theta1 import Theta1Method

THETA1_METHODS = (
    Theta1Method.POOLED,
    Theta1Method.PERIOD1,
    Theta1Method.PERIOD2,
    Theta1Method.CUMVUE,
)

#: Output order of the estimator methods.
METHODS = (
    METHOD_UNADJUSTED,
    METHOD_SEPARATE,
    method_label(Theta1Method.POOLED),
    method_label(Theta1Method.PERIOD1),
    method_label(Theta1Method.PERIOD2),
    method_label(Theta1Method.CUMVUE),
)

#: Output order of the reported statistics.
STATISTICS = (
    "marginal_bias",
    "conditional_bias",
    "marginal_rmse",
    "conditional_rmse",
    "marginal_rejection_rate",
    "conditional_rejection_rate",
    "continuation_frequency",
)

#: Fraction of failed replicates above which a scenario is marked invalid.
MAX_FAILURE_FRACTION = 0.01

HYPOTHESES = ("null", "alternative")


@dataclass(frozen=True)
class Scenario:
    """One simulation scenario: a design, a hypothesis tag, and run sizes."""

    scenario_id: str
    config: DesignConfig
    hypothesis: str
    replicates: int
    bootstrap: BootstrapSettings | None = None

    def __post_init__(self):
        if self.hypothesis not in HYPOTHESES:
            raise ValueError(f"hypothesis must be one of {HYPOTHESES}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        validate(self.config)


@dataclass(frozen=True)
class Statistic:
    """A reported number with its Monte Carlo standard error; ``None`` when
    the statistic is not estimable from the run (e.g. no continuing
    replicates, or no test without bootstrap)."""

    value: float | None
    mc_se: float | None


@dataclass
class ReplicateArrays:
    """Raw per-replicate outputs of one scenario run, ordered by index."""

    continued: np.ndarray
    failed: np.ndarray
    estimates: dict[str, np.ndarray]
    rejected: dict[str, np.ndarray]  # 1 / 0 / -1 (test unavailable)


@dataclass
class OperatingCharacteristics:
    scenario: Scenario
    n_replicates: int
    n_continuing: int
    n_failed: int
    valid: bool
    stats: dict[str, dict[str, Statistic]]  # method -> statistic -> value


@dataclass(frozen=True)
class ReplicateResult:
    interim: InterimResult
    records: dict[str, EstimateRecord]


def _scenario_key(scenario_id: str) -> int:
    digest = hashlib.sha256(scenario_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def replicate_stream(
    master_seed: int, scenario: Scenario, replicate_index: int, stream: int
) -> np.random.SeedSequence:
    """Independent seed stream for one replicate (stream 0: data, 1: bootstrap)."""
    return np.random.SeedSequence(
        entropy=master_seed,
        spawn_key=(_scenario_key(scenario.scenario_id), replicate_index, stream),
    )


def run_replicate(
    scenario: Scenario, master_seed: int, replicate_index: int
) -> ReplicateResult:
    """Simulate one trial and produce records for every estimator method.

    The interim decision is taken once; on a stop the arm-1 period-2 cell is
    dropped and every method collapses to the concurrent-only analysis. The
    bootstrap (when configured) runs once per replicate and its resamples are
    shared by all adjusted-method variances.
    """
    config = scenario.config
    data = simulate_trial(config, replicate_stream(master_seed, scenario, replicate_index, 0))
    interim = interim_z(data, config)
    analysis = data if interim.continued else data.drop_arm1_period2()

    records = {
        METHOD_UNADJUSTED: unadjusted_test(analysis, config, interim),
        METHOD_SEPARATE: separate_test(analysis, config, interim),
    }
    variances: dict[Theta1Method, float] = {}
    if interim.continued and scenario.bootstrap is not None:
        settings = BootstrapSettings(
            b=scenario.bootstrap.b,
            seed=np.random.SeedSequence(
                entropy=master_seed,
                spawn_key=(
                    _scenario_key(scenario.scenario_id),
                    replicate_index,
                    1,
                    int(scenario.bootstrap.seed),
                ),
            ),
        )
        variances = bootstrap_variances(analysis, config, settings, THETA1_METHODS)
    for m in THETA1_METHODS:
        records[method_label(m)] = _mae_record(
            analysis, config, interim, m, variances.get(m)
        )
    return ReplicateResult(interim=interim, records=records)


def _empty_arrays(n: int) -> ReplicateArrays:
    return ReplicateArrays(
        continued=np.zeros(n, dtype=bool),
        failed=np.zeros(n, dtype=bool),
        estimates={m: np.full(n, np.nan) for m in METHODS},
        rejected={m: np.full(n, -1, dtype=np.int8) for m in METHODS},
    )


def _collect_range(
    scenario: Scenario, master_seed: int, start: int, stop: int
) -> ReplicateArrays:
    out = _empty_arrays(stop - start)
    for offset, rep in enumerate(range(start, stop)):
        try:
            result = run_replicate(scenario, master_seed, rep)
        except Exception:
            out.failed[offset] = True
            continue
        out.continued[offset] = result.interim.continued
        for m in METHODS:
            record = result.records[m]
            out.estimates[m][offset] = record.estimate
            if record.rejected is not None:
                out.rejected[m][offset] = int(record.rejected)
    return out


def collect_replicates(
    scenario: Scenario, master_seed: int, workers: int = 1
) -> ReplicateArrays:
    """Run all replicates, optionally on a process pool.

    Results are stitched by replicate index, so the output is identical for
    any ``workers`` value.
    """
    n = scenario.replicates
    if workers <= 1 or n < 2:
        return _collect_range(scenario, master_seed, 0, n)
    n_chunks = min(n, workers * 4)
    bounds = np.linspace(0, n, n_chunks + 1, dtype=int)
    out = _empty_arrays(n)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            (int(a), pool.submit(_collect_range, scenario, master_seed, int(a), int(b)))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for start, future in futures:
            part = future.result()
            stop = start + part.continued.size
            out.continued[start:stop] = part.continued
            out.failed[start:stop] = part.failed
            for m in METHODS:
                out.estimates[m][start:stop] = part.estimates[m]
                out.rejected[m][start:stop] = part.rejected[m]
    return out


def _mean_statistic(values: np.ndarray) -> Statistic:
    n = values.size
    if n == 0:
        return Statistic(None, None)
    value = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    return Statistic(value, se)


def _rmse_statistic(errors: np.ndarray) -> Statistic:
    n = errors.size
    if n == 0:
        return Statistic(None, None)
    sq = np.square(errors)
    mse = float(sq.mean())
    rmse = math.sqrt(mse)
    if n > 1 and rmse > 0.0:
        # delta method: se(rmse) = se(mse) / (2 * rmse)
        se = float(sq.std(ddof=1) / math.sqrt(n) / (2.0 * rmse))
    else:
        se = None
    return Statistic(rmse, se)


def _rate_statistic(flags: np.ndarray) -> Statistic:
    n = flags.size
    if n == 0 or np.any(flags < 0):
        return Statistic(None, None)
    p = float(flags.mean())
    return Statistic(p, math.sqrt(p * (1.0 - p) / n))


def summarize(scenario: Scenario, arrays: ReplicateArrays) -> OperatingCharacteristics:
    """Reduce per-replicate arrays to operating characteristics.

    Conditional statistics use only continuing replicates; failed replicates
    are excluded everywhere and counted. The reduction is a fixed-order
    numpy pass, independent of how the replicates were computed.
    """
    ok = ~arrays.failed
    cont = arrays.continued & ok
    n_ok = int(ok.sum())
    n_cont = int(cont.sum())
    n_failed = int(arrays.failed.sum())
    theta2 = scenario.config.theta2

    continuation = _rate_statistic(
        arrays.continued[ok].astype(np.int8) if n_ok else np.empty(0, dtype=np.int8)
    )
    stats: dict[str, dict[str, Statistic]] = {}
    for m in METHODS:
        est = arrays.estimates[m]
        rej = arrays.rejected[m]
        stats[m] = {
            "marginal_bias": _mean_statistic(est[ok] - theta2),
            "conditional_bias": _mean_statistic(est[cont] - theta2),
            "marginal_rmse": _rmse_statistic(est[ok] - theta2),
            "conditional_rmse": _rmse_statistic(est[cont] - theta2),
            "marginal_rejection_rate": _rate_statistic(rej[ok]),
            "conditional_rejection_rate": _rate_statistic(rej[cont]),
            "continuation_frequency": continuation,
        }
    return OperatingCharacteristics(
        scenario=scenario,
        n_replicates=scenario.replicates,
        n_continuing=n_cont,
        n_failed=n_failed,
        valid=n_failed <= MAX_FAILURE_FRACTION * scenario.replicates,
        stats=stats,
    )


def run_scenario(
    scenario: Scenario, master_seed: int, workers: int = 1
) -> OperatingCharacteristics:
    """Run one scenario end to end."""
    return summarize(scenario, collect_replicates(scenario, master_seed, workers))


# --- the one-factor-at-a-time scenario grid ---------------------------------

ALPHA1_GRID = (0.1, 0.15, 0.2, 0.25, 0.35, 0.5, 0.65, 0.75, 0.95)
RATIO_GRID = ((1, 15), (1, 3), (1, 1), (2, 1), (4, 1), (7, 1), (10, 1))
LAMBDA_GRID = (-0.15, -0.075, 0.0, 0.075, 0.15)
BASE_CELL_SIZE = 150
DEFAULT_ALPHA1 = 0.5
ALTERNATIVE_THETA2 = 0.32


def _ratio_label(num: int, den: int) -> str:
    return f"{num}/{den}" if den > 1 else f"{num}"


def scenario_grid(
    replicates: int = 10_000, bootstrap: BootstrapSettings | None = None
) -> list[Scenario]:
    """Expand the one-factor-at-a-time grid, per hypothesis.

    Families: futility bound, period-size ratio ``r`` (period-2 cells fixed
    at 150), allocation ratio ``a`` (control cells fixed at 150), and linear
    trend strength. Non-varied parameters stay at the defaults (bound 0.5,
    both ratios 1, no trend). 28 scenarios per hypothesis, duplicates of the
    default point included, null block first.
    """
    base = BASE_CELL_SIZE
    scenarios = []
    for hypothesis in HYPOTHESES:
        theta2 = 0.0 if hypothesis == "null" else ALTERNATIVE_THETA2

        def make(scenario_id: str, **overrides) -> Scenario:
            kwargs = dict(
                n01=base, n11=base, n02=base, n12=base, n22=base,
                alpha1=DEFAULT_ALPHA1, theta2=theta2,
            )
            kwargs.update(overrides)
            config = DesignConfig(**kwargs)
            return Scenario(
                scenario_id=scenario_id,
                config=config,
                hypothesis=hypothesis,
                replicates=replicates,
                bootstrap=bootstrap,
            )

        for alpha1 in ALPHA1_GRID:
            scenarios.append(make(f"{hypothesis}:alpha1={alpha1:g}", alpha1=alpha1))
        for num, den in RATIO_GRID:
            n_p1 = base * num // den
            scenarios.append(
                Scenario(
                    scenario_id=f"{hypothesis}:r={_ratio_label(num, den)}",
                    config=DesignConfig(
                        n01=n_p1, n11=n_p1, n02=base, n12=base, n22=base,
                        alpha1=DEFAULT_ALPHA1, theta2=theta2,
                    ),
                    hypothesis=hypothesis,
                    replicates=replicates,
                    bootstrap=bootstrap,
                )
            )
        for num, den in RATIO_GRID:
            n_arm1 = base * num // den
            scenarios.append(
                Scenario(
                    scenario_id=f"{hypothesis}:a={_ratio_label(num, den)}",
                    config=DesignConfig(
                        n01=base, n11=n_arm1, n02=base, n12=n_arm1, n22=base,
                        alpha1=DEFAULT_ALPHA1, theta2=theta2,
                    ),
                    hypothesis=hypothesis,
                    replicates=replicates,
                    bootstrap=bootstrap,
                )
            )
        for lam in LAMBDA_GRID:
            scenarios.append(
                make(
                    f"{hypothesis}:lambda={lam:g}",
                    trend=TimeTrendSpec(TrendPattern.LINEAR, lam),
                )
            )
    return scenarios
