"""Command-line front end: ``simulate``, ``analytic`` and ``single``.

``simulate`` runs scenarios from a plan file and writes ``results.csv`` plus
a ``results.json`` mirror. ``analytic`` evaluates the closed-form bias
curves on design grids. ``single`` traces one trial end to end and can dump
its patient rows. All outputs are byte-identical across reruns with the
same inputs; nothing is derived from the clock or the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .adjusted import BootstrapSettings
from .bias import BiasInputs, conditional_bias, marginal_bias
from .datagen import simulate_trial
from .design import (
    DesignConfig,
    TimeTrendSpec,
    TrendPattern,
    futility_cutoff,
    ncc_weight,
    validate,
)
from .harness import (
    METHODS,
    STATISTICS,
    OperatingCharacteristics,
    Scenario,
    replicate_stream,
    run_replicate,
    run_scenario,
    scenario_grid,
)

RESULTS_CSV_COLUMNS = (
    "scenario_id",
    "hypothesis",
    "alpha1",
    "r",
    "a",
    "lambda",
    "trend_pattern",
    "n01",
    "n11",
    "n02",
    "n12",
    "n22",
    "method",
    "statistic_name",
    "value",
    "mc_se",
    "n_replicates",
    "n_continuing",
)

DEFAULT_REPLICATES = 10_000
DEFAULT_BOOTSTRAP_B = 1000

_TOP_KEYS = {"grid", "replicates", "bootstrap_b", "bootstrap_seed"}
_SCENARIO_KEYS = {
    "id", "hypothesis", "alpha1", "alpha", "sigma", "theta1", "theta2",
    "trend", "lambda", "n01", "n11", "n02", "n12", "n22",
}
_SCENARIO_DEFAULTS = {
    "alpha1": 0.5, "alpha": 0.025, "sigma": 1.0, "theta1": 0.0, "theta2": 0.0,
    "trend": "none", "lambda": 0.0,
    "n01": 150, "n11": 150, "n02": 150, "n12": 150, "n22": 150,
}
_INT_KEYS = {"n01", "n11", "n02", "n12", "n22"}
_FLOAT_KEYS = {"alpha1", "alpha", "sigma", "theta1", "theta2", "lambda"}


class ConfigError(ValueError):
    """Plan-file parse or validation error, with line context where known."""


@dataclass
class RunConfig:
    """Resolved ``simulate`` invocation."""

    config_path: Path
    master_seed: int
    out_dir: Path
    workers: int = 1
    replicates_override: int | None = None
    bootstrap_b_override: int | None = None


def _parse_plan_text(path: Path):
    """Split the plan file into top-level settings and raw scenario blocks."""
    top: dict[str, str] = {}
    blocks: list[dict[str, str]] = []
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[scenario]":
            current = {}
            blocks.append(current)
            continue
        if ":" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key: value' or '[scenario]'")
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if current is None:
            if key not in _TOP_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            target = top
        else:
            if key not in _SCENARIO_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown scenario key '{key}'")
            target = current
        if key in target:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
        if not value:
            raise ConfigError(f"{path}:{lineno}: missing value for '{key}'")
        target[key] = value
    return top, blocks


def _coerce(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}': {value!r}") from exc
    return value


def _build_scenario(
    block: dict[str, str], index: int, replicates: int,
    bootstrap: BootstrapSettings | None,
) -> Scenario:
    values = dict(_SCENARIO_DEFAULTS)
    values.update({k: _coerce(k, v) for k, v in block.items() if k not in ("id", "hypothesis")})
    try:
        pattern = TrendPattern(values["trend"])
    except ValueError as exc:
        raise ConfigError(f"unknown trend '{values['trend']}'") from exc
    config = validate(
        DesignConfig(
            n01=values["n01"], n11=values["n11"], n02=values["n02"],
            n12=values["n12"], n22=values["n22"],
            alpha1=values["alpha1"], alpha=values["alpha"], sigma=values["sigma"],
            theta1=values["theta1"], theta2=values["theta2"],
            trend=TimeTrendSpec(pattern, values["lambda"]),
        )
    )
    inferred = "null" if config.theta2 == 0.0 else "alternative"
    hypothesis = block.get("hypothesis", inferred)
    if hypothesis != inferred:
        raise ConfigError(
            f"hypothesis '{hypothesis}' contradicts theta2={config.theta2!r}"
        )
    scenario_id = block.get("id", f"scenario-{index}")
    return Scenario(
        scenario_id=scenario_id,
        config=config,
        hypothesis=hypothesis,
        replicates=replicates,
        bootstrap=bootstrap,
    )


def parse_config(
    path: Path | str,
    replicates_override: int | None = None,
    bootstrap_b_override: int | None = None,
) -> list[Scenario]:
    """Read a plan file into fully validated scenarios.

    Either ``grid: table1`` (the built-in one-factor grid, both hypotheses)
    or one or more ``[scenario]`` blocks. A ``bootstrap_b`` of 0 disables
    the bootstrap, so only point estimates and the closed-form tests run.
    """
    path = Path(path)
    top, blocks = _parse_plan_text(path)

    replicates = replicates_override if replicates_override is not None else int(
        top.get("replicates", DEFAULT_REPLICATES)
    )
    b = bootstrap_b_override if bootstrap_b_override is not None else int(
        top.get("bootstrap_b", DEFAULT_BOOTSTRAP_B)
    )
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    if b < 0:
        raise ConfigError("bootstrap_b must be >= 0 (0 disables the bootstrap)")
    seed = int(top.get("bootstrap_seed", 0))
    bootstrap = BootstrapSettings(b=b, seed=seed) if b > 0 else None

    grid = top.get("grid")
    if grid is not None:
        if blocks:
            raise ConfigError("'grid' cannot be combined with [scenario] blocks")
        if grid != "table1":
            raise ConfigError(f"unknown grid preset '{grid}'")
        return scenario_grid(replicates=replicates, bootstrap=bootstrap)
    if not blocks:
        raise ConfigError(f"{path}: no scenarios defined")
    scenarios = [
        _build_scenario(block, i + 1, replicates, bootstrap)
        for i, block in enumerate(blocks)
    ]
    ids = [s.scenario_id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate scenario ids")
    return scenarios


# --- output ------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _result_rows(result: OperatingCharacteristics):
    scenario = result.scenario
    config = scenario.config
    meta = (
        scenario.scenario_id,
        scenario.hypothesis,
        _fmt(config.alpha1),
        _fmt(config.ratio_r),
        _fmt(config.ratio_a),
        _fmt(config.trend.lam),
        config.trend.pattern.value,
        config.n01,
        config.n11,
        config.n02,
        config.n12,
        config.n22,
    )
    for method in METHODS:
        for name in STATISTICS:
            stat = result.stats[method][name]
            yield meta + (
                method,
                name,
                _fmt(stat.value),
                _fmt(stat.mc_se),
                result.n_replicates,
                result.n_continuing,
            )


def emit_results(
    results: list[OperatingCharacteristics], out_dir: Path | str, master_seed: int
) -> tuple[Path, Path]:
    """Write ``results.csv`` and its JSON mirror; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    with csv_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULTS_CSV_COLUMNS)
        for result in results:
            writer.writerows(_result_rows(result))

    payload = {
        "master_seed": master_seed,
        "results": [
            {
                "scenario_id": r.scenario.scenario_id,
                "hypothesis": r.scenario.hypothesis,
                "design": {
                    "alpha1": r.scenario.config.alpha1,
                    "alpha": r.scenario.config.alpha,
                    "sigma": r.scenario.config.sigma,
                    "theta1": r.scenario.config.theta1,
                    "theta2": r.scenario.config.theta2,
                    "trend_pattern": r.scenario.config.trend.pattern.value,
                    "lambda": r.scenario.config.trend.lam,
                    "n01": r.scenario.config.n01,
                    "n11": r.scenario.config.n11,
                    "n02": r.scenario.config.n02,
                    "n12": r.scenario.config.n12,
                    "n22": r.scenario.config.n22,
                },
                "n_replicates": r.n_replicates,
                "n_continuing": r.n_continuing,
                "n_failed": r.n_failed,
                "valid": r.valid,
                "methods": {
                    method: {
                        name: {"value": stat.value, "mc_se": stat.mc_se}
                        for name, stat in r.stats[method].items()
                    }
                    for method in METHODS
                },
            }
            for r in results
        ],
    }
    json_path = out_dir / "results.json"
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


# --- analytic curves ---------------------------------------------------------

_ANALYTIC_ALPHA1 = tuple([0.001, 0.005] + [i / 100 for i in range(1, 100)] + [0.995, 0.999])
_ANALYTIC_RATIOS = (
    1 / 15, 0.1, 0.15, 0.2, 1 / 3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0
)
ANALYTIC_CSV_COLUMNS = (
    "panel", "alpha1", "r", "a", "theta1",
    "n01", "n11", "n02", "n12", "rho", "marginal_bias", "conditional_bias",
)


def analytic_rows(
    alpha1_grid=_ANALYTIC_ALPHA1,
    r_grid=_ANALYTIC_RATIOS,
    a_grid=_ANALYTIC_RATIOS,
    theta1: float = 0.0,
    sigma: float = 1.0,
    base_n: float = 150.0,
):
    """Closed-form bias over the three design grids.

    Panel A varies the futility bound with all cells at ``base_n``; panel B
    varies the period-size ratio with period-2 cells fixed; panel C varies
    the arm-1 allocation ratio with control cells fixed. Cell sizes may be
    non-integer here: the formulas are continuous in them.
    """

    def row(panel, alpha1, n01, n11, n02, n12):
        rho = ncc_weight(n01, n02, n11, n12)
        se1 = sigma * (1.0 / n11 + 1.0 / n01) ** 0.5
        inputs = BiasInputs(
            rho=rho, se1=se1, c1=futility_cutoff(alpha1), theta1=theta1
        )
        return (
            panel, alpha1, n01 / n02, n11 / n01, theta1, n01, n11, n02, n12, rho,
            marginal_bias(inputs), conditional_bias(inputs),
        )

    for alpha1 in alpha1_grid:
        yield row("A", alpha1, base_n, base_n, base_n, base_n)
    for r in r_grid:
        yield row("B", 0.5, base_n * r, base_n * r, base_n, base_n)
    for a in a_grid:
        yield row("C", 0.5, base_n, base_n * a, base_n, base_n * a)


def emit_analytic(rows, out_dir: Path | str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "analytic_bias.csv"
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(ANALYTIC_CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


# --- single-trial trace ------------------------------------------------------


def _single_scenario(args) -> Scenario:
    try:
        pattern = TrendPattern(args.trend)
    except ValueError as exc:
        raise ConfigError(f"unknown trend '{args.trend}'") from exc
    config = validate(
        DesignConfig(
            n01=args.n01, n11=args.n11, n02=args.n02, n12=args.n12, n22=args.n22,
            alpha1=args.alpha1, alpha=args.alpha, sigma=args.sigma,
            theta1=args.theta1, theta2=args.theta2,
            trend=TimeTrendSpec(pattern, getattr(args, "lambda")),
        )
    )
    bootstrap = (
        BootstrapSettings(b=args.bootstrap_b, seed=0) if args.bootstrap_b > 0 else None
    )
    return Scenario(
        scenario_id="single",
        config=config,
        hypothesis="null" if config.theta2 == 0.0 else "alternative",
        replicates=1,
        bootstrap=bootstrap,
    )


def run_single(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    scenario = _single_scenario(args)
    result = run_replicate(scenario, args.seed, 0)
    interim = result.interim
    decision = "continue" if interim.continued else "stop"
    print(f"seed: {args.seed}", file=out)
    print(f"z11: {_fmt(interim.z11)}", file=out)
    print(f"c1: {_fmt(interim.c1)}", file=out)
    print(f"decision: {decision}", file=out)
    header = f"{'method':<14} {'estimate':>22} {'bias_correction':>22} {'variance':>22} {'t':>22} {'rejected':>8}"
    print(header, file=out)
    for method in METHODS:
        record = result.records[method]
        print(
            f"{method:<14} {_fmt(record.estimate):>22} "
            f"{_fmt(record.bias_correction):>22} {_fmt(record.variance):>22} "
            f"{_fmt(record.t_statistic):>22} {_fmt(record.rejected):>8}",
            file=out,
        )
    if args.csv is not None:
        data = simulate_trial(
            scenario.config, replicate_stream(args.seed, scenario, 0, 0)
        )
        path = Path(args.csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(("j", "arm", "period", "y"))
            for j, arm, period, y in zip(data.patient, data.arm, data.period, data.y):
                writer.writerow((int(j), int(arm), int(period), repr(float(y))))
        print(f"patient data written to {path}", file=out)
    return 0


# --- entry point -------------------------------------------------------------


def _add_design_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n01", type=int, default=150)
    parser.add_argument("--n11", type=int, default=150)
    parser.add_argument("--n02", type=int, default=150)
    parser.add_argument("--n12", type=int, default=150)
    parser.add_argument("--n22", type=int, default=150)
    parser.add_argument("--alpha1", type=float, default=0.5)
    parser.add_argument("--alpha", type=float, default=0.025)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--theta1", type=float, default=0.0)
    parser.add_argument("--theta2", type=float, default=0.0)
    parser.add_argument("--trend", default="none", choices=[p.value for p in TrendPattern])
    parser.add_argument("--lambda", type=float, default=0.0, dest="lambda")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nccsim",
        description="Platform-trial simulation with non-concurrent controls "
        "and a futility interim analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run scenarios from a plan file")
    sim.add_argument("--config", required=True, type=Path, help="scenario plan file")
    sim.add_argument("--seed", required=True, type=int, help="master seed")
    sim.add_argument("--out", required=True, type=Path, help="output directory")
    sim.add_argument("--replicates", type=int, default=None, help="override replicate count")
    sim.add_argument("--bootstrap-b", type=int, default=None, help="override bootstrap resamples (0 disables)")
    sim.add_argument("--workers", type=int, default=1)

    ana = sub.add_parser("analytic", help="closed-form bias curves as CSV")
    ana.add_argument("--out", required=True, type=Path)
    ana.add_argument("--theta1", type=float, default=0.0)

    single = sub.add_parser("single", help="trace one simulated trial")
    single.add_argument("--seed", required=True, type=int)
    single.add_argument("--bootstrap-b", type=int, default=DEFAULT_BOOTSTRAP_B)
    single.add_argument("--csv", type=Path, default=None, help="dump patient rows to CSV")
    _add_design_flags(single)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            scenarios = parse_config(
                args.config,
                replicates_override=args.replicates,
                bootstrap_b_override=args.bootstrap_b,
            )
            results = [
                run_scenario(s, args.seed, workers=args.workers) for s in scenarios
            ]
            csv_path, json_path = emit_results(results, args.out, args.seed)
            print(f"wrote {csv_path} and {json_path}")
            return 0
        if args.command == "analytic":
            path = emit_analytic(analytic_rows(theta1=args.theta1), args.out)
            print(f"wrote {path}")
            return 0
        if args.command == "single":
            return run_single(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
