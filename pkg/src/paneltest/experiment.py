"""Batch driver for the synthetic experiments.

Runs a sweep of generator settings, repeats each point over independent
trials, and aggregates rejection rates with binomial confidence intervals.
Every trial derives its own random substreams from (master seed, sweep index,
trial index), so results are identical whether trials run sequentially or on
a process pool, and two runs of the same spec produce byte-identical outputs.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InputError, PanelTestError, ParameterError
from .baselines import baseline_test
from .kernels import KernelConfig
from .panels import SamplePanel
from .power import (
    SearchGrid,
    median_scaled_grid,
    paper_grid,
    select_bandwidth,
    split_train_test,
)
from .synthgen import GeneratorSpec, generate
from .testing import TestConfig, hsic_independence_test, mmd_two_sample_test

CONFIG_FORMAT_VERSION = "paneltest-ini/1"

TEST_VARIANTS = (
    "mmd_baseline",
    "mmd_optimised",
    "hsic_baseline",
    "hsic_optimised",
    "subcorr",
    "subhsic",
)

SWEEP_PARAMETERS = ("delta_mu", "delta_sigma", "theta", "m")

_COMPATIBLE_PROTOCOLS = {
    "mmd_baseline": ("meanshift", "varshift"),
    "mmd_optimised": ("meanshift", "varshift"),
    "hsic_baseline": ("lineardep", "sharedcoeff", "rotation"),
    "hsic_optimised": ("lineardep", "sharedcoeff", "rotation"),
    "subcorr": ("lineardep",),
    "subhsic": ("lineardep",),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a test variant swept over generator settings."""

    name: str
    test: str
    protocol: str
    m: int
    t: int
    sweep_parameter: str
    sweep_values: tuple[float, ...]
    n: int | None = None
    trials: int = 200
    alpha: float = 0.05
    permutations: int = 500
    seed: int = 0
    coeff_dist: str = "gaussian"
    y_noise_var: float = 1.0
    delta_mu: float = 0.0
    delta_sigma: float = 0.0
    theta: float = 0.0
    split_ratio: float = 0.5
    grid: str = "paper"
    out_dir: str | None = None
    formats: tuple[str, ...] = ("csv", "json", "svg")

    def __post_init__(self) -> None:
        if self.test not in TEST_VARIANTS:
            raise InputError(f"unknown test variant: {self.test!r}")
        if self.protocol not in _COMPATIBLE_PROTOCOLS[self.test]:
            raise InputError(
                f"test {self.test!r} does not apply to protocol {self.protocol!r} "
                f"(expected one of {_COMPATIBLE_PROTOCOLS[self.test]})"
            )
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise InputError(f"unknown sweep parameter: {self.sweep_parameter!r}")
        if not self.sweep_values:
            raise InputError("sweep must contain at least one point")
        if self.trials < 1:
            raise InputError(f"trials must be >= 1, got {self.trials}")
        unknown = set(self.formats) - {"csv", "json", "svg"}
        if unknown:
            raise InputError(f"unknown output formats: {sorted(unknown)}")

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        """Read an experiment spec from an INI file (see README for the dialect)."""
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise InputError(f"spec file not found or unreadable: {path}")
        try:
            exp = parser["experiment"]
            gen = parser["generator"]
            sweep = parser["sweep"]
        except KeyError as exc:
            raise InputError(f"{path}: missing section {exc}") from exc
        search = parser["search"] if parser.has_section("search") else {}
        try:
            sweep_values = tuple(
                float(v.strip()) for v in sweep["values"].split(",") if v.strip()
            )
            formats = tuple(
                f.strip() for f in exp.get("formats", "csv, json, svg").split(",") if f.strip()
            )
            return cls(
                name=exp.get("name", Path(path).stem),
                test=exp["test"].strip(),
                protocol=gen["protocol"].strip(),
                m=gen.getint("m"),
                n=gen.getint("n") if "n" in gen else None,
                t=gen.getint("t"),
                sweep_parameter=sweep["parameter"].strip(),
                sweep_values=sweep_values,
                trials=exp.getint("trials", 200),
                alpha=exp.getfloat("alpha", 0.05),
                permutations=exp.getint("permutations", 500),
                seed=exp.getint("seed", 0),
                coeff_dist=gen.get("dist", "gaussian").strip(),
                y_noise_var=gen.getfloat("y_noise_var", 1.0),
                delta_mu=gen.getfloat("delta_mu", 0.0),
                delta_sigma=gen.getfloat("delta_sigma", 0.0),
                theta=gen.getfloat("theta", 0.0),
                split_ratio=float(search.get("split_ratio", 0.5)),
                grid=str(search.get("grid", "paper")).strip(),
                out_dir=exp.get("out", None),
                formats=formats,
            )
        except (KeyError, ValueError) as exc:
            raise InputError(f"{path}: {exc}") from exc


@dataclass
class SweepPointResult:
    """Aggregated outcome of all trials at one sweep point."""

    parameter: float
    mu_hat: float
    ci_low: float
    ci_high: float
    trials: int
    rejects: list
    seconds: float = 0.0  # informational; excluded from serialised outputs


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    points: list

    def to_dict(self) -> dict:
        spec = asdict(self.spec)
        spec["sweep_values"] = list(self.spec.sweep_values)
        spec["formats"] = list(self.spec.formats)
        return {
            "config_format": CONFIG_FORMAT_VERSION,
            "spec": spec,
            "points": [
                {
                    "parameter": p.parameter,
                    "mu_hat": p.mu_hat,
                    "ci_low": p.ci_low,
                    "ci_high": p.ci_high,
                    "trials": p.trials,
                    "rejects": [bool(r) for r in p.rejects],
                }
                for p in self.points
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentResult":
        spec_data = dict(data["spec"])
        spec_data["sweep_values"] = tuple(spec_data["sweep_values"])
        spec_data["formats"] = tuple(spec_data["formats"])
        spec = ExperimentSpec(**spec_data)
        points = [
            SweepPointResult(
                parameter=p["parameter"],
                mu_hat=p["mu_hat"],
                ci_low=p["ci_low"],
                ci_high=p["ci_high"],
                trials=p["trials"],
                rejects=[bool(r) for r in p["rejects"]],
            )
            for p in data["points"]
        ]
        return cls(spec=spec, points=points)


def confidence_interval(mu_hat: float, trials: int) -> tuple[float, float]:
    """95% normal-approximation interval for a rejection rate, clipped to [0, 1]."""
    half = 1.96 * math.sqrt(mu_hat * (1.0 - mu_hat) / trials)
    return max(mu_hat - half, 0.0), min(mu_hat + half, 1.0)


def _generator_for(spec: ExperimentSpec, value: float, seed: int) -> GeneratorSpec:
    params = {
        "delta_mu": spec.delta_mu,
        "delta_sigma": spec.delta_sigma,
        "theta": spec.theta,
        "m": spec.m,
    }
    params[spec.sweep_parameter] = value
    m = int(params["m"])
    n = spec.n if spec.sweep_parameter != "m" else None
    return GeneratorSpec(
        protocol=spec.protocol,
        m=m,
        n=n,
        t=spec.t,
        delta_mu=params["delta_mu"],
        delta_sigma=params["delta_sigma"],
        theta=params["theta"],
        coeff_dist=spec.coeff_dist,
        y_noise_var=spec.y_noise_var,
        seed=seed,
    )


def _mmd_grid(spec: ExperimentSpec, value: float, train_x, train_y) -> SearchGrid:
    if spec.grid == "median":
        return median_scaled_grid(train_x, train_y)
    if spec.grid == "paper":
        delta = value if spec.sweep_parameter in ("delta_mu", "delta_sigma") else (
            spec.delta_mu if spec.protocol == "meanshift" else spec.delta_sigma
        )
        return paper_grid(spec.protocol, delta, train_x, train_y)
    return _custom_grid(spec.grid)


def _hsic_grids(spec: ExperimentSpec, train_x, train_y) -> tuple[SearchGrid, SearchGrid]:
    if spec.grid == "paper" and spec.protocol == "rotation":
        grid = paper_grid(f"rotation_{spec.coeff_dist}")
        return grid, grid
    if spec.grid in ("paper", "median"):
        return median_scaled_grid(train_x), median_scaled_grid(train_y)
    grid = _custom_grid(spec.grid)
    return grid, grid


def _custom_grid(text: str) -> SearchGrid:
    try:
        values = sorted(float(v.strip()) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"cannot parse grid {text!r}: {exc}") from exc
    if not values:
        raise InputError(f"grid specification {text!r} is empty")
    return SearchGrid(np.array(values), "custom")


def run_single_trial(spec: ExperimentSpec, point_index: int, trial_index: int) -> bool:
    """Run one seeded trial; returns the test's reject decision."""
    value = spec.sweep_values[point_index]
    keys = np.random.SeedSequence(
        [int(spec.seed), int(point_index), int(trial_index)]
    ).generate_state(5, dtype=np.uint64)
    panel_x, panel_y = generate(_generator_for(spec, value, int(keys[0])))
    config = TestConfig(
        alpha=spec.alpha, permutations=spec.permutations, seed=int(keys[4])
    )

    if spec.test == "mmd_baseline":
        result = mmd_two_sample_test(
            panel_x, panel_y, KernelConfig.median_aggregated(), config
        )
    elif spec.test == "mmd_optimised":
        # the two sides are independent draws, so each gets its own split
        train_x, test_x = split_train_test(panel_x.m, spec.split_ratio, int(keys[1]))
        train_y, test_y = split_train_test(panel_y.m, spec.split_ratio, int(keys[2]))
        tx, ty = panel_x.take(train_x), panel_y.take(train_y)
        search = select_bandwidth(
            tx, ty, _mmd_grid(spec, value, tx, ty), "mmd", seed=int(keys[3]),
            train_idx=train_x, test_idx=test_x,
        )
        result = mmd_two_sample_test(
            panel_x.take(test_x),
            panel_y.take(test_y),
            KernelConfig.fixed(search.selected),
            config,
        )
    elif spec.test == "hsic_baseline":
        result = hsic_independence_test(
            panel_x,
            panel_y,
            KernelConfig.median_per_sample(),
            KernelConfig.median_per_sample(),
            config,
        )
    elif spec.test == "hsic_optimised":
        # rows are paired, so one partition is shared by both panels
        train, test = split_train_test(panel_x.m, spec.split_ratio, int(keys[1]))
        tx, ty = panel_x.take(train), panel_y.take(train)
        grid_x, grid_y = _hsic_grids(spec, tx, ty)
        search = select_bandwidth(
            tx, ty, grid_x, "hsic", grid_y=grid_y, seed=int(keys[3]),
            train_idx=train, test_idx=test,
        )
        sigma_x, sigma_y = search.selected
        result = hsic_independence_test(
            panel_x.take(test),
            panel_y.take(test),
            KernelConfig.fixed(sigma_x),
            KernelConfig.fixed(sigma_y),
            config,
        )
    else:
        result = baseline_test(spec.test, panel_x, panel_y, config)
    return bool(result.reject)


def _trial_star(args: tuple) -> bool:
    return run_single_trial(*args)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Run all sweep points; trials run on a process pool when workers > 1.

    A failing trial aborts its sweep point with a diagnostic naming the
    point and trial; nothing is skipped silently.
    """
    points = []
    for point_index, value in enumerate(spec.sweep_values):
        start = time.perf_counter()
        rejects: list = [None] * spec.trials
        try:
            if workers > 1:
                tasks = [(spec, point_index, i) for i in range(spec.trials)]
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    for i, reject in enumerate(pool.map(_trial_star, tasks)):
                        rejects[i] = reject
            else:
                for i in range(spec.trials):
                    rejects[i] = run_single_trial(spec, point_index, i)
        except PanelTestError as exc:
            raise PanelTestError(
                f"sweep point {spec.sweep_parameter}={value} failed: {exc}"
            ) from exc
        mu_hat = float(np.mean(rejects))
        ci_low, ci_high = confidence_interval(mu_hat, spec.trials)
        points.append(
            SweepPointResult(
                parameter=float(value),
                mu_hat=mu_hat,
                ci_low=ci_low,
                ci_high=ci_high,
                trials=spec.trials,
                rejects=rejects,
                seconds=time.perf_counter() - start,
            )
        )
    return ExperimentResult(spec=spec, points=points)


def emit_results(
    result: ExperimentResult,
    formats: tuple[str, ...] | None = None,
    out_dir=None,
) -> dict:
    """Write the result as CSV/JSON/SVG files; returns format -> path.

    CSV and JSON are byte-identical across runs of the same spec; the SVG is
    rendered with matplotlib (deterministic content, see plotting module).
    """
    spec = result.spec
    formats = spec.formats if formats is None else formats
    out = Path(spec.out_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict = {}
    if "csv" in formats:
        path = out / "results.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [spec.sweep_parameter, "mu_hat", "ci_low", "ci_high", "trials", "seed"]
            )
            for p in result.points:
                writer.writerow(
                    [
                        repr(p.parameter),
                        repr(p.mu_hat),
                        repr(p.ci_low),
                        repr(p.ci_high),
                        p.trials,
                        spec.seed,
                    ]
                )
        paths["csv"] = path
    if "json" in formats:
        path = out / "results.json"
        with open(path, "w") as fh:
            json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths["json"] = path
    if "svg" in formats:
        from .plotting import power_curve

        path = out / "power_curve.svg"
        power_curve([result], path)
        paths["svg"] = path
    return paths
