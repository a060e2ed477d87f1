"""Command-line interface.

Subcommands: mmd-test, hsic-test, power-opt, synth, experiment, ingest.
Exit codes: 0 success, 2 usage errors, 3 input/data errors, 4 numerical
degeneracies (zero median bandwidth, unusable null moments, empty search).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateBandwidthError,
    DegenerateNullError,
    InputError,
    PanelTestError,
    SearchError,
)
from .experiment import ExperimentSpec, emit_results, run_experiment
from .ingest import (
    PanelSchema,
    aggregate_to_targets,
    impute_with_report,
    load_csv,
    write_manifest,
    write_panel_csvs,
)
from .kernels import KernelConfig
from .panels import SamplePanel
from .power import SearchGrid, median_scaled_grid, paper_grid, select_bandwidth, split_train_test
from .synthgen import GeneratorSpec, generate
from .testing import TestConfig, hsic_independence_test, mmd_two_sample_test

_GRID_PRESETS = {
    "rotation-student": "rotation_student",
    "rotation-uniform": "rotation_uniform",
    "rotation-exponential": "rotation_exponential",
}


def _print_json(data: dict) -> None:
    json.dump(data, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, dtype=np.uint64)[0])


def _cmd_mmd_test(args) -> int:
    panel_x = SamplePanel.from_csv(args.x)
    panel_y = SamplePanel.from_csv(args.y)
    if args.sigma is not None:
        kernel = KernelConfig.fixed(args.sigma)
    elif args.median == "per-sample":
        kernel = KernelConfig.median_per_sample()
    else:
        kernel = KernelConfig.median_aggregated()
    config = TestConfig(alpha=args.alpha, permutations=args.perms, seed=args.seed)
    result = mmd_two_sample_test(panel_x, panel_y, kernel, config)
    _print_json(result.to_dict())
    return 0


def _cmd_hsic_test(args) -> int:
    panel_x = SamplePanel.from_csv(args.x)
    panel_y = SamplePanel.from_csv(args.y)
    kernel_x = (
        KernelConfig.fixed(args.sigma_x) if args.sigma_x is not None
        else KernelConfig.median_per_sample()
    )
    kernel_y = (
        KernelConfig.fixed(args.sigma_y) if args.sigma_y is not None
        else KernelConfig.median_per_sample()
    )
    config = TestConfig(alpha=args.alpha, permutations=args.perms, seed=args.seed)
    result = hsic_independence_test(panel_x, panel_y, kernel_x, kernel_y, config)
    _print_json(result.to_dict())
    return 0


def _parse_grid(text: str, kind: str, train_x, train_y) -> tuple[SearchGrid, SearchGrid | None]:
    """Grid flag: 'median', a paper preset, or a comma-separated value list."""
    text = text.strip()
    if text == "median":
        if kind == "mmd":
            return median_scaled_grid(train_x, train_y), None
        return median_scaled_grid(train_x), median_scaled_grid(train_y)
    if text in _GRID_PRESETS:
        grid = paper_grid(_GRID_PRESETS[text])
        return grid, (grid if kind == "hsic" else None)
    if ":" in text:
        family, _, raw_delta = text.partition(":")
        if family not in ("meanshift", "varshift"):
            raise InputError(f"unknown grid preset {text!r}")
        try:
            delta = float(raw_delta)
        except ValueError:
            raise InputError(f"bad shift value in grid preset {text!r}") from None
        grid = paper_grid(family, delta, train_x, train_y)
        return grid, (grid if kind == "hsic" else None)
    try:
        values = sorted(float(v.strip()) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None
    if not values:
        raise InputError("grid list is empty")
    grid = SearchGrid(np.array(values), "custom")
    return grid, (grid if kind == "hsic" else None)


def _cmd_power_opt(args) -> int:
    panel_x = SamplePanel.from_csv(args.x)
    panel_y = SamplePanel.from_csv(args.y)
    if args.kind == "mmd":
        train_x, test_x = split_train_test(panel_x.m, args.split, _derived_seed(args.seed, 1))
        train_y, _ = split_train_test(panel_y.m, args.split, _derived_seed(args.seed, 2))
        tx, ty = panel_x.take(train_x), panel_y.take(train_y)
        grid, _ = _parse_grid(args.grid, "mmd", tx, ty)
        result = select_bandwidth(
            tx, ty, grid, "mmd", seed=_derived_seed(args.seed, 3),
            train_idx=train_x, test_idx=test_x,
        )
    else:
        if panel_x.m != panel_y.m:
            raise InputError("hsic power search needs panels with equal row counts")
        train, test = split_train_test(panel_x.m, args.split, _derived_seed(args.seed, 1))
        tx, ty = panel_x.take(train), panel_y.take(train)
        grid, grid_y = _parse_grid(args.grid, "hsic", tx, ty)
        result = select_bandwidth(
            tx, ty, grid, "hsic", grid_y=grid_y, seed=_derived_seed(args.seed, 3),
            train_idx=train, test_idx=test,
        )
    _print_json(result.to_dict())
    return 0


def _cmd_synth(args) -> int:
    if args.protocol == "rotation" and args.dist is None:
        raise InputError("rotation needs --dist student|uniform|exponential")
    spec = GeneratorSpec(
        protocol=args.protocol,
        m=args.m,
        n=args.n,
        t=args.t,
        delta_mu=args.delta_mu,
        delta_sigma=args.delta_sigma,
        theta=args.theta,
        coeff_dist=args.dist if args.dist is not None else "gaussian",
        seed=args.seed,
    )
    panel_x, panel_y = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path_x, path_y = out / "x.csv", out / "y.csv"
    panel_x.to_csv(path_x)
    panel_y.to_csv(path_y)
    _print_json({"x": str(path_x), "y": str(path_y)})
    return 0


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    if args.paper_scale:
        spec = replace(spec, permutations=5000)
    if args.out is not None:
        spec = replace(spec, out_dir=args.out)
    if spec.out_dir is None:
        spec = replace(spec, out_dir="results")
    result = run_experiment(spec, workers=args.workers)
    paths = emit_results(result)
    _print_json(
        {
            "outputs": {fmt: str(path) for fmt, path in paths.items()},
            "rejection_rates": {
                repr(p.parameter): p.mu_hat for p in result.points
            },
        }
    )
    return 0


def _cmd_ingest(args) -> int:
    schema = PanelSchema.from_file(args.schema)
    panel = load_csv(args.input, schema)
    report: list = []
    if args.impute:
        panel, report = impute_with_report(panel)
    if args.aggregate:
        panel = aggregate_to_targets(panel)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = write_panel_csvs(panel, out)
    manifest = out / "manifest.txt"
    write_manifest(manifest, schema, report, panel)
    _print_json(
        {
            "panels": [str(p) for p in paths],
            "manifest": str(manifest),
            "cells_filled": len(report),
            "missing_cells": panel.n_missing,
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paneltest",
        description="Kernel two-sample and independence tests for time-series panels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mmd-test", help="two-sample test on two panel CSVs")
    p.add_argument("--x", required=True, help="CSV of the first panel")
    p.add_argument("--y", required=True, help="CSV of the second panel")
    bw = p.add_mutually_exclusive_group()
    bw.add_argument("--sigma", type=float, help="fixed Gaussian bandwidth")
    bw.add_argument(
        "--median",
        choices=("aggregated", "per-sample"),
        default="aggregated",
        help="median-heuristic flavour (default: aggregated)",
    )
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--perms", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_mmd_test)

    p = sub.add_parser("hsic-test", help="independence test on two panel CSVs")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--sigma-x", type=float, help="fixed bandwidth for X (default: median)")
    p.add_argument("--sigma-y", type=float, help="fixed bandwidth for Y (default: median)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--perms", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_hsic_test)

    p = sub.add_parser("power-opt", help="bandwidth search maximising estimated power")
    p.add_argument("--kind", choices=("mmd", "hsic"), required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument(
        "--grid",
        required=True,
        help="'median', a preset (meanshift:<d>, varshift:<d>, rotation-student, "
        "rotation-uniform, rotation-exponential), or comma-separated bandwidths",
    )
    p.add_argument("--split", type=float, default=0.5, help="training fraction")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_power_opt)

    p = sub.add_parser("synth", help="generate a synthetic panel pair")
    p.add_argument(
        "--protocol",
        choices=("meanshift", "varshift", "lineardep", "sharedcoeff", "rotation"),
        required=True,
    )
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--delta-mu", type=float, default=0.0)
    p.add_argument("--delta-sigma", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--dist", choices=("student", "uniform", "exponential"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory for x.csv and y.csv")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("experiment", help="run a sweep described by a spec file")
    p.add_argument("--spec", required=True, help="INI spec file (see README)")
    p.add_argument("--out", help="override the spec's output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    p.add_argument(
        "--paper-scale",
        action="store_true",
        help="use 5000 permutations instead of the spec's value",
    )
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("ingest", help="load, impute, and aggregate a raw panel CSV")
    p.add_argument("--input", required=True, help="raw CSV file")
    p.add_argument("--schema", required=True, help="INI schema file (see README)")
    p.add_argument("--impute", action="store_true", help="fill missing cells")
    p.add_argument("--aggregate", action="store_true", help="average indicators into targets")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_ingest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateBandwidthError, DegenerateNullError, SearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PanelTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
