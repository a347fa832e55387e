"""Command-line front end: stats, fit, moments, simulate, validate, reduce.

Reports are JSON (sorted keys, embedded effective configuration) plus
plot-ready CSV tables; identical configurations produce byte-identical
output.  Exit codes: 0 success, 1 usage/config, 2 data, 3 numeric/optimizer,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import charfn, estimation, regimes
from .estimation import DataError, FitError
from .mixing import GammaMixing, build_partition, embedding_gap, inverse_mean
from .moments import (
    SupCbiParams,
    discrete_supcbi_acf,
    discrete_supcbi_stats,
    supcbi_acf,
    supcbi_stats,
)
from .regimes import InsufficientTransitionsError
from .simulator import (
    HOURS_PER_YEAR,
    InsufficientSamplesError,
    PathConfig,
    finalize_stats,
    simulate_supcbi,
)
from .tempered_levy import TemperedStableMeasure, levy_moment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

# minimum sample count below which skew/kurt estimates are flagged
MIN_HIGHER_MOMENT_SAMPLES = 10_000

_PARAM_KEYS = (
    "A_m3a_per_sa_per_h",
    "B",
    "D",
    "alpha",
    "b_s_per_m3",
    "beta",
    "eta_per_h",
    "xmin_m3s",
)


class ConfigError(ValueError):
    """Invalid flag value or parameter-file content."""


class ValidationFailure(RuntimeError):
    """One or more validation checks failed."""


# ---------------------------------------------------------------------------
# parameter files and report serialization


def load_params(path) -> SupCbiParams:
    """Read a parameter JSON file and cross-check B against the recorded D."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"parameter file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"parameter file {path} is not valid JSON: {exc}") from exc
    missing = [k for k in _PARAM_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"parameter file {path} missing keys: {missing}")
    vals = {}
    for key in _PARAM_KEYS:
        try:
            vals[key] = float(raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key} is not a number: {raw[key]!r}") from exc
    if not 0 < vals["D"] <= 1:
        raise ConfigError(f"D must be in (0, 1], got {vals['D']}")
    try:
        measure = TemperedStableMeasure(b=vals["b_s_per_m3"], alpha=vals["alpha"])
        mixing = GammaMixing(eta=vals["eta_per_h"], beta=vals["beta"])
        params = SupCbiParams(
            A=vals["A_m3a_per_sa_per_h"],
            B=vals["B"],
            measure=measure,
            mixing=mixing,
            xmin=vals["xmin_m3s"],
        )
    except ValueError as exc:
        raise ConfigError(f"parameter file {path}: {exc}") from exc
    implied = 1.0 - params.B * levy_moment(measure, 1)
    if abs(implied - vals["D"]) > 0.01 * vals["D"]:
        raise ConfigError(
            f"inconsistent parameter file: B implies D = {implied:.6g}, "
            f"recorded D = {vals['D']:.6g} (>1% apart)"
        )
    return params


def params_dict(params: SupCbiParams, D: float | None = None) -> dict:
    return {
        "A_m3a_per_sa_per_h": params.A,
        "B": params.B,
        "D": params.D if D is None else D,
        "alpha": params.measure.alpha,
        "b_s_per_m3": params.measure.b,
        "beta": params.mixing.beta,
        "eta_per_h": params.mixing.eta,
        "xmin_m3s": params.xmin,
    }


def _plain(obj):
    """JSON-safe conversion: dataclasses to dicts, arrays to lists,
    non-finite floats to None."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _effective_config(args) -> dict:
    keys = (
        "command",
        "input",
        "params",
        "D",
        "dt_h",
        "years",
        "seed",
        "thresholds",
        "max_lag_h",
        "out_dir",
        "dump_stride",
        "replicates",
    )
    # workers is deliberately omitted: it changes only how replicates are
    # scheduled, never the result, and reports must be byte-identical for
    # any worker count.
    return {k: getattr(args, k, None) for k in keys}


def _stats_block(stats) -> dict:
    return {
        "ave_m3s": stats.ave,
        "std_m3s": stats.std,
        "skew": stats.skew,
        "kurt_excess": stats.kurt,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_stats(args) -> int:
    series = estimation.load_csv(args.input)
    stats = estimation.empirical_stats(series)
    acf = estimation.empirical_acf(series, args.max_lag_h)
    out = Path(args.out_dir)
    write_json(
        out / "stats.json",
        {
            "config": _effective_config(args),
            "stats": _stats_block(stats),
            "n_samples": int(len(series.values)),
            "n_gaps": int(series.gaps.sum()),
            "acf_csv": "acf.csv",
        },
    )
    write_csv(out / "acf.csv", ("lag_h", "correlation"), acf)
    return EXIT_OK


def cmd_fit(args) -> int:
    if args.D is None:
        raise ConfigError("--D is required for fit")
    if not 0 < args.D <= 1:
        raise ConfigError(f"--D must be in (0, 1], got {args.D}")
    series = estimation.load_csv(args.input)
    stats = estimation.empirical_stats(series)
    acf = estimation.empirical_acf(series, args.max_lag_h)
    try:
        acf_fit = estimation.fit_acf(acf)
    except FitError as exc:
        raise FitError(f"ACF stage: {exc}", best=exc.best) from exc
    xmin = math.floor(series.present.min() * 100.0) / 100.0
    try:
        mom_fit = estimation.fit_moments(stats, args.D, acf_fit, xmin)
    except FitError as exc:
        raise FitError(f"moment stage: {exc}", best=exc.best) from exc
    payload = {
        "A_m3a_per_sa_per_h": mom_fit.A,
        "B": mom_fit.B,
        "D": args.D,
        "alpha": mom_fit.alpha,
        "b_s_per_m3": mom_fit.b,
        "beta": acf_fit.beta,
        "eta_per_h": acf_fit.U / args.D,
        "xmin_m3s": xmin,
        "fit": {
            "U_per_h": acf_fit.U,
            "acf_sse": acf_fit.sse,
            "acf_lag_cutoff": acf_fit.lag_cutoff,
            "er2": mom_fit.er2,
            "relative_errors": mom_fit.res,
            "empirical": _stats_block(stats),
        },
        "config": _effective_config(args),
    }
    write_json(Path(args.out_dir) / "params.json", payload)
    return EXIT_OK


def cmd_moments(args) -> int:
    params = load_params(args.params)
    stats = supcbi_stats(params)
    lags = range(1, args.max_lag_h + 1)
    acf_rows = [(s, supcbi_acf(params, s)) for s in lags]
    out = Path(args.out_dir)
    write_json(
        out / "moments.json",
        {
            "config": _effective_config(args),
            "params": params_dict(params),
            "stats": _stats_block(stats),
            "acf_csv": "acf_model.csv",
        },
    )
    write_csv(out / "acf_model.csv", ("lag_h", "correlation"), acf_rows)
    return EXIT_OK


def _path_config(args) -> PathConfig:
    if args.seed is None:
        raise ConfigError("--seed is required (no wall-clock default)")
    if not args.years > 0:
        raise ConfigError(f"--years must be > 0, got {args.years}")
    n_steps = int(round(args.years * HOURS_PER_YEAR / args.dt_h))
    if n_steps < 1:
        raise ConfigError("horizon shorter than one step")
    return PathConfig(dt=args.dt_h, n_steps=n_steps, seed=args.seed)


def cmd_simulate(args) -> int:
    params = load_params(args.params)
    cfg = _path_config(args)
    out = Path(args.out_dir)
    dumps = []
    sink = dumps.append if args.dump_stride > 0 else None
    acc, _ = simulate_supcbi(
        params,
        cfg,
        sink=sink,
        dump_stride=args.dump_stride,
        replicates=args.replicates,
        workers=args.workers,
    )
    warnings = []
    if acc.count < MIN_HIGHER_MOMENT_SAMPLES:
        warnings.append(
            f"only {acc.count} samples: skew/kurt estimates are unreliable"
        )
    try:
        mc = finalize_stats(acc)
    except InsufficientSamplesError as exc:
        warnings.append(str(exc))
        mc = finalize_stats(acc, need=("ave", "std"))
    model = supcbi_stats(params)
    rel = {
        name: (getattr(mc, name) - getattr(model, name)) / getattr(model, name)
        if math.isfinite(getattr(mc, name)) and getattr(model, name) != 0
        else None
        for name in ("ave", "std", "skew", "kurt")
    }
    payload = {
        "config": _effective_config(args),
        "params": params_dict(params),
        "n_samples": int(acc.count),
        "monte_carlo": _stats_block(mc),
        "closed_form": _stats_block(model),
        "relative_errors": rel,
        "warnings": warnings,
    }
    if sink is not None:
        rows = []
        idx = 0
        for arr in dumps:
            for v in arr:
                rows.append((idx, repr(float(v))))
                idx += 1
        write_csv(out / "path_dump.csv", ("sample_index", "discharge_m3s"), rows)
        payload["dump_csv"] = "path_dump.csv"
        payload["dump_rows"] = len(rows)
    write_json(out / "simulate.json", payload)
    return EXIT_OK


def cmd_validate(args) -> int:
    params = load_params(args.params)
    checks = []

    def record(name, passed, detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    # 1. finite-difference cumulants of the log characteristic function
    stats = supcbi_stats(params)
    exact = (
        stats.ave,
        stats.std**2,
        stats.skew * stats.std**3,
        stats.kurt * stats.std**4,
    )
    fd = charfn.charfn_cumulants(params)
    rel = [abs(a - b) / abs(b) for a, b in zip(fd, exact)]
    record(
        "charfn_cumulants_vs_moments",
        max(rel) < 0.01,
        {"relative_errors": rel, "tolerance": 0.01},
    )

    # 2. Riccati sensitivity at the origin
    dev = charfn.sensitivity_deviation(params.measure, params.B)
    record("riccati_sensitivity", dev < 1e-4, {"deviation": dev, "tolerance": 1e-4})

    # 3. embedding gap and characteristic-function distance, decreasing in n
    log_c = charfn.log_charfn(params, 1.0)
    d_table = []
    for n in (10, 100, 1000):
        part = build_partition(params.mixing, n)
        d_n = embedding_gap(params.mixing, part)
        log_cn = charfn.log_discrete_charfn(
            params.A, params.B, params.measure, part, params.xmin, 1.0
        )
        d_table.append({"n": n, "d_n": d_n, "log_charfn_gap": abs(log_cn - log_c)})
    record(
        "embedding_gap_decreasing",
        all(
            d_table[i]["d_n"] > d_table[i + 1]["d_n"]
            and d_table[i]["log_charfn_gap"] > d_table[i + 1]["log_charfn_gap"]
            for i in range(len(d_table) - 1)
        ),
        {"table": d_table},
    )

    # 4. discrete statistics at n=1000 vs continuous
    part = build_partition(params.mixing, 1000)
    dstats = discrete_supcbi_stats(params.A, params.B, params.measure, part, params.xmin)
    stat_rel = {
        name: abs(getattr(dstats, name) - getattr(stats, name))
        / abs(getattr(stats, name))
        for name in ("ave", "std", "skew", "kurt")
    }
    record(
        "discrete_stats_n1000",
        max(stat_rel.values()) < 0.02,
        {"relative_errors": stat_rel, "tolerance": 0.02},
    )

    # 5. discrete vs continuous ACF at a few lags
    acf_rel = {
        s: abs(discrete_supcbi_acf(part, params.D, s) - supcbi_acf(params, s))
        / supcbi_acf(params, s)
        for s in (1.0, 10.0, 100.0)
    }
    # long lags converge slower in n than the one-point statistics, hence
    # the looser tolerance
    record(
        "discrete_acf_n1000",
        max(acf_rel.values()) < 0.05,
        {"relative_errors": acf_rel, "tolerance": 0.05},
    )

    failed = [c["name"] for c in checks if not c["passed"]]
    write_json(
        Path(args.out_dir) / "validate.json",
        {
            "config": _effective_config(args),
            "params": params_dict(params),
            "checks": checks,
            "failed": failed,
        },
    )
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_reduce(args) -> int:
    params = load_params(args.params)
    thresholds = args.thresholds or []
    for thr in thresholds:
        if not thr > 0:
            raise ConfigError(f"thresholds must be > 0, got {thr}")
    report = []
    if thresholds:
        cfg = _path_config(args)
        report = regimes.reduce_model(
            params, cfg, thresholds, replicates=args.replicates, workers=args.workers
        )
    out = Path(args.out_dir)
    rows = []
    for entry in report:
        for regime in ("high", "low"):
            block = entry["regimes"].get(regime)
            if block is None or "error" in block:
                continue
            emp, mod, mstats = block["empirical"], block["model"], block["model_stats"]
            rows.append(
                (entry["threshold"], regime, "supCBI", "", "", "", "",
                 emp.ave, emp.std, emp.skew, emp.kurt, "")
            )
            rows.append(
                (entry["threshold"], regime, "MixExp",
                 mod.w1, mod.w2, mod.lambda1, mod.lambda2,
                 mstats.ave, mstats.std, mstats.skew, mstats.kurt, block["er2"])
            )
    write_json(
        out / "reduce.json",
        {
            "config": _effective_config(args),
            "params": params_dict(params),
            "report": report,
        },
    )
    write_csv(
        out / "reduce.csv",
        ("threshold", "regime", "row", "w1", "w2", "lambda1", "lambda2",
         "ave", "std", "skew", "kurt", "er2"),
        rows,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _thresholds(text):
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad threshold list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="supcbi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out-dir", default=".", help="report output directory")
        return p

    p = add("stats", cmd_stats, "empirical statistics and ACF of a discharge CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--max-lag-h", type=int, default=240)

    p = add("fit", cmd_fit, "two-stage parameter fit from a discharge CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--D", type=float, default=None)
    p.add_argument("--max-lag-h", type=int, default=240)

    p = add("moments", cmd_moments, "closed-form statistics and ACF for parameters")
    p.add_argument("--params", required=True)
    p.add_argument("--max-lag-h", type=int, default=240)

    p = add("simulate", cmd_simulate, "Monte Carlo path simulation vs closed form")
    p.add_argument("--params", required=True)
    p.add_argument("--dt-h", type=float, default=0.01)
    p.add_argument("--years", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dump-stride", type=int, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)

    p = add("validate", cmd_validate, "characteristic-function and embedding checks")
    p.add_argument("--params", required=True)

    p = add("reduce", cmd_reduce, "regime waiting-time extraction and mixture fits")
    p.add_argument("--params", required=True)
    p.add_argument("--thresholds", type=_thresholds, default=[])
    p.add_argument("--dt-h", type=float, default=0.01)
    p.add_argument("--years", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        FitError,
        FloatingPointError,
        charfn.IntegrabilityError,
        InsufficientSamplesError,
        InsufficientTransitionsError,
    ) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
