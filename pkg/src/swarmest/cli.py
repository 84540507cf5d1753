"""Command-line runner: ``swarmest <scenario> [--config FILE] [--key value ...]``.

Any config field can be overridden as ``--field-name value``; dashes and
underscores are interchangeable. Precedence is command line > file > defaults.
Outputs land in ``--out``, else ``$SWARMEST_OUT``, else ``./swarmest_out``.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, Scenario
from .consensus import static_sweep, summarize_static
from .engine import TRAJECTORY_HEADER, EstimateRecord, RunResult, run_control_experiment, run_dispersion, run_full_scenario
from .errors import ConfigError
from .metrics import MetricsRecord

OUT_ENV = "SWARMEST_OUT"
STATIC_COLUMNS = ("range_ratio", "mean_degree", "steady_E_P", "passage_time", "lambda2", "connected_fraction")
RUN_COLUMNS = ("A_cover", "mean_degree", "giant_component", "E_T", "E_P", "E_A", "robots_in_region")


# -- argument handling -------------------------------------------------------
def _parse_overrides(tokens: list[str]) -> dict:
    """Turn ``--key value`` / ``--key=value`` / bare ``--flag`` tokens into a dict."""
    out: dict = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}", "argv")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens) and not tokens[i + 1].startswith("--"):
            value = tokens[i + 1]
            i += 2
        else:
            value = "true"
            i += 1
        out[key.replace("-", "_")] = value
    return out


def _parse_grid(specs: list[str]) -> dict[str, list[str]]:
    grid: dict[str, list[str]] = {}
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"expected name=v1,v2,... got {spec!r}", "grid")
        name, values = spec.split("=", 1)
        name = name.replace("-", "_")
        vals = [v for v in values.split(",") if v != ""]
        if not vals:
            raise ConfigError("empty value list", name)
        if name in grid:
            raise ConfigError("swept twice", name)
        grid[name] = vals
    if not grid:
        raise ConfigError("sweep needs at least one --grid name=values", "grid")
    return grid


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmest", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True)
    for name in [s.value for s in Scenario] + ["sweep"]:
        sp = sub.add_parser(
            name, help=f"run the {name} experiment" if name != "sweep" else "parameter grid over seeds", allow_abbrev=False
        )
        sp.add_argument("--config", help="flat TOML config file")
        if name == "sweep":
            sp.add_argument("--grid", action="append", default=[], metavar="NAME=V1,V2", help="swept parameter")
    return p


def resolve_config(config_path: str | None, overrides: dict, scenario: str | None) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(config_path) if config_path else ExperimentConfig()
    if scenario is not None:
        overrides = {**overrides, "scenario": scenario}
    return ExperimentConfig.from_mapping(overrides, cfg).validate()


def output_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out or os.environ.get(OUT_ENV, "") or "swarmest_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- writers ------------------------------------------------------------------
def metrics_csv(records: list[MetricsRecord]) -> str:
    return MetricsRecord.CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in records)


def estimates_csv(records: list[EstimateRecord]) -> str:
    return EstimateRecord.CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in records)


def trajectory_csv(rows) -> str:
    lines = [TRAJECTORY_HEADER]
    for t, i, x, y, h, phase, est in rows:
        lines.append(f"{t:.12g},{i},{x:.12g},{y:.12g},{h:.12g},{phase},{est:.12g}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def table_csv(columns, rows) -> str:
    return ",".join(columns) + "\n" + "".join(",".join(_fmt(r[c]) for c in columns) + "\n" for r in rows)


# -- scenarios ----------------------------------------------------------------
def run_seed(cfg: ExperimentConfig, seed: int) -> RunResult:
    kind = Scenario(cfg.scenario)
    if kind is Scenario.DISPERSE:
        return run_dispersion(cfg, seed)
    if kind is Scenario.FULL:
        return run_full_scenario(cfg, seed)
    if kind is Scenario.CONTROL:
        return run_control_experiment(cfg, cfg.t_sw, seed)
    raise ValueError(f"{cfg.scenario} is not a per-seed scenario")


def run_static(cfg: ExperimentConfig) -> list[dict]:
    ratios = cfg.sweep_ratios()
    trials = static_sweep(
        cfg.n, ratios, cfg.mc, cfg.consensus_params(), seed=cfg.seed, workers=cfg.workers,
        raw_passage=cfg.raw_passage,
    )
    return [summarize_static(r, t) for r, t in zip(ratios, trials)]


def _stem(cfg: ExperimentConfig, seed: int) -> str:
    if cfg.scenario == Scenario.CONTROL.value:
        return f"control_tsw{cfg.t_sw}_seed{seed}"
    return f"{cfg.scenario}_seed{seed}"


def execute(cfg: ExperimentConfig) -> dict:
    """Run one scenario, write its files and return the summary dict."""
    out = output_dir(cfg)
    t0 = time.perf_counter()
    summary: dict = {"scenario": cfg.scenario, "config": cfg.as_dict(), "seeds": cfg.seed_list()}
    if cfg.scenario == Scenario.CONSENSUS_STATIC.value:
        rows = run_static(cfg)
        (out / "consensus_static.csv").write_text(table_csv(STATIC_COLUMNS, rows))
        summary["sweep"] = rows
    else:
        finals = []
        for seed in cfg.seed_list():
            res = run_seed(cfg, seed)
            stem = _stem(cfg, seed)
            (out / f"{stem}.csv").write_text(metrics_csv(res.records))
            if cfg.scenario != Scenario.DISPERSE.value:
                (out / f"{stem}_estimates.csv").write_text(estimates_csv(res.estimate_records))
            if cfg.trajectory:
                (out / f"{stem}_trajectory.csv").write_text(trajectory_csv(res.trajectory))
            finals.append({"seed": seed, **res.records[-1].as_dict(), "z_gt": res.z_gt})
        summary["final"] = finals
    summary["wall_time_s"] = time.perf_counter() - t0
    name = cfg.scenario.replace("-", "_")
    (out / f"{name}_summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    return summary


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(type(v).__name__)


# -- sweep --------------------------------------------------------------------
def _point_rows(cfg: ExperimentConfig) -> list[tuple[dict, list[dict]]]:
    """(key columns, replicate metrics) groups for one grid point."""
    if cfg.scenario == Scenario.CONSENSUS_STATIC.value:
        ratios = cfg.sweep_ratios()
        groups = static_sweep(cfg.n, ratios, cfg.mc, cfg.consensus_params(), seed=cfg.seed, raw_passage=cfg.raw_passage)
        out = []
        for r, trials in zip(ratios, groups):
            reps = [
                {"mean_degree": t.mean_degree, "steady_E_P": t.steady_precision, "passage_time": t.passage_time,
                 "lambda2": t.lambda2, "giant_component": t.giant_component}
                for t in trials
            ]
            out.append(({"range_ratio": r}, reps))
        return out
    reps = []
    for seed in cfg.seed_list():
        rec = run_seed(cfg, seed).records[-1].as_dict()
        reps.append({k: rec[k] for k in RUN_COLUMNS})
    return [({}, reps)]


def _sweep_job(data: dict) -> list[tuple[dict, list[dict]]]:
    return _point_rows(ExperimentConfig(**data))


def run_sweep(base: ExperimentConfig, grid: dict[str, list[str]], fixed: dict) -> tuple[list[str], list[dict]]:
    clash = sorted(set(grid) & set(fixed))
    if clash:
        raise ConfigError("given both as a fixed value and as a swept parameter", clash[0])
    names = list(grid)
    points = []
    for combo in itertools.product(*(grid[n] for n in names)):
        cfg = ExperimentConfig.from_mapping(dict(zip(names, combo)), base).validate()
        points.append((cfg, dict(zip(names, (getattr(cfg, n) for n in names)))))
    jobs = [cfg.as_dict() for cfg, _ in points]
    if base.workers > 1:
        with ProcessPoolExecutor(max_workers=base.workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    rows = []
    columns: list[str] = []
    for (_, params), groups in zip(points, results):
        for key, reps in groups:
            row = {**params, **key, "replicates": len(reps)}
            for m in reps[0]:
                vals = np.array([r[m] for r in reps], dtype=float)
                row[m + "_mean"] = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
                row[m + "_sd"] = float(np.nanstd(vals)) if np.isfinite(vals).any() else float("nan")
            if not columns:
                columns = list(row)
            rows.append(row)
    return columns, rows


# -- entry point --------------------------------------------------------------
def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    try:
        overrides = _parse_overrides(rest)
        if args.command == "sweep":
            grid = _parse_grid(args.grid)
            base = resolve_config(args.config, overrides, None)
            if base.scenario not in {s.value for s in Scenario}:
                raise ConfigError("unknown scenario", "scenario")
            t0 = time.perf_counter()
            columns, rows = run_sweep(base, grid, overrides)
            out = output_dir(base)
            (out / "sweep.csv").write_text(table_csv(columns, rows))
            summary = {"config": base.as_dict(), "grid": grid, "seeds": base.seed_list(),
                       "wall_time_s": time.perf_counter() - t0}
            (out / "sweep_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
            print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
        else:
            cfg = resolve_config(args.config, overrides, args.command)
            summary = execute(cfg)
            print(f"{cfg.scenario}: done in {summary['wall_time_s']:.1f} s, outputs in {output_dir(cfg)}")
    except ConfigError as exc:
        print(f"swarmest: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"swarmest: runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
