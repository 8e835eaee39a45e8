"""Command-line front end.

Subcommands:
  run      execute one scenario and emit a single-row result table
  sweep    execute a figure preset (fig3..fig7) or a config-defined sweep
  inspect  dump the posterior trajectory of one trial as JSON

Config files are TOML or JSON (chosen by extension). Top-level keys mirror
ScenarioConfig fields; a sweep config adds a ``sweep`` table with ``param``,
``values``, and optionally ``pairs`` and ``name``. Seed precedence:
``--seed`` flag, then the ANCS_SEED environment variable, then the config
file, then the default. Exit status is 0 on success and 1 on configuration
or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields, replace

from . import harness, tables

_SCENARIO_FIELDS = {f.name for f in fields(harness.ScenarioConfig)}


def _load_mapping(path: str) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    raise ValueError(f"config {path!r} must end in .toml or .json")


def _scenario_from_mapping(data: dict) -> harness.ScenarioConfig:
    unknown = set(data) - _SCENARIO_FIELDS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return harness.ScenarioConfig(**data)


def _sweep_from_mapping(data: dict) -> harness.SweepSpec:
    sweep = data.get("sweep")
    if not isinstance(sweep, dict):
        raise ValueError("sweep config needs a [sweep] table with 'param' and 'values'")
    scenario_keys = {k: v for k, v in data.items() if k != "sweep"}
    base = _scenario_from_mapping(scenario_keys)
    unknown = set(sweep) - {"param", "values", "pairs", "name"}
    if unknown:
        raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
    if "param" not in sweep or "values" not in sweep:
        raise ValueError("sweep table must define 'param' and 'values'")
    pairs = sweep.get("pairs")
    if pairs is None:
        pairs_tuple = harness.METHOD_PAIRS
    else:
        pairs_tuple = tuple((p[0], p[1]) for p in pairs)
    return harness.SweepSpec(
        base=base,
        param=sweep["param"],
        values=tuple(sweep["values"]),
        pairs=pairs_tuple,
        name=sweep.get("name", "custom"),
    )


def _resolve_seed(args, config_seed: int | None) -> int | None:
    """--seed beats ANCS_SEED beats the config file; None means untouched."""
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ANCS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"ANCS_SEED must be an integer, got {env!r}") from None
    return config_seed


def _apply_overrides(cfg: harness.ScenarioConfig, args) -> harness.ScenarioConfig:
    updates = {}
    seed = _resolve_seed(args, None)
    if seed is not None:
        updates["seed"] = seed
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    return replace(cfg, **updates) if updates else cfg


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {out!r}: {exc}") from exc


def _emit_rows(rows, args) -> None:
    if args.format == "csv":
        _write_output(tables.emit_csv(rows), args.out)
    else:
        _write_output(tables.emit_json(rows), args.out)


def _cmd_run(args) -> int:
    data = _load_mapping(args.config) if args.config else {}
    cfg = _apply_overrides(_scenario_from_mapping(data), args)
    summary = harness.run_scenario(cfg, threads=args.threads)
    row = tables.SweepRow(
        scenario_id="run",
        swept_param="none",
        swept_value=float("nan"),
        sampler=cfg.sampler,
        estimator=cfg.estimator,
        trials=summary.trials,
        tnmse_lin=summary.tnmse_lin,
        tnmse_db=summary.tnmse_db,
        roi_tnmse_db=summary.roi_tnmse_db,
        nonroi_tnmse_db=summary.nonroi_tnmse_db,
        stderr_lin=summary.stderr_lin,
    )
    _emit_rows([row], args)
    return 0


def _cmd_sweep(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise ValueError("sweep needs exactly one of --preset or --config")
    if args.preset is not None:
        seed = _resolve_seed(args, None)
        spec = harness.make_preset(args.preset, trials=args.trials, seed=seed)
    else:
        spec = _sweep_from_mapping(_load_mapping(args.config))
        base = _apply_overrides(spec.base, args)
        spec = replace(spec, base=base)
    rows = harness.run_sweep(spec, threads=args.threads)
    _emit_rows(rows, args)
    return 0


def _cmd_inspect(args) -> int:
    if args.config:
        cfg = _scenario_from_mapping(_load_mapping(args.config))
    elif args.preset:
        cfg = harness.make_preset(args.preset).base
    else:
        cfg = harness.ScenarioConfig()
    if cfg.sampler != "ancs":
        # The uniform sampler runs no inference; inspecting it would dump an
        # all-0.5 trajectory, which is never what the user is after.
        cfg = replace(cfg, sampler="ancs")
    cfg = _apply_overrides(cfg, args)
    dump = harness.inspect_trial(cfg, trial_index=args.trial)
    _write_output(json.dumps(dump, indent=2) + "\n", args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ancs",
        description="Adaptive non-uniform compressive sampling experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_format=True):
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--seed", type=int, help="override base seed")
        p.add_argument("--out", help="output path (default: stdout)")
        if with_format:
            p.add_argument(
                "--format", choices=("csv", "json"), default="csv", help="output format"
            )
        p.add_argument(
            "--threads", type=int, default=1, help="worker threads for trials"
        )

    p_run = sub.add_parser("run", help="run a single scenario")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep or figure preset")
    common(p_sweep)
    p_sweep.add_argument(
        "--preset", choices=harness.PRESET_NAMES, help="built-in figure preset"
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_inspect = sub.add_parser(
        "inspect", help="dump one trial's posterior trajectory as JSON"
    )
    common(p_inspect, with_format=False)
    p_inspect.add_argument(
        "--preset", choices=harness.PRESET_NAMES, help="use a preset's base scenario"
    )
    p_inspect.add_argument("--trial", type=int, default=0, help="trial index")
    p_inspect.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
