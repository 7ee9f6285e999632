"""``tempomode`` command-line scenario runner.

Usage::

    tempomode <experiment> [--config FILE] [--preset NAME] [--seed N] [--out DIR]
                           [--grid-points N] [--realizations N] [--set KEY=VALUE ...]
    tempomode list-presets [--json]

Settings are merged with precedence flags > config file > preset.  With neither
a preset nor a config file, the experiment's default preset is used.  Exit codes:
0 success, 2 invalid configuration (nothing written), 3 a tolerance check
failed (the report is still written).
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .errors import TempomodeError
from .experiments import EXPERIMENTS, ConfigError, run_experiment
from .io import csv_text, dumps, atomic_write_text
from .presets import DEFAULT_PRESETS, PRESETS, get_preset, list_presets

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TOLERANCE = 3


class ValidationError(Exception):
    pass


def load_schema() -> dict:
    text = resources.files("tempomode").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _set_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ValidationError(f"{dotted}: cannot set a field inside a non-object")
    node[keys[-1]] = value


def _parse_set(item: str):
    if "=" not in item:
        raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return key.strip(), val


def resolve_config(experiment: str, config_path=None, preset=None, overrides=None) -> tuple[dict, str | None]:
    """Merge preset, config file and flag overrides, then validate.

    Returns:
        (config, preset name or None)

    Raises:
        ValidationError: on any unreadable, malformed or schema-invalid input.
    """
    file_cfg = {}
    if config_path is not None:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ValidationError("config document must be a JSON object")
    name = preset or file_cfg.get("preset")
    if name is None and config_path is None:
        name = DEFAULT_PRESETS.get(experiment)
    cfg = {}
    if name is not None:
        if name not in PRESETS:
            raise ValidationError(f"preset: unknown preset {name!r}")
        cfg = get_preset(name)
    cfg = _merge(cfg, {k: v for k, v in file_cfg.items() if k != "preset"})
    cfg.setdefault("experiment", experiment)
    cfg.setdefault("seed", 0)
    cfg.setdefault("params", {})
    for key, val in (overrides or {}).items():
        _set_path(cfg, key, val)
    if name is not None:
        cfg["preset"] = name
    if cfg.get("experiment") != experiment:
        raise ValidationError(f"experiment: config is for {cfg.get('experiment')!r}, not {experiment!r}")
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            path = ".".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{path}: {e.message}")
        raise ValidationError("; ".join(lines))
    return cfg, name


def run(experiment: str, config_path=None, preset=None, overrides=None, out_dir=None):
    """Run one scenario and write its outputs.

    Returns:
        (exit code, report dict or None, message)
    """
    t0 = time.perf_counter()
    try:
        cfg, name = resolve_config(experiment, config_path, preset, overrides)
    except ValidationError as exc:
        return EXIT_INVALID, None, str(exc)
    out_dir = Path(out_dir or cfg.get("out") or Path("tempomode-out") / experiment)
    try:
        outcome = run_experiment(cfg)
    except ConfigError as exc:
        return EXIT_INVALID, None, str(exc)
    except (TempomodeError, ValueError, KeyError) as exc:
        return EXIT_INVALID, None, f"invalid parameters: {exc}"
    passed = all(c["passed"] for c in outcome.checks)
    files = sorted(outcome.tables) + ["result.json", "report.json"]
    payload = {
        "tool": "tempomode",
        "version": __version__,
        "experiment": experiment,
        "preset": {"name": name, "version": PRESETS[name]["version"]} if name else None,
        "seed": cfg["seed"],
        "config": cfg,
        "result": outcome.result,
        "checks": outcome.checks,
        "passed": passed,
        "files": files,
    }
    for fname, (header, cols) in sorted(outcome.tables.items()):
        atomic_write_text(out_dir / fname, csv_text(list(header), cols))
    atomic_write_text(out_dir / "result.json", dumps(payload))
    report = dict(payload, wall_time_s=time.perf_counter() - t0)
    atomic_write_text(out_dir / "report.json", dumps(report))
    failed = [c for c in outcome.checks if not c["passed"]]
    if failed:
        msg = "; ".join(f"{c['name']} failed ({c['detail']}): value {c['value']!r}, limit {c['limit']!r}" for c in failed)
        return EXIT_TOLERANCE, report, msg
    return EXIT_OK, report, f"{len(outcome.checks)} checks passed; outputs in {out_dir}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tempomode", description="Temporal-mode scenario runner")
    p.add_argument("experiment", choices=list(EXPERIMENTS) + ["list-presets"])
    p.add_argument("--config", help="JSON scenario file")
    p.add_argument("--preset", help="named preset supplying defaults")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--realizations", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a dotted config field")
    p.add_argument("--json", action="store_true", help="list-presets: print JSON")
    p.add_argument("--version", action="version", version=f"tempomode {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.experiment == "list-presets":
        cat = list_presets()
        if args.json:
            sys.stdout.write(dumps(cat))
        else:
            for e in cat:
                print(f"{e['name']:<24} v{e['version']:<4} {e['experiment']:<13} {e['description']}")
        return EXIT_OK
    try:
        overrides = dict(_parse_set(s) for s in args.set)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.grid_points is not None:
        overrides["grid.n_points"] = args.grid_points
    if args.realizations is not None:
        overrides["params.realizations"] = args.realizations
    code, _, msg = run(args.experiment, args.config, args.preset, overrides, args.out)
    stream = sys.stdout if code == EXIT_OK else sys.stderr
    print(("" if code == EXIT_OK else "error: ") + msg, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
