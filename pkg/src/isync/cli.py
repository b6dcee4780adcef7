"""Command-line entry point: ``isync run|sweep|validate <config>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import experiments
from .scenario import ConfigError, check_axis, dump_config, load_config, with_value

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parse_values(text: str) -> list:
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        v = float(part)
        out.append(int(v) if v.is_integer() else v)
    if not out:
        raise ValueError("empty value list")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isync", description="Integrated sync/comm MAC simulator")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("config", help="scenario YAML file or shipped preset name")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--trace", action="store_true", help="also write per-message trace CSVs")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--parallel", type=int, default=1, help="worker processes for multi-run configs")

    common(sub.add_parser("run", help="run a scenario or a shipped experiment preset"))
    sw = sub.add_parser("sweep", help="sweep one numeric parameter")
    common(sw)
    sw.add_argument("--axis", required=True, help="dotted parameter name, e.g. n_ues or grid.n_blocks")
    sw.add_argument("--values", required=True, help="comma-separated values")
    v = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    v.add_argument("config")
    return ap


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: str, seed: Optional[int]):
    cfg = load_config(experiments.resolve_config(path))
    if seed is not None:
        cfg = with_value(cfg, "seed", seed)
    return cfg


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "validate":
            cfg = _load(args.config, None)
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        cfg = _load(args.config, args.seed)
        if args.parallel < 1:
            raise ConfigError(["--parallel: must be >= 1"])
        axis = None
        if args.verb == "sweep":
            try:
                axis = check_axis(args.axis)
                values = _parse_values(args.values)
            except ValueError as exc:
                raise ConfigError([f"--axis/--values: {exc}"]) from None
            specs = experiments.sweep_specs(cfg, axis, values)
        else:
            specs = experiments.expand(cfg)
    except ConfigError as exc:
        _err("invalid configuration:")
        for p in exc.problems:
            _err(f"  {p}")
        return EXIT_CONFIG

    try:
        outcomes = experiments.execute(specs, args.parallel, args.trace)
        files = experiments.render_outputs(cfg, outcomes, axis=axis, trace=args.trace)
        experiments.write_outputs(files, Path(args.out))
    except Exception as exc:  # noqa: BLE001 - report any simulation failure as a runtime error
        _err(f"runtime error: {exc}")
        return EXIT_RUNTIME
    sys.stdout.write(files["summary.csv"])
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
