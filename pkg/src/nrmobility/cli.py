"""Command line: ``run``, ``coverage-map`` and ``validate``.

Exit status is 0 on success, 1 when the scenario fails to parse or validate,
2 on usage errors. Output files are named ``<command>_<E>elem_seed<seed>``.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, ScenarioConfig, dump_config, load_config
from .engine import (coverage_map, run, run_metadata, write_coverage_csv, write_events_csv,
                     write_metadata, write_metrics_csv, write_reports_csv)

log = logging.getLogger("nrmobility")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _elements(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("element counts must be positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nrmobility", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, outputs=True):
        sp.add_argument("--config", required=True, metavar="PATH", help="JSON scenario file")
        sp.add_argument("--seed", type=int, help="override rng_seed")
        sp.add_argument("--elements", type=_elements, metavar="16,32,...", help="override element_sweep")
        if outputs:
            sp.add_argument("--out", default="out", metavar="DIR", help="output directory (created if absent)")

    r = sub.add_parser("run", help="simulate once per element count")
    common(r)
    r.add_argument("--jobs", type=int, default=1, help="parallel runs across element counts")
    c = sub.add_parser("coverage-map", help="best-beam RSRP over a set of positions")
    common(c)
    c.add_argument("--freq", type=float, default=28.0, metavar="GHZ", help="carrier frequency for the map")
    c.add_argument("--positions", type=int, default=1000, help="number of random positions")
    v = sub.add_parser("validate", help="parse the scenario and print the effective config")
    common(v, outputs=False)
    return p


def effective_config(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if args.elements is not None:
        changes["element_sweep"] = args.elements
        if cfg.antenna_elements not in args.elements:
            changes["antenna_elements"] = args.elements[0]
    return dataclasses.replace(cfg, **changes).validate() if changes else cfg


def _run_one(cfg: ScenarioConfig, elements: int, out: Path) -> list[Path]:
    mlog = run(cfg, elements)
    stem = f"run_{elements}elem_seed{cfg.rng_seed}"
    paths = [out / f"{stem}.csv", out / f"{stem}_events.csv", out / f"{stem}_reports.csv", out / f"{stem}.meta.json"]
    write_metrics_csv(mlog, paths[0])
    write_events_csv(mlog, paths[1])
    write_reports_csv(mlog, paths[2])
    write_metadata(mlog.metadata, paths[3])
    return paths


def cmd_run(cfg: ScenarioConfig, args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, [cfg] * len(cfg.element_sweep), cfg.element_sweep,
                                    [out] * len(cfg.element_sweep)))
    else:
        results = [_run_one(cfg, e, out) for e in cfg.element_sweep]
    for paths in results:
        for p in paths:
            print(p)
    return 0


def cmd_coverage(cfg: ScenarioConfig, args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmap = coverage_map(cfg, args.positions, frequency=args.freq)
    tag = "-".join(str(e) for e in cfg.element_sweep)
    path = out / f"coverage-map_{tag}elem_seed{cfg.rng_seed}.csv"
    write_coverage_csv(cmap, path)
    meta = {"frequency_ghz": args.freq, "positions": args.positions}
    meta.update(run_metadata(cfg, max(cfg.element_sweep)))
    write_metadata(meta, path.with_suffix(".meta.json"))
    print(path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        if getattr(args, "positions", 1) < 1:
            raise UsageError("--positions must be >= 1")
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"nrmobility: error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = effective_config(args)
    except FileNotFoundError:
        print(f"nrmobility: error: no such config file: {args.config}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"nrmobility: {e}", file=sys.stderr)
        return 1
    if args.command == "validate":
        sys.stdout.write(dump_config(cfg))
        return 0
    if args.command == "run":
        return cmd_run(cfg, args)
    return cmd_coverage(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
