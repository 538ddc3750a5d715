"""Command line: ``rhea run``, ``rhea report`` and ``rhea play``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

from rhea.evolution import EvoParams
from rhea.harness import (
    Audit,
    RunSpec,
    read_results,
    run_episode,
    run_matrix,
    summarize,
    write_report,
    write_results,
)

# config key -> (target, field name, parser)
_SPEC_KEYS = {
    "agents": ("spec", "agents", lambda v: _csv(v)),
    "games": ("spec", "games", lambda v: _csv(v)),
    "levels": ("spec", "levels", lambda v: parse_levels(v)),
    "reps": ("spec", "repetitions", int),
    "repetitions": ("spec", "repetitions", int),
    "seed": ("spec", "base_seed", int),
    "base-seed": ("spec", "base_seed", int),
    "budget": ("spec", "budget", int),
    "max-ticks": ("spec", "max_ticks", int),
    "population-size": ("params", "population_size", int),
    "genome-length": ("params", "genome_length", int),
    "mutation-rate": ("params", "mutation_rate", float),
    "tournament-size": ("params", "tournament_size", int),
    "elites": ("params", "elites", int),
    "ucb-K": ("params", "ucb_k", float),
    "ucb-k": ("params", "ucb_k", float),
    "win-bonus": ("params", "win_bonus", float),
}


def _csv(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(str(v).strip() for v in value)
    return tuple(v.strip() for v in str(value).split(",") if v.strip())


def parse_levels(value) -> tuple[int, ...]:
    """``"0-4"``, ``"0,2,4"`` or a list of integers."""
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    levels: list[int] = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        levels.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return tuple(levels)


def read_config(path: str | Path) -> dict:
    """JSON object, or flat ``key=value`` lines (``#`` comments allowed)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        cfg[key.strip()] = value.strip()
    return cfg


def build_spec(cfg: dict) -> RunSpec:
    spec_kw: dict = {}
    param_kw: dict = {}
    for key, value in cfg.items():
        if key == "variant":
            key = "agents"
        if key not in _SPEC_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        target, name, conv = _SPEC_KEYS[key]
        (spec_kw if target == "spec" else param_kw)[name] = conv(value)
    params = EvoParams(**param_kw)
    return RunSpec(**spec_kw, params=params)


def _cmd_run(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    for key, attr in (("agents", "agents"), ("games", "games"), ("levels", "levels"), ("reps", "reps"),
                      ("seed", "seed"), ("budget", "budget"), ("max-ticks", "max_ticks")):
        value = getattr(args, attr)
        if value is not None:
            cfg[key] = value
    spec = build_spec(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    errors: list[str] = []
    audit = Audit() if args.audit else None
    total = len(spec.cells())

    def progress(done: int, n: int) -> None:
        if done % max(1, n // 20) == 0 or done == n:
            print(f"  {done}/{n} episodes", file=sys.stderr)

    records = run_matrix(spec, args.parallel, audit, errors, progress if not args.quiet else None)
    path = write_results(records, out / f"results.{args.format}", args.format)
    if args.format == "csv":
        write_results(records, out / "results.canonical.csv", "csv", canonical=True)
    print(f"{len(records)}/{total} episodes -> {path}")
    if errors:
        print(f"{len(errors)} failed cells (see log)", file=sys.stderr)
    if audit is not None:
        print(f"audit: {audit.decisions} decisions, max calls {audit.max_used}, {len(audit.violations)} violations")
        for v in audit.violations[:20]:
            print("  " + v)
    if len({r.agent for r in records}) >= 2:
        bundle = summarize(records, spec.base_seed)
        write_report(bundle, out)
        for agent in sorted(bundle.agents, key=lambda a: -bundle.f1_totals.get(a, 0)):
            print(f"  {agent:18s} F1 {bundle.f1_totals.get(agent, 0)}")
    return 1 if errors or (audit is not None and audit.violations) else 0


def _cmd_report(args) -> int:
    records = read_results(args.inp)
    bundle = summarize(records, args.seed)
    for path in write_report(bundle, args.out):
        print(path)
    return 0


def _cmd_play(args) -> int:
    params = EvoParams()
    if args.config:
        params = build_spec(read_config(args.config)).params

    def trace(tick, action, state, meter) -> None:
        if args.trace:
            print(f"tick={tick} action={action.name} score={state.score:g} fm_calls={meter.used}")

    rec = run_episode(args.agent, args.game, args.level, args.seed, args.budget, params, args.max_ticks, on_tick=trace)
    result = "WIN" if rec.win else "LOSS"
    print(f"{result} score={rec.score:g} ticks={rec.ticks} fm_calls={rec.fm_calls} wall_ms={rec.wall_ms}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rhea", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an agents x games x levels x reps tournament")
    run.add_argument("--config")
    run.add_argument("--agents")
    run.add_argument("--games")
    run.add_argument("--levels")
    run.add_argument("--reps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--budget", type=int)
    run.add_argument("--max-ticks", type=int, dest="max_ticks")
    run.add_argument("--out", default="results")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--parallel", type=int, default=1)
    run.add_argument("--audit", action="store_true", help="count forward-model calls per decision")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=_cmd_run)

    rep = sub.add_parser("report", help="rebuild tables from a results file")
    rep.add_argument("--in", dest="inp", required=True)
    rep.add_argument("--out", required=True)
    rep.add_argument("--seed", type=int, default=0, help="seed for residual F1 tie-breaks")
    rep.set_defaults(func=_cmd_report)

    play = sub.add_parser("play", help="play one episode")
    play.add_argument("--agent", required=True)
    play.add_argument("--game", required=True)
    play.add_argument("--level", type=int, default=0)
    play.add_argument("--seed", type=int, default=0)
    play.add_argument("--budget", type=int, default=900)
    play.add_argument("--max-ticks", type=int, dest="max_ticks")
    play.add_argument("--config")
    play.add_argument("--trace", action="store_true")
    play.set_defaults(func=_cmd_play)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
