"""Tournament runner: episodes, the agents x games x levels x seeds matrix, persistence, reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from rhea.agents import AgentVariant, make_agent
from rhea.core import BudgetMeter, SeededRng, Status
from rhea.evolution import DecisionLog, EvoParams
from rhea.games import GAME_IDS, LEVELS_PER_GAME, build_game, game_class, level_text
from rhea.stats import (
    SampleSummary,
    describe,
    f1_aggregate,
    f1_points_for_game,
    mann_whitney,
)

log = logging.getLogger(__name__)

ALL_AGENTS: tuple[str, ...] = tuple(v.value for v in AgentVariant)
CSV_COLUMNS = ("agent", "game", "level", "seed", "win", "score", "ticks", "fm_calls", "wall_ms")
AGENT_STREAM = 1


@dataclass(frozen=True)
class RunSpec:
    agents: tuple[str, ...] = ALL_AGENTS
    games: tuple[str, ...] = GAME_IDS
    levels: tuple[int, ...] = tuple(range(LEVELS_PER_GAME))
    repetitions: int = 20
    base_seed: int = 0
    budget: int = 900
    max_ticks: int | None = None
    params: EvoParams = field(default_factory=EvoParams)

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        for a in self.agents:
            AgentVariant.parse(a)
        for g in self.games:
            game_class(g)
            for lv in self.levels:
                level_text(g, lv)
        if self.params.budget != self.budget:
            object.__setattr__(self, "params", replace(self.params, budget=self.budget))

    def cells(self) -> list[tuple[str, str, int, int]]:
        return [
            (a, g, lv, rep)
            for a in self.agents
            for g in self.games
            for lv in self.levels
            for rep in range(self.repetitions)
        ]


@dataclass(frozen=True)
class EpisodeRecord:
    agent: str
    game: str
    level: int
    seed: int
    win: int
    score: float
    ticks: int
    fm_calls: int
    wall_ms: int

    def sort_key(self) -> tuple:
        return (self.agent, self.game, self.level, self.seed)


def episode_seed(base_seed: int, agent: str, game: str, level: int, rep: int) -> int:
    """Stable 64-bit seed for one matrix cell, independent of scheduling order."""
    key = f"{base_seed}|{agent}|{game}|{level}|{rep}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


@dataclass
class Audit:
    """Per-decision budget and tree-conservation checks, summed over episodes."""

    decisions: int = 0
    fm_calls: int = 0
    max_used: int = 0
    violations: list[str] = field(default_factory=list)

    def merge(self, other: "Audit") -> None:
        self.decisions += other.decisions
        self.fm_calls += other.fm_calls
        self.max_used = max(self.max_used, other.max_used)
        self.violations.extend(other.violations)


class _CountingModel:
    """Wraps a game's forward model and counts every call."""

    def __init__(self, advance: Callable) -> None:
        self.inner = advance
        self.calls = 0

    def __call__(self, state, action):
        self.calls += 1
        return self.inner(state, action)


def run_episode(
    agent: str,
    game: str,
    level: int,
    seed: int,
    budget: int = 900,
    params: EvoParams | None = None,
    max_ticks: int | None = None,
    audit: Audit | None = None,
    on_tick: Callable[[int, object, object, BudgetMeter], None] | None = None,
    level_source: str | None = None,
) -> EpisodeRecord:
    """Play one full episode.  The real game step is never charged to the meter."""
    try:
        params = replace(params or EvoParams(), budget=budget)
        model = build_game(level_source if level_source is not None else level_text(game, level), game, max_ticks)
        controller = make_agent(agent, params)
    except Exception as exc:
        raise RuntimeError(f"cannot set up {agent} on {game} level {level} seed {seed}: {exc}") from exc
    real_advance = model.advance
    shim = None
    if audit is not None:
        shim = model.advance = _CountingModel(real_advance)
    state = model.initial_state(seed)
    rng = SeededRng(seed, AGENT_STREAM)
    meter = BudgetMeter(budget)
    fm_calls = 0
    tree_agent = controller.variant.uses_tree
    start = time.perf_counter()
    while not state.status:
        meter.reset()
        dlog = DecisionLog() if audit is not None else None
        before = shim.calls if shim is not None else 0
        action = controller.act(state, meter, rng, dlog)
        fm_calls += meter.used
        if audit is not None:
            _check_decision(audit, shim.calls - before, meter, dlog, tree_agent, (agent, game, level, seed, state.tick))
        if on_tick is not None:
            on_tick(state.tick, action, state, meter)
        state = real_advance(state, action)
    wall_ms = int((time.perf_counter() - start) * 1000)
    return EpisodeRecord(agent, game, level, seed, int(state.status == Status.WIN), float(state.score), state.tick, fm_calls, wall_ms)


def _check_decision(audit: Audit, counted: int, meter: BudgetMeter, dlog: DecisionLog, tree_agent: bool, where) -> None:
    audit.decisions += 1
    audit.fm_calls += counted
    audit.max_used = max(audit.max_used, meter.used)
    problems = []
    if meter.used > meter.limit:
        problems.append(f"used {meter.used} > limit {meter.limit}")
    if counted != meter.used:
        problems.append(f"shim counted {counted} calls, meter says {meter.used}")
    if dlog.depth != meter.used:
        problems.append(f"sum of evaluated depth {dlog.depth} != meter {meter.used}")
    if tree_agent and dlog.tree_end - dlog.tree_start != dlog.evaluations:
        problems.append(f"tree grew by {dlog.tree_end - dlog.tree_start}, {dlog.evaluations} evaluations")
    for p in problems:
        audit.violations.append(f"{where}: {p}")


def _run_cell(job: tuple) -> tuple[EpisodeRecord | None, str | None, Audit | None]:
    agent, game, level, rep, spec, with_audit = job
    seed = episode_seed(spec.base_seed, agent, game, level, rep)
    audit = Audit() if with_audit else None
    try:
        record = run_episode(agent, game, level, seed, spec.budget, spec.params, spec.max_ticks, audit)
    except Exception as exc:
        return None, f"{agent}/{game}/{level}/rep{rep}: {exc}", audit
    return record, None, audit


def run_matrix(
    spec: RunSpec,
    parallelism: int = 1,
    audit: Audit | None = None,
    errors: list[str] | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[EpisodeRecord]:
    """Every (agent, game, level, repetition) cell once, sorted canonically.

    Failed cells are logged (and appended to ``errors``) without stopping the run.
    """
    jobs = [(a, g, lv, rep, spec, audit is not None) for a, g, lv, rep in spec.cells()]
    records: list[EpisodeRecord] = []

    def collect(results: Iterable) -> None:
        for i, (record, error, cell_audit) in enumerate(results, start=1):
            if error is not None:
                log.warning("episode failed: %s", error)
                if errors is not None:
                    errors.append(error)
            else:
                records.append(record)
            if audit is not None and cell_audit is not None:
                audit.merge(cell_audit)
            if progress is not None:
                progress(i, len(jobs))

    if parallelism <= 1:
        collect(map(_run_cell, jobs))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            collect(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (parallelism * 8))))
    records.sort(key=EpisodeRecord.sort_key)
    return records


# --- persistence ------------------------------------------------------------


def _row(rec: EpisodeRecord, canonical: bool) -> list:
    return [rec.agent, rec.game, rec.level, rec.seed, rec.win, repr(rec.score), rec.ticks, rec.fm_calls,
            0 if canonical else rec.wall_ms]


def to_csv(records: Sequence[EpisodeRecord], canonical: bool = False) -> str:
    """CSV text.  ``canonical`` sorts the rows and zeroes the wall-clock column."""
    rows = sorted(records, key=EpisodeRecord.sort_key) if canonical else records
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in rows:
        writer.writerow(_row(rec, canonical))
    return buf.getvalue()


def write_results(records: Sequence[EpisodeRecord], path: str | Path, fmt: str = "csv", canonical: bool = False) -> Path:
    path = Path(path)
    if fmt == "csv":
        text = to_csv(records, canonical)
    elif fmt == "json":
        rows = sorted(records, key=EpisodeRecord.sort_key) if canonical else records
        text = json.dumps([asdict(r) | ({"wall_ms": 0} if canonical else {}) for r in rows], indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def _coerce(row: dict) -> EpisodeRecord:
    kinds = {f.name: f.type for f in fields(EpisodeRecord)}
    out = {}
    for name in CSV_COLUMNS:
        value = row[name]
        kind = kinds[name]
        out[name] = float(value) if kind == "float" else int(value) if kind == "int" else str(value)
    return EpisodeRecord(**out)


def parse_results(text: str, fmt: str = "csv") -> list[EpisodeRecord]:
    if fmt == "json":
        return [_coerce(r) for r in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [_coerce(r) for r in reader]


def read_results(path: str | Path) -> list[EpisodeRecord]:
    path = Path(path)
    return parse_results(path.read_text(), "json" if path.suffix == ".json" else "csv")


# --- reporting --------------------------------------------------------------


@dataclass
class ReportBundle:
    agents: list[str]
    games: list[str]
    wins: dict[tuple[str, str], SampleSummary]
    scores: dict[tuple[str, str], SampleSummary]
    f1: dict[str, dict[str, int]]  # game -> agent -> points
    f1_totals: dict[str, int]
    f1_groups: dict[str, dict[str, int]]  # "stochastic" / "deterministic" -> totals
    win_significance: dict[str, dict[str, int]]
    score_significance: dict[str, dict[str, int]]

    def to_markdown(self) -> str:
        out = ["# Tournament report", ""]
        out += ["## F1 totals", "", "| Rank | Agent | F1 points | " + " | ".join(self.f1_groups) + " |",
                "|---|---|---:|" + "---:|" * len(self.f1_groups)]
        ranked = sorted(self.agents, key=lambda a: -self.f1_totals.get(a, 0))
        for i, a in enumerate(ranked, start=1):
            groups = " | ".join(str(t.get(a, 0)) for t in self.f1_groups.values())
            out.append(f"| {i} | {a} | {self.f1_totals.get(a, 0)} | {groups} |")
        f1_games = [g for g in self.games if g in self.f1]
        out += ["", "## F1 per game", "", "| Agent | " + " | ".join(f1_games) + " | Total |",
                "|---|" + "---:|" * (len(f1_games) + 1)]
        for a in self.agents:
            cells = " | ".join(str(self.f1[g][a]) for g in f1_games)
            out.append(f"| {a} | {cells} | {self.f1_totals.get(a, 0)} |")
        for title, table in (("Mean wins (± sd)", self.wins), ("Mean score (± sd)", self.scores)):
            out += ["", f"## {title}", "", "| Game | " + " | ".join(self.agents) + " |",
                    "|---|" + "---:|" * len(self.agents)]
            for g in self.games:
                cells = " | ".join(str(table[a, g]) if (a, g) in table else "–" for a in self.agents)
                out.append(f"| {g} | {cells} |")
        for title, matrix in (("Games with significantly better win rate (row over column)", self.win_significance),
                              ("Games with significantly better score (row over column)", self.score_significance)):
            out += ["", f"## {title}", "", "| | " + " | ".join(self.agents) + " |",
                    "|---|" + "---:|" * len(self.agents)]
            for a in self.agents:
                cells = " | ".join("–" if a == b else str(matrix[a][b]) for b in self.agents)
                out.append(f"| {a} | {cells} |")
        return "\n".join(out) + "\n"

    def to_json(self) -> dict:
        return {
            "agents": self.agents,
            "games": self.games,
            "wins": {f"{a}|{g}": asdict(s) for (a, g), s in self.wins.items()},
            "scores": {f"{a}|{g}": asdict(s) for (a, g), s in self.scores.items()},
            "f1": self.f1,
            "f1_totals": self.f1_totals,
            "f1_groups": self.f1_groups,
            "win_significance": self.win_significance,
            "score_significance": self.score_significance,
        }


def _ordered_games(names: Iterable[str]) -> list[str]:
    names = set(names)
    known = [g for g in GAME_IDS if g in names]
    return known + sorted(names - set(known))


def summarize(records: Sequence[EpisodeRecord], seed: int = 0) -> ReportBundle:
    """Win/score tables, F1 points and pairwise significance counts.

    F1 and significance only use games every agent has played; a missing
    (agent, game) cell stays absent from the tables.
    """
    agents = sorted({r.agent for r in records})
    games = _ordered_games(r.game for r in records)
    if len(agents) < 2 or not games:
        raise ValueError("need records for at least two agents on one game")
    win_samples: dict[tuple[str, str], list[float]] = {}
    score_samples: dict[tuple[str, str], list[float]] = {}
    for r in records:
        win_samples.setdefault((r.agent, r.game), []).append(float(r.win))
        score_samples.setdefault((r.agent, r.game), []).append(r.score)
    wins = {k: describe(v) for k, v in win_samples.items()}
    scores = {k: describe(v) for k, v in score_samples.items()}

    complete = [g for g in games if all((a, g) in wins for a in agents)]
    rng = SeededRng(seed, 0xF1)
    f1 = {
        g: f1_points_for_game(
            {a: wins[a, g].mean for a in agents},
            {a: scores[a, g].mean for a in agents},
            rng.split(GAME_IDS.index(g) if g in GAME_IDS else len(GAME_IDS) + complete.index(g)),
        )
        for g in complete
    }
    totals = f1_aggregate([f1[g] for g in complete]) if complete else {a: 0 for a in agents}
    groups: dict[str, dict[str, int]] = {}
    for label, flag in (("stochastic", True), ("deterministic", False)):
        chosen = [f1[g] for g in complete if g in GAME_IDS and game_class(g).stochastic is flag]
        if chosen:
            groups[label] = f1_aggregate(chosen)

    def significance(samples: dict, summary: dict) -> dict[str, dict[str, int]]:
        matrix = {a: {b: 0 for b in agents if b != a} for a in agents}
        for g in complete:
            for a in agents:
                for b in agents:
                    if a == b:
                        continue
                    if summary[a, g].mean > summary[b, g].mean and mann_whitney(samples[a, g], samples[b, g]).significant:
                        matrix[a][b] += 1
        return matrix

    return ReportBundle(
        agents, games, wins, scores, f1, totals, groups,
        significance(win_samples, wins), significance(score_samples, scores),
    )


def write_report(bundle: ReportBundle, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    md = out / "report.md"
    md.write_text(bundle.to_markdown())
    js = out / "report.json"
    js.write_text(json.dumps(bundle.to_json(), indent=1, sort_keys=True) + "\n")
    return [md, js]
