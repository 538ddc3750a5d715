#!/usr/bin/env python3
"""Recompute the published F1 totals from the per-game points fixture."""

import json
from pathlib import Path

from rhea.stats import f1_aggregate

tables = json.loads((Path(__file__).parents[1] / "tests" / "fixtures" / "f1_tables.json").read_text())
for group in ("stochastic", "deterministic"):
    table = tables[group]
    totals = f1_aggregate([{a: table[a][g] for a in table} for g in range(len(next(iter(table.values()))))])
    want = tables["totals"][group]
    print(group, {a: totals[a] for a in table}, "ok" if totals == want else f"expected {want}")
