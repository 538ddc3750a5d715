#!/usr/bin/env python3
"""Run a tournament, write results and tables, optionally re-run to check determinism.

    python scripts/run_tournament.py --config scripts/configs/default.cfg --out results/full
    python scripts/run_tournament.py --config scripts/configs/smoke.cfg --out results/smoke --check-parallel 8
"""

import argparse
import sys
import time
from pathlib import Path

from rhea.cli import build_spec, read_config
from rhea.harness import Audit, run_matrix, summarize, to_csv, write_report, write_results


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(Path(__file__).parent / "configs" / "default.cfg"))
    ap.add_argument("--out", default="results/full")
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--check-parallel", type=int, metavar="P", help="re-run at parallelism P and compare canonical CSVs")
    args = ap.parse_args()

    spec = build_spec(read_config(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    audit, errors = Audit(), []
    t0 = time.perf_counter()
    records = run_matrix(spec, args.parallel, audit, errors)
    print(f"{len(records)} episodes in {time.perf_counter() - t0:.0f}s; "
          f"audit max {audit.max_used} calls, {len(audit.violations)} violations, {len(errors)} failed cells")
    write_results(records, out / "results.csv")
    write_results(records, out / "results.canonical.csv", canonical=True)
    bundle = summarize(records, spec.base_seed)
    write_report(bundle, out)
    for agent in sorted(bundle.f1_totals, key=lambda a: -bundle.f1_totals[a]):
        print(f"  {agent:18s} {bundle.f1_totals[agent]}")

    ok = not errors and not audit.violations
    if args.check_parallel:
        again = run_matrix(spec, args.check_parallel, None, errors)
        same = to_csv(records, canonical=True) == to_csv(again, canonical=True)
        print(f"parallelism {args.parallel} vs {args.check_parallel}: canonical CSVs {'identical' if same else 'DIFFER'}")
        ok = ok and same
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
