"""Run every built-in suite, print one timing line each and write the reports."""
import argparse
import time
from pathlib import Path

from gcverify.suites import SUITES, Fixtures, RunConfig, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--samples", type=int, default=64)
    ap.add_argument("--out", type=Path, default=None, help="directory for <suite>.json reports")
    args = ap.parse_args()
    fx = Fixtures()
    worst = 0
    for name in SUITES:
        t0 = time.perf_counter()
        rep = run_suite(name, RunConfig(args.seed, args.samples), fx)
        dt = time.perf_counter() - t0
        print(f"{name:14s} {rep.status:13s} {len(rep.results):3d} checks  {dt:6.1f}s")
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(rep.to_json() + "\n")
        worst = max(worst, rep.exit_code)
    raise SystemExit(worst)


if __name__ == "__main__":
    main()
