"""Evaluate every acceptance criterion and print one pass/fail line each.

Usage: python3 scripts/run_acceptance.py [--jobs K] [--max-2d N] [--max-3d N]
"""
import argparse
import logging
import sys

from fluxvp.suite import StudyCache, run_acceptance


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-2d", type=int, default=256)
    p.add_argument("--max-3d", type=int, default=128)
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR)
    results = run_acceptance(StudyCache(jobs=args.jobs, grid_cap={2: args.max_2d, 3: args.max_3d}))
    for r in results:
        print(r.line())
        for d in r.details:
            print(f"    {d}")
    failed = [r.number for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} passed" + (f"; failing: {', '.join(failed)}" if failed else ""))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
