"""Flock convergence tick per sensing range over a block of seeds; writes CSV to stdout."""
import argparse
import csv
import statistics
import sys

from dream.dsl.parser import parse
from dream.dsl.scenarios import flock
from dream.system import convergence_step, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=9)
    ap.add_argument("--ranges", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--steps", type=int, default=30)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["range", "seed", "convergence"])
    for r in args.ranges:
        system = parse(flock(args.size, r, args.steps))
        ticks = []
        for seed in range(args.seeds):
            c = convergence_step(run(system, seed=seed).series("flocks"))
            ticks.append(c)
            out.writerow([r, seed, "" if c is None else c])
        settled = [c for c in ticks if c is not None]
        med = statistics.median(settled) if settled else None
        print(f"range {r}: {len(settled)}/{args.seeds} settled, median of settled {med}", file=sys.stderr)


if __name__ == "__main__":
    main()
