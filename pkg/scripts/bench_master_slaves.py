"""Runtime of Master-Slaves cycles as the number of masters grows."""
import argparse
import sys

from dream.dsl.bench import bench, to_csv
from dream.system import SEARCH_MODES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--masters", default="1..4", help="lo..hi or a comma list")
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--search", choices=SEARCH_MODES, default="enumerate")
    args = ap.parse_args()

    rows = bench("master-slaves", f"masters={args.masters}", args.reps, args.steps, search=args.search)
    sys.stdout.write(to_csv(rows))
    means = [r.mean_ms for r in rows if r.status == "ok"]
    ratios = [f"{b / a:.2f}" for a, b in zip(means, means[1:])]
    print("growth ratios: " + ", ".join(ratios), file=sys.stderr)


if __name__ == "__main__":
    main()
