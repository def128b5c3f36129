"""Noise thresholds p' of quantum advantage for each strategy.

    python scripts/thresholds.py --out results
"""

import argparse
import csv
import time
from pathlib import Path

from noisy_grover.harness import GLOBAL_N, LOCAL_N, STRATEGIES, find_threshold

MODELS = ("bitflip", "phaseflip", "crosstalk", "depolarizing", "global")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--models", nargs="+", default=list(MODELS), choices=MODELS)
    args = ap.parse_args()

    path = Path(args.out) / "thresholds.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "n", "strategy", "p_prime", "lo", "hi", "out_of_range"])
        for model in args.models:
            for n in GLOBAL_N if model == "global" else LOCAL_N:
                start = time.perf_counter()
                recs = [find_threshold(model, n, s) for s in STRATEGIES]
                for r in recs:
                    w.writerow([model, n, r.strategy, "" if r.p_prime is None else repr(r.p_prime),
                                repr(r.lo), repr(r.hi), int(r.out_of_range)])
                shown = "  ".join(f"{r.strategy}={r.p_prime:.3e}" if r.p_prime else f"{r.strategy}=n/a" for r in recs)
                print(f"{model:12s} n={n:2d}  {shown}  ({time.perf_counter() - start:.1f}s)")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
