"""Running time r = k/s of the three strategies across noise strengths.

Writes one CSV per noise model plus a gnuplot script that draws r(p) against
the classical N/2 line.

    python scripts/running_time.py --out results --models bitflip global
"""

import argparse
import time
from pathlib import Path

import numpy as np

from noisy_grover.harness import GLOBAL_N, GLOBAL_RANGE, LOCAL_N, LOCAL_RANGE, SweepSpec, sweep

MODELS = ("bitflip", "phaseflip", "crosstalk", "depolarizing", "global")

PLOT = """\
set datafile separator ','
set logscale xy
set key top left
set xlabel 'p'
set ylabel 'running time k/s'
set title '{model}, n={n}'
plot '{csv}' using ($2=={n} ? $4 : 1/0):7 with lines title 'k_g', \\
     '' using ($2=={n} ? $4 : 1/0):10 with lines title 'k_t', \\
     '' using ($2=={n} ? $4 : 1/0):13 with lines title 'k_0', \\
     '' using ($2=={n} ? $4 : 1/0):14 with lines dt 2 title 'N/2'
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--models", nargs="+", default=list(MODELS), choices=MODELS)
    ap.add_argument("--points", type=int, default=32)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for model in args.models:
        lo, hi = GLOBAL_RANGE if model == "global" else LOCAL_RANGE
        n_list = GLOBAL_N if model == "global" else LOCAL_N
        spec = SweepSpec(model, n_list, tuple(np.geomspace(lo, hi, args.points)), workers=args.workers)
        csv_path = out / f"running_time_{model}.csv"
        start = time.perf_counter()
        sweep(spec, csv_path)
        plots = "\n".join(PLOT.format(model=model, n=n, csv=csv_path.name) for n in n_list)
        (out / f"running_time_{model}.gp").write_text(plots)
        print(f"{model}: {csv_path} ({time.perf_counter() - start:.1f}s)")


if __name__ == "__main__":
    main()
