"""How tight are the chained certificates?

For small registers, compares the exact process fidelity of U_k with the
chained lower bound, and the simulated success probability with the
approximate bound g(s(k), p(k)) used by the planner.  Prints one line per
(model, p) with the worst slack and the fraction of success-bound misses.
"""

import argparse

from noisy_grover.certify import exact_circuit_process_fidelity, g
from noisy_grover.gateset import GroverParams, build_grover
from noisy_grover.harness import success_curve
from noisy_grover.noise import NoiseModel
from noisy_grover.planner import k_grover, model_estimates, noise_tolerant_plan, plan_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--p", type=float, nargs="+", default=[1e-6, 1e-5, 1e-4, 1e-3])
    args = ap.parse_args()

    n = args.n
    pr = GroverParams(n)
    kg = k_grover(pr)
    for kind in ("bitflip", "phaseflip", "depolarizing", "crosstalk"):
        for p in args.p:
            m = NoiseModel(kind, p)
            plan = noise_tolerant_plan(pr, *model_estimates(n, m), n + 1)
            curve = success_curve(n, m, kg)
            slack, misses, rows = [], 0, plan_table(pr, plan.C_i, plan.C_g, n + 1, kg)
            for row in rows:
                if n + 1 <= 5:
                    slack.append(exact_circuit_process_fidelity(build_grover(n, row.k), m) - g(row.C, plan.C_i))
                misses += curve[row.k] < row.bound
            worst = f"{min(slack):+.3e}" if slack else "n/a"
            print(f"{kind:12s} p={p:.0e}  k0={plan.k0}  min(F_exact - bound)={worst}  "
                  f"success below bound {misses}/{len(rows)}")


if __name__ == "__main__":
    main()
