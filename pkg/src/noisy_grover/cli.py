"""Command-line entry point (``noisy-grover``)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .certify import circuit_estimates, load_estimates
from .errors import ContractViolation, ParameterRange, UnsupportedSize
from .gateset import GroverParams, build_initializer, build_iterate
from .harness import (
    STRATEGIES,
    SweepSpec,
    canonical_strategy,
    choose_k,
    find_threshold,
    simulated_success,
    sweep,
)
from .noise import NoiseModel
from .planner import empirical_running_time, k_grover, noise_tolerant_plan, plan_table


def _noise(token: str, p: float | None = None) -> NoiseModel:
    if ":" not in token:
        return NoiseModel(token, 0.0 if p is None else p)
    m = NoiseModel.parse(token)
    return m if p is None else m.with_p(p)


def _read_estimate_blocks(path: str) -> tuple[list[float], list[float]]:
    """``[S_i]`` and ``[S_g]`` sections of serialized estimate lines."""
    blocks: dict[str, list[str]] = {}
    current = None
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if s in ("[S_i]", "[S_g]"):
            current = s[1:-1]
            blocks[current] = []
        elif s and not s.startswith("#"):
            if current is None:
                raise ContractViolation(f"{path}: estimate line before any [S_i]/[S_g] header")
            blocks[current].append(s)
    if set(blocks) != {"S_i", "S_g"}:
        raise ContractViolation(f"{path}: needs both [S_i] and [S_g] sections")
    return tuple([e.estimator for e in load_estimates("\n".join(blocks[k]))] for k in ("S_i", "S_g"))


def cmd_simulate(a) -> None:
    m = _noise(a.noise)
    params = GroverParams(a.n)
    k = int(a.k) if a.k.isdigit() else choose_k(a.n, m, canonical_strategy(a.k))
    s = simulated_success(a.n, m, k)
    r = empirical_running_time(params, k, s)
    print(f"noise={m.token()} n={a.n} t={a.n + 1} k={k} s={s!r} r={r!r} classical_rt={params.N / 2!r}")


def cmd_certify(a) -> None:
    m = _noise(a.noise)
    params = GroverParams(a.n)
    t = a.n + 1
    if a.estimates:
        est_i, est_g = _read_estimate_blocks(a.estimates)
    else:
        est_i = circuit_estimates(build_initializer(a.n), m)
        est_g = circuit_estimates(build_iterate(a.n), m)
    plan = noise_tolerant_plan(params, est_i, est_g, t)
    print(f"C_i={plan.C_i!r}")
    print(f"C_g={plan.C_g!r}")
    print("k,C_k,p_k,s_k,bound,h_k")
    for row in plan_table(params, plan.C_i, plan.C_g, t, a.k_max or max(k_grover(params), 2)):
        print(f"{row.k},{row.C!r},{row.p!r},{row.s!r},{row.bound!r},{row.h!r}")


def cmd_plan(a) -> None:
    m = _noise(a.noise, a.p)
    params = GroverParams(a.n)
    est_i = circuit_estimates(build_initializer(a.n), m)
    est_g = circuit_estimates(build_iterate(a.n), m)
    plan = noise_tolerant_plan(params, est_i, est_g, a.n + 1)
    print(f"noise={m.token()}")
    for line in plan.lines():
        print(line)


def cmd_sweep(a) -> None:
    spec = SweepSpec.from_config(Path(a.spec).read_text())
    text = sweep(spec, a.output)
    if not (a.output or spec.output):
        sys.stdout.write(text)


def cmd_threshold(a) -> None:
    m = _noise(a.noise)
    strategies = STRATEGIES if a.strategy == "all" else (a.strategy,)
    for s in strategies:
        print(find_threshold(m.kind, a.n, s, a.p_lo, a.p_hi, a.points).line())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noisy-grover", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="noisy Grover run, prints s and r = k/s")
    sp.add_argument("--noise", required=True, help="kind:p, e.g. bitflip:1e-3")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", default="grover", help="integer, grover, tight or auto")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("certify", help="chained bounds C_i, C_g and the p(k) table")
    sp.add_argument("--noise", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--estimates", help="file with [S_i] and [S_g] estimate sections")
    sp.add_argument("--k-max", type=int, default=None)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("plan", help="noise-tolerant iterate count")
    sp.add_argument("--noise", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, default=None)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("sweep", help="CSV sweep from a key=value config")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("threshold", help="noise threshold of quantum advantage")
    sp.add_argument("--noise", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--strategy", default="all")
    sp.add_argument("--p-lo", type=float, default=None)
    sp.add_argument("--p-hi", type=float, default=None)
    sp.add_argument("--points", type=int, default=32)
    sp.set_defaults(func=cmd_threshold)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ContractViolation, ParameterRange, UnsupportedSize, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
