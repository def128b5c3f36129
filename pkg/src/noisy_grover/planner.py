"""Iterate-count selection: the classical choices and the noise-tolerant k0."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .certify import LocalEstimate, chain_process_bound, circuit_estimates, g
from .errors import ContractViolation
from .gateset import GroverParams, build_initializer, build_iterate
from .noise import NoiseModel

ROOT_TOL = 1e-10


def success_probability(params: GroverParams, k: int) -> float:
    if k < 0:
        raise ContractViolation("iterate count must be nonnegative")
    return params.success(k)


def k_grover(params: GroverParams) -> int:
    # round() is round-half-to-even
    return max(1, round(math.pi / (2 * params.theta) - 0.5))


def tight_root(params: GroverParams) -> float | None:
    """Unrounded root of ``2 k theta = tan(k theta + theta/2)`` with the angle in
    ``(pi/4, pi/2)``, or ``None`` when that branch has no root."""
    th = params.theta

    def f(k: float) -> float:
        return 2 * k * th - math.tan(k * th + th / 2)

    lo = (math.pi / 4 - th / 2) / th
    hi = (math.pi / 2 - th / 2) / th
    if lo < 0 or f(lo) <= 0:
        return None
    # walk the upper end in from the pole until the sign flips
    step = (hi - lo) / 2
    upper = hi - step
    while f(upper) > 0:
        step /= 2
        upper = hi - step
        if step < 1e-15 * max(hi, 1.0):
            return None
    lower = lo
    while upper - lower > ROOT_TOL:
        mid = 0.5 * (lower + upper)
        if f(mid) > 0:
            lower = mid
        else:
            upper = mid
    return 0.5 * (lower + upper)


def k_tight_info(params: GroverParams) -> tuple[int, float | None, bool]:
    """``(rounded k_t, unrounded root, fell back to k_g)``."""
    root = tight_root(params)
    if root is None:
        return k_grover(params), None, True
    return max(1, round(root)), root, False


def k_tight(params: GroverParams) -> int:
    k, _, fell_back = k_tight_info(params)
    if fell_back:
        warnings.warn(f"no tight-bound root for lambda={params.lam}; using k_g", RuntimeWarning, stacklevel=2)
    return k


@dataclass(frozen=True)
class PlanRow:
    k: int
    C: float
    p: float
    s: float
    bound: float
    h: float


@dataclass(frozen=True)
class PlanResult:
    params: GroverParams
    k_g: int
    k_t_rounded: int
    k0: int
    C_i: float
    C_g: float
    p_of_k0: float
    s_lower_bound: float
    h_of_k0: float
    classical_rt: float
    degenerate: bool = False
    fallback: bool = False

    def lines(self) -> list[str]:
        pr = self.params
        return [
            f"n={pr.n} N={pr.N} M={pr.M}",
            f"k_g={self.k_g} k_t={self.k_t_rounded} k_0={self.k0}",
            f"C_i={self.C_i!r} C_g={self.C_g!r}",
            f"p(k_0)={self.p_of_k0!r} s_lower_bound={self.s_lower_bound!r}",
            f"h(k_0)={self.h_of_k0!r} classical_rt={self.classical_rt!r}",
            f"degenerate={self.degenerate} fallback={self.fallback}",
        ]


def _values(estimates: Sequence) -> list[float]:
    return [e.estimator if isinstance(e, LocalEstimate) else float(e) for e in estimates]


def k_scan_limit(params: GroverParams) -> int:
    return max(k_grover(params), 2)


def plan_table(params: GroverParams, C_i: float, C_g: float, t: int, k_max: int | None = None) -> list[PlanRow]:
    """``C(k)``, ``p(k)``, ``s(k)``, ``g(s, p)`` and ``h(k)`` for ``k = 1..k_max``."""
    d = 2**t
    k_max = k_scan_limit(params) if k_max is None else k_max
    rows, C = [], C_g
    for k in range(1, k_max + 1):
        if k > 1:
            C = g(C_g, C)
        p = (g(C, C_i) * d + 1) / (d + 1)
        s = params.success(k)
        b = g(s, p)
        rows.append(PlanRow(k, C, p, s, b, k / b if b > 0 else math.inf))
    return rows


def noise_tolerant_plan(params: GroverParams, estimates_i: Sequence, estimates_g: Sequence, t: int) -> PlanResult:
    """Minimize ``h(k) = k / g(s(k), p(k))`` over the certified bounds."""
    vi, vg = _values(estimates_i), _values(estimates_g)
    if any(not 0.0 <= v <= 1.0 for v in vi + vg):
        raise ContractViolation("estimates must lie in [0, 1]")
    C_i = chain_process_bound(vi).value if vi else 1.0
    C_g = chain_process_bound(vg).value if vg else 1.0
    rows = plan_table(params, C_i, C_g, t)
    classical = params.N / (2 * params.M)
    best = min(rows, key=lambda r: (r.h, r.k))
    degenerate = math.isinf(best.h)
    fallback = degenerate or best.h > classical
    chosen = rows[0] if fallback else best
    return PlanResult(
        params=params,
        k_g=k_grover(params),
        k_t_rounded=k_tight_info(params)[0],
        k0=chosen.k,
        C_i=C_i,
        C_g=C_g,
        p_of_k0=chosen.p,
        s_lower_bound=chosen.bound,
        h_of_k0=chosen.h,
        classical_rt=classical,
        degenerate=degenerate,
        fallback=fallback,
    )


@lru_cache(maxsize=512)
def model_estimates(n: int, model: NoiseModel) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Chainable per-unit estimates for ``S_i`` and ``S_g`` under ``model``."""
    return (
        tuple(circuit_estimates(build_initializer(n), model)),
        tuple(circuit_estimates(build_iterate(n), model)),
    )


def plan_for_model(n: int, model: NoiseModel, M: int = 1) -> PlanResult:
    est_i, est_g = model_estimates(n, model)
    return noise_tolerant_plan(GroverParams(n, M), est_i, est_g, n + 1)


def empirical_running_time(params: GroverParams, k: int, simulated_success: float) -> float:
    if not 0.0 <= simulated_success <= 1.0 + 1e-12:
        raise ContractViolation(f"success probability {simulated_success} outside [0, 1]")
    if simulated_success <= 0.0:
        return math.inf
    return k / simulated_success
