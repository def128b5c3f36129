"""Experiment engine: strategy runs, noise sweeps and quantum-advantage thresholds."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ContractViolation, UnsupportedSize
from .gateset import GroverParams, build_initializer, build_iterate
from .noise import (
    NoiseModel,
    alpha_success,
    compile_circuit,
    global_depolarizing_success,
    ground_state,
    max_parameter,
    run_steps,
)
from .planner import empirical_running_time, k_grover, k_tight_info, plan_for_model

STRATEGIES = ("grover", "tight", "noise_tolerant")
_STRATEGY_ALIASES = {"g": "grover", "t": "tight", "0": "noise_tolerant", "auto": "noise_tolerant", "k0": "noise_tolerant"}
CSV_HEADER = ("model", "n", "t", "p", "k_g", "s_g", "r_g", "k_t", "s_t", "r_t", "k_0", "s_0", "r_0", "classical_rt")
MAX_DENSE_QUBITS = 10
COARSE_POINTS = 32
REL_WIDTH = 1e-3
ANALYTIC_REL_WIDTH = 1e-9
LOCAL_RANGE = (1e-5, 0.2)
GLOBAL_RANGE = (1e-9, 0.5)
LOCAL_N = (3, 4, 5)
GLOBAL_N = (5, 10, 15, 20)


def canonical_strategy(name: str) -> str:
    s = _STRATEGY_ALIASES.get(name, name)
    if s not in STRATEGIES:
        raise ContractViolation(f"unknown strategy {name!r}")
    return s


def _model(model, p: float) -> NoiseModel:
    kind = model.kind if isinstance(model, NoiseModel) else str(model)
    return NoiseModel(kind, p)


@lru_cache(maxsize=4096)
def success_curve(n: int, model: NoiseModel, k_max: int) -> tuple[float, ...]:
    """Noisy success probability after ``k = 0..k_max`` iterates, one run."""
    if model.kind == "global":
        return tuple(global_depolarizing_success(n, k, model.p)[0] for k in range(k_max + 1))
    t = n + 1
    if t > MAX_DENSE_QUBITS:
        raise UnsupportedSize(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits, got t={t}")
    init = compile_circuit(build_initializer(n), model)
    step = compile_circuit(build_iterate(n), model)
    rho = run_steps(ground_state(t).tensor(), init)
    out = [alpha_success(rho.reshape(2**t, 2**t), n)]
    for _ in range(k_max):
        rho = run_steps(rho, step)
        out.append(alpha_success(rho.reshape(2**t, 2**t), n))
    return tuple(min(1.0, max(0.0, s)) for s in out)


def choose_k(n: int, model: NoiseModel, strategy: str) -> int:
    params = GroverParams(n)
    strategy = canonical_strategy(strategy)
    if strategy == "grover":
        return k_grover(params)
    if strategy == "tight":
        return k_tight_info(params)[0]
    return plan_for_model(n, model).k0


def simulated_success(n: int, model: NoiseModel, k: int) -> float:
    if model.kind == "global":
        return global_depolarizing_success(n, k, model.p)[0]
    return success_curve(n, model, max(k, k_grover(GroverParams(n))))[k]


@dataclass(frozen=True)
class StrategyResult:
    k: int
    s: float
    r: float


def run_point(model, n: int, p: float, strategy: str) -> StrategyResult:
    """Pick ``k`` for the strategy, run the noisy circuit and measure ``r = k/s``."""
    m = _model(model, p)
    if m.kind != "global" and n + 1 > MAX_DENSE_QUBITS:
        raise UnsupportedSize(f"t={n + 1} exceeds the dense limit of {MAX_DENSE_QUBITS}")
    k = choose_k(n, m, strategy)
    s = simulated_success(n, m, k)
    return StrategyResult(k, s, empirical_running_time(GroverParams(n), k, s))


@dataclass(frozen=True)
class SweepRecord:
    model: str
    n: int
    p: float
    results: dict = field(default_factory=dict)

    @property
    def t(self) -> int:
        return self.n + 1

    @property
    def classical_rt(self) -> float:
        return 2**self.n / 2

    def row(self) -> list[str]:
        cells = [self.model, str(self.n), str(self.t), repr(self.p)]
        for strat in STRATEGIES:
            res = self.results.get(strat)
            cells += [str(res.k), repr(res.s), repr(res.r)] if res else ["", "", ""]
        cells.append(repr(self.classical_rt))
        return cells


@dataclass(frozen=True)
class SweepSpec:
    model: str
    n_list: tuple[int, ...]
    p_grid: tuple[float, ...]
    strategies: tuple[str, ...] = STRATEGIES
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        kind = NoiseModel(self.model, 0.0).kind
        object.__setattr__(self, "model", kind)
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "strategies", tuple(canonical_strategy(s) for s in self.strategies))
        grid = self.p_grid
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ContractViolation("p_grid must be strictly increasing")
        if grid and (grid[0] < 0 or grid[-1] > max_parameter(kind)):
            raise ContractViolation(f"p_grid leaves the valid range of {kind}")

    @classmethod
    def from_config(cls, text: str) -> "SweepSpec":
        """Flat ``key=value`` lines; ``#`` starts a comment."""
        kv = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ContractViolation(f"config line {raw!r} is not key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            kv[key] = value
        if "model" not in kv:
            raise ContractViolation("config needs a model")
        model = NoiseModel(kv["model"], 0.0).kind
        is_global = model == "global"
        n_list = _ints(kv["n"]) if "n" in kv else (GLOBAL_N if is_global else LOCAL_N)
        if "p" in kv:
            grid = tuple(float(x) for x in _split(kv["p"]))
        else:
            lo, hi = GLOBAL_RANGE if is_global else LOCAL_RANGE
            lo = float(kv.get("p_min", lo))
            hi = float(kv.get("p_max", hi))
            pts = int(kv.get("points", COARSE_POINTS))
            spacing = kv.get("spacing", "log")
            grid = tuple(np.geomspace(lo, hi, pts) if spacing == "log" else np.linspace(lo, hi, pts)) if pts else ()
        strategies = tuple(_split(kv["strategies"])) if "strategies" in kv else STRATEGIES
        return cls(model, n_list, grid, strategies, kv.get("output"), int(kv.get("workers", 1)))


def _split(value: str) -> list[str]:
    return [x for x in (v.strip() for v in value.replace(";", ",").split(",")) if x]


def _ints(value: str) -> tuple[int, ...]:
    return tuple(int(x) for x in _split(value))


def _sweep_job(args) -> SweepRecord:
    model, n, p, strategies = args
    return SweepRecord(model, n, p, {s: run_point(model, n, p, s) for s in strategies})


def sweep_records(spec: SweepSpec) -> list[SweepRecord]:
    jobs = [(spec.model, n, p, spec.strategies) for n in spec.n_list for p in spec.p_grid]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            return list(pool.map(_sweep_job, jobs))
    return [_sweep_job(j) for j in jobs]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def sweep(spec: SweepSpec, output: str | Path | None = None) -> str:
    """Run every (n, p, strategy) point and write the CSV; returns its text."""
    text = records_to_csv(sweep_records(spec))
    target = output or spec.output
    if target:
        path = Path(target)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write sweep output to {path}: {exc}") from exc
    return text


@dataclass(frozen=True)
class ThresholdRecord:
    model: str
    n: int
    strategy: str
    p_prime: float | None
    lo: float
    hi: float
    out_of_range: bool = False

    @property
    def bracket_width(self) -> float:
        return self.hi - self.lo

    def line(self) -> str:
        shown = f">{self.hi!r}" if self.out_of_range else repr(self.p_prime)
        return (f"model={self.model} n={self.n} strategy={self.strategy} p_prime={shown} "
                f"bracket=[{self.lo!r}, {self.hi!r}] width={self.bracket_width!r}")


def default_range(kind: str) -> tuple[float, float]:
    return GLOBAL_RANGE if kind == "global" else LOCAL_RANGE


def find_threshold(model, n: int, strategy: str, p_lo: float | None = None, p_hi: float | None = None,
                   points: int = COARSE_POINTS, rel_width: float | None = None) -> ThresholdRecord:
    """First ``p`` where ``r(p)`` rises above ``N/2``: log scan, then bisection."""
    kind = _model(model, 0.0).kind
    strategy = canonical_strategy(strategy)
    lo_default, hi_default = default_range(kind)
    p_lo = lo_default if p_lo is None else p_lo
    p_hi = min(hi_default if p_hi is None else p_hi, max_parameter(kind))
    if not 0 < p_lo < p_hi:
        raise ContractViolation(f"need 0 < p_lo < p_hi, got {p_lo}, {p_hi}")
    if points < 2:
        raise ContractViolation("coarse scan needs at least two points")
    if rel_width is None:
        rel_width = ANALYTIC_REL_WIDTH if kind == "global" else REL_WIDTH
    classical = 2**n / 2

    def above(p: float) -> bool:
        return run_point(kind, n, p, strategy).r > classical

    grid = np.geomspace(p_lo, p_hi, points)
    if above(grid[0]):
        raise ContractViolation(f"no quantum advantage at p_lo={p_lo}")
    prev = grid[0]
    for p in grid[1:]:
        if above(p):
            lo, hi = float(prev), float(p)
            break
        prev = p
    else:
        return ThresholdRecord(kind, n, strategy, None, float(grid[-1]), float(grid[-1]), True)
    while (hi - lo) > rel_width * lo:
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdRecord(kind, n, strategy, 0.5 * (lo + hi), lo, hi)

