"""Acceptance criteria, each at its stated tolerance.

Every test records a one-line summary; ``conftest.py`` prints a pass/fail
line per criterion at the end of the run.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from noisy_grover.certify import (
    chain_process_bound,
    circuit_estimates,
    emulate_local_estimators,
    exact_circuit_process_fidelity,
)
from noisy_grover.densmat import haar_state
from noisy_grover.gateset import (
    Circuit,
    GroverParams,
    Layer,
    build_initializer,
    build_iterate,
    build_toffoli,
    circuit_unitary,
)
from noisy_grover.harness import SweepSpec, find_threshold, success_curve, sweep
from noisy_grover.noise import (
    NoiseModel,
    alpha_success,
    apply_global_depolarizing,
    compile_circuit,
    global_depolarizing_success,
    ground_state,
    run_steps,
)
from noisy_grover.planner import k_grover, k_tight, noise_tolerant_plan

from oracles import random_layer

MINUS = np.array([1, -1]) / math.sqrt(2)


def test_c1_noiseless_closed_form(record_property):
    start = time.perf_counter()
    worst = 0.0
    for n in (3, 4, 5, 6):
        theta = GroverParams(n).theta
        curve = success_curve(n, NoiseModel("bitflip", 0.0), 20)
        for k in range(21):
            worst = max(worst, abs(curve[k] - math.sin((2 * k + 1) * theta / 2) ** 2))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max |s_dense - s_formula| = {worst:.2e} (tol 1e-9), {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 120


def test_c2_toffoli_depth_and_phase_action(record_property):
    start = time.perf_counter()
    depths = {n: build_toffoli(n).depth for n in range(2, 9)}
    assert all(d == 20 * n - 32 for n, d in depths.items()), depths
    worst = 0.0
    for n in (2, 3, 4):
        u = circuit_unitary(build_toffoli(n))
        got = u @ np.kron(np.eye(2**n), MINUS.reshape(2, 1))
        signs = np.ones(2**n)
        signs[-1] = -1
        want = np.kron(np.diag(signs), MINUS.reshape(2, 1))
        z = np.vdot(got.ravel(), want.ravel())
        worst = max(worst, float(np.max(np.abs(got * z / abs(z) - want))))
    elapsed = time.perf_counter() - start
    record_property("detail", f"depths 20n-32 for n=2..8, phase action error {worst:.2e} (tol 1e-9), {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 60


def test_c3_tight_bound_limit(record_property):
    start = time.perf_counter()
    pr = GroverParams(20)
    kg, kt = k_grover(pr), k_tight(pr)
    ratio = (kt / pr.success(kt)) / (kg / pr.success(kg))
    elapsed = time.perf_counter() - start
    record_property("detail", f"r(k_t)/r(k_g) = {ratio:.4f} (0.88 +- 0.01), s(k_g) = {pr.success(kg):.7f}")
    assert abs(ratio - 0.88) <= 0.01
    assert pr.success(kg) >= 0.999
    assert elapsed < 1


def _embedded_gate_fidelity(gate, t, m):
    return exact_circuit_process_fidelity(Circuit((Layer((gate,)),), t), m)


def test_c4_bound_validity(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    circuits = []
    while len(circuits) < 200:
        c = Circuit(tuple(random_layer(rng, 3) for _ in range(int(rng.integers(1, 7)))), 3)
        if c.gates():
            circuits.append(c)
    chain_violations = gate_violations = checks = 0
    embedded_cache = {}
    for kind in ("bitflip", "phaseflip", "depolarizing"):
        for p in (1e-3, 1e-2):
            m = NoiseModel(kind, p)
            for c in circuits:
                ests = emulate_local_estimators(c.gates(), 3, m)
                bound = chain_process_bound([e.estimator for e in ests]).value
                checks += 1
                chain_violations += exact_circuit_process_fidelity(c, m) < bound - 1e-9
                for gate, e in zip(c.gates(), ests):
                    key = (gate.label(), m)
                    if key not in embedded_cache:
                        embedded_cache[key] = _embedded_gate_fidelity(gate, 3, m)
                    gate_violations += e.estimator > embedded_cache[key] + 1e-9
    elapsed = time.perf_counter() - start
    record_property("detail", f"{checks} circuit checks, chain violations {chain_violations}, "
                              f"per-gate violations {gate_violations}, {elapsed:.1f}s")
    assert chain_violations == 0 and gate_violations == 0
    assert elapsed < 600


def test_c5_average_fidelity_identity(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    t = 2
    c = Circuit(tuple(random_layer(rng, t) for _ in range(4)), t)
    m = NoiseModel("depolarizing", 0.05)
    u = circuit_unitary(c)
    f_pro = exact_circuit_process_fidelity(c, m)
    d = 2**t
    # the circuit channel as a Liouville matrix, built by evolving basis operators
    steps = compile_circuit(c, m)
    cols = []
    for idx in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[idx] = 1
        cols.append(run_steps(e.reshape((2,) * (2 * t)), steps).reshape(-1))
    sop = np.array(cols).T
    samples = np.empty(10_000)
    for i in range(samples.size):
        psi = haar_state(t, rng).amplitudes
        out = (sop @ np.outer(psi, psi.conj()).reshape(-1)).reshape(d, d)
        phi = u @ psi
        samples[i] = np.vdot(phi, out @ phi).real
    mean = samples.mean()
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    want = (f_pro * d + 1) / (d + 1)
    elapsed = time.perf_counter() - start
    record_property("detail", f"MC mean {mean:.6f} vs {want:.6f}, |diff| = {abs(mean - want) / se:.2f} SE, {elapsed:.1f}s")
    assert abs(mean - want) <= 3 * se
    assert elapsed < 60


def test_c6_global_dense_vs_analytic(record_property):
    from noisy_grover.gateset import build_grover

    start = time.perf_counter()
    worst = 0.0
    for k in (1, 2, 3):
        for p1 in (1e-4, 1e-3):
            rho = apply_global_depolarizing(ground_state(6), build_grover(5, k), p1)
            worst = max(worst, abs(alpha_success(rho, 5) - global_depolarizing_success(5, k, p1)[0]))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max |dense - analytic| = {worst:.2e} (tol 1e-9), {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 60


def test_c7_threshold_ordering(record_property):
    start = time.perf_counter()
    local = {}
    for kind in ("bitflip", "phaseflip"):
        for n in (4, 5):
            pg = find_threshold(kind, n, "grover")
            p0 = find_threshold(kind, n, "noise_tolerant")
            assert not pg.out_of_range and not p0.out_of_range
            local[(kind, n)] = (pg.p_prime, p0.p_prime)
    glob = {}
    for n in (5, 10, 15, 20):
        pg = find_threshold("global", n, "grover")
        p0 = find_threshold("global", n, "noise_tolerant")
        assert not pg.out_of_range and not p0.out_of_range
        glob[n] = (pg.p_prime, p0.p_prime)
    ns = sorted(glob)
    pgs = [glob[n][0] for n in ns]
    ratios = [glob[n][1] / glob[n][0] for n in ns]
    elapsed = time.perf_counter() - start
    local_txt = " ".join(f"{k}{n}:{a:.2e}/{b:.2e}" for (k, n), (a, b) in local.items())
    record_property("detail", f"p'_g/p'_0 {local_txt}; global p'_g {['%.2e' % v for v in pgs]} "
                              f"ratio {['%.1f' % r for r in ratios]}, {elapsed:.1f}s")
    assert all(b >= a for a, b in local.values())
    assert all(b < a for a, b in zip(pgs, pgs[1:]))
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert elapsed < 900


def _brute_k0(params, vi, vg, t):
    def gg(x, y):
        a = max(0.0, 1 - (math.sqrt(1 - math.sqrt(x)) + math.sqrt(1 - math.sqrt(y))) ** 2) ** 2
        b = max(0.0, math.cos(math.acos(math.sqrt(x)) + math.acos(math.sqrt(y)))) ** 2
        c = max(0.0, 1 - (math.sqrt(1 - x) + math.sqrt(1 - y)) ** 2)
        return max(a, b, c)

    def fold(vals):
        acc = vals[0]
        for v in vals[1:]:
            acc = gg(v, acc)
        return acc

    ci, cg = fold(vi), fold(vg)
    d = 2**t
    th = 2 * math.asin(math.sqrt(params.M / params.N))
    kg = max(1, round(math.pi / (2 * th) - 0.5))
    best_k, best_h, c = 1, math.inf, cg
    for k in range(1, max(kg, 2) + 1):
        if k > 1:
            c = gg(cg, c)
        p = (gg(c, ci) * d + 1) / (d + 1)
        b = gg(math.sin((2 * k + 1) * th / 2) ** 2, p)
        h = k / b if b > 0 else math.inf
        if h < best_h:
            best_k, best_h = k, h
    return 1 if best_h > params.N / (2 * params.M) else best_k


def test_c8_planner_oracle_equivalence(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    mismatches = 0
    picks = []
    for _ in range(50):
        n = int(rng.integers(3, 9))
        pr = GroverParams(n)
        n_i = len(build_initializer(n).gates())
        n_g = len(build_iterate(n).gates())
        scale = 10 ** rng.uniform(-11, -5)
        vi = list(1 - scale * rng.random(n_i))
        vg = list(1 - scale * rng.random(n_g))
        k0 = noise_tolerant_plan(pr, vi, vg, n + 1).k0
        picks.append(k0)
        mismatches += k0 != _brute_k0(pr, vi, vg, n + 1)
    elapsed = time.perf_counter() - start
    record_property("detail", f"50 estimate sets, {mismatches} mismatches, distinct k0 {sorted(set(picks))}, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


def test_c9_sweep_determinism(record_property, tmp_path):
    spec = SweepSpec("bitflip", (3, 4), tuple(np.geomspace(1e-5, 0.2, 6)))
    sweep(spec, tmp_path / "first.csv")
    sweep(spec, tmp_path / "second.csv")
    gspec = SweepSpec("global", (5, 20), tuple(np.geomspace(1e-9, 0.5, 8)))
    sweep(gspec, tmp_path / "g1.csv")
    sweep(gspec, tmp_path / "g2.csv")
    same = ((tmp_path / "first.csv").read_bytes() == (tmp_path / "second.csv").read_bytes()
            and (tmp_path / "g1.csv").read_bytes() == (tmp_path / "g2.csv").read_bytes())
    record_property("detail", f"byte-identical reruns: {same}")
    assert same
