"""Choi states, process fidelities and chained circuit-level lower bounds.

Per-gate local estimators are emulated exactly from the noise model: the gate
runs alone in a layer, the register outside its site starts maximally mixed,
and the reduced channels on the site and on each spectator qubit are compared
against the ideal gate and the identity.  Only the gate's chain window (site
plus its neighbours) can be touched by a single-gate layer, so everything is
computed on at most four qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .densmat import DensityMatrix, trace_out_tensor
from .errors import ContractViolation, UnsupportedSize
from .gateset import Circuit, Layer, LocalGate, circuit_unitary
from .noise import KrausChannel, NoiseModel, compile_circuit, layer_channels, run_steps, survival

EXACT_MAX_QUBITS = 5
_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ChoiState:
    matrix: DensityMatrix

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.matrix.dim)))


def _kraus_list(channel) -> tuple[np.ndarray, ...]:
    if isinstance(channel, KrausChannel):
        return channel.operators
    arr = np.asarray(channel, dtype=complex) if not isinstance(channel, (list, tuple)) else None
    if arr is not None and arr.ndim == 2:
        return (arr,)
    return tuple(np.asarray(e, dtype=complex) for e in channel)


def choi_of_channel(channel) -> ChoiState:
    """``(E (x) I)(|Omega><Omega|)`` for a Kraus channel or a unitary."""
    ops = _kraus_list(channel)
    d = ops[0].shape[0]
    if d not in (2, 4):
        raise ContractViolation(f"Choi states are built for d in (2, 4), got {d}")
    vecs = [e.reshape(-1) / math.sqrt(d) for e in ops]
    m = sum(np.outer(v, v.conj()) for v in vecs)
    return ChoiState(DensityMatrix(m, 2 * int(math.log2(d))))


def process_fidelity(ideal: np.ndarray, noisy) -> float:
    """``<psi_G| rho_G~ |psi_G>``, i.e. ``sum_i |tr(G^dagger E_i)|**2 / d**2``."""
    u = np.asarray(ideal, dtype=complex)
    ops = _kraus_list(noisy)
    d = u.shape[0]
    if any(e.shape != u.shape for e in ops):
        raise ContractViolation(f"ideal is {u.shape}, channel acts on {ops[0].shape}")
    return _clip(sum(abs(np.trace(u.conj().T @ e)) ** 2 for e in ops) / d**2)


def superop_process_fidelity(ideal: np.ndarray, superop: np.ndarray) -> float:
    """Same quantity from a Liouville matrix: ``tr(S_U^dagger S) / d**2``."""
    u = np.asarray(ideal, dtype=complex)
    d = u.shape[0]
    if superop.shape != (d * d, d * d):
        raise ContractViolation("superoperator does not match the ideal gate")
    return _clip(np.real(np.vdot(np.kron(u, u.conj()), superop)) / d**2)


def _clip(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


@dataclass(frozen=True)
class LocalEstimate:
    gate_id: str
    own_fidelity: float
    spectator_fidelities: dict = field(default_factory=dict)
    estimator: float | None = None

    def __post_init__(self):
        value = local_estimator(self.own_fidelity, self.spectator_fidelities.values())
        if self.estimator is None:
            object.__setattr__(self, "estimator", value)
        elif abs(self.estimator - value) > 1e-12:
            raise ContractViolation(f"estimator {self.estimator} disagrees with its parts ({value})")

    def serialize(self) -> str:
        spect = " ".join(f"spectator:{q}={v!r}" for q, v in sorted(self.spectator_fidelities.items()))
        parts = [self.gate_id, repr(self.own_fidelity)] + ([spect] if spect else []) + [repr(self.estimator)]
        return " ".join(parts)

    @classmethod
    def parse(cls, line: str) -> "LocalEstimate":
        toks = line.split()
        if len(toks) < 3:
            raise ContractViolation(f"estimate line too short: {line!r}")
        spect = {}
        for tok in toks[2:-1]:
            if not tok.startswith("spectator:") or "=" not in tok:
                raise ContractViolation(f"bad spectator token {tok!r}")
            q, v = tok[len("spectator:"):].split("=", 1)
            spect[int(q)] = float(v)
        return cls(toks[0], float(toks[1]), spect, float(toks[-1]))


def local_estimator(own: float, spectators: Iterable[float]) -> float:
    return max(own - sum(1.0 - v for v in spectators), 0.0)


def dump_estimates(estimates: Sequence[LocalEstimate]) -> str:
    return "".join(e.serialize() + "\n" for e in estimates)


def load_estimates(text: str) -> list[LocalEstimate]:
    return [LocalEstimate.parse(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]


def _window(g: LocalGate, t: int) -> list[int]:
    lo, hi = min(g.qubits), max(g.qubits)
    return list(range(max(lo - 1, 0), min(hi + 1, t - 1) + 1))


def _shift(g: LocalGate, offset: int) -> LocalGate:
    site = tuple(q - offset for q in g.qubits)
    return LocalGate(g.kind, site, g.theta, g.matrix)


def reduced_choi(steps, w: int, keep: Sequence[int]) -> np.ndarray:
    """Choi matrix of the channel seen by ``keep`` when the rest of a ``w``-qubit
    window starts maximally mixed."""
    a = len(keep)
    tot = w + a
    single_mixed = np.eye(2, dtype=complex) / 2
    bell = np.zeros((2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            bell[i, i, j, j] = 0.5
    # kept qubits start maximally entangled with an ancilla, the rest I/2
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    ket, bra = letters[:tot], letters[tot : 2 * tot]
    terms, specs = [], []
    for q in range(w):
        if q in keep:
            anc = w + list(keep).index(q)
            terms.append(bell)
            specs.append(ket[q] + ket[anc] + bra[q] + bra[anc])
        else:
            terms.append(single_mixed)
            specs.append(ket[q] + bra[q])
    rho = np.einsum(",".join(specs) + "->" + ket + bra, *terms)
    rho = run_steps(rho, steps)
    kept = list(keep) + list(range(w, tot))
    red = trace_out_tensor(rho, kept)
    d = 2 ** (2 * a)
    return red.reshape(d, d)


def _choi_overlap(ideal: np.ndarray, choi: np.ndarray) -> float:
    d = ideal.shape[0]
    v = ideal.reshape(-1) / math.sqrt(d)
    f = _clip(np.real(np.vdot(v, choi @ v)))
    # round-off on a noiseless channel would otherwise leak into every chain
    return 1.0 if f > 1.0 - 1e-13 else f


_ESTIMATE_CACHE: dict = {}


def _gate_key(g: LocalGate, t: int, m: NoiseModel):
    if g.kind == "Raw":
        return None
    lo, hi = min(g.qubits), max(g.qubits)
    return (g.kind, g.theta, tuple(q - lo for q in g.qubits), lo > 0, hi < t - 1, m.kind, m.p)


def _emulate_one(g: LocalGate, t: int, m: NoiseModel) -> tuple[float, dict]:
    win = _window(g, t)
    off = win[0]
    local = _shift(g, off)
    w = len(win)
    steps = layer_channels(Layer((local,)), m, w)
    site = sorted(local.qubits)
    u = _ideal_on_sorted(local)
    own = _choi_overlap(u, reduced_choi(steps, w, site))
    spect = {}
    eye = np.eye(2, dtype=complex)
    for b in range(w):
        if b in site:
            continue
        spect[b + off] = _choi_overlap(eye, reduced_choi(steps, w, [b]))
    return own, spect


def _ideal_on_sorted(g: LocalGate) -> np.ndarray:
    u = g.unitary()
    if g.site.arity == 2 and g.qubits[0] > g.qubits[1]:
        sw = np.eye(4)[[0, 2, 1, 3]]
        u = sw @ u @ sw
    return u


def emulate_local_estimators(gates: Sequence[LocalGate], t: int, m: NoiseModel) -> list[LocalEstimate]:
    """Own and spectator fidelities of each gate run alone in a layer."""
    if m.kind == "global":
        raise ContractViolation("global depolarizing is certified per layer, see layer_fidelities")
    out = []
    for i, g in enumerate(gates):
        key = _gate_key(g, t, m)
        hit = _ESTIMATE_CACHE.get(key) if key else None
        if hit is None:
            own, spect = _emulate_one(g, t, m)
            lo = min(g.qubits)
            hit = (own, {q - lo: v for q, v in spect.items()})
            if key:
                _ESTIMATE_CACHE[key] = hit
        own, rel = hit
        lo = min(g.qubits)
        spect = {q: 1.0 for q in range(t) if q not in g.qubits}
        spect.update({q + lo: v for q, v in rel.items()})
        out.append(LocalEstimate(f"{i}:{g.label()}", own, spect))
    return out


def layer_fidelities(c: Circuit, p1: float) -> list[float]:
    """Exact process fidelity of each depolarized layer, ``1 - p1 + p1 / D**2``."""
    d2 = 4.0**c.qubit_count
    return [1.0 - p1 + p1 / d2] * c.depth


def circuit_estimates(c: Circuit, m: NoiseModel) -> list[float]:
    """Per-unit fidelity lower bounds in execution order for chaining."""
    if m.kind == "global":
        return layer_fidelities(c, m.p)
    return [e.estimator for e in emulate_local_estimators(c.gates(), c.qubit_count, m)]


def g1(x: float, y: float) -> float:
    x, y = _unit(x), _unit(y)
    d = math.sqrt(max(1 - math.sqrt(x), 0.0)) + math.sqrt(max(1 - math.sqrt(y), 0.0))
    return max(0.0, 1 - d * d) ** 2


def g2(x: float, y: float) -> float:
    x, y = _unit(x), _unit(y)
    c = math.cos(math.acos(math.sqrt(x)) + math.acos(math.sqrt(y)))
    return max(0.0, c) ** 2


def g3(x: float, y: float) -> float:
    x, y = _unit(x), _unit(y)
    d = math.sqrt(1 - x) + math.sqrt(1 - y)
    return max(0.0, 1 - d * d)


_BRANCHES = (("g1", g1), ("g2", g2), ("g3", g3))


def g_branch(x: float, y: float) -> tuple[float, str]:
    best, name = -1.0, "g1"
    for label, fn in _BRANCHES:
        v = fn(x, y)
        if v > best:
            best, name = v, label
    return min(best, 1.0), name


def g(x: float, y: float) -> float:
    return g_branch(x, y)[0]


def _unit(x: float) -> float:
    if not -_EPS <= x <= 1 + _EPS:
        raise ContractViolation(f"fidelity {x} outside [0, 1]")
    return min(1.0, max(0.0, float(x)))


@dataclass(frozen=True)
class FidelityBound:
    value: float
    kind: str = "process"
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ContractViolation(f"bound {self.value} outside [0, 1]")
        if self.kind not in ("process", "average"):
            raise ContractViolation(f"unknown bound kind {self.kind!r}")


def chain_process_bound(values: Sequence[float]) -> FidelityBound:
    """Left fold ``acc = g(next, acc)`` in execution order."""
    values = list(values)
    if not values:
        raise ContractViolation("cannot chain an empty list")
    acc = _unit(values[0])
    trail = []
    for v in values[1:]:
        acc, name = g_branch(v, acc)
        trail.append(name)
    return FidelityBound(acc, "process", tuple(trail))


def average_fidelity_bound(pro: FidelityBound, t: int) -> FidelityBound:
    if pro.kind != "process":
        raise ContractViolation("average bound needs a process-fidelity bound")
    d = 2**t
    return FidelityBound((pro.value * d + 1) / (d + 1), "average", pro.provenance)


def exact_circuit_process_fidelity(c: Circuit, m: NoiseModel) -> float:
    """Process fidelity of the whole noisy circuit against its ideal unitary."""
    t = c.qubit_count
    if t > EXACT_MAX_QUBITS:
        raise UnsupportedSize(f"exact Choi construction limited to {EXACT_MAX_QUBITS} qubits, got {t}")
    d = 2**t
    u = circuit_unitary(c)
    if m.kind == "global":
        keep = survival(m.p, c.depth)
        return _clip(keep + (1 - keep) / d**2)
    omega = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    rho = np.outer(omega, omega.conj()).reshape((2,) * (4 * t))
    rho = run_steps(rho, compile_circuit(c, m))
    psi = u.reshape(-1) / math.sqrt(d)
    return _clip(np.real(np.vdot(psi, rho.reshape(d * d, d * d) @ psi)))
