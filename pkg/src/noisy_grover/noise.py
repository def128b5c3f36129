"""Kraus noise models attached to local gates, and the noisy simulator.

Noise always follows the ideal unitary (``G(rho) = E(G rho G^dagger)``).  The
local models put ``E(p)`` after single-qubit gates and ``E(2p) (x) E(2p)``
after two-qubit gates; idle qubits stay clean.  Cross-talk is decided per
layer from which chain neighbours are busy, see :func:`layer_channels`.
Global depolarizing has both a dense path and the closed form used for large
registers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .densmat import (
    DensityMatrix,
    QubitSite,
    apply_superop,
    as_site,
    kraus_to_superop,
)
from .errors import ContractViolation, ParameterRange
from .gateset import Circuit, GroverParams, Layer, LocalGate, grover_depth

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)

LOCAL_KINDS = ("bitflip", "phaseflip", "depolarizing")
ALL_KINDS = LOCAL_KINDS + ("crosstalk", "global")
_ALIASES = {
    "bit-flip": "bitflip", "bit_flip": "bitflip",
    "phase-flip": "phaseflip", "phase_flip": "phaseflip",
    "depolarising": "depolarizing", "depol": "depolarizing",
    "cross-talk": "crosstalk", "cross_talk": "crosstalk",
    "globaldepolarizing": "global", "global-depolarizing": "global", "global_depolarizing": "global",
}


def max_parameter(kind: str) -> float:
    return 0.75 if kind == "depolarizing" else 1.0


@dataclass(frozen=True)
class NoiseModel:
    """Noise family plus its parameter (``p1`` for global depolarizing)."""

    kind: str
    p: float

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "p", float(self.p))
        if kind not in ALL_KINDS:
            raise ContractViolation(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= max_parameter(kind):
            raise ParameterRange(f"{kind} parameter {self.p} outside [0, {max_parameter(kind)}]")

    @classmethod
    def parse(cls, token: str) -> "NoiseModel":
        """Parse ``kind:p`` (e.g. ``bitflip:1e-3``, ``global:1e-4``)."""
        kind, sep, value = token.partition(":")
        if not sep:
            raise ContractViolation(f"noise token {token!r} is not of the form kind:p")
        try:
            p = float(value)
        except ValueError:
            raise ContractViolation(f"noise parameter {value!r} is not a number") from None
        return cls(kind.strip(), p)

    def token(self) -> str:
        return f"{self.kind}:{self.p!r}"

    def with_p(self, p: float) -> "NoiseModel":
        return NoiseModel(self.kind, p)

    @property
    def is_local(self) -> bool:
        return self.kind in LOCAL_KINDS


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    site: QubitSite

    def __post_init__(self):
        site = as_site(self.site)
        object.__setattr__(self, "site", site)
        ops = tuple(np.asarray(e, dtype=complex) for e in self.operators)
        object.__setattr__(self, "operators", ops)
        d = 2**site.arity
        for e in ops:
            if e.shape != (d, d):
                raise ContractViolation(f"Kraus operator shape {e.shape} does not fit site {site.indices}")
        total = sum(e.conj().T @ e for e in ops)
        if np.max(np.abs(total - np.eye(d))) > 1e-10:
            raise ContractViolation("Kraus operators are not trace preserving")

    @property
    def dim(self) -> int:
        return 2**self.site.arity

    def superop(self) -> np.ndarray:
        return kraus_to_superop(self.operators)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(e @ rho @ e.conj().T for e in self.operators)

    def is_identity(self) -> bool:
        return np.allclose(self.superop(), np.eye(self.dim**2), atol=1e-14)


def identity_channel(site) -> KrausChannel:
    site = as_site(site)
    return KrausChannel((np.eye(2**site.arity),), site)


def single_qubit_kraus(kind: str, p: float) -> tuple[np.ndarray, ...]:
    """``E(p)`` for one qubit; ``crosstalk`` is the bit flip."""
    if p < 0 or p > max_parameter(kind if kind != "crosstalk" else "bitflip"):
        raise ParameterRange(f"{kind} parameter {p} out of range")
    if p == 0:
        return (_I.copy(),)
    if kind in ("bitflip", "crosstalk"):
        return (math.sqrt(1 - p) * _I, math.sqrt(p) * _X)
    if kind == "phaseflip":
        return (math.sqrt(1 - p) * _I, math.sqrt(p) * _Z)
    if kind == "depolarizing":
        w = math.sqrt(p / 3)
        return (math.sqrt(1 - p) * _I, w * _X, w * _Y, w * _Z)
    raise ContractViolation(f"{kind} has no single-qubit Kraus form")


def crosstalk_kraus(p: float, exposure: int) -> tuple[np.ndarray, ...]:
    """Bit flip applied ``exposure`` times: ``E(p)`` or ``E'(p)`` with weight ``2p - 2p**2``."""
    if exposure == 0 or p == 0:
        return (_I.copy(),)
    if exposure == 1:
        return single_qubit_kraus("bitflip", p)
    if exposure == 2:
        flip = 2 * p - 2 * p * p
        return (math.sqrt(1 - flip) * _I, math.sqrt(flip) * _X)
    raise ContractViolation(f"exposure must be 0, 1 or 2, got {exposure}")


def tensor_kraus(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    return tuple(np.kron(x, y) for x in a for y in b)


@dataclass(frozen=True, eq=False)
class NoisyGate:
    ideal: LocalGate
    channel: KrausChannel

    def __post_init__(self):
        if self.channel.site.indices != self.ideal.site.indices:
            raise ContractViolation("channel site differs from gate site")

    def superop(self) -> np.ndarray:
        u = self.ideal.unitary()
        return self.channel.superop() @ np.kron(u, u.conj())

    def kraus(self) -> tuple[np.ndarray, ...]:
        u = self.ideal.unitary()
        return tuple(e @ u for e in self.channel.operators)


def attach_noise(g: LocalGate, m: NoiseModel, exposure: int = 0) -> NoisyGate:
    """Noisy realization of ``g`` under a local model.

    For ``crosstalk`` the gate's own channel depends on its neighbourhood in a
    layer; ``exposure`` is the number of busy outside neighbours (0, 1 or 2).
    """
    if m.kind == "global":
        raise ContractViolation("global depolarizing is not attached per gate")
    if m.kind == "crosstalk":
        ops = crosstalk_kraus(m.p, exposure)
        if g.site.arity == 2:
            ops = tensor_kraus(ops, ops)
        return NoisyGate(g, KrausChannel(ops, g.site))
    if g.site.arity == 1:
        return NoisyGate(g, KrausChannel(single_qubit_kraus(m.kind, m.p), g.site))
    p2 = 2 * m.p
    if p2 > max_parameter(m.kind):
        raise ParameterRange(f"two-qubit {m.kind} needs 2p <= {max_parameter(m.kind)}, got 2p = {p2}")
    one = single_qubit_kraus(m.kind, p2)
    return NoisyGate(g, KrausChannel(tensor_kraus(one, one), g.site))


def crosstalk_exposure(layer: Layer, q: int) -> int:
    """Chain neighbours of ``q`` that are busy with a gate not touching ``q``."""
    count = 0
    for nb in (q - 1, q + 1):
        for g in layer:
            if nb in g.qubits and q not in g.qubits:
                count += 1
                break
    return count


def gate_exposure(layer: Layer, g: LocalGate) -> int:
    return sum(crosstalk_exposure(layer, q) for q in g.qubits)


def layer_channels(layer: Layer, m: NoiseModel, t: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """The layer as a list of ``(qubits, superop)`` steps, applied in order.

    Cross-talk: a single-qubit gate or idle qubit with one busy neighbour gets
    ``E(p)``, with two gets ``E'(p)``; a two-qubit gate with ``e`` busy outside
    neighbours gets the same ``e``-fold flip on both of its qubits.
    """
    if m.kind == "global":
        raise ContractViolation("global depolarizing layers go through the global path")
    steps = []
    for g in layer:
        e = gate_exposure(layer, g) if m.kind == "crosstalk" else 0
        steps.append((g.qubits, _noisy_superop(g, m, e)))
    if m.kind == "crosstalk" and m.p > 0:
        busy = layer.covered()
        for q in range(t):
            if q in busy:
                continue
            e = crosstalk_exposure(layer, q)
            if e:
                steps.append(((q,), _idle_flip(m.p, e)))
    return steps


_SUPEROP_CACHE: dict = {}


def _noisy_superop(g: LocalGate, m: NoiseModel, exposure: int) -> np.ndarray:
    if g.kind == "Raw":
        return attach_noise(g, m, exposure).superop()
    key = (g.kind, g.theta, g.site.arity, m.kind, m.p, exposure)
    hit = _SUPEROP_CACHE.get(key)
    if hit is None:
        hit = attach_noise(g, m, exposure).superop()
        if len(_SUPEROP_CACHE) > 20000:
            _SUPEROP_CACHE.clear()
        _SUPEROP_CACHE[key] = hit
    return hit


@lru_cache(maxsize=256)
def _idle_flip(p: float, exposure: int) -> np.ndarray:
    return kraus_to_superop(crosstalk_kraus(p, exposure))


def _as_tensor(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.tensor()
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 2:
        t = int(round(math.log2(rho.shape[0])))
        return rho.reshape((2,) * (2 * t))
    return rho


def apply_layer(rho: DensityMatrix, layer: Layer, m: NoiseModel) -> DensityMatrix:
    """One layer: every gate's unitary followed by its channel."""
    t = rho.qubit_count
    rho_t = rho.tensor()
    for qubits, sop in layer_channels(layer, m, t):
        rho_t = apply_superop(rho_t, sop, qubits)
    return DensityMatrix.from_tensor(rho_t, validate=True)


def compile_circuit(c: Circuit, m: NoiseModel) -> list[tuple[tuple[int, ...], np.ndarray]]:
    steps = []
    for layer in c.layers:
        steps.extend(layer_channels(layer, m, c.qubit_count))
    return steps


def run_steps(rho_t: np.ndarray, steps: Iterable[tuple[tuple[int, ...], np.ndarray]]) -> np.ndarray:
    for qubits, sop in steps:
        rho_t = apply_superop(rho_t, sop, qubits)
    return rho_t


def run_circuit(c: Circuit, m: NoiseModel, rho: DensityMatrix | None = None) -> DensityMatrix:
    """Noisy density-matrix evolution of ``c`` (any model, including global)."""
    t = c.qubit_count
    if rho is None:
        rho = ground_state(t)
    if m.kind == "global":
        return apply_global_depolarizing(rho, c, m.p)
    out = run_steps(rho.tensor(), compile_circuit(c, m))
    return DensityMatrix.from_tensor(out, validate=False)


def ground_state(t: int) -> DensityMatrix:
    m = np.zeros((2**t, 2**t), dtype=complex)
    m[0, 0] = 1.0
    return DensityMatrix(m, t, validate=False)


def survival(p1: float, depth: int) -> float:
    """``(1 - p1)**d``, the weight left on the ideal state after ``d`` layers."""
    return (1.0 - p1) ** depth


def depolarizing_weight(p1: float, depth: int) -> float:
    """``p_d = 1 - (1 - p1)**d``."""
    return 1.0 - survival(p1, depth)


def global_depolarizing_success(n: int, k: int, p1: float, M: int = 1) -> tuple[float, float]:
    """Closed-form success probability and running time under global depolarizing."""
    if not 0.0 <= p1 <= 1.0:
        raise ParameterRange(f"p1 = {p1} outside [0, 1]")
    keep = survival(p1, grover_depth(n, k))
    s = keep * GroverParams(n, M).success(k) + (1.0 - keep) * M / 2**n
    r = k / s if s > 0 else math.inf
    return s, r


def apply_global_depolarizing(rho: DensityMatrix, c: Circuit, p1: float) -> DensityMatrix:
    """``(1-p1)**d U rho U^dagger + (1 - (1-p1)**d) I / 2**t`` with ``d`` the depth."""
    t = rho.qubit_count
    if c.qubit_count != t:
        raise ContractViolation("circuit and state sizes differ")
    ideal = run_steps(rho.tensor(), compile_circuit(c, NoiseModel("bitflip", 0.0)))
    keep = survival(p1, c.depth)
    d = 2**t
    out = keep * ideal.reshape(d, d) + (1.0 - keep) * np.eye(d) / d
    return DensityMatrix(out, t, validate=False)


def alpha_success(rho, n: int) -> float:
    """``<T| tr_beta(rho) |T>`` for the marked element ``x = N - 1``."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho).reshape(2 ** (n + 1), -1)
    i = 2 ** (n + 1) - 2
    return float(np.real(m[i, i] + m[i + 1, i + 1]))
