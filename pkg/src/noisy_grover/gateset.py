"""Local gates, layered circuits, and the Grover circuit builders.

The multi-controlled Toffoli is the controlled-root construction (nested
columns of controlled ``Rx(pi / 2**k)`` gates with phase corrections) laid out
on a linear chain.  Each column's control travels along the chain with a
CRx-then-SWAP step per neighbour, which is what produces the fixed angle per
chain position.  The ten parts, in emission order, are::

    P1  C1  C2  C3  C3.5  P2  C4  C5  C6  C6.5

Every part is packed ASAP on its own and parts are laid end to end, so the
per-part depths add up to the total.  In the two middle parts (C2, C5) the
travelling control applies its rotation and swaps past the target in one time
step, modelled as the fused ``CRxSWAP`` gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .densmat import QubitSite, apply_to_axes, as_site
from .errors import ContractViolation, UnsupportedSize

_I2 = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

SINGLE_KINDS = {"H", "X", "S"}
PAIR_KINDS = {"CRx", "SWAP", "CRxSWAP"}
PARAM_KINDS = {"S", "CRx", "CRxSWAP"}
TOFFOLI_PARTS = ("P1", "C1", "C2", "C3", "C3.5", "P2", "C4", "C5", "C6", "C6.5")
MAX_UNITARY_QUBITS = 6


def rx(theta: float) -> np.ndarray:
    return math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * _X


def phase(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)]).astype(complex)


def controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


@dataclass(frozen=True, eq=False)
class LocalGate:
    """A 1- or 2-qubit unitary placed on the chain.

    For two-qubit kinds the first site index is the control.  ``Raw`` gates
    carry their own matrix.
    """

    kind: str
    site: QubitSite
    theta: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "site", as_site(self.site))
        arity = self.site.arity
        if self.kind == "Raw":
            if self.matrix is None:
                raise ContractViolation("Raw gate needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2**arity, 2**arity):
                raise ContractViolation(f"Raw matrix shape {m.shape} does not fit site {self.site.indices}")
            if np.max(np.abs(m.conj().T @ m - np.eye(2**arity))) > 1e-10:
                raise ContractViolation("Raw matrix is not unitary")
            object.__setattr__(self, "matrix", m)
            return
        if self.kind in SINGLE_KINDS:
            want = 1
        elif self.kind in PAIR_KINDS:
            want = 2
        else:
            raise ContractViolation(f"unknown gate kind {self.kind!r}")
        if arity != want:
            raise ContractViolation(f"{self.kind} needs {want} qubit(s), site is {self.site.indices}")
        if (self.kind in PARAM_KINDS) != (self.theta is not None):
            raise ContractViolation(f"{self.kind} parameter mismatch")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.site.indices

    def unitary(self) -> np.ndarray:
        k = self.kind
        if k == "H":
            return _H
        if k == "X":
            return _X
        if k == "S":
            return phase(self.theta)
        if k == "CRx":
            return controlled(rx(self.theta))
        if k == "SWAP":
            return _SWAP
        if k == "CRxSWAP":
            return _SWAP @ controlled(rx(self.theta))
        return self.matrix

    def label(self) -> str:
        where = ",".join(str(q) for q in self.qubits)
        if self.kind in PARAM_KINDS:
            return f"{self.kind}({self.theta:.12g})@{where}"
        return f"{self.kind}@{where}"

    def __repr__(self) -> str:
        return f"LocalGate({self.label()})"


def H(q: int) -> LocalGate:
    return LocalGate("H", (q,))


def X(q: int) -> LocalGate:
    return LocalGate("X", (q,))


def S(theta: float, q: int) -> LocalGate:
    return LocalGate("S", (q,), theta)


def CRx(theta: float, control: int, target: int) -> LocalGate:
    return LocalGate("CRx", (control, target), theta)


def SWAP(a: int, b: int) -> LocalGate:
    return LocalGate("SWAP", (a, b))


def CRxSWAP(theta: float, control: int, target: int) -> LocalGate:
    return LocalGate("CRxSWAP", (control, target), theta)


@dataclass(frozen=True)
class Layer:
    gates: tuple[LocalGate, ...] = ()

    def __post_init__(self):
        gates = tuple(sorted(self.gates, key=lambda g: min(g.qubits)))
        object.__setattr__(self, "gates", gates)
        seen: set[int] = set()
        for g in gates:
            if seen.intersection(g.qubits):
                raise ContractViolation(f"overlapping sites in layer at {g.qubits}")
            seen.update(g.qubits)

    def covered(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


@dataclass(frozen=True)
class Circuit:
    """Ordered layers on ``qubit_count`` qubits; depth is the layer count.

    ``parts`` maps a part name to its ``[start, stop)`` layer span when the
    builder recorded one.
    """

    layers: tuple[Layer, ...]
    qubit_count: int
    parts: tuple[tuple[str, int, int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            for g in layer:
                g.site.check(self.qubit_count)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> list[LocalGate]:
        return [g for layer in self.layers for g in layer]

    def part_depths(self) -> dict[str, int]:
        return {name: stop - start for name, start, stop in self.parts}

    def then(self, other: "Circuit", prefix: str = "") -> "Circuit":
        if other.qubit_count != self.qubit_count:
            raise ContractViolation("qubit counts differ")
        off = self.depth
        parts = self.parts + tuple((prefix + n, a + off, b + off) for n, a, b in other.parts)
        return Circuit(self.layers + other.layers, self.qubit_count, parts)

    def dump(self) -> str:
        return "\n".join(" ".join(g.label() for g in layer) for layer in self.layers)

    def __add__(self, other: "Circuit") -> "Circuit":
        return self.then(other)


def schedule_asap(gates: Iterable[LocalGate], t: int) -> list[Layer]:
    """Pack gates in order, each into the first layer after its qubits' last use."""
    slots: list[list[LocalGate]] = []
    ready = [0] * t
    for g in gates:
        at = max(ready[q] for q in g.qubits)
        if at == len(slots):
            slots.append([])
        slots[at].append(g)
        for q in g.qubits:
            ready[q] = at + 1
    return [Layer(tuple(s)) for s in slots]


def circuit_from_parts(parts: Sequence[tuple[str, Sequence[LocalGate]]], t: int) -> Circuit:
    layers: list[Layer] = []
    spans = []
    for name, gates in parts:
        start = len(layers)
        layers.extend(schedule_asap(gates, t))
        spans.append((name, start, len(layers)))
    return Circuit(tuple(layers), t, tuple(spans))


@dataclass(frozen=True)
class GroverParams:
    n: int
    M: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation("n must be at least 1")
        if not 1 <= self.M < self.N:
            raise ContractViolation(f"need 1 <= M < N, got M={self.M}, N={self.N}")

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def lam(self) -> float:
        return self.M / self.N

    @property
    def theta(self) -> float:
        return 2.0 * math.asin(math.sqrt(self.lam))

    def success(self, k: int) -> float:
        """Noiseless success probability ``sin((2k+1) theta / 2)**2``."""
        return math.sin((2 * k + 1) * self.theta / 2) ** 2


class _Chain:
    """Logical-to-physical tracker for the swap networks."""

    def __init__(self, t: int):
        self.pos = list(range(t))
        self.at = list(range(t))
        self.gates: list[LocalGate] = []

    def _swap_positions(self, p: int) -> None:
        a, b = self.at[p], self.at[p + 1]
        self.at[p], self.at[p + 1] = b, a
        self.pos[a], self.pos[b] = p + 1, p

    def swap(self, p: int) -> None:
        self.gates.append(SWAP(p, p + 1))
        self._swap_positions(p)

    def crx(self, theta: float, c: int, t: int) -> None:
        self.gates.append(CRx(theta, self.pos[c], self.pos[t]))

    def crx_swap(self, theta: float, c: int, t: int) -> None:
        pc, pt = self.pos[c], self.pos[t]
        self.gates.append(CRxSWAP(theta, pc, pt))
        self._swap_positions(min(pc, pt))

    def phase(self, theta: float, q: int) -> None:
        self.gates.append(S(theta, self.pos[q]))

    def take(self) -> list[LocalGate]:
        out, self.gates = self.gates, []
        return out


def _columns(ch: _Chain, m: int, first: bool, parts: list) -> None:
    """Controlled-root block on logical qubits ``0..m`` (target ``m``).

    Assumes the block sits at physical ``0..m`` in logical order and leaves it
    there.  ``first`` selects the outer block (positive middle column and the
    root-of-X phase corrections) versus the inner correction block.
    """
    c1, c2, c3, c4 = ("C1", "C2", "C3", "C3.5") if first else ("C4", "C5", "C6", "C6.5")
    if first:
        ch.phase(math.pi / 2**m, 0)
        for j in range(1, m):
            ch.phase(math.pi / 2 ** (m - j + 1), j)
        parts.append(("P1", ch.take()))
    # forward columns: controls m-1 .. 1 travel to the far end
    for i in range(m - 1, 0, -1):
        while ch.pos[i] < m:
            j = ch.at[ch.pos[i] + 1]
            ch.crx(math.pi / 2 ** (j - i), i, j)
            ch.swap(ch.pos[i])
    parts.append((c1, ch.take()))
    sign = 1.0 if first else -1.0
    while ch.pos[0] < m:
        j = ch.at[ch.pos[0] + 1]
        ch.crx_swap(sign * math.pi / 2 ** (j - 1), 0, j)
    parts.append((c2, ch.take()))
    # inverse columns: controls 1 .. m-1 travel back to their home slots
    for i in range(1, m):
        while ch.pos[i] > i - 1:
            j = ch.at[ch.pos[i] - 1]
            ch.crx(-math.pi / 2 ** (j - i), i, j)
            ch.swap(ch.pos[i] - 1)
    parts.append((c3, ch.take()))
    while ch.pos[0] > 0:
        ch.swap(ch.pos[0] - 1)
    parts.append((c4, ch.take()))
    if first:
        for j in range(1, m):
            ch.phase(-math.pi / 2 ** (m - j + 1), j)
        parts.append(("P2", ch.take()))


def _toffoli_two_controls() -> Circuit:
    # Same gates as the general construction at n = 2, but the qubit-0 ->
    # target root commutes with everything else, so it is deferred and shares
    # a layer with the P2 phase while qubit 1 is swapped out of the way.
    # Depth 8; the general part formulas go negative here.
    q = math.pi
    parts = [
        ("P1", [S(q / 4, 0), S(q / 4, 1)]),
        ("C1", [CRx(q / 2, 1, 2)]),
        ("C2", [CRx(q, 0, 1)]),
        ("C3", [CRx(-q / 2, 1, 2)]),
        ("C2.route", [SWAP(1, 2)]),
        ("P2", [S(-q / 4, 2), CRx(q / 2, 0, 1)]),
        ("C2.unroute", [SWAP(1, 2)]),
        ("C5", [CRx(-q, 0, 1)]),
    ]
    return circuit_from_parts(parts, 3)


def build_toffoli(n: int) -> Circuit:
    """``(n+1)``-qubit Toffoli: controls on qubits ``0..n-1``, target on ``n``.

    Depth is ``20n - 32``.  Equal to the exact multi-controlled X up to a
    global phase.
    """
    if n < 2:
        raise UnsupportedSize(f"Toffoli decomposition needs n >= 2, got {n}")
    if n == 2:
        return _toffoli_two_controls()
    ch = _Chain(n + 1)
    parts: list = []
    _columns(ch, n, True, parts)
    _columns(ch, n - 1, False, parts)
    assert ch.pos == list(range(n + 1))
    return circuit_from_parts(parts, n + 1)


def toffoli_part_depth(name: str, n: int) -> int:
    """Published per-part depth of the ``(n+1)``-qubit Toffoli."""
    table = {
        "P1": 1, "P2": 1,
        "C1": 4 * n - 6, "C3": 4 * n - 6,
        "C2": n, "C3.5": n,
        "C4": 4 * n - 10, "C6": 4 * n - 10,
        "C5": n - 1, "C6.5": n - 1,
    }
    return table[name]


def build_oracle(n: int) -> Circuit:
    """Phase oracle marking ``x = N - 1`` (the Toffoli onto the beta qubit)."""
    return build_toffoli(n)


def _single_layer(gates: Sequence[LocalGate], t: int, name: str) -> Circuit:
    return Circuit((Layer(tuple(gates)),), t, ((name, 0, 1),))


def build_reflection(n: int) -> Circuit:
    t = n + 1
    alpha = range(n)
    hs = _single_layer([H(q) for q in alpha], t, "H")
    xs = _single_layer([X(q) for q in alpha], t, "X")
    toff = build_toffoli(n)
    return hs.then(xs).then(toff, "Toff.").then(xs).then(hs)


def build_initializer(n: int) -> Circuit:
    t = n + 1
    first = Layer(tuple([H(q) for q in range(n)] + [X(n)]))
    return Circuit((first, Layer((H(n),))), t, (("Si", 0, 2),))


def build_iterate(n: int) -> Circuit:
    """One Grover iterate: oracle, then reflection."""
    return build_oracle(n).then(build_reflection(n))


def build_grover(n: int, k: int) -> Circuit:
    if k < 0:
        raise ContractViolation("iterate count must be nonnegative")
    circ = build_initializer(n)
    it = build_iterate(n)
    for i in range(k):
        circ = circ.then(Circuit(it.layers, it.qubit_count, ((f"Sg{i + 1}", 0, it.depth),)))
    return circ


def grover_depth(n: int, k: int) -> int:
    return 40 * n * k - 60 * k + 2


def circuit_unitary(c: Circuit) -> np.ndarray:
    t = c.qubit_count
    if t > MAX_UNITARY_QUBITS:
        raise UnsupportedSize(f"dense unitary limited to {MAX_UNITARY_QUBITS} qubits, got {t}")
    u = np.eye(2**t, dtype=complex).reshape((2,) * t + (2**t,))
    for g in c.gates():
        u = apply_to_axes(u, g.unitary(), g.qubits)
    return u.reshape(2**t, 2**t)


def run_statevector(c: Circuit, psi: np.ndarray | None = None) -> np.ndarray:
    t = c.qubit_count
    if psi is None:
        psi = np.zeros(2**t, dtype=complex)
        psi[0] = 1.0
    v = np.asarray(psi, dtype=complex).reshape((2,) * t)
    for g in c.gates():
        v = apply_to_axes(v, g.unitary(), g.qubits)
    return v.reshape(-1)


def multi_controlled_x(n: int) -> np.ndarray:
    """Exact Toffoli on ``n`` controls (qubits ``0..n-1``) and target ``n``."""
    d = 2 ** (n + 1)
    m = np.eye(d, dtype=complex)
    m[[d - 2, d - 1]] = m[[d - 1, d - 2]]
    return m


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise deviation after the best global-phase alignment."""
    overlap = np.vdot(a.ravel(), b.ravel())
    ph = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a * ph - b)))
