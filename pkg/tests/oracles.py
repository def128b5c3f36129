"""Reference implementations written directly from the noise rules, shared by tests."""

import math
from functools import reduce

import numpy as np

from noisy_grover.gateset import CRx, CRxSWAP, H, Layer, S, SWAP, X

I2 = np.eye(2)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]])
PZ = np.diag([1.0, -1.0])


def full(op, qubits, t):
    """Dense embedding built from explicit Kronecker products (qubit 0 first)."""
    qubits = list(qubits)
    if len(qubits) == 2 and qubits[0] > qubits[1]:
        sw = np.eye(4)[[0, 2, 1, 3]]
        op, qubits = sw @ op @ sw, qubits[::-1]
    lo = qubits[0]
    return reduce(np.kron, [np.eye(2**lo), op, np.eye(2 ** (t - lo - len(qubits)))])


def pauli_kraus(kind, p):
    if kind in ("bitflip", "crosstalk"):
        return [math.sqrt(1 - p) * I2, math.sqrt(p) * PX]
    if kind == "phaseflip":
        return [math.sqrt(1 - p) * I2, math.sqrt(p) * PZ]
    w = math.sqrt(p / 3)
    return [math.sqrt(1 - p) * I2, w * PX, w * PY, w * PZ]


def apply_kraus(rho, ops, qubits, t):
    return sum(full(e, qubits, t) @ rho @ full(e, qubits, t).conj().T for e in ops)


def oracle_layer(rho, gates, model, t):
    """Reference noisy layer written directly from the noise rules."""
    busy = {q for g in gates for q in g.qubits}
    for g in gates:
        u = full(g.unitary(), g.qubits, t)
        rho = u @ rho @ u.conj().T
    for g in gates:
        if model.kind == "crosstalk":
            e = 0
            for q in g.qubits:
                for nb in (q - 1, q + 1):
                    if nb in busy and nb not in g.qubits:
                        e += 1
            for q in g.qubits:
                for _ in range(e):
                    rho = apply_kraus(rho, pauli_kraus("bitflip", model.p), [q], t)
        else:
            p = model.p if len(g.qubits) == 1 else 2 * model.p
            for q in g.qubits:
                rho = apply_kraus(rho, pauli_kraus(model.kind, p), [q], t)
    if model.kind == "crosstalk":
        for q in range(t):
            if q in busy:
                continue
            for nb in (q - 1, q + 1):
                if nb in busy:
                    rho = apply_kraus(rho, pauli_kraus("bitflip", model.p), [q], t)
    return rho


def random_layer(rng, t):
    gates, q = [], 0
    while q < t:
        r = rng.random()
        if r < 0.3:
            q += 1
            continue
        if r < 0.65 or q == t - 1:
            gates.append([H(q), X(q), S(rng.uniform(-3, 3), q)][rng.integers(3)])
            q += 1
        else:
            a, b = (q, q + 1) if rng.random() < 0.5 else (q + 1, q)
            th = rng.uniform(-3, 3)
            gates.append([CRx(th, a, b), SWAP(a, b), CRxSWAP(th, a, b)][rng.integers(3)])
            q += 2
    return Layer(tuple(gates))
