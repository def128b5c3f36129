"""Dense states on a chain of qubits.

Qubit 0 is the most significant bit of a basis label, so ``|q0 q1 ... q_{t-1}>``
has index ``sum(q_i * 2**(t-1-i))``.  Every matrix and tensor in the package
uses this ordering.  Density matrices are also handled as rank-``2t`` tensors
with ket axes ``0..t-1`` followed by bra axes ``t..2t-1``; the simulator works
on that form and only wraps results in :class:`DensityMatrix` at API edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation

ATOL = 1e-10
PSD_TOL = 1e-9
PURE_TOL = 1e-9


@dataclass(frozen=True)
class QubitSite:
    """One qubit, or two chain-adjacent qubits, in gate order."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) not in (1, 2):
            raise ContractViolation(f"site must have 1 or 2 qubits, got {idx}")
        if min(idx) < 0:
            raise ContractViolation(f"negative qubit index in {idx}")
        if len(idx) == 2 and abs(idx[0] - idx[1]) != 1:
            raise ContractViolation(f"two-qubit site {idx} is not chain-adjacent")

    @property
    def arity(self) -> int:
        return len(self.indices)

    def check(self, t: int) -> None:
        if max(self.indices) >= t:
            raise ContractViolation(f"site {self.indices} out of range for {t} qubits")

    def __iter__(self):
        return iter(self.indices)


def as_site(site) -> QubitSite:
    if isinstance(site, QubitSite):
        return site
    if isinstance(site, (int, np.integer)):
        return QubitSite((int(site),))
    return QubitSite(tuple(site))


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape[0] != 2**self.qubit_count:
            raise ContractViolation("amplitude vector length is not 2**qubit_count")
        if abs(np.vdot(amp, amp).real - 1.0) > ATOL:
            raise ContractViolation("state is not normalized")

    @classmethod
    def basis(cls, bits: Sequence[int] | str) -> "PureState":
        bits = [int(b) for b in bits]
        t = len(bits)
        amp = np.zeros(2**t, dtype=complex)
        amp[int("".join(map(str, bits)) or "0", 2)] = 1.0
        return cls(amp, t)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.qubit_count)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``2**t`` dims."""

    entries: np.ndarray
    qubit_count: int
    validate: bool = True

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        d = 2**self.qubit_count
        if m.shape != (d, d):
            m = m.reshape(d, d)
        object.__setattr__(self, "entries", m)
        if self.validate:
            check_density(m)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, validate: bool = True) -> "DensityMatrix":
        t = tensor.ndim // 2
        return cls(tensor.reshape(2**t, 2**t), t, validate)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape((2,) * (2 * self.qubit_count))

    @property
    def dim(self) -> int:
        return 2**self.qubit_count

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def expectation(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(self.entries @ op)))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)


def check_density(m: np.ndarray, tol: float = ATOL, psd_tol: float = PSD_TOL) -> None:
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise ContractViolation("matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > tol:
        raise ContractViolation(f"trace {np.trace(m).real!r} differs from 1")
    lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    if lo < -psd_tol:
        raise ContractViolation(f"minimum eigenvalue {lo:.3e} below -{psd_tol}")


def _matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.entries
    if isinstance(x, PureState):
        return np.outer(x.amplitudes, x.amplitudes.conj())
    return np.asarray(x, dtype=complex)


def _leading_vector(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return v[:, -1]


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``tr(sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Eigenvalues are clipped at zero before square roots.  Pure inputs (purity above ``1 - 1e-9``) take the ``<psi|rho|psi>`` path.
    """
    if isinstance(sigma, PureState) and not isinstance(rho, PureState):
        psi = sigma.amplitudes
        return _clip01(np.vdot(psi, _matrix(rho) @ psi).real)
    if isinstance(rho, PureState):
        psi = rho.amplitudes
        return _clip01(np.vdot(psi, _matrix(sigma) @ psi).real)
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise ContractViolation(f"dimension mismatch {a.shape} vs {b.shape}")
    if np.vdot(b, b).real > 1 - PURE_TOL:
        psi = _leading_vector(b)
        return _clip01(np.vdot(psi, a @ psi).real)
    if np.vdot(a, a).real > 1 - PURE_TOL:
        psi = _leading_vector(a)
        return _clip01(np.vdot(psi, b @ psi).real)
    # trace norm of sqrt(rho) sqrt(sigma) equals tr sqrt(sqrt(rho) sigma sqrt(rho))
    sv = np.linalg.svd(_psd_root(a) @ _psd_root(b), compute_uv=False)
    return _clip01(float(np.sum(sv)) ** 2)


def _psd_root(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def partial_trace(rho, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (returned in increasing qubit order)."""
    m = _matrix(rho)
    t = int(np.log2(m.shape[0]))
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ContractViolation("keep set is empty")
    if keep[0] < 0 or keep[-1] >= t:
        raise ContractViolation(f"keep {keep} out of range for {t} qubits")
    reduced = trace_out_tensor(m.reshape((2,) * (2 * t)), keep)
    k = len(keep)
    return DensityMatrix(reduced.reshape(2**k, 2**k), k)


def trace_out_tensor(rho_t: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    t = rho_t.ndim // 2
    drop = [q for q in range(t) if q not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    ket = list(letters[:t])
    bra = list(letters[t : 2 * t])
    for q in drop:
        bra[q] = ket[q]
    out = "".join(ket[q] for q in keep) + "".join(bra[q] for q in keep)
    return np.einsum("".join(ket) + "".join(bra) + "->" + out, rho_t)


def embed_operator(op: np.ndarray, site, t: int) -> np.ndarray:
    """``op`` on ``site`` tensored with identity on every other qubit."""
    site = as_site(site)
    site.check(t)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**site.arity, 2**site.arity):
        raise ContractViolation(f"operator shape {op.shape} does not match site {site.indices}")
    eye = np.eye(2**t, dtype=complex).reshape((2,) * t + (2**t,))
    out = apply_to_axes(eye, op, site.indices)
    return out.reshape(2**t, 2**t)


def apply_to_axes(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a ``2**m x 2**m`` operator into the listed tensor axes."""
    m = len(axes)
    op_t = op.reshape((2,) * (2 * m))
    out = np.tensordot(op_t, tensor, axes=(list(range(m, 2 * m)), list(axes)))
    return np.moveaxis(out, list(range(m)), list(axes))


def apply_unitary(rho_t: np.ndarray, u: np.ndarray, site: Sequence[int]) -> np.ndarray:
    t = rho_t.ndim // 2
    out = apply_to_axes(rho_t, u, site)
    return apply_to_axes(out, u.conj(), [t + q for q in site])


def apply_superop(rho_t: np.ndarray, superop: np.ndarray, site: Sequence[int]) -> np.ndarray:
    """Apply a Liouville matrix acting on ``vec(rho_site)`` with (ket, bra) ordering."""
    t = rho_t.ndim // 2
    axes = list(site) + [t + q for q in site]
    return apply_to_axes(rho_t, superop, axes)


def kraus_to_superop(ops: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_k E_k (.) E_k^dagger`` as a matrix on row-major ``vec(rho)``."""
    return sum(np.kron(e, e.conj()) for e in ops)


def maximally_mixed(t: int) -> DensityMatrix:
    return DensityMatrix(np.eye(2**t, dtype=complex) / 2**t, t)


def random_density_matrix(t: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    d = 2**t
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, t)


def haar_state(t: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=2**t) + 1j * rng.normal(size=2**t)
    return PureState(v / np.linalg.norm(v), t)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
