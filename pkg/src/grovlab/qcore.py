"""Dense complex linear algebra for few-qubit pure states.

Qubit 0 is the leftmost ket symbol, so the amplitude of ``|q0 q1 ... q_{n-1}>``
sits at the big-endian integer ``q0 q1 ... q_{n-1}``.  Everything here is
immutable: arrays are copied on construction and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 10


@dataclass(frozen=True)
class Tolerances:
    """Single home for the numeric thresholds used across the package."""

    algebra: float = 1e-12
    psd: float = 1e-10
    feasibility: float = 1e-10
    boundary: float = 1e-10
    conjecture: float = 1e-6
    pmax_gain: float = 1e-12
    lagrange: float = 1e-8
    normalization_warn: float = 1e-6

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _n_from_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        n = _n_from_dim(amps.size)
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL.algebra:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], normalize: bool = False) -> "PureState":
        amps = np.asarray(amps, dtype=complex).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("zero vector cannot be normalized")
            amps = amps / norm
        return cls(amps)

    @classmethod
    def basis(cls, bits: str) -> "PureState":
        """Computational basis state from a bit string, e.g. ``basis("010")``."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes as an order-n tensor of shape (2,)*n, axis k = qubit k."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        n = _n_from_dim(m.shape[0])
        if np.abs(m - m.conj().T).max() > TOL.algebra:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TOL.algebra:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -TOL.psd:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n_qubits", n)

    def bloch(self) -> np.ndarray:
        """Bloch vector Tr[rho sigma] of a single-qubit density matrix."""
        if self.n_qubits != 1:
            raise ValueError("Bloch vector needs a one-qubit density matrix")
        return np.array([np.trace(self.matrix @ p).real for p in (X, Y, Z)])


@dataclass(frozen=True)
class Operator1Q:
    matrix: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (2, 2):
            raise ValueError("single-qubit operator must be 2x2")
        object.__setattr__(self, "matrix", m)

    def is_unitary(self, tol: float = TOL.algebra) -> bool:
        return bool(np.abs(self.matrix.conj().T @ self.matrix - np.eye(2)).max() <= tol)

    def dagger(self) -> "Operator1Q":
        return Operator1Q(self.matrix.conj().T, label=f"{self.label}^dag")

    def __matmul__(self, other: "Operator1Q") -> "Operator1Q":
        return Operator1Q(self.matrix @ other.matrix, label=f"{self.label}{other.label}")


I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (I2, X, Y, Z):
    _m.setflags(write=False)

PAULI = {
    "I": Operator1Q(I2, "I"),
    "X": Operator1Q(X, "X"),
    "Y": Operator1Q(Y, "Y"),
    "Z": Operator1Q(Z, "Z"),
}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def qubit(theta: float, phi: float) -> np.ndarray:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bloch_angles(v: np.ndarray) -> tuple[float, float]:
    """Inverse of :func:`qubit` up to global phase."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    if abs(v[0]) > 0:
        v = v * np.exp(-1j * np.angle(v[0]))
    theta = 2 * np.arctan2(abs(v[1]), abs(v[0]))
    phi = float(np.angle(v[1])) if abs(v[1]) > 1e-15 else 0.0
    return float(theta), phi % (2 * np.pi)


def ket_from_bloch_vector(s: np.ndarray) -> np.ndarray:
    """Single-qubit ket whose projector is (I + s.sigma)/2."""
    s = np.asarray(s, dtype=float)
    theta = np.arccos(np.clip(s[2], -1.0, 1.0))
    phi = np.arctan2(s[1], s[0])
    return qubit(theta, phi)


Tensorable = Union[PureState, Operator1Q, np.ndarray]


def tensor(a: Tensorable, b: Tensorable) -> Tensorable:
    """Kronecker product, first operand on the lower qubit indices."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Operator1Q) or isinstance(b, Operator1Q):
        ma = a.matrix if isinstance(a, Operator1Q) else np.asarray(a)
        mb = b.matrix if isinstance(b, Operator1Q) else np.asarray(b)
        return np.kron(ma, mb)
    if isinstance(a, PureState) or isinstance(b, PureState):
        raise TypeError("cannot mix states and operators in tensor()")
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*factors: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=complex) if np.ndim(factors[0]) == 1 else np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def apply_1q(state: PureState, op: Union[Operator1Q, np.ndarray], target: int) -> PureState:
    n = state.n_qubits
    if not 0 <= target < n:
        raise IndexError(f"target {target} out of range for {n} qubits")
    m = op.matrix if isinstance(op, Operator1Q) else np.asarray(op, dtype=complex)
    t = np.tensordot(m, state.tensor(), axes=([1], [target]))
    t = np.moveaxis(t, 0, target)
    # non-unitary operators produce unnormalized vectors; renormalize those
    amps = t.reshape(-1)
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > TOL.algebra:
        if norm == 0:
            raise ValueError("operator annihilates the state")
        amps = amps / norm
    return PureState(amps)


def permute_qubits(state: PureState, order: Sequence[int]) -> PureState:
    """New state whose qubit k is the old qubit ``order[k]``."""
    return PureState(np.transpose(state.tensor(), order).reshape(-1))


def partial_trace(rho: Union[DensityMatrix, PureState], keep: Sequence[int]) -> DensityMatrix:
    if isinstance(rho, PureState):
        return _reduced_from_pure(rho, keep)
    n = rho.n_qubits
    keep = _check_keep(keep, n)
    t = rho.matrix.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[q] for q in range(n)]
    col = [letters[n + q] if q in keep else letters[q] for q in range(n)]
    out = [letters[q] for q in keep] + [letters[n + q] for q in keep]
    r = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), t)
    d = 2 ** len(keep)
    m = r.reshape(d, d)
    return DensityMatrix((m + m.conj().T) / 2)


def _check_keep(keep: Sequence[int], n: int) -> list[int]:
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    if any(b <= a for a, b in zip(keep, keep[1:])):
        raise ValueError("keep must be strictly increasing without duplicates")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError("keep index out of range")
    return keep


def _reduced_from_pure(state: PureState, keep: Sequence[int]) -> DensityMatrix:
    n = state.n_qubits
    keep = _check_keep(keep, n)
    traced = [q for q in range(n) if q not in keep]
    m = np.transpose(state.tensor(), keep + traced).reshape(2 ** len(keep), -1)
    r = m @ m.conj().T
    return DensityMatrix((r + r.conj().T) / 2)


def fidelity(a: PureState, b: PureState) -> float:
    if a.n_qubits != b.n_qubits:
        raise ValueError("fidelity needs states with equal qubit counts")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def overlap_product(state: PureState, factors) -> complex:
    """<e_1|...<e_n|psi> for a product of single-qubit kets."""
    vecs = factors.factors if hasattr(factors, "factors") else factors
    if len(vecs) != state.n_qubits:
        raise ValueError("need one factor per qubit")
    t = state.tensor()
    for v in reversed(vecs):
        v = np.asarray(v, dtype=complex)
        if v.shape != (2,):
            raise ValueError("factors must be single-qubit vectors")
        if abs(np.linalg.norm(v) - 1.0) > TOL.algebra:
            raise ValueError("product factors must be unit vectors")
        t = t @ v.conj()
    return complex(t)


def random_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state from normalized complex Gaussian amplitudes."""
    z = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return PureState(z / np.linalg.norm(z))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR with the phase fix of Mezzadri."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)
