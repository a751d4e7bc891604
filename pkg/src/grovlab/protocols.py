"""Perfect two-party teleportation and superdense coding over 3-qubit resources.

Resource qubits 0, 1, 2 are also called particles 2, 3, 4 (the family labels); the
teleported qubit is always a separate one-qubit input.  In a teleportation
assignment Bob holds one resource qubit and Alice the other two plus the
input.  In superdense coding Alice holds one resource qubit and Bob the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import TOL, Operator1Q, PureState, X, Z, apply_1q, fidelity, partial_trace

# outcome labels in the order (I, Z, X, ZX)
OUTCOME_LABELS = ("I", "Z", "X", "ZX")
OUTCOME_PAULIS = (np.eye(2, dtype=complex), Z, X, Z @ X)
# Alice's encodings for superdense coding: I, Z, X, -iY
DENSE_LABELS = ("I", "Z", "X", "-iY")
DENSE_OPS = (np.eye(2, dtype=complex), Z, X, np.array([[0, -1], [1, 0]], dtype=complex))


class InfeasibleProtocol(ValueError):
    """Raised when a perfect protocol is requested for a resource that has none."""


@dataclass(frozen=True)
class TeleportProtocol:
    bob_qubit: int
    basis: tuple  # 4 PureStates on (input, alice_1, alice_2)
    corrections: tuple  # 4 Operator1Q
    probabilities: tuple  # 4 floats
    labels: tuple = OUTCOME_LABELS

    @property
    def alice_qubits(self) -> tuple:
        return tuple(q for q in range(3) if q != self.bob_qubit)


@dataclass(frozen=True)
class SuperdenseReport:
    alice_qubit: int
    encoded: tuple
    gram: np.ndarray
    feasible: bool

    @property
    def max_offdiag(self) -> float:
        return float(np.abs(self.gram - np.diag(np.diag(self.gram))).max())


@dataclass(frozen=True)
class TeleportRun:
    outcome: int
    probabilities: np.ndarray
    bob_state: PureState
    fidelity: float


def _check_resource(resource: PureState, idx: int):
    if resource.n_qubits != 3:
        raise ValueError("resource must be a three-qubit state")
    if not 0 <= idx < 3:
        raise IndexError(f"qubit index {idx} out of range")


def teleport_feasible(resource: PureState, bob_qubit: int, tol: float = TOL.feasibility) -> bool:
    """True iff Bob's one-qubit reduction is the maximally mixed state."""
    _check_resource(resource, bob_qubit)
    rho = partial_trace(resource, [bob_qubit]).matrix
    return bool(np.abs(rho - np.eye(2) / 2).max() <= tol)


def _phase_fixed(v: np.ndarray, cut: float) -> np.ndarray:
    """Normalize v and rotate its first non-negligible entry to be real positive."""
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > cut))
    return v * np.exp(-1j * np.angle(v[k]))


def _bob_basis(m: np.ndarray, cut: float = 1e-9) -> np.ndarray:
    """Deterministic orthonormal Bob basis (columns) for a feasible resource.

    ``m`` is the 4x2 matrix of Bob's unnormalized conditional states, one row
    per Alice computational basis state.  When Bob's reduction is 1/2 every
    orthonormal basis is a Schmidt basis; we take Gram-Schmidt over the rows in
    Alice's computational order, each vector phase-fixed so its first
    non-negligible entry is real positive.
    """
    vecs = []
    for row in m:
        v = row.astype(complex)
        for b in vecs:
            v = v - np.vdot(b, v) * b
        if np.linalg.norm(v) > cut:
            vecs.append(_phase_fixed(v, cut))
        if len(vecs) == 2:
            break
    return np.stack(vecs, axis=1)


def _alice_bob_matrix(resource: PureState, bob_qubit: int) -> tuple[np.ndarray, tuple]:
    alice = tuple(q for q in range(3) if q != bob_qubit)
    t = np.transpose(resource.tensor(), alice + (bob_qubit,))
    return t.reshape(4, 2), alice


def _kraus(basis_state: np.ndarray, m: np.ndarray) -> np.ndarray:
    """2x2 map taking Bob-free input amplitudes to Bob's post-measurement vector.

    For joint state |in> (x) resource, projecting Alice's three qubits on
    ``basis_state`` leaves Bob with K |in>.
    """
    b = basis_state.reshape(2, 4)
    return (b.conj() @ m).T


def build_protocol(resource: PureState, bob_qubit: int) -> TeleportProtocol:
    """Explicit measurement basis and Bob-side corrections.

    With a Schmidt form |Phi> = (|A0>|b0> + |A1>|b1>)/sqrt2 across the
    Alice-pair/Bob cut, the basis state for Pauli label mu is
    (sigma_mu^T (x) 1)(|0>|A0> + |1>|A1>)/sqrt2.  The correction for outcome mu
    is the inverse of the 2x2 map that outcome applies to the input.
    """
    _check_resource(resource, bob_qubit)
    if not teleport_feasible(resource, bob_qubit):
        raise InfeasibleProtocol(f"no perfect teleportation with Bob on qubit {bob_qubit}")
    m, _ = _alice_bob_matrix(resource, bob_qubit)
    bob = _bob_basis(m)
    alice_vecs = np.sqrt(2) * (m @ bob.conj())  # columns |A0>, |A1>
    pair = np.concatenate([alice_vecs[:, 0], alice_vecs[:, 1]]) / np.sqrt(2)
    basis, corrections, probs = [], [], []
    for sigma, label in zip(OUTCOME_PAULIS, OUTCOME_LABELS):
        vec = np.kron(sigma.T, np.eye(4)) @ pair
        vec = vec / np.linalg.norm(vec)
        k = _kraus(vec, m)
        p = float(np.linalg.norm(k) ** 2 / 2)
        if np.abs(k.conj().T @ k - p * np.eye(2)).max() > TOL.feasibility:
            raise InfeasibleProtocol("outcome probabilities depend on the input")
        u = k / np.sqrt(p)
        basis.append(PureState(vec))
        corrections.append(Operator1Q(u.conj().T, label=f"corr_{label}"))
        probs.append(p)
    return TeleportProtocol(bob_qubit, tuple(basis), tuple(corrections), tuple(probs))


def outcome_amplitudes(protocol: TeleportProtocol, resource: PureState, psi_in: np.ndarray) -> np.ndarray:
    """Bob's unnormalized vectors for each outcome, shape (4, 2)."""
    m, _ = _alice_bob_matrix(resource, protocol.bob_qubit)
    return np.stack([_kraus(b.amplitudes, m) @ psi_in for b in protocol.basis])


def simulate_teleport(
    protocol: TeleportProtocol,
    resource: PureState,
    psi_in,
    seed=None,
    rng: np.random.Generator | None = None,
) -> TeleportRun:
    """Sample Alice's outcome from Born probabilities and apply Bob's correction."""
    psi_in = np.asarray(psi_in, dtype=complex)
    if psi_in.shape != (2,) or abs(np.linalg.norm(psi_in) - 1.0) > TOL.algebra:
        raise ValueError("input must be a normalized single-qubit vector")
    rng = rng if rng is not None else np.random.default_rng(seed)
    # full joint-state route: input is qubit 0, resource qubits 1..3
    joint = np.kron(psi_in, resource.amplitudes).reshape(2, 2, 2, 2)
    a1, a2 = (q + 1 for q in protocol.alice_qubits)
    t = np.transpose(joint, (0, a1, a2, protocol.bob_qubit + 1)).reshape(8, 2)
    bob_vecs = np.stack([b.amplitudes.conj() @ t for b in protocol.basis])
    probs = np.sum(np.abs(bob_vecs) ** 2, axis=1)
    outcome = int(rng.choice(4, p=probs / probs.sum()))
    collapsed = bob_vecs[outcome] / np.linalg.norm(bob_vecs[outcome])
    out = PureState(protocol.corrections[outcome].matrix @ collapsed)
    return TeleportRun(outcome, probs, out, fidelity(out, PureState(psi_in)))


def superdense_check(resource: PureState, alice_qubit: int, tol: float = TOL.feasibility) -> SuperdenseReport:
    """Encode with I, Z, X, -iY on Alice's qubit and test pairwise orthogonality."""
    _check_resource(resource, alice_qubit)
    encoded = tuple(apply_1q(resource, op, alice_qubit) for op in DENSE_OPS)
    vecs = np.stack([e.amplitudes for e in encoded])
    gram = vecs.conj() @ vecs.T
    off = np.abs(gram - np.diag(np.diag(gram))).max()
    return SuperdenseReport(alice_qubit, encoded, gram, bool(off < tol))


def match_up_to_phase(states, reference) -> tuple[list[int], np.ndarray]:
    """Best one-to-one matching of ``states`` onto ``reference`` by |overlap|.

    Returns the permutation (index into reference for each state) and the
    matched overlap moduli.
    """
    from itertools import permutations

    a = np.stack([np.asarray(getattr(s, "amplitudes", s)) for s in states])
    b = np.stack([np.asarray(getattr(s, "amplitudes", s)) for s in reference])
    ov = np.abs(a.conj() @ b.T)
    best = max(permutations(range(len(b))), key=lambda p: sum(ov[i, j] for i, j in enumerate(p)))
    return list(best), np.array([ov[i, j] for i, j in enumerate(best)])
