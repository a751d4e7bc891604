import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from grovlab.conjlab import FamilySpec, family_state, random_feasible_state
from grovlab.protocols import (
    OUTCOME_LABELS,
    InfeasibleProtocol,
    build_protocol,
    match_up_to_phase,
    outcome_amplitudes,
    simulate_teleport,
    superdense_check,
    teleport_feasible,
)
from grovlab.qcore import KET0, KET1, X, Z, PureState, kron_all, qubit, random_qubit, random_state, random_unitary

from conftest import SQ2, ket, state

GHZ = family_state(FamilySpec("ghz"))
W1 = family_state(FamilySpec("w1"))
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def phi_state(q1, q2):
    return PureState((kron_all(KET0, KET0, q1) + kron_all(KET1, KET1, q2)) / SQ2)


def orthogonal_pair(rng):
    u = random_unitary(2, rng)
    return u, u[:, 0], u[:, 1]


def check_protocol(proto, resource, inputs):
    vecs = np.stack([b.amplitudes for b in proto.basis])
    assert np.abs(vecs.conj() @ vecs.T - np.eye(4)).max() < 1e-12
    for c in proto.corrections:
        assert c.is_unitary(1e-12)
    for psi in inputs:
        amps = outcome_amplitudes(proto, resource, psi)
        probs = np.sum(np.abs(amps) ** 2, axis=1)
        assert np.abs(probs - 0.25).max() < 1e-10
        assert abs(probs.sum() - 1) < 1e-12
        for k in range(4):
            out = proto.corrections[k].matrix @ (amps[k] / np.linalg.norm(amps[k]))
            assert abs(np.vdot(out, psi)) ** 2 > 1 - 1e-10


# ---------------------------------------------------------------- feasibility


class TestFeasibility:
    def test_ghz(self):
        assert all(teleport_feasible(GHZ, k) for k in range(3))

    def test_w1(self):
        assert teleport_feasible(W1, 2)
        assert not teleport_feasible(W1, 0)
        assert not teleport_feasible(W1, 1)

    def test_phi_overlapping(self):
        s = phi_state(KET0, qubit(1.0, 0.4))
        assert not teleport_feasible(s, 2)
        assert teleport_feasible(s, 0) and teleport_feasible(s, 1)

    def test_product(self):
        assert not any(teleport_feasible(PureState.basis("000"), k) for k in range(3))

    def test_errors(self):
        with pytest.raises(ValueError):
            teleport_feasible(PureState.basis("00"), 0)
        with pytest.raises(IndexError):
            teleport_feasible(GHZ, 3)

    def test_consistency_with_construction(self, rng):
        resources = [random_state(3, rng) for _ in range(200)]
        resources += [random_feasible_state(rng)[0] for _ in range(20)]
        resources += [GHZ, W1, family_state(FamilySpec("w")), phi_state(KET0, KET0)]
        for r in resources:
            for k in range(3):
                ok = teleport_feasible(r, k)
                if ok:
                    build_protocol(r, k)
                else:
                    with pytest.raises(InfeasibleProtocol):
                        build_protocol(r, k)


# ---------------------------------------------------------------- construction


class TestBuildProtocol:
    def test_ghz_basis_and_corrections(self):
        p = build_protocol(GHZ, 2)
        ref = [
            (ket("000") + ket("111")) / SQ2,
            (ket("000") - ket("111")) / SQ2,
            (ket("100") + ket("011")) / SQ2,
            (ket("100") - ket("011")) / SQ2,
        ]
        perm, mod = match_up_to_phase(p.basis, ref)
        assert perm == [0, 1, 2, 3]
        assert np.abs(mod - 1).max() < 1e-10
        assert p.probabilities == pytest.approx((0.25,) * 4, abs=1e-12)
        # Bob's corrections are the Paulis I, Z, X, ZX (inverted) up to phase
        for c, pauli in zip(p.corrections, (np.eye(2), Z, X, Z @ X)):
            assert abs(np.trace(c.matrix @ pauli)) == pytest.approx(2, abs=1e-12)
        assert p.labels == OUTCOME_LABELS
        assert p.alice_qubits == (0, 1)

    def test_w1_basis(self):
        p = build_protocol(W1, 2)
        ref = [
            (ket("010") + ket("001") + SQ2 * ket("100")) / 2,
            (ket("010") + ket("001") - SQ2 * ket("100")) / 2,
            (ket("110") + ket("101") + SQ2 * ket("000")) / 2,
            (ket("110") + ket("101") - SQ2 * ket("000")) / 2,
        ]
        _, mod = match_up_to_phase(p.basis, ref)
        assert np.abs(mod - 1).max() < 1e-10

    @pytest.mark.parametrize("theta,phi", [(0.7, 1.9), (2.4, 0.3), (1.2, 5.0)])
    def test_phi_orthogonal_corrections(self, theta, phi):
        # q's in the family's Bloch-angle form; q2 is the antipode of q1
        q1 = qubit(theta, phi)
        q2 = qubit(math.pi - theta, phi + math.pi)
        p = build_protocol(phi_state(q1, q2), 2)
        u = np.stack([q1, q2], axis=1)
        ud = u.conj().T
        expected = [ud, Z @ ud, X @ ud, X @ Z @ ud]
        _, mod = match_up_to_phase([c.matrix.ravel() / SQ2 for c in p.corrections], [e.ravel() / SQ2 for e in expected])
        assert np.abs(mod - 1).max() < 1e-10

    def test_deterministic(self):
        a, b = build_protocol(W1, 2), build_protocol(W1, 2)
        for x, y in zip(a.basis, b.basis):
            assert np.array_equal(x.amplitudes, y.amplitudes)

    @pytest.mark.parametrize(
        "resource,bob",
        [(GHZ, 0), (GHZ, 1), (GHZ, 2), (W1, 2)],
        ids=["ghz0", "ghz1", "ghz2", "w1"],
    )
    def test_contract(self, rng, resource, bob):
        check_protocol(build_protocol(resource, bob), resource, [random_qubit(rng) for _ in range(50)])

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_contract_random_feasible(self, seed):
        rng = np.random.default_rng(seed)
        resource, bob = random_feasible_state(rng)
        check_protocol(build_protocol(resource, bob), resource, [random_qubit(rng) for _ in range(5)])

    @settings(max_examples=25, deadline=None)
    @given(seeds, st.sampled_from([0, 1]))
    def test_contract_phi_general(self, seed, bob):
        rng = np.random.default_rng(seed)
        resource = phi_state(random_qubit(rng), random_qubit(rng))
        check_protocol(build_protocol(resource, bob), resource, [random_qubit(rng) for _ in range(5)])

    def test_infeasible(self):
        with pytest.raises(InfeasibleProtocol):
            build_protocol(W1, 0)


# ---------------------------------------------------------------- simulation


class TestSimulate:
    def test_ghz_basis_input(self):
        p = build_protocol(GHZ, 2)
        seen = set()
        for seed in range(40):
            run = simulate_teleport(p, GHZ, KET0, seed=seed)
            assert run.fidelity == pytest.approx(1, abs=1e-12)
            seen.add(run.outcome)
        assert seen == {0, 1, 2, 3}

    def test_w1_fixed_input(self):
        p = build_protocol(W1, 2)
        psi = np.array([0.6, 0.8j])
        for seed in range(40):
            assert simulate_teleport(p, W1, psi, seed=seed).fidelity > 1 - 1e-10

    def test_phi_histogram(self, rng):
        _, q1, q2 = orthogonal_pair(rng)
        resource = phi_state(q1, q2)
        p = build_protocol(resource, 2)
        psi = random_qubit(rng)
        runs = [simulate_teleport(p, resource, psi, rng=rng) for _ in range(1000)]
        assert min(r.fidelity for r in runs) > 1 - 1e-10
        counts = np.bincount([r.outcome for r in runs], minlength=4)
        assert chisquare(counts).pvalue > 1e-3

    def test_seed_reproducible(self):
        p = build_protocol(GHZ, 1)
        a = simulate_teleport(p, GHZ, np.array([0.6, 0.8]), seed=3)
        b = simulate_teleport(p, GHZ, np.array([0.6, 0.8]), seed=3)
        assert a.outcome == b.outcome

    def test_unnormalized_input(self):
        with pytest.raises(ValueError):
            simulate_teleport(build_protocol(GHZ, 2), GHZ, np.array([1, 1]))


# ---------------------------------------------------------------- superdense coding


class TestSuperdense:
    def test_phi_alice0(self, rng):
        q1, q2 = random_qubit(rng), random_qubit(rng)
        s = phi_state(q1, q2)
        rep = superdense_check(s, 0)
        assert rep.feasible
        assert np.abs(rep.gram - np.eye(4)).max() < 1e-10
        ref = [
            (kron_all(KET0, KET0, q1) + kron_all(KET1, KET1, q2)) / SQ2,
            (kron_all(KET0, KET0, q1) - kron_all(KET1, KET1, q2)) / SQ2,
            (kron_all(KET1, KET0, q1) + kron_all(KET0, KET1, q2)) / SQ2,
            (kron_all(KET1, KET0, q1) - kron_all(KET0, KET1, q2)) / SQ2,
        ]
        # encodings map onto psi1+, psi1-, psi2+, psi2- in that order
        for e, r in zip(rep.encoded, ref):
            assert abs(np.vdot(e.amplitudes, r)) == pytest.approx(1, abs=1e-12)

    def test_phi_overlapping_alice2(self):
        assert not superdense_check(phi_state(KET0, qubit(0.7, 0.2)), 2).feasible

    def test_product(self):
        for k in range(3):
            rep = superdense_check(PureState.basis("000"), k)
            assert not rep.feasible
            assert abs(rep.gram[0, 1]) == pytest.approx(1, abs=1e-12)

    def test_gram_properties(self, rng):
        rep = superdense_check(random_state(3, rng), 1)
        assert np.allclose(rep.gram, rep.gram.conj().T, atol=1e-12)
        assert np.allclose(np.diag(rep.gram), 1, atol=1e-12)
        assert rep.feasible == (rep.max_offdiag < 1e-10)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(0, 2))
    def test_duality_on_phi(self, seed, k):
        rng = np.random.default_rng(seed)
        q1 = random_qubit(rng)
        q2 = random_qubit(rng) if seed % 2 else np.array([-q1[1].conjugate(), q1[0].conjugate()])
        s = phi_state(q1, q2)
        assert superdense_check(s, k).feasible == teleport_feasible(s, k)
