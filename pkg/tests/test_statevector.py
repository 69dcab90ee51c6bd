import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measonly.outcomes import ImpossibleOutcomeError, OutcomeSource
from measonly.pauli import SIGMA, PauliString
from measonly.statevector import (
    Gate,
    MeasurementOp,
    StateVector,
    apply_gate,
    apply_matrix,
    equal_up_to_global_phase,
    factor_out,
    measure,
    measure_pauli_observable,
    outcome_probabilities,
    permute,
    prepare_basis,
    prepare_bell,
    prepare_product,
    random_state,
    tensor,
)

I2 = np.eye(2)
R2 = 1 / math.sqrt(2)


def full_operator(u: np.ndarray, targets, n: int) -> np.ndarray:
    """Oracle: embed ``u`` on adjacent ascending ``targets`` with explicit Kronecker products."""
    lo = targets[0]
    assert list(targets) == list(range(lo, lo + len(targets)))
    return reduce(np.kron, [np.eye(2**lo), u, np.eye(2 ** (n - lo - len(targets)))])


def ket(*amps) -> np.ndarray:
    return np.array(amps, dtype=complex)


class TestPreparation:
    @pytest.mark.parametrize("n, bits, index", [(1, "0", 0), (2, "11", 3), (4, "0000", 0), (3, "101", 5)])
    def test_basis(self, n, bits, index):
        v = prepare_basis(n, bits).amplitudes
        assert v[index] == 1 and np.count_nonzero(v) == 1

    @pytest.mark.parametrize(
        "j, expected",
        [(0, ket(R2, 0, 0, R2)), (1, ket(0, R2, R2, 0)), (2, ket(0, R2, -R2, 0)), (3, ket(R2, 0, 0, -R2))],
    )
    def test_bell_signs(self, j, expected):
        assert np.allclose(prepare_bell(j).amplitudes, expected)

    def test_bad_bell_index(self):
        with pytest.raises(ValueError):
            prepare_bell(4)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1, 1], dtype=complex))

    def test_records_round_trip(self):
        s = random_state(3, np.random.default_rng(0))
        assert np.allclose(StateVector.from_records(3, s.to_records()).amplitudes, s.amplitudes)

    def test_states_are_read_only(self):
        s = prepare_basis(1, "0")
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0


class TestGates:
    def test_h_on_zero(self):
        assert np.allclose(apply_gate(prepare_basis(1, "0"), Gate("H", (0,))).amplitudes, ket(R2, R2))

    def test_cnot_on_10(self):
        assert np.allclose(apply_gate(prepare_basis(2, "10"), Gate("CNOT", (0, 1))).amplitudes, prepare_basis(2, "11").amplitudes)

    def test_cnot_on_last_pair_builds_acn(self):
        before = np.zeros(16, dtype=complex)
        before[[0b0000, 0b0101, 0b1010, 0b1111]] = 0.5
        after = apply_gate(StateVector(before), Gate("CNOT", (2, 3))).amplitudes
        expected = np.zeros(16)
        expected[[0b0000, 0b0101, 0b1011, 0b1110]] = 0.5
        assert np.allclose(after, expected)

    def test_p_convention(self):
        assert np.allclose(Gate("P", (0,)).matrix, np.diag([np.exp(-1j * math.pi / 4), np.exp(1j * math.pi / 4)]))

    def test_rz_convention(self):
        th = 0.37
        assert np.allclose(Gate("RZ", (0,), th).matrix, np.diag([np.exp(-1j * th / 2), np.exp(1j * th / 2)]))

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(["H", "P", "RX", "RZ", "CNOT", "SWAP"]))
    def test_matches_kron_oracle(self, seed, kind):
        rng = np.random.default_rng(seed)
        s = random_state(4, rng)
        targets = (1, 2) if kind in ("CNOT", "SWAP") else (2,)
        g = Gate(kind, targets, 0.3 if kind.startswith("R") else None)
        out = apply_gate(s, g)
        assert np.allclose(out.amplitudes, full_operator(g.matrix, targets, 4) @ s.amplitudes)
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10

    def test_non_adjacent_targets_match_permuted_oracle(self):
        rng = np.random.default_rng(3)
        s = random_state(3, rng)
        out = apply_gate(s, Gate("CNOT", (2, 0)))
        # oracle: basis-state action, control bit 2 flips bit 0
        v = np.zeros(8, dtype=complex)
        for i, a in enumerate(s.amplitudes):
            j = i ^ 0b100 if i & 0b001 else i
            v[j] += a
        assert np.allclose(out.amplitudes, v)

    def test_target_out_of_range(self):
        with pytest.raises((ValueError, IndexError)):
            apply_gate(prepare_basis(1, "0"), Gate("H", (1,)))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            Gate("U", (0,), unitary=np.array([[1, 0], [0, 2]]))


class TestMeasurementOp:
    def test_bell_is_complete(self):
        assert MeasurementOp.bell().is_complete

    def test_parity_pm_equals_xx_projectors(self):
        pm = MeasurementOp.parity_pm().projector_matrices()
        xx = np.kron(SIGMA[1], SIGMA[1])
        assert np.allclose(pm[0], (np.eye(4) + xx) / 2)
        assert np.allclose(pm[1], (np.eye(4) - xx) / 2)

    def test_ranks_must_fill_space(self):
        with pytest.raises(ValueError):
            MeasurementOp(2, (np.eye(4)[:, :2],), (1,))

    def test_non_orthogonal_rejected(self):
        with pytest.raises(ValueError):
            MeasurementOp.from_basis([ket(1, 0), ket(R2, R2)])


class TestMeasure:
    def test_teleport_expansion(self):
        rng = np.random.default_rng(1)
        psi = random_state(1, rng)
        s = tensor(psi, prepare_bell(0))
        probs = outcome_probabilities(s, MeasurementOp.bell(), (0, 1))
        assert all(abs(p - 0.25) < 1e-12 for p in probs.values())
        for j in range(4):
            lab, post = measure(s, MeasurementOp.bell(), (0, 1), forced=j)
            out = factor_out(post, [2])
            assert lab == j
            assert equal_up_to_global_phase(out, StateVector(SIGMA[j] @ psi.amplitudes))

    def test_pm_step_two_branch(self):
        # after step 1: (|0>+|1>)/√2 ⊗ |0> ⊗ (|00>+|11>)/√2
        s = tensor(prepare_product("+0"), prepare_bell(0))
        lab, post = measure(s, MeasurementOp.parity_pm(), (1, 2), forced=1)
        expected = np.zeros(16, dtype=complex)
        for q1 in (0, 1):
            for tail in (0b000, 0b011, 0b101, 0b110):
                expected[(q1 << 3) | tail] = 1 / (2 * math.sqrt(2))
        assert lab == 1 and equal_up_to_global_phase(post, StateVector(expected))

    def test_parity_completes_acn(self):
        s = tensor(prepare_product("+0"), prepare_bell(0))
        _, s = measure(s, MeasurementOp.parity_pm(), (1, 2), forced=1)
        out, s = measure_pauli_observable(s, PauliString.parse("ZZ"), (0, 2), forced=1)
        acn = np.zeros(16)
        acn[[0b0000, 0b0101, 0b1011, 0b1110]] = 0.5
        assert out == 1 and equal_up_to_global_phase(s, StateVector(acn))

    def test_z_on_zero_is_deterministic(self):
        probs = outcome_probabilities(prepare_basis(1, "0"), MeasurementOp.computational(), (0,))
        assert probs == {0: 1.0, 1: 0.0}

    def test_xx_on_phi0_leaves_state(self):
        out, post = measure_pauli_observable(prepare_bell(0), PauliString.parse("XX"), rng=5)
        assert out == 1 and np.allclose(post.amplitudes, prepare_bell(0).amplitudes)

    def test_z_on_plus_is_fair(self):
        rng = np.random.default_rng(11)
        outs = [measure_pauli_observable(prepare_product("+"), PauliString.parse("Z"), rng=rng)[0] for _ in range(4000)]
        assert abs(np.mean(np.array(outs) == 1) - 0.5) < 0.03

    def test_impossible_forced_outcome(self):
        with pytest.raises(ImpossibleOutcomeError):
            measure_pauli_observable(prepare_basis(1, "0"), PauliString.parse("Z"), forced=-1)

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_probabilities_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        s = random_state(3, rng)
        for m in (MeasurementOp.bell(), MeasurementOp.parity_pm(), MeasurementOp.computational(2)):
            assert abs(sum(outcome_probabilities(s, m, (2, 0)).values()) - 1) < 1e-10

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_repeatable(self, seed):
        rng = np.random.default_rng(seed)
        s = random_state(3, rng)
        p = PauliString.parse("XY")
        first, s = measure_pauli_observable(s, p, (0, 2), rng=rng)
        again, _ = measure_pauli_observable(s, p, (0, 2), rng=rng)
        assert first == again

    def test_seeded_runs_repeat(self):
        s = random_state(2, np.random.default_rng(0))
        a = [measure(s, MeasurementOp.bell(), (0, 1), rng=np.random.default_rng(7))[0] for _ in range(3)]
        assert len(set(a)) == 1

    def test_forced_queue_then_rng(self):
        src = OutcomeSource(np.random.default_rng(0), forced=[1])
        assert src.choose((0, 1), (0.5, 0.5)) == 1
        assert src.pending_forced == 0


class TestComparison:
    def test_global_phase(self):
        z = prepare_basis(1, "0")
        assert equal_up_to_global_phase(z, StateVector(-z.amplitudes))
        assert not equal_up_to_global_phase(z, prepare_basis(1, "1"))

    def test_arbitrary_phase(self):
        s = random_state(4, np.random.default_rng(2))
        assert equal_up_to_global_phase(s, StateVector(np.exp(1j * math.pi / 7) * s.amplitudes))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            equal_up_to_global_phase(prepare_basis(1, "0"), prepare_basis(2, "00"))

    def test_permute_and_factor(self):
        a, b = random_state(1, np.random.default_rng(4)), random_state(2, np.random.default_rng(5))
        s = tensor(a, b)
        assert equal_up_to_global_phase(factor_out(s, [0]), a)
        assert equal_up_to_global_phase(permute(s, [1, 2, 0]), tensor(b, a))
        with pytest.raises(ValueError):
            factor_out(prepare_bell(0), [0])

    def test_apply_matrix_agrees_with_gate(self):
        s = random_state(2, np.random.default_rng(8))
        h = Gate("H", (1,)).matrix
        assert np.allclose(apply_matrix(s, h, (1,)).amplitudes, np.kron(I2, h) @ s.amplitudes)
