import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_sequence, run_both
from measonly.outcomes import ImpossibleOutcomeError
from measonly.pauli import CliffordGate, PauliString
from measonly.stabilizer import (
    InvalidTableauError,
    StabilizerTableau,
    apply_clifford,
    canonical_generators,
    group_elements,
    is_deterministic,
    measure_generatorwise,
    same_stabilizer_state,
    stabilizer_sign,
    to_statevector,
)
from measonly.statevector import StateVector, equal_up_to_global_phase, prepare_basis, prepare_bell

ACN_AMPLITUDES = np.zeros(16)
ACN_AMPLITUDES[[0b0000, 0b0101, 0b1011, 0b1110]] = 0.5


def tab(*strings):
    return StabilizerTableau.from_strings(strings)


def projector_oracle(t: StabilizerTableau) -> np.ndarray:
    """Product of (I + g)/2 over the generators applied to a fixed random vector, normalised."""
    dim = 2**t.n_qubits
    proj = reduce(lambda a, g: a @ (np.eye(dim) + g.to_matrix()) / 2, t.generators, np.eye(dim))
    v = proj @ np.random.default_rng(99).normal(size=dim).astype(complex)
    return v / np.linalg.norm(v)


class TestTableau:
    def test_rejects_anticommuting(self):
        with pytest.raises(InvalidTableauError):
            tab("XI", "ZI")

    def test_rejects_dependent(self):
        with pytest.raises(InvalidTableauError):
            tab("ZI", "ZI")

    def test_rejects_wrong_count(self):
        with pytest.raises(InvalidTableauError):
            tab("ZI")

    def test_text_round_trip(self):
        t = tab("XIXX", "-ZIZI", "IXIX", "IZZZ")
        assert StabilizerTableau.parse_text(t.to_text()) == t


class TestMeasurement:
    def test_paper_table_first_arrow(self):
        t = tab("XIII", "IZII", "IIXX", "IIZZ")
        out, t = measure_generatorwise(t, PauliString.parse("IXXI"), forced=1)
        assert out == 1
        assert t.strings == [str(PauliString.parse(s)) for s in ("XIII", "IXXI", "IIXX", "IZZZ")]

    def test_paper_table_second_arrow(self):
        t = tab("XIII", "IXXI", "IIXX", "IZZZ")
        out, t = measure_generatorwise(t, PauliString.parse("ZIZI"), forced=1)
        assert out == 1
        assert t.strings == [str(PauliString.parse(s)) for s in ("ZIZI", "XXXI", "XIXX", "IZZZ")]

    def test_final_group_equals_acn_group(self):
        final = tab("ZIZI", "XXXI", "XIXX", "IZZZ")
        assert same_stabilizer_state(final, tab("XIXX", "ZIZI", "IXIX", "IZZZ"))

    def test_minus_outcome_puts_minus_m(self):
        _, t = measure_generatorwise(tab("X"), PauliString.parse("Z"), forced=-1)
        assert t.strings == ["-Z"]

    def test_deterministic_in_group(self):
        t = tab("ZI", "IZ")
        out, after = measure_generatorwise(t, PauliString.parse("ZZ"), rng=3)
        assert out == 1 and after == t and is_deterministic(t, PauliString.parse("ZZ"))

    def test_deterministic_minus(self):
        t = tab("-ZI", "IZ")
        assert measure_generatorwise(t, PauliString.parse("ZZ"), rng=0)[0] == -1

    def test_forcing_impossible_deterministic_outcome(self):
        with pytest.raises(ImpossibleOutcomeError):
            measure_generatorwise(tab("Z"), PauliString.parse("Z"), forced=-1)

    def test_identity_rejected(self):
        with pytest.raises(ValueError):
            measure_generatorwise(tab("Z"), PauliString.parse("I"), forced=1)

    def test_random_outcomes_are_balanced(self):
        rng = np.random.default_rng(4)
        outs = [measure_generatorwise(tab("X"), PauliString.parse("Z"), rng)[0] for _ in range(4000)]
        assert abs(np.mean(np.array(outs) == 1) - 0.5) < 0.03

    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_projector_on_statevector(self, seed):
        rng = np.random.default_rng(seed)
        ops = random_sequence(rng, 3, 8, 3)
        fid, _ = run_both(ops, 3, seed)
        assert fid > 1 - 1e-10


class TestClifford:
    def test_cnot_on_zero_zero(self):
        t = apply_clifford(tab("ZI", "IZ"), CliffordGate("CNOT", (0, 1)))
        assert t.strings == ["+ZI", "+ZZ"]

    def test_h_on_z(self):
        assert apply_clifford(tab("Z"), CliffordGate("H", (0,))).strings == ["+X"]

    def test_target_out_of_range(self):
        with pytest.raises((ValueError, IndexError)):
            apply_clifford(tab("Z"), CliffordGate("H", (2,)))

    @pytest.mark.parametrize("kind", ["H", "P", "CNOT", "CZ"])
    def test_matches_dense_conjugation(self, kind):
        targets = (0, 1) if kind in ("CNOT", "CZ") else (1,)
        t = tab("XZ", "ZX")
        g = CliffordGate(kind, targets)
        u = CliffordGate(kind, targets).matrix()
        full = u if len(targets) == 2 else np.kron(np.eye(2), u)
        for p, q in zip(t.generators, apply_clifford(t, g).generators):
            assert np.allclose(q.to_matrix(), full @ p.to_matrix() @ full.conj().T)


class TestGroup:
    def test_sign_matters(self):
        assert not same_stabilizer_state(tab("Z"), tab("-Z"))

    def test_self(self):
        t = tab("XIXX", "ZIZI", "IXIX", "IZZZ")
        assert same_stabilizer_state(t, t)

    def test_generator_products_keep_group(self):
        a = tab("XX", "ZZ")
        b = tab("XX", "-YY")  # XX * ZZ = -YY
        assert same_stabilizer_state(a, b)
        assert canonical_generators(a) == canonical_generators(b)

    def test_group_elements(self):
        elems = group_elements(tab("XX", "ZZ"))
        assert sorted(map(str, elems)) == sorted(["+II", "+XX", "+ZZ", "-YY"])

    def test_stabilizer_sign(self):
        t = tab("XX", "ZZ")
        assert stabilizer_sign(t, PauliString.parse("YY")) == -1
        assert stabilizer_sign(t, PauliString.parse("XI")) is None


class TestToStatevector:
    def test_zero_state(self):
        assert equal_up_to_global_phase(to_statevector(tab("ZI", "IZ")), prepare_basis(2, "00"))

    def test_acn(self):
        s = to_statevector(tab("XIXX", "ZIZI", "IXIX", "IZZZ"))
        assert equal_up_to_global_phase(s, StateVector(ACN_AMPLITUDES))

    def test_bell_from_projector_oracle(self):
        t = tab("XX", "ZZ")
        assert equal_up_to_global_phase(to_statevector(t), StateVector(projector_oracle(t)))
        assert equal_up_to_global_phase(to_statevector(t), prepare_bell(0))

    @pytest.mark.parametrize("signs", list(itertools.product((1, -1), repeat=2)))
    def test_all_bell_signs(self, signs):
        sx, sz = signs
        t = tab(("+" if sx > 0 else "-") + "XX", ("+" if sz > 0 else "-") + "ZZ")
        assert equal_up_to_global_phase(to_statevector(t), StateVector(projector_oracle(t)))


class TestCrossBackend:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_sequences_up_to_eight_qubits(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(1, 9))
        ops = random_sequence(rng, n, int(rng.integers(1, 41)), int(rng.integers(1, 6)))
        fid, _ = run_both(ops, n, seed)
        assert fid > 1 - 1e-10
