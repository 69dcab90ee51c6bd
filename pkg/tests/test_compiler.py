import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measonly.compiler import (
    CompileError,
    GateCircuit,
    MeasurementProgram,
    ParseError,
    SetValidationError,
    compile_circuit,
    corrupt_program,
    decompose_1q,
    parity_zero_fragment,
    prep_frame,
    prepare_zero_and_plus,
    random_circuit,
    readout,
    run_steps,
    set_operators,
    simulate,
    universal_set,
    verify_equivalence,
)
from measonly.pauli import AxisObservable
from measonly.statevector import (
    Gate,
    StateVector,
    equal_up_to_global_phase,
    fidelity,
    prepare_basis,
    prepare_product,
    random_state,
    tensor,
)

S3 = universal_set("S3")
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def gate_matrix_full(g: Gate, n: int) -> np.ndarray:
    """Oracle: full-register matrix built column by column from basis-state action."""
    dim = 2**n
    m = np.zeros((dim, dim), dtype=complex)
    small = g.matrix
    k = len(g.targets)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub = 0
        for t in g.targets:
            sub = (sub << 1) | bits[t]
        for out_sub in range(2**k):
            amp = small[out_sub, sub]
            if amp == 0:
                continue
            new = list(bits)
            for i, t in enumerate(g.targets):
                new[t] = (out_sub >> (k - 1 - i)) & 1
            row = sum(b << (n - 1 - q) for q, b in enumerate(new))
            m[row, col] += amp
    return m


def circuit_unitary(c: GateCircuit) -> np.ndarray:
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        u = gate_matrix_full(g, c.n_qubits) @ u
    return u


class TestParse:
    def test_basic(self):
        c = GateCircuit.parse("H 0\nCNOT q0 q1  # entangle\nRZ 1 pi/4\n")
        assert c.n_qubits == 2 and [g.kind for g in c.gates] == ["H", "CNOT", "RZ"]
        assert math.isclose(c.gates[2].theta, math.pi / 4)

    def test_round_trip(self):
        c = random_circuit(3, 6, np.random.default_rng(0))
        back = GateCircuit.parse(c.to_text())
        assert back.n_qubits == 3 and [(g.kind, g.targets) for g in back.gates] == [(g.kind, g.targets) for g in c.gates]

    @pytest.mark.parametrize(
        "text, line",
        [("H", 1), ("H 0\nFOO 1", 2), ("CNOT 0", 1), ("RZ 0", 1), ("CNOT 0 0", 1), ("H x", 1), ("RZ 0 pi/", 1), ("QUBITS 1\nH 3", 0)],
    )
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            GateCircuit.parse(text)
        assert exc.value.line == line

    def test_comments_and_blanks(self):
        assert GateCircuit.parse("# nothing\n\n").gates == []

    def test_qubits_line(self):
        assert GateCircuit.parse("QUBITS 3\nH 0").n_qubits == 3

    def test_unitary_matches_oracle(self):
        c = random_circuit(3, 6, np.random.default_rng(1))
        psi = random_state(3, np.random.default_rng(2))
        assert np.allclose(c.apply(psi).amplitudes, circuit_unitary(c) @ psi.amplitudes)


class TestSets:
    def test_s3_list(self):
        names = [o.name for o in set_operators("S3")]
        r = 2**-0.5
        want = [AxisObservable.parse(s) for s in ("XX", "ZZ", "XZ")] + [AxisObservable(((r, r, 0.0), (1.0, 0.0, 0.0)))]
        assert len(names) == 4
        got = set_operators("S3")
        for w in want:
            assert any(g.same_up_to_sign_and_order(w) for g in got)

    def test_s1_member(self):
        th = math.pi / 3
        want = AxisObservable(((0.0, math.sin(th), math.cos(th)), (0.0, 0.0, 1.0)))
        assert any(o.same_up_to_sign_and_order(want) for o in set_operators("S1", th))

    @pytest.mark.parametrize("set_id", ["S1", "S2"])
    @pytest.mark.parametrize("m", [-2, -1, 0, 1, 2, 3])
    def test_degenerate_theta(self, set_id, m):
        with pytest.raises(SetValidationError, match="theta != m\\*pi/2"):
            set_operators(set_id, m * math.pi / 2)

    def test_missing_theta(self):
        with pytest.raises(SetValidationError):
            universal_set("S2")

    def test_s0_rejects_clifford(self):
        with pytest.raises(SetValidationError):
            universal_set("S0", u=H)

    def test_unknown_set(self):
        with pytest.raises(SetValidationError):
            universal_set("S9")

    def test_natives_reproduce_listed_observable(self):
        # the listed rotated observable equals (U^dagger X U) for the native U
        for uset in (universal_set("S2", 0.3), universal_set("S3")):
            u = uset.native.u_phys
            x = np.array([[0, 1], [1, 0]])
            rotated = np.kron(u.conj().T @ x @ u, x)
            assert any(np.allclose(rotated, o.matrix()) for o in uset.operators)


class TestCompile:
    def test_h_program_shape(self):
        p = compile_circuit(GateCircuit.parse("H 0"), S3)
        steps = p.steps()
        assert all(s.arity == 2 for s in steps)
        names = [s.observable.name for s in steps]
        assert names[:2] == ["XX", "ZZ"]
        assert sorted(names[2:]) == ["XZ", "XZ"]

    def test_cnot_program_shape(self):
        p = compile_circuit(GateCircuit.parse("CNOT 0 1"), S3)
        steps = p.steps()
        assert len(steps) == 6 + 4
        assert all(s.arity <= 2 for s in steps)

    def test_empty(self):
        p = compile_circuit(GateCircuit(2, []), S3)
        assert p.n_gadgets == 0 and p.steps() == []
        rep = verify_equivalence(GateCircuit(2, []), p, trials=3)
        assert rep.ok

    def test_inexpressible_names_gate(self):
        with pytest.raises(CompileError, match="RZ"):
            compile_circuit(GateCircuit.parse("RZ 0 0.1"), S3)

    def test_p_via_search(self):
        seq = decompose_1q(Gate("P", (0,)).matrix, S3)
        assert seq is not None and len(seq) == 2

    @pytest.mark.parametrize("mode", ["frame", "literal"])
    def test_closure_and_arity(self, mode):
        rng = np.random.default_rng(3)
        for _ in range(10):
            c = random_circuit(3, 6, rng)
            p = compile_circuit(c, S3, mode)
            for s in p.steps():
                assert s.arity <= 2 and S3.contains(s.observable)

    def test_deterministic(self):
        c = random_circuit(3, 6, np.random.default_rng(4))
        a, b = compile_circuit(c, S3), compile_circuit(c, S3)
        assert a.to_text() == b.to_text() and a.to_dict() == b.to_dict()
        psi = random_state(3, np.random.default_rng(5))
        ra, rb = simulate(a, psi, seed=9), simulate(b, psi, seed=9)
        assert ra.log == rb.log and ra.stats == rb.stats
        assert np.array_equal(ra.state.amplitudes, rb.state.amplitudes)

    def test_dict_round_trip(self):
        c = random_circuit(3, 6, np.random.default_rng(6))
        p = compile_circuit(c, S3, "literal")
        d = json.loads(json.dumps(p.to_dict()))
        q = MeasurementProgram.from_dict(d)
        assert q.to_text() == p.to_text()
        psi = random_state(3, np.random.default_rng(7))
        assert simulate(q, psi, seed=1).log == simulate(p, psi, seed=1).log

    def test_ancilla_budget(self):
        for n in (1, 2, 3):
            c = random_circuit(n, 6, np.random.default_rng(n))
            for mode in ("frame", "literal"):
                assert compile_circuit(c, S3, mode).n_physical <= n + 6


class TestSimulate:
    def test_h_on_zero(self):
        p = compile_circuit(GateCircuit.parse("H 0"), S3)
        res = simulate(p, prepare_basis(1, "0"), forced=[1] * 16)
        assert equal_up_to_global_phase(res.state, prepare_product("+"))

    @pytest.mark.parametrize("seed", range(10))
    def test_cnot_on_10(self, seed):
        p = compile_circuit(GateCircuit.parse("CNOT 0 1"), S3)
        res = simulate(p, prepare_basis(2, "10"), seed=seed)
        assert equal_up_to_global_phase(res.state, prepare_basis(2, "11"))

    def test_stats_record(self):
        p = compile_circuit(GateCircuit.parse("H 0\nCNOT 0 1"), S3)
        st_ = simulate(p, prepare_basis(2, "00"), seed=3).stats
        assert {"steps", "two_qubit_steps", "ancillas_used", "rounds_total", "seed"} <= set(st_)
        assert st_["seed"] == 3 and st_["steps"] >= len(p.steps())

    def test_random_seeds_on_one_circuit(self):
        c = random_circuit(3, 5, np.random.default_rng(8))
        p = compile_circuit(c, S3)
        u = circuit_unitary(c)
        for seed in range(100):
            psi = random_state(3, np.random.default_rng(1000 + seed))
            res = simulate(p, psi, seed=seed)
            assert fidelity(res.state, StateVector(u @ psi.amplitudes)) > 1 - 1e-9

    @pytest.mark.parametrize("set_id, theta", [("S0", 0.7), ("S1", 0.4), ("S2", 1.1), ("S3", None)])
    @pytest.mark.parametrize("mode", ["frame", "literal"])
    def test_every_set(self, set_id, theta, mode):
        u = Gate("RY", (0,), theta).matrix if set_id == "S0" else None
        uset = universal_set(set_id, theta, u)
        text = {"S0": "RY 0 0.7", "S1": "RX 0 0.4", "S2": "RZ 0 -1.1", "S3": "RZ 0 -pi/4"}[set_id]
        c = GateCircuit.parse(f"QUBITS 2\nH 0\n{text}\nCNOT 0 1\nP 1\n")
        assert verify_equivalence(c, compile_circuit(c, uset, mode), trials=5, seed=2).ok

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=10, deadline=None)
    def test_random_circuits(self, seed):
        rng = np.random.default_rng(seed)
        c = random_circuit(int(rng.integers(1, 4)), int(rng.integers(0, 7)), rng)
        assert verify_equivalence(c, compile_circuit(c, S3), trials=3, seed=seed).ok


class TestVerify:
    def test_named_gates(self):
        for text in ("H 0", "P 0", "CNOT 0 1", "RZ 0 pi/4"):
            c = GateCircuit.parse(text)
            assert verify_equivalence(c, compile_circuit(c, S3), trials=5).ok

    def test_corrupted_program_fails(self):
        c = GateCircuit.parse("H 0\nCNOT 0 1")
        rep = verify_equivalence(c, corrupt_program(compile_circuit(c, S3)), trials=10)
        assert not rep.ok and rep.failures

    def test_report_fields(self):
        c = GateCircuit.parse("H 0")
        d = verify_equivalence(c, compile_circuit(c, S3), trials=2).to_dict()
        assert d["max_arity"] == 2 and d["unitary_steps"] == 0 and d["min_fidelity"] > 1 - 1e-9


class TestFragments:
    def test_z_prep(self):
        outs, s = run_steps(prepare_zero_and_plus("0"), prepare_product("+"), forced=[1])
        assert outs == [1] and equal_up_to_global_phase(s, prepare_basis(1, "0"))

    def test_prep_frame(self):
        assert prep_frame("0+0+", [1, -1, -1, 1]) == [0, 3, 1, 0]

    def test_prep_bad_schedule(self):
        with pytest.raises(ValueError):
            prepare_zero_and_plus("01")

    def test_parity_on_zero(self):
        s = prepare_basis(3, "000")
        outs, post = run_steps(parity_zero_fragment(), s, rng=np.random.default_rng(0))
        assert outs == [1, 1, 1] and np.allclose(post.amplitudes, s.amplitudes)

    def test_parity_on_random_projects_to_ghz_span(self):
        s = random_state(3, np.random.default_rng(1))
        _, post = run_steps(parity_zero_fragment(), s, forced=[1, 1, 1])
        proj = np.zeros((8, 8))
        proj[0, 0] = proj[7, 7] = 1
        want = proj @ s.amplitudes
        want = want / np.linalg.norm(want)
        assert equal_up_to_global_phase(post, StateVector(want))

    def test_readout_basis_states(self):
        for bit in (0, 1):
            s = tensor(prepare_basis(1, str(bit)), prepare_product("+"))
            rng = np.random.default_rng(bit)
            assert all(readout(s, 0, 1, rng=rng)[0] == bit for _ in range(50))

    def test_readout_respects_frame(self):
        s = tensor(prepare_basis(1, "1"), prepare_basis(1, "0"))
        assert readout(s, 0, 1, frame=1, rng=0)[0] == 0

    def test_readout_plus_is_fair(self):
        s = tensor(prepare_product("+"), prepare_basis(1, "0"))
        rng = np.random.default_rng(12)
        bits = [readout(s, 0, 1, rng=rng)[0] for _ in range(10_000)]
        assert abs(np.mean(bits) - 0.5) < 0.02
