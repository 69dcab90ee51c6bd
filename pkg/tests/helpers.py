"""Shared test utilities: random Clifford+measurement sequences run on both backends."""
from __future__ import annotations

import numpy as np

from measonly.pauli import CliffordGate, PauliString
from measonly.stabilizer import StabilizerTableau, apply_clifford, measure_generatorwise, to_statevector
from measonly.statevector import Gate, apply_gate, fidelity, measure_pauli_observable, prepare_basis

ONE_QUBIT = ("H", "P", "PDG", "X", "Z")
TWO_QUBIT = ("CNOT", "CZ", "SWAP")


def random_sequence(rng: np.random.Generator, n: int, n_gates: int, n_meas: int):
    """A shuffled list of ("gate", CliffordGate) and ("meas", PauliString) operations."""
    ops = []
    for _ in range(n_gates):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(("gate", CliffordGate(str(rng.choice(TWO_QUBIT)), (int(a), int(b)))))
        else:
            ops.append(("gate", CliffordGate(str(rng.choice(ONE_QUBIT)), (int(rng.integers(n)),))))
    for _ in range(n_meas):
        letters = "I" * n
        while set(letters) == {"I"}:
            letters = "".join(rng.choice(list("IXYZ"), size=n))
        ops.insert(int(rng.integers(len(ops) + 1)), ("meas", PauliString.from_letters(letters)))
    return ops


def run_both(ops, n: int, seed: int):
    """Run ``ops`` from |0...0> on the tableau (sampling) and the state vector (forced to match).

    Returns ``(fidelity, outcomes)``.
    """
    rng = np.random.default_rng(seed)
    t = StabilizerTableau.zero_state(n)
    s = prepare_basis(n, "0" * n)
    outcomes = []
    for kind, op in ops:
        if kind == "gate":
            t = apply_clifford(t, op)
            s = apply_gate(s, Gate(op.kind, op.targets))
        else:
            out, t = measure_generatorwise(t, op, rng)
            out_sv, s = measure_pauli_observable(s, op, forced=out)
            assert out_sv == out
            outcomes.append(out)
    return fidelity(to_statevector(t), s), outcomes
