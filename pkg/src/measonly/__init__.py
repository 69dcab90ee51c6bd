"""Universal quantum computation from one- and two-qubit projective measurements.

Modules:

* :mod:`measonly.pauli` - Pauli strings, Clifford conjugation, axis observables
* :mod:`measonly.statevector` - dense reference simulator
* :mod:`measonly.stabilizer` - generator-list stabilizer simulator
* :mod:`measonly.gadgets` - teleportation and indirect gate gadgets
* :mod:`measonly.ancilla` - measurement-only preparation of the CNOT ancilla
* :mod:`measonly.compiler` - circuits to measurement-only programs
* :mod:`measonly.stats` - round-count Monte Carlo
"""
from .ancilla import AncillaBranch, acn_stabilizer_reference, acn_state, classify_branch, prepare_acn
from .compiler import (
    CompileError,
    GateCircuit,
    MeasurementProgram,
    MeasurementStep,
    ParseError,
    UniversalSet,
    compile_circuit,
    set_operators,
    simulate,
    universal_set,
    verify_equivalence,
)
from .gadgets import indirect_gate_1q, indirect_gate_2q, indirect_gate_bu, teleport
from .pauli import AxisObservable, CliffordGate, PauliString, commutes, conjugate, multiply
from .stabilizer import StabilizerTableau, measure_generatorwise, same_stabilizer_state, to_statevector
from .statevector import Gate, MeasurementOp, StateVector, equal_up_to_global_phase, measure, prepare_basis

__all__ = [
    "AncillaBranch",
    "AxisObservable",
    "CliffordGate",
    "CompileError",
    "Gate",
    "GateCircuit",
    "MeasurementOp",
    "MeasurementProgram",
    "MeasurementStep",
    "ParseError",
    "PauliString",
    "StabilizerTableau",
    "StateVector",
    "UniversalSet",
    "acn_stabilizer_reference",
    "acn_state",
    "classify_branch",
    "commutes",
    "compile_circuit",
    "conjugate",
    "equal_up_to_global_phase",
    "indirect_gate_1q",
    "indirect_gate_2q",
    "indirect_gate_bu",
    "measure",
    "measure_generatorwise",
    "multiply",
    "prepare_acn",
    "prepare_basis",
    "same_stabilizer_state",
    "set_operators",
    "simulate",
    "teleport",
    "to_statevector",
    "universal_set",
    "verify_equivalence",
]
