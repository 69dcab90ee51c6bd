"""Preparation of the CNOT ancilla using one- and two-qubit measurements only.

Target state, on qubits (b1, b2, c1, c2)::

    |a_cn> = (|0000> + |0101> + |1011> + |1110>) / 2
           = (I x I x CNOT) |Phi_0>_{b1 c1} |Phi_0>_{b2 c2}

Protocol (all outcomes accepted):

1. measure X on q0, Z on q1, then XX and ZZ on (q2, q3);
2. measure the rank-2 pair {P+, P-} on (q1, q2), which is the XX observable;
3. measure the ZZ parity of (q0, q2).

Every outcome record leaves ``(sigma_k x sigma_l x I x I)|a_cn>``.  The label
``(k, l)`` is computed classically from the outcomes by running the same
measurements on a stabilizer tableau and reading off the generator signs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gadgets import indirect_gate_2q
from .outcomes import OutcomeSource
from .pauli import SIGMA, PauliString
from .stabilizer import (
    StabilizerTableau,
    _gf2_rank,
    group_elements,
    measure_generatorwise,
    stabilizer_sign,
    to_statevector,
)
from .statevector import (
    Gate,
    MeasurementOp,
    StateVector,
    apply_gate,
    apply_matrix,
    equal_up_to_global_phase,
    measure,
    measure_pauli_observable,
    overlap,
    prepare_product,
)

# (id, observable on the 4 qubits, targets of the physical measurement)
PROTOCOL: tuple[tuple[str, PauliString, tuple[int, ...]], ...] = (
    ("X0", PauliString.parse("XIII"), (0,)),
    ("Z1", PauliString.parse("IZII"), (1,)),
    ("XX23", PauliString.parse("IIXX"), (2, 3)),
    ("ZZ23", PauliString.parse("IIZZ"), (2, 3)),
    ("P±12", PauliString.parse("IXXI"), (1, 2)),
    ("ZZ02", PauliString.parse("ZIZI"), (0, 2)),
)
REFERENCE_OUTCOMES = (1, 1, 1, 1, 1, 1)
ACN_GENERATORS = ("XIXX", "ZIZI", "IXIX", "IZZZ")

# the physical register starts in an unknown state; this one makes every
# outcome of the protocol equally likely
FRESH_STATE = "0+0+"
FRESH_TABLEAU = ("ZIII", "IXII", "IIZI", "IIIX")


def acn_state() -> StateVector:
    v = np.zeros(16, dtype=complex)
    v[[0b0000, 0b0101, 0b1011, 0b1110]] = 0.5
    return StateVector(v)


def acn_stabilizer_reference() -> StabilizerTableau:
    return StabilizerTableau.from_strings(ACN_GENERATORS)


def labelled_acn(k: int, l: int) -> StateVector:
    """``(sigma_k x sigma_l x I x I)|a_cn>``."""
    return apply_matrix(acn_state(), np.kron(SIGMA[k], SIGMA[l]), (0, 1))


@dataclass
class AncillaBranch:
    outcome_record: list[tuple[str, int]]
    pauli_label: tuple[int, int]
    state: StateVector
    tableau: StabilizerTableau | None = None

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.outcome_record)


def _k_from_signs(sx: int, sz: int) -> int:
    # sigma_k anticommuting with X flips sx, with Z flips sz
    return {(1, 1): 0, (1, -1): 1, (-1, -1): 2, (-1, 1): 3}[sx, sz]


def label_from_tableau(t: StabilizerTableau) -> tuple[int, int]:
    signs = [stabilizer_sign(t, PauliString.parse(g)) for g in ACN_GENERATORS]
    if None in signs:
        raise ValueError(f"{t} is not a Pauli-shifted |a_cn> stabilizer")
    return _k_from_signs(signs[0], signs[1]), _k_from_signs(signs[2], signs[3])


def label_from_outcomes(outcomes: Sequence[int]) -> tuple[int, int]:
    """Pauli label ``(k, l)`` of the branch selected by the six outcomes.

    Step 1 fully determines the register, so the classical controller starts
    from the signed tableau {o1 XIII, o2 IZII, o3 IIXX, o4 IIZZ}.
    """
    if len(outcomes) != len(PROTOCOL):
        raise ValueError(f"need {len(PROTOCOL)} outcomes, got {len(outcomes)}")
    gens = tuple(p if o == 1 else -p for (_, p, _), o in zip(PROTOCOL[:4], outcomes[:4]))
    t = StabilizerTableau(4, gens)
    for (_, p, _), o in zip(PROTOCOL[4:], outcomes[4:]):
        _, t = measure_generatorwise(t, p, forced=o)
    return label_from_tableau(t)


def prepare_acn(
    rng=None,
    forced: Sequence[int] | None = None,
    backend: str = "statevector",
    initial: StateVector | None = None,
) -> AncillaBranch:
    """Run the three-step protocol and return the resulting branch.

    ``forced`` lists the six outcomes (+1/-1) in protocol order.  The P+/P-
    step uses the literal two-projector measurement on the statevector
    backend and the IXXI observable on the stabilizer backend.
    """
    src = OutcomeSource.wrap(rng, forced)
    record: list[tuple[str, int]] = []
    if backend == "statevector":
        state = initial if initial is not None else prepare_product(FRESH_STATE)
        for name, p, targets in PROTOCOL:
            if name.startswith("P±"):
                o, state = measure(state, MeasurementOp.parity_pm(), targets, src)
            else:
                o, state = measure_pauli_observable(state, p.restrict(targets), targets, src)
            record.append((name, o))
        label = label_from_outcomes([o for _, o in record])
        return AncillaBranch(record, label, state)
    if backend == "stabilizer":
        if initial is not None:
            raise ValueError("the stabilizer backend always starts from the fresh tableau")
        t = StabilizerTableau.from_strings(FRESH_TABLEAU)
        for name, p, _ in PROTOCOL:
            o, t = measure_generatorwise(t, p, src)
            record.append((name, o))
        return AncillaBranch(record, label_from_tableau(t), to_statevector(t), t)
    raise ValueError(f"unknown backend {backend!r}")


def all_outcome_records() -> list[tuple[int, ...]]:
    """Every combination of the six +-1 outcomes, reference branch first."""
    return [tuple(1 - 2 * b for b in bits) for bits in itertools.product((0, 1), repeat=len(PROTOCOL))]


def enumerate_branches(backend: str = "statevector") -> list[AncillaBranch]:
    return [prepare_acn(forced=rec, backend=backend) for rec in all_outcome_records()]


def classify_branch(s: StateVector, tol: float = 1e-10) -> tuple[int, int] | None:
    """``(k, l)`` with ``s = (sigma_k x sigma_l x I x I)|a_cn>`` up to phase, else None."""
    if s.n_qubits != 4:
        raise ValueError("ancilla branches live on 4 qubits")
    for k, l in itertools.product(range(4), repeat=2):
        if abs(overlap(labelled_acn(k, l), s)) > 1 - tol:
            return k, l
    return None


def shifted_ancilla_ok(
    branch: AncillaBranch,
    psi: StateVector,
    forced: Sequence | None = None,
    rng=None,
) -> bool:
    """Does a CNOT gadget fed with this branch output ``CNOT|psi>``?"""
    cnot = Gate("CNOT", (0, 1))
    tr = indirect_gate_2q(psi, cnot, rng=rng, forced=forced, ancilla=branch.state, ancilla_label=branch.pauli_label)
    return tr.rounds == 1 and equal_up_to_global_phase(tr.final_state, apply_gate(psi, cnot))


def generating_sets(t: StabilizerTableau):
    """Every unordered choice of ``n`` non-identity group elements that generates the group."""
    elems = group_elements(t)[1:]
    n = t.n_qubits
    for combo in itertools.combinations(elems, n):
        if _gf2_rank(p.symplectic() for p in combo) == n:
            yield combo


def min_max_weight(t: StabilizerTableau) -> tuple[int, tuple[PauliString, ...]]:
    """Smallest achievable maximum generator weight, with one set attaining it."""
    best = None
    for combo in generating_sets(t):
        w = max(p.weight for p in combo)
        if best is None or w < best[0]:
            best = (w, combo)
    return best
