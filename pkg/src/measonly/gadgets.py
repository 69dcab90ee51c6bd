"""Teleportation-based gate gadgets, simulated on state vectors.

Each gadget takes a register, acts on the named data qubit(s) through freshly
appended ancillas, and hands back a register of the original size with the
output in the data qubit's position.  The measured qubits are left in a
product state by the Bell-type measurements and are traced out exactly.

Two correction styles exist:

* the recursive style: a non-trivial outcome leaves a residual gate
  ``V sigma_j V^dagger`` that is removed by running the gadget again with that
  gate, until the identity outcome shows up;
* the pre-rotated measurement style (:func:`indirect_gate_bu`): the data qubit
  is measured jointly with half of a Bell pair in the rotated basis
  ``{(U^dagger x I)|Phi_j>}`` and only a Pauli correction is ever needed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Any, Sequence

import numpy as np

from .outcomes import OutcomeSource
from .pauli import SIGMA, AxisObservable, PauliString, X2, Z2, multiply
from .statevector import (
    Gate,
    MeasurementOp,
    StateVector,
    apply_matrix,
    bell_vector,
    factor_out,
    measure,
    permute,
    tensor,
)

DEFAULT_MAX_ROUNDS = 1000


class RunawayCorrectionError(RuntimeError):
    """The correction loop hit its round cap; this points at a bug or a broken RNG."""


class GadgetKind(enum.Enum):
    TELEPORT = "teleport"
    INDIRECT_1Q = "indirect-1q"
    INDIRECT_1Q_SHIFTED = "indirect-1q-shifted"
    INDIRECT_2Q = "indirect-2q"
    INDIRECT_BU = "indirect-bu"

    @property
    def ancilla_arity(self) -> int:
        return {"teleport": 0, "indirect-1q": 2, "indirect-1q-shifted": 2, "indirect-2q": 4, "indirect-bu": 2}[self.value]


@dataclass
class GadgetTrace:
    kind: GadgetKind
    outcomes: list[Any]
    rounds: int
    final_state: StateVector
    pauli_frame: PauliString
    output_qubits: tuple[int, ...] = ()
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "outcomes": [list(o) if isinstance(o, tuple) else o for o in self.outcomes],
            "rounds": self.rounds,
            "frame": str(self.pauli_frame),
        }


# ---------------------------------------------------------------------------
# helpers

BELL_FROM_SIGNS = {(1, 1): 0, (1, -1): 1, (-1, -1): 2, (-1, 1): 3}
"""Bell index j from the (XX, ZZ) eigenvalues of |Phi_j>."""


@lru_cache(maxsize=None)
def sigma_product_index(a: int, b: int) -> int:
    """Index of sigma_a sigma_b, ignoring phase."""
    p = multiply(PauliString.sigma(a), PauliString.sigma(b))
    return p.sigma_index(0)


def _matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)


def _reunitarize(m: np.ndarray) -> np.ndarray:
    """Nearest unitary; long correction chains otherwise drift off unitarity."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def pauli_up_to_phase(m: np.ndarray, tol: float = 1e-9) -> PauliString | None:
    """The Pauli string proportional to ``m``, or None."""
    d = len(m)
    k = int(np.log2(d))
    for idx in np.ndindex(*(4,) * k):
        p = reduce(np.kron, [SIGMA[i] for i in idx])
        if abs(abs(np.trace(p.conj().T @ m)) / d - 1) < tol:
            return PauliString.from_letters("".join("IXYZ"[i] for i in idx))
    return None


def _register_after(ext: StateVector, n: int, replacements: dict[int, int]) -> StateVector:
    """Drop measured qubits and put each output qubit where its data qubit was."""
    keep = [replacements.get(q, q) for q in range(n)]
    return factor_out(ext, keep)


def _bell_pair_vector(n_pairs: int) -> np.ndarray:
    """|Phi_0>^n_pairs with qubit order (b_1..b_n, c_1..c_n), pairs (b_i, c_i)."""
    v = reduce(np.kron, [bell_vector(0)] * n_pairs)
    s = StateVector(v)
    order = [2 * i for i in range(n_pairs)] + [2 * i + 1 for i in range(n_pairs)]
    return permute(s, order).amplitudes


# ---------------------------------------------------------------------------
# gadgets


def teleport(
    s: StateVector,
    src: int,
    anc_pair: tuple[int, int],
    rng=None,
    forced: Sequence[int] | None = None,
    frame: bool = False,
    check_ancilla: bool = True,
) -> GadgetTrace:
    """Teleport qubit ``src`` onto ``anc_pair[1]`` through the Bell pair on ``anc_pair``.

    Outcome ``j`` of the Bell measurement on ``(src, anc_pair[0])`` is
    followed by ``sigma_j`` on ``anc_pair[1]``; with ``frame=True`` the
    correction is recorded in the trace's frame instead of applied.
    """
    b, c = anc_pair
    if check_ancilla:
        try:
            pair = factor_out(s, [b, c])
        except ValueError:
            raise ValueError(f"qubits {anc_pair} are not an unentangled Bell pair") from None
        if abs(np.vdot(bell_vector(0), pair.amplitudes)) < 1 - 1e-9:
            raise ValueError(f"qubits {anc_pair} do not hold |Phi_0>")
    src_ = OutcomeSource.wrap(rng, forced)
    j, state = measure(s, MeasurementOp.bell(), (src, b), src_)
    corr = PauliString.sigma(j, s.n_qubits, c)
    if frame:
        pframe = corr
    else:
        state = apply_matrix(state, SIGMA[j], [c])
        pframe = PauliString.identity(s.n_qubits)
    return GadgetTrace(GadgetKind.TELEPORT, [j], 1, state, pframe, (c,))


def make_gadget_ancilla(u, k: int = 0) -> StateVector:
    """``(I x U sigma_k)|Phi_0>``, equal to ``(I x U)|Phi_k>`` up to phase."""
    m = _matrix(u)
    if m.shape != (2, 2):
        raise ValueError("gadget ancilla needs a one-qubit gate")
    return StateVector(np.kron(np.eye(2), m @ SIGMA[k]) @ bell_vector(0))


def indirect_gate_1q(
    s: StateVector,
    u,
    qubit: int = 0,
    mode: str = "literal",
    rng=None,
    forced: Sequence[int] | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> GadgetTrace:
    """Apply a one-qubit gate by teleporting through ``(I x U)|Phi_0>``.

    In ``"literal"`` mode each round uses the exact ancilla for the pending
    gate.  In ``"shifted"`` mode each round first measures a fresh pair along
    ``{(I x V)|Phi_k>}`` and accepts whichever ``k`` comes out; the fresh pair
    is treated as maximally mixed, so ``k`` is uniform.  Forced outcomes are
    consumed as ``j`` per round (literal) or ``k, j`` per round (shifted).
    """
    if mode not in ("literal", "shifted"):
        raise ValueError(f"mode must be 'literal' or 'shifted', got {mode!r}")
    pending = _matrix(u)
    if pending.shape != (2, 2):
        raise ValueError("indirect_gate_1q needs a one-qubit gate")
    src = OutcomeSource.wrap(rng, forced)
    n = s.n_qubits
    b, c = n, n + 1
    state = s
    outcomes: list[Any] = []
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise RunawayCorrectionError(f"no identity outcome after {max_rounds} rounds")
        k = 0
        if mode == "shifted":
            k = src.choose(range(4), [0.25] * 4)
        anc = StateVector(np.kron(np.eye(2), pending) @ bell_vector(k))
        j, ext = measure(tensor(state, anc), MeasurementOp.bell(), (qubit, b), src)
        outcomes.append((k, j) if mode == "shifted" else j)
        state = _register_after(ext, n, {qubit: c})
        jj = sigma_product_index(k, j)
        if jj == 0:
            break
        pending = pending @ SIGMA[jj] @ pending.conj().T
        if rounds % 8 == 0:
            # re-project every few rounds; cheaper than every round and enough to stop drift
            pending = _reunitarize(pending)
    kind = GadgetKind.INDIRECT_1Q if mode == "literal" else GadgetKind.INDIRECT_1Q_SHIFTED
    return GadgetTrace(kind, outcomes, rounds, state, PauliString.identity(n), (qubit,))


def _flatten_pairs(forced):
    if forced is None:
        return None
    out = []
    for item in forced:
        out.extend(item if isinstance(item, (tuple, list)) else (item,))
    return out


def indirect_gate_2q(
    s: StateVector,
    u,
    qubits: tuple[int, int] = (0, 1),
    rng=None,
    forced: Sequence[Any] | None = None,
    ancilla: StateVector | None = None,
    ancilla_label: tuple[int, int] = (0, 0),
    frame: bool = False,
    pauli_shortcut: bool = True,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> GadgetTrace:
    """Apply a two-qubit gate by two teleportations through a 4-qubit ancilla.

    The ancilla is ``(I x I x U)|Phi_0>_{b1 c1}|Phi_0>_{b2 c2}`` on qubit order
    ``(b1, b2, c1, c2)``.  A caller-supplied first-round ``ancilla`` may carry
    an extra ``sigma_k x sigma_l`` on ``(b1, b2)``, named by ``ancilla_label``;
    the Bell outcomes are relabelled accordingly.

    A residual gate ``V (sigma x sigma) V^dagger`` that is a Pauli product is
    applied directly when ``pauli_shortcut`` is set (or pushed to the frame
    when ``frame`` is set); otherwise the gadget recurses on it.  Forced
    outcomes are ``(j1, j2)`` pairs, one per round.
    """
    pending = _matrix(u)
    if pending.shape != (4, 4):
        raise ValueError("indirect_gate_2q needs a two-qubit gate")
    q1, q2 = qubits
    src = OutcomeSource.wrap(rng, _flatten_pairs(forced))
    n = s.n_qubits
    b1, b2, c1, c2 = n, n + 1, n + 2, n + 3
    state = s
    outcomes: list[Any] = []
    pframe = PauliString.identity(n)
    rounds = 0
    bell_bell = _bell_pair_vector(2)
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise RunawayCorrectionError(f"no identity outcome after {max_rounds} rounds")
        if rounds == 1 and ancilla is not None:
            anc, (k, l) = ancilla, ancilla_label
        else:
            # (I x I x U) on (b1, b2, c1, c2): U acts on the last two qubits
            anc, (k, l) = StateVector((bell_bell.reshape(4, 4) @ pending.T).reshape(-1)), (0, 0)
        ext = tensor(state, anc)
        j1, ext = measure(ext, MeasurementOp.bell(), (q1, b1), src)
        j2, ext = measure(ext, MeasurementOp.bell(), (q2, b2), src)
        outcomes.append((j1, j2))
        state = _register_after(ext, n, {q1: c1, q2: c2})
        e1, e2 = sigma_product_index(k, j1), sigma_product_index(l, j2)
        if (e1, e2) == (0, 0):
            break
        residual = pending @ np.kron(SIGMA[e1], SIGMA[e2]) @ pending.conj().T
        corr = pauli_up_to_phase(residual) if pauli_shortcut else None
        if corr is not None:
            # residual is Hermitian and unitary, so it is its own inverse
            if frame:
                pframe = multiply(pframe, corr.embed(n, (q1, q2)))
            else:
                state = apply_matrix(state, corr.to_matrix(), (q1, q2))
            break
        # re-project every few rounds; cheaper than every round and enough to stop drift
        pending = _reunitarize(residual) if rounds % 8 == 0 else residual
    return GadgetTrace(GadgetKind.INDIRECT_2Q, outcomes, rounds, state, pframe.unsigned(), (q1, q2))


def bu_basis(u) -> MeasurementOp:
    """Complete two-qubit measurement along ``{(U^dagger x I)|Phi_j>}``, label j."""
    m = _matrix(u)
    rot = np.kron(m.conj().T, np.eye(2))
    return MeasurementOp.from_basis([rot @ bell_vector(j) for j in range(4)], range(4), "B_U†")


def bu_observables(u) -> tuple[AxisObservable, AxisObservable]:
    """``((U^dagger X U) x X, (U^dagger Z U) x Z)``, signs as they come.

    Their joint eigenbasis is ``{(U^dagger x I)|Phi_j>}``; the eigenvalue pair
    of ``|Phi_j>``-type vectors follows :data:`BELL_FROM_SIGNS`.
    """
    m = _matrix(u)
    if m.shape != (2, 2):
        raise ValueError("bu_observables needs a one-qubit gate")
    ox = m.conj().T @ X2 @ m
    oz = m.conj().T @ Z2 @ m
    return AxisObservable.from_matrices(ox, X2), AxisObservable.from_matrices(oz, Z2)


def indirect_gate_bu(
    s: StateVector,
    u,
    qubit: int = 0,
    rng=None,
    forced: Sequence[int] | None = None,
    frame: bool = False,
) -> GadgetTrace:
    """Apply ``U`` with a single rotated Bell measurement and a Pauli correction.

    The data qubit and half of a fresh ``|Phi_0>`` are measured along
    ``{(U^dagger x I)|Phi_j>}``; the other half then holds ``sigma_j U|psi>``.
    """
    m = _matrix(u)
    if m.shape != (2, 2):
        raise ValueError("indirect_gate_bu needs a one-qubit gate")
    n = s.n_qubits
    b, c = n, n + 1
    src = OutcomeSource.wrap(rng, forced)
    j, ext = measure(tensor(s, StateVector(bell_vector(0))), bu_basis(m), (qubit, b), src)
    state = _register_after(ext, n, {qubit: c})
    if frame:
        pframe = PauliString.sigma(j, n, qubit)
    else:
        state = apply_matrix(state, SIGMA[j], [qubit])
        pframe = PauliString.identity(n)
    return GadgetTrace(GadgetKind.INDIRECT_BU, [j], 1, state, pframe, (qubit,))
