"""Dense state-vector simulation with gates and projective measurements.

This is the brute-force reference for everything else in the package: the
stabilizer backend, the teleportation gadgets and the compiled measurement
programs are all checked against it.

States are immutable; every operation returns a new :class:`StateVector`.
Qubit 0 is the most significant bit of the basis index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Any, Iterable, Sequence

import numpy as np

from .outcomes import ImpossibleOutcomeError, OutcomeSource
from .pauli import CLIFFORD_KINDS, SIGMA, CliffordGate, PauliString, X2, Y2, Z2

MAX_QUBITS = 14
NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(len(amps)))) if len(amps) else -1
        if n < 1 or 2**n != len(amps):
            raise ValueError(f"amplitude vector length {len(amps)} is not 2**n with n >= 1")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm:.12f})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vec: Iterable[complex]) -> "StateVector":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm < 1e-14:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @property
    def n_qubits(self) -> int:
        return len(self.amplitudes).bit_length() - 1

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def canonical_phase(self) -> "StateVector":
        """Same ray, with the first non-negligible amplitude real and positive."""
        a = self.amplitudes
        k = int(np.argmax(np.abs(a) > 1e-9))
        return StateVector(a * (abs(a[k]) / a[k]))

    def to_records(self, tol: float = 1e-14) -> list[tuple[int, float, float]]:
        """``[(index, re, im), ...]`` for non-zero amplitudes."""
        return [(i, float(c.real), float(c.imag)) for i, c in enumerate(self.amplitudes) if abs(c) > tol]

    @classmethod
    def from_records(cls, n_qubits: int, records: Iterable[Sequence[float]]) -> "StateVector":
        v = np.zeros(2**n_qubits, dtype=complex)
        for i, re, im in records:
            v[int(i)] = re + 1j * im
        return cls(v)

    def __repr__(self) -> str:
        terms = ", ".join(f"{i:0{self.n_qubits}b}:{re:+.4f}{im:+.4f}j" for i, re, im in self.to_records(1e-9)[:8])
        return f"StateVector(n={self.n_qubits}, [{terms}{', ...' if len(self.to_records(1e-9)) > 8 else ''}])"


# ---------------------------------------------------------------------------
# preparation


def prepare_basis(n: int, bitstring: str) -> StateVector:
    if len(bitstring) != n or set(bitstring) - {"0", "1"}:
        raise ValueError(f"bitstring {bitstring!r} does not describe {n} qubits")
    v = np.zeros(2**n, dtype=complex)
    v[int(bitstring, 2)] = 1
    return StateVector(v)


_BELL = {
    0: ((0, 1), (3, 1)),
    1: ((1, 1), (2, 1)),
    2: ((1, 1), (2, -1)),
    3: ((0, 1), (3, -1)),
}


def bell_vector(j: int) -> np.ndarray:
    if j not in _BELL:
        raise ValueError(f"Bell index must be 0..3, got {j}")
    v = np.zeros(4, dtype=complex)
    for idx, sgn in _BELL[j]:
        v[idx] = sgn / np.sqrt(2)
    return v


def prepare_bell(j: int) -> StateVector:
    """|Phi_0> = (|00>+|11>)/√2, |Phi_1> = (|01>+|10>)/√2,
    |Phi_2> = (|01>-|10>)/√2, |Phi_3> = (|00>-|11>)/√2."""
    return StateVector(bell_vector(j))


_SINGLE = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def prepare_product(labels: str) -> StateVector:
    """Product of single-qubit states from ``"01+-"`` characters."""
    return StateVector(reduce(np.kron, [_SINGLE[c] for c in labels]))


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector.normalized(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / abs(d))


def tensor(*states: StateVector) -> StateVector:
    return StateVector(reduce(np.kron, [s.amplitudes for s in states]))


# ---------------------------------------------------------------------------
# gates


def _rot(axis: np.ndarray, theta: float) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * axis


@dataclass(frozen=True, eq=False)
class Gate:
    """A gate on explicit qubits.

    ``kind`` is a Clifford generator name (``H``, ``P``, ``PDG``, ``CNOT``,
    ``CZ``, ``SWAP``, ``I``, ``X``, ``Y``, ``Z``), a rotation ``RX``/``RY``/``RZ``
    with ``RZ(theta) = exp(-i theta Z / 2)``, or ``U`` with an explicit unitary.
    """

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None
    unitary: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if kind in ("RX", "RY", "RZ") and self.theta is None:
            raise ValueError(f"{kind} needs an angle")
        if kind == "U":
            if self.unitary is None:
                raise ValueError("U gate needs an explicit matrix")
            u = np.asarray(self.unitary, dtype=complex)
            object.__setattr__(self, "unitary", u)
        elif kind not in CLIFFORD_KINDS and kind not in ("RX", "RY", "RZ"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        m = self.matrix
        if m.shape != (2 ** len(self.targets),) * 2:
            raise ValueError(f"{kind} matrix shape {m.shape} does not match targets {self.targets}")
        if not np.allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-12):
            raise ValueError(f"{kind} matrix is not unitary")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"repeated target in {self.targets}")

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "U":
            return self.unitary
        if self.kind == "RX":
            return _rot(X2, self.theta)
        if self.kind == "RY":
            return _rot(Y2, self.theta)
        if self.kind == "RZ":
            return _rot(Z2, self.theta)
        return CliffordGate(self.kind, self.targets).matrix()

    @property
    def is_clifford_generator(self) -> bool:
        return self.kind in CLIFFORD_KINDS

    def to_clifford(self) -> CliffordGate:
        return CliffordGate(self.kind, self.targets)

    def on(self, *targets: int) -> "Gate":
        return Gate(self.kind, targets, self.theta, self.unitary)

    def __repr__(self) -> str:
        arg = f", {self.theta:.6g}" if self.theta is not None else ""
        return f"Gate({self.kind}{arg} @ {self.targets})"


def apply_matrix(s: StateVector, u: np.ndarray, targets: Sequence[int]) -> StateVector:
    n = s.n_qubits
    targets = list(targets)
    if any(t < 0 or t >= n for t in targets):
        raise IndexError(f"targets {targets} outside a {n}-qubit register")
    k = len(targets)
    ut = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    out = np.tensordot(ut, s.tensor(), axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return StateVector.normalized(out)


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    return apply_matrix(s, g.matrix, g.targets)


def apply_pauli(s: StateVector, p: PauliString, targets: Sequence[int] | None = None) -> StateVector:
    """Apply a (phased) Pauli string, optionally embedded on ``targets``."""
    return StateVector(_pauli_action(s.amplitudes, p, s.n_qubits, targets))


def _pauli_action(vec: np.ndarray, p: PauliString, n: int, targets: Sequence[int] | None = None) -> np.ndarray:
    if targets is not None:
        p = p.embed(n, targets)
    elif p.n_qubits != n:
        raise ValueError(f"{p.n_qubits}-qubit Pauli on a {n}-qubit state")
    xflip = sum(1 << (n - 1 - q) for q in range(n) if (p.x_mask >> q) & 1)
    zbits = sum(1 << (n - 1 - q) for q in range(n) if (p.z_mask >> q) & 1)
    idx = np.arange(2**n, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(idx & zbits).astype(np.int64) & 1)
    phase = 1j ** ((p.phase_exp + bin(p.x_mask & p.z_mask).count("1")) % 4)
    out = np.empty_like(vec)
    out[idx ^ xflip] = phase * signs * vec
    return out


# ---------------------------------------------------------------------------
# measurement


@dataclass(frozen=True, eq=False)
class MeasurementOp:
    """Projective measurement on 1 or 2 qubits.

    Each projector is an orthonormal list of basis vectors (columns of a
    ``2**arity x rank`` array); ranks must add up to ``2**arity``.
    """

    arity: int
    projectors: tuple[np.ndarray, ...]
    labels: tuple[Any, ...]
    name: str = ""

    def __post_init__(self):
        dim = 2**self.arity
        projs = tuple(np.asarray(v, dtype=complex).reshape(dim, -1) for v in self.projectors)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.arity not in (1, 2):
            raise ValueError("measurements act on 1 or 2 qubits")
        if len(projs) != len(self.labels):
            raise ValueError("one label per projector")
        if sum(v.shape[1] for v in projs) != dim:
            raise ValueError(f"projector ranks sum to {sum(v.shape[1] for v in projs)}, need {dim}")
        basis = np.hstack(projs)
        if not np.allclose(basis.conj().T @ basis, np.eye(dim), atol=1e-12):
            raise ValueError("projector basis vectors are not orthonormal")
        # cached for measure(): all basis bras stacked, and each projector's row range
        bounds = np.cumsum([0] + [v.shape[1] for v in projs])
        object.__setattr__(self, "_bras", basis.conj().T)
        object.__setattr__(self, "_rows", tuple(zip(bounds[:-1], bounds[1:])))

    def projector_matrices(self) -> list[np.ndarray]:
        return [v @ v.conj().T for v in self.projectors]

    @property
    def is_complete(self) -> bool:
        """All projectors rank one."""
        return all(v.shape[1] == 1 for v in self.projectors)

    @classmethod
    def from_basis(cls, vectors: Sequence[np.ndarray], labels: Sequence[Any] | None = None, name: str = "") -> "MeasurementOp":
        vectors = [np.asarray(v, dtype=complex) for v in vectors]
        arity = int(np.log2(len(vectors[0])))
        return cls(arity, tuple(v.reshape(-1, 1) for v in vectors), tuple(labels or range(len(vectors))), name)

    @classmethod
    def from_observables(cls, *observables: np.ndarray, name: str = "") -> "MeasurementOp":
        """Joint measurement of commuting +-1 observables; labels are sign tuples
        (or plain +-1 for a single observable)."""
        dim = len(observables[0])
        for a in observables:
            for b in observables:
                if not np.allclose(a @ b, b @ a, atol=1e-12):
                    raise ValueError("observables do not commute")
        projs, labels = [], []
        signs_list = np.array(np.meshgrid(*[[1, -1]] * len(observables), indexing="ij")).reshape(len(observables), -1).T
        for signs in signs_list:
            proj = reduce(np.matmul, [(np.eye(dim) + s * o) / 2 for s, o in zip(signs, observables)])
            w, v = np.linalg.eigh((proj + proj.conj().T) / 2)
            cols = v[:, w > 0.5]
            if cols.shape[1] == 0:
                continue
            projs.append(cols)
            labels.append(tuple(int(s) for s in signs) if len(observables) > 1 else int(signs[0]))
        return cls(int(np.log2(dim)), tuple(projs), tuple(labels), name)

    @classmethod
    def bell(cls) -> "MeasurementOp":
        """Bell-basis measurement, label j for |Phi_j>."""
        return _bell_op()

    @classmethod
    def computational(cls, arity: int = 1) -> "MeasurementOp":
        return cls.from_basis(list(np.eye(2**arity, dtype=complex)), range(2**arity), f"Z^{arity}")

    @classmethod
    def parity_pm(cls) -> "MeasurementOp":
        """Two rank-2 projectors P+ = |Phi0><Phi0| + |Phi1><Phi1| and
        P- = |Phi2><Phi2| + |Phi3><Phi3|; labels +1 and -1."""
        plus = np.stack([bell_vector(0), bell_vector(1)], axis=1)
        minus = np.stack([bell_vector(2), bell_vector(3)], axis=1)
        return cls(2, (plus, minus), (1, -1), "P±")


@lru_cache(maxsize=1)
def _bell_op() -> MeasurementOp:
    return MeasurementOp.from_basis([bell_vector(j) for j in range(4)], range(4), "bell")


def _split(s: StateVector, targets: Sequence[int]) -> np.ndarray:
    targets = list(targets)
    n = s.n_qubits
    if len(set(targets)) != len(targets) or any(t < 0 or t >= n for t in targets):
        raise IndexError(f"bad measurement targets {targets} for {n} qubits")
    t = np.moveaxis(s.tensor(), targets, list(range(len(targets))))
    return t.reshape(2 ** len(targets), -1)


def _merge(mat: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    t = mat.reshape((2,) * n)
    return np.moveaxis(t, list(range(len(targets))), list(targets))


def outcome_probabilities(s: StateVector, m: MeasurementOp, targets: Sequence[int]) -> dict[Any, float]:
    if len(targets) != m.arity:
        raise ValueError(f"{m.arity}-qubit measurement on targets {tuple(targets)}")
    mat = _split(s, targets)
    return {lab: float(np.sum(np.abs(v.conj().T @ mat) ** 2)) for lab, v in zip(m.labels, m.projectors)}


def measure(
    s: StateVector,
    m: MeasurementOp,
    targets: Sequence[int],
    rng: np.random.Generator | OutcomeSource | int | None = None,
    forced: Any = None,
) -> tuple[Any, StateVector]:
    """Measure ``m`` on ``targets``; returns ``(label, post_state)``.

    The outcome is sampled from the Born rule, or taken from ``forced`` (a
    label), or from the forced queue of an :class:`OutcomeSource` passed as
    ``rng``.
    """
    if len(targets) != m.arity:
        raise ValueError(f"{m.arity}-qubit measurement on targets {tuple(targets)}")
    mat = _split(s, targets)
    coeffs = m._bras @ mat
    row_w = np.einsum("ij,ij->i", coeffs.conj(), coeffs).real
    probs = [float(row_w[a:b].sum()) for a, b in m._rows]
    src = OutcomeSource.wrap(rng, None if forced is None else [forced])
    k = src.choose(m.labels, probs)
    a, b = m._rows[k]
    post = m.projectors[k] @ coeffs[a:b] / np.sqrt(probs[k])
    return m.labels[k], StateVector(_merge(post, targets, s.n_qubits).reshape(-1))


def measure_pauli_observable(
    s: StateVector,
    p: PauliString,
    targets: Sequence[int] | None = None,
    rng: np.random.Generator | OutcomeSource | int | None = None,
    forced: int | None = None,
) -> tuple[int, StateVector]:
    """Project with (I +- P)/2.  Outcome +1 is the +1 eigenspace.

    ``p`` acts on ``targets`` (in order), or on the whole register when
    ``targets`` is None.  Any arity is allowed here.
    """
    if p.is_identity:
        raise ValueError("cannot measure the identity")
    if not p.is_hermitian:
        raise ValueError(f"{p} is not Hermitian")
    n = s.n_qubits
    vec = s.amplitudes
    pv = _pauli_action(vec, p, n, targets)
    branches = {1: (vec + pv) / 2, -1: (vec - pv) / 2}
    probs = [float(np.vdot(branches[1], branches[1]).real), float(np.vdot(branches[-1], branches[-1]).real)]
    src = OutcomeSource.wrap(rng, None if forced is None else [forced])
    k = src.choose((1, -1), probs)
    label = (1, -1)[k]
    return label, StateVector.normalized(branches[label])


def pauli_expectation(s: StateVector, p: PauliString, targets: Sequence[int] | None = None) -> float:
    return float(np.vdot(s.amplitudes, _pauli_action(s.amplitudes, p, s.n_qubits, targets)).real)


# ---------------------------------------------------------------------------
# comparison and bookkeeping


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(overlap(a, b)) ** 2


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    return abs(overlap(a, b)) > 1 - tol


def permute(s: StateVector, order: Sequence[int]) -> StateVector:
    """New qubit ``i`` is old qubit ``order[i]``."""
    if sorted(order) != list(range(s.n_qubits)):
        raise ValueError(f"{order} is not a permutation of {s.n_qubits} qubits")
    return StateVector(np.transpose(s.tensor(), list(order)).reshape(-1))


def factor_out(s: StateVector, keep: Sequence[int], tol: float = 1e-8) -> StateVector:
    """State of ``keep`` (in that order) when it is unentangled with the rest.

    Raises ``ValueError`` when the split is not a product (Schmidt rank > 1).
    """
    keep = list(keep)
    if len(keep) == s.n_qubits:
        return permute(s, keep)
    rest = [q for q in range(s.n_qubits) if q not in keep]
    t = np.transpose(s.tensor(), keep + rest).reshape(2 ** len(keep), -1)
    u, sv, _ = np.linalg.svd(t, full_matrices=False)
    if len(sv) > 1 and sv[1] > tol:
        raise ValueError(f"qubits {keep} are entangled with the rest (second Schmidt coefficient {sv[1]:.3g})")
    return StateVector.normalized(u[:, 0])


def pauli_matrix(j: int) -> np.ndarray:
    return SIGMA[j]
