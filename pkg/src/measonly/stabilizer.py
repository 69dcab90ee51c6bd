"""Stabilizer-generator simulation of Clifford gates and Pauli measurements.

A state is held as ``n`` commuting, independent, signed Pauli generators.  A
measured Pauli ``M`` that anticommutes with generators ``N1, N2, ...`` replaces
them by ``+-M, N1 N2, N1 N3, ...`` (the first anticommuting generator in list
order serves as ``N1``), and a measured Pauli that commutes with everything
has a deterministic outcome read off from the group.

No destabilizers are kept; deterministic outcomes are found by Gaussian
elimination, which is O(n^3) and fine for the register sizes used here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .outcomes import ImpossibleOutcomeError, OutcomeSource
from .pauli import CliffordGate, PauliString, commutes, conjugate, multiply
from .statevector import MAX_QUBITS, StateVector, _pauli_action


class InvalidTableauError(ValueError):
    pass


def _gf2_rank(vectors: Iterable[int]) -> int:
    basis: dict[int, int] = {}  # leading bit -> vector
    for v in vectors:
        while v:
            lead = v.bit_length() - 1
            if lead not in basis:
                basis[lead] = v
                break
            v ^= basis[lead]
    return len(basis)


def _gf2_combination(rows: Sequence[int], target: int) -> list[int] | None:
    """Indices of ``rows`` whose XOR equals ``target``, or None."""
    basis: dict[int, tuple[int, int]] = {}  # leading bit -> (vector, combination mask)
    for i, v in enumerate(rows):
        combo = 1 << i
        while v:
            lead = v.bit_length() - 1
            if lead not in basis:
                basis[lead] = (v, combo)
                break
            bv, bc = basis[lead]
            v ^= bv
            combo ^= bc
    combo = 0
    v = target
    while v:
        lead = v.bit_length() - 1
        if lead not in basis:
            return None
        bv, bc = basis[lead]
        v ^= bv
        combo ^= bc
    return [i for i in range(len(rows)) if (combo >> i) & 1]


@dataclass(frozen=True)
class StabilizerTableau:
    n_qubits: int
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        n = self.n_qubits
        if len(gens) != n:
            raise InvalidTableauError(f"need {n} generators, got {len(gens)}")
        for g in gens:
            if g.n_qubits != n:
                raise InvalidTableauError(f"generator {g} does not act on {n} qubits")
            if g.phase_exp not in (0, 2):
                raise InvalidTableauError(f"generator {g} must carry a real sign")
        for i, a in enumerate(gens):
            for b in gens[i + 1 :]:
                if not commutes(a, b):
                    raise InvalidTableauError(f"generators {a} and {b} anticommute")
        if _gf2_rank(g.symplectic() for g in gens) != n:
            raise InvalidTableauError("generators are not independent")

    # construction -----------------------------------------------------------
    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "StabilizerTableau":
        gens = tuple(PauliString.parse(s if s.strip()[0] in "+-" else "+" + s.strip()) for s in strings)
        return cls(gens[0].n_qubits, gens)

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        return cls(n, tuple(PauliString.sigma(3, n, q) for q in range(n)))

    @classmethod
    def parse_text(cls, text: str) -> "StabilizerTableau":
        """One signed Pauli string per line; blank lines and ``#`` comments ignored."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        return cls.from_strings([ln for ln in lines if ln])

    def to_text(self) -> str:
        return "\n".join(str(g) for g in self.generators) + "\n"

    def __str__(self) -> str:
        return "{" + ", ".join(str(g) for g in self.generators) + "}"

    @property
    def strings(self) -> list[str]:
        return [str(g) for g in self.generators]


def stabilizer_sign(t: StabilizerTableau, p: PauliString) -> int | None:
    """+1 if ``p`` is in the stabilizer group, -1 if ``-p`` is, else None."""
    if any(not commutes(p, g) for g in t.generators):
        return None
    combo = _gf2_combination([g.symplectic() for g in t.generators], p.symplectic())
    if combo is None:
        return None
    prod = PauliString.identity(t.n_qubits)
    for i in combo:
        prod = multiply(prod, t.generators[i])
    # prod == i^k p_unsigned; compare phases
    rel = (prod.phase_exp - p.phase_exp) % 4
    if rel == 0:
        return 1
    if rel == 2:
        return -1
    raise InvalidTableauError(f"group element {prod} is not Hermitian")


def measure_generatorwise(
    t: StabilizerTableau,
    m: PauliString,
    rng: np.random.Generator | OutcomeSource | int | None = None,
    forced: int | None = None,
) -> tuple[int, StabilizerTableau]:
    """Measure the Pauli observable ``m``; returns ``(outcome, new_tableau)``."""
    if m.n_qubits != t.n_qubits:
        raise ValueError(f"{m.n_qubits}-qubit observable on a {t.n_qubits}-qubit tableau")
    if m.is_identity:
        raise ValueError("cannot measure the identity")
    if not m.is_hermitian:
        raise ValueError(f"{m} is not Hermitian")
    anti = [i for i, g in enumerate(t.generators) if not commutes(m, g)]
    src = OutcomeSource.wrap(rng, None if forced is None else [forced])
    if not anti:
        sign = stabilizer_sign(t, m)
        if sign is None:
            raise InvalidTableauError(f"{m} commutes with a full generator set but is not in the group")
        src.choose((1, -1), (1.0, 0.0) if sign == 1 else (0.0, 1.0))
        return sign, t
    outcome = (1, -1)[src.choose((1, -1), (0.5, 0.5))]
    gens = list(t.generators)
    first = gens[anti[0]]
    gens[anti[0]] = m if outcome == 1 else -m
    for i in anti[1:]:
        gens[i] = multiply(first, gens[i])
    return outcome, StabilizerTableau(t.n_qubits, tuple(gens))


def is_deterministic(t: StabilizerTableau, m: PauliString) -> bool:
    return all(commutes(m, g) for g in t.generators)


def apply_clifford(t: StabilizerTableau, g: CliffordGate) -> StabilizerTableau:
    return StabilizerTableau(t.n_qubits, tuple(conjugate(g, p) for p in t.generators))


def canonical_generators(t: StabilizerTableau) -> tuple[PauliString, ...]:
    """Reduced row-echelon generators (signs included); equal groups give equal output."""
    n = t.n_qubits
    rows = list(t.generators)
    r = 0
    # column order: X bits of qubits 0..n-1, then Z bits
    for col in list(range(n)) + [n + q for q in range(n)]:
        bit = 1 << (col % n) if col < n else 1 << (col - n)
        has = (lambda p: p.x_mask & bit) if col < n else (lambda p: p.z_mask & bit)
        piv = next((i for i in range(r, n) if has(rows[i])), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(n):
            if i != r and has(rows[i]):
                rows[i] = multiply(rows[r], rows[i])
        r += 1
        if r == n:
            break
    return tuple(rows)


def same_stabilizer_state(a: StabilizerTableau, b: StabilizerTableau) -> bool:
    if a.n_qubits != b.n_qubits:
        return False
    return canonical_generators(a) == canonical_generators(b)


def group_elements(t: StabilizerTableau) -> list[PauliString]:
    """All ``2**n`` signed elements of the stabilizer group (identity first)."""
    elems = [PauliString.identity(t.n_qubits)]
    for g in t.generators:
        elems += [multiply(e, g) for e in elems]
    return elems


def to_statevector(t: StabilizerTableau) -> StateVector:
    """The state fixed by every generator, with canonical global phase."""
    n = t.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits is too many for a dense vector")
    rng = np.random.default_rng(0x5EED)
    vec = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    for g in t.generators:
        vec = (vec + _pauli_action(vec, g, n)) / 2
    norm = np.linalg.norm(vec)
    if norm < 1e-8:
        raise InvalidTableauError("generators fix no state")
    vec /= norm
    for g in t.generators:
        if np.linalg.norm(_pauli_action(vec, g, n) - vec) > 1e-9:
            raise InvalidTableauError(f"projected state is not fixed by {g}")
    return StateVector(vec).canonical_phase()
