"""Phased Pauli strings, Clifford-generator conjugation and Pauli-axis observables.

A :class:`PauliString` on ``n`` qubits stores ``i**phase_exp`` times a tensor
product of the literal matrices I, X, Y, Z.  Bit ``q`` of ``x_mask`` is set when
qubit ``q`` carries X or Y, bit ``q`` of ``z_mask`` when it carries Z or Y.

Qubit 0 is the leftmost tensor factor everywhere in this package, i.e. the most
significant bit of a computational-basis index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)

SIGMA = (I2, X2, Y2, Z2)
LETTERS = "IXYZ"

# (x, z) bits of sigma_0..sigma_3
_SIGMA_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))
_BITS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PARSE_RE = re.compile(r"^\s*([+-]?)(i?)([IXYZ]+)\s*$")


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of i picked up by the single-qubit literal product P1 * P2
    if not (x1 or z1):
        return 0
    if x1 and z1:
        return z2 - x2
    if x1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    phase_exp: int = 0
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits outside the register")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # construction -----------------------------------------------------------
    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: str, phase_exp: int = 0) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(letters):
            try:
                bx, bz = _SIGMA_BITS[LETTERS.index(ch)]
            except ValueError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(letters), phase_exp, x, z)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``[+|-][i]LETTERS``, e.g. ``"-iYX"`` or ``"+XIXX"``."""
        m = _PARSE_RE.match(text)
        if m is None:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        sign, imag, letters = m.groups()
        phase = (2 if sign == "-" else 0) + (1 if imag else 0)
        return cls.from_letters(letters, phase)

    @classmethod
    def sigma(cls, j: int, n_qubits: int = 1, qubit: int = 0) -> "PauliString":
        """sigma_j (0=I, 1=X, 2=Y, 3=Z) on one qubit of an ``n_qubits`` register."""
        bx, bz = _SIGMA_BITS[j]
        return cls(n_qubits, 0, bx << qubit, bz << qubit)

    # inspection -------------------------------------------------------------
    def letter(self, q: int) -> str:
        return _BITS_TO_LETTER[(self.x_mask >> q) & 1, (self.z_mask >> q) & 1]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def sigma_index(self, q: int) -> int:
        return LETTERS.index(self.letter(q))

    @property
    def weight(self) -> int:
        return bin(self.x_mask | self.z_mask).count("1")

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.phase_exp == 0 else -1

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, 0, self.x_mask, self.z_mask)

    def with_phase(self, phase_exp: int) -> "PauliString":
        return PauliString(self.n_qubits, phase_exp, self.x_mask, self.z_mask)

    def __neg__(self) -> "PauliString":
        return self.with_phase(self.phase_exp + 2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def symplectic(self) -> int:
        """Packed binary vector ``x_mask | z_mask << n`` (phase dropped)."""
        return self.x_mask | (self.z_mask << self.n_qubits)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Letters on ``qubits`` (in that order) as a smaller string, phase kept."""
        return PauliString.from_letters("".join(self.letter(q) for q in qubits), self.phase_exp)

    def embed(self, n_qubits: int, targets: Sequence[int]) -> "PauliString":
        """Place this string on ``targets`` of a larger register."""
        if len(targets) != self.n_qubits:
            raise DimensionError(f"{len(targets)} targets for a {self.n_qubits}-qubit string")
        x = z = 0
        for i, t in enumerate(targets):
            x |= ((self.x_mask >> i) & 1) << t
            z |= ((self.z_mask >> i) & 1) << t
        return PauliString(n_qubits, self.phase_exp, x, z)

    def to_matrix(self) -> np.ndarray:
        mats = [SIGMA[self.sigma_index(q)] for q in range(self.n_qubits)]
        return (1j**self.phase_exp) * reduce(np.kron, mats)

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase_exp] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a * b`` including the phase."""
    _check_sizes(a, b)
    phase = a.phase_exp + b.phase_exp
    ax, az, bx, bz = a.x_mask, a.z_mask, b.x_mask, b.z_mask
    for q in range(a.n_qubits):
        phase += _g((ax >> q) & 1, (az >> q) & 1, (bx >> q) & 1, (bz >> q) & 1)
    return PauliString(a.n_qubits, phase, ax ^ bx, az ^ bz)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return bin((a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)).count("1") % 2 == 0


# ---------------------------------------------------------------------------
# Clifford generators


_ONE_QUBIT_IMAGES = {
    # kind: (image of X, image of Z) as (phase_exp, letter)
    "I": ((0, "X"), (0, "Z")),
    "H": ((0, "Z"), (0, "X")),
    "P": ((0, "Y"), (0, "Z")),
    "PDG": ((2, "Y"), (0, "Z")),
    "X": ((0, "X"), (2, "Z")),
    "Y": ((2, "X"), (2, "Z")),
    "Z": ((2, "X"), (0, "Z")),
}
_TWO_QUBIT_IMAGES = {
    # kind: images of XI, ZI, IX, IZ (control first for CNOT)
    "CNOT": ("XX", "ZI", "IX", "ZZ"),
    "CZ": ("XZ", "ZI", "ZX", "IZ"),
    "SWAP": ("IX", "IZ", "XI", "ZI"),
}
_INVERSE = {"P": "PDG", "PDG": "P"}

CLIFFORD_KINDS = frozenset(_ONE_QUBIT_IMAGES) | frozenset(_TWO_QUBIT_IMAGES)


@dataclass(frozen=True)
class CliffordGate:
    """A Clifford generator acting on explicit qubits.

    ``P`` is ``exp(-i pi/4 Z) = diag(e^{-i pi/4}, e^{i pi/4})``; ``PDG`` is its
    inverse.  For ``CNOT`` the first target is the control.
    """

    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if kind in _ONE_QUBIT_IMAGES:
            arity = 1
        elif kind in _TWO_QUBIT_IMAGES:
            arity = 2
        else:
            raise ValueError(f"unknown Clifford gate {self.kind!r}")
        if len(self.targets) != arity or len(set(self.targets)) != arity:
            raise ValueError(f"{kind} needs {arity} distinct targets, got {self.targets}")

    def inverse(self) -> "CliffordGate":
        return CliffordGate(_INVERSE.get(self.kind, self.kind), self.targets)

    def generator_images(self) -> list[PauliString]:
        """Images of X_t, Z_t for each target t (in target order) on the target subspace."""
        if self.kind in _ONE_QUBIT_IMAGES:
            return [PauliString.from_letters(l, ph) for ph, l in _ONE_QUBIT_IMAGES[self.kind]]
        xi, zi, ix, iz = _TWO_QUBIT_IMAGES[self.kind]
        return [PauliString.from_letters(s) for s in (xi, zi, ix, iz)]

    def matrix(self) -> np.ndarray:
        if self.kind == "CNOT":
            return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        if self.kind == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        if self.kind == "SWAP":
            return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
        if self.kind == "H":
            return (X2 + Z2) / np.sqrt(2)
        if self.kind == "P":
            return np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)])
        if self.kind == "PDG":
            return np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])
        return SIGMA[LETTERS.index(self.kind)].copy()


def conjugate(g: CliffordGate, p: PauliString) -> PauliString:
    """Return ``g p g^dagger``."""
    n = p.n_qubits
    if any(t < 0 or t >= n for t in g.targets):
        raise IndexError(f"gate targets {g.targets} outside a {n}-qubit register")
    tmask = sum(1 << t for t in g.targets)
    rest = PauliString(n, p.phase_exp, p.x_mask & ~tmask, p.z_mask & ~tmask)
    images = [im.embed(n, g.targets) for im in g.generator_images()]
    # literal Y = i X Z, so each Y on a target contributes one factor of i
    out = PauliString(n, bin(p.x_mask & p.z_mask & tmask).count("1"))
    for i, t in enumerate(g.targets):
        if (p.x_mask >> t) & 1:
            out = multiply(out, images[2 * i])
        if (p.z_mask >> t) & 1:
            out = multiply(out, images[2 * i + 1])
    return multiply(rest, out)


def product(paulis: Iterable[PauliString]) -> PauliString:
    return reduce(multiply, paulis)


# ---------------------------------------------------------------------------
# Pauli-axis observables


def _axis_of(m: np.ndarray) -> tuple[float, float, float]:
    """Bloch components of a traceless Hermitian 2x2 matrix ``n . sigma``."""
    return tuple(float(np.real(np.trace(s @ m)) / 2) for s in (X2, Y2, Z2))


def _fmt_coeff(c: float) -> str:
    return f"{c:.6g}"


def _axis_name(v: tuple[float, float, float]) -> str:
    nz = [(c, l) for c, l in zip(v, "XYZ") if abs(c) > 1e-12]
    if len(nz) == 1:
        c, l = nz[0]
        return l if c > 0 else "-" + l
    if len(nz) == 2 and abs(abs(nz[0][0]) - abs(nz[1][0])) < 1e-12 and abs(abs(nz[0][0]) - 2**-0.5) < 1e-12:
        parts = "".join(("+" if c > 0 else "-") + l for c, l in nz).lstrip("+")
        return f"({parts})/√2"
    body = "".join(("+" if c > 0 else "-") + _fmt_coeff(abs(c)) + l for c, l in nz).lstrip("+")
    return f"({body})"


@dataclass(frozen=True)
class AxisObservable:
    """A tensor product of single-qubit axis operators ``n . sigma``.

    Every measurement in a compiled program is one of these on one or two
    qubits.  Eigenvalues are +1 and -1.
    """

    axes: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        axes = tuple(tuple(float(round(c, 12)) + 0.0 for c in a) for a in self.axes)
        for a in axes:
            if abs(sum(c * c for c in a) - 1) > 1e-9:
                raise ValueError(f"axis {a} is not a unit vector")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_pauli(cls, p: PauliString) -> "AxisObservable":
        if p.is_identity:
            raise ValueError("identity is not a two-outcome observable")
        unit = {"X": (1.0, 0.0, 0.0), "Y": (0.0, 1.0, 0.0), "Z": (0.0, 0.0, 1.0)}
        axes = [unit[l] for l in p.letters if l != "I"]
        if len(axes) != p.n_qubits:
            raise ValueError(f"{p} has identity factors; restrict it to its support first")
        if p.sign < 0:
            axes[0] = tuple(-c for c in axes[0])
        return cls(tuple(axes))

    @classmethod
    def parse(cls, text: str) -> "AxisObservable":
        return cls.from_pauli(PauliString.parse(text))

    @classmethod
    def from_matrices(cls, *factors: np.ndarray) -> "AxisObservable":
        return cls(tuple(_axis_of(f) for f in factors))

    @property
    def arity(self) -> int:
        return len(self.axes)

    def factor_matrices(self) -> list[np.ndarray]:
        return [a[0] * X2 + a[1] * Y2 + a[2] * Z2 for a in self.axes]

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, self.factor_matrices())

    def __neg__(self) -> "AxisObservable":
        first = tuple(-c for c in self.axes[0])
        return AxisObservable((first,) + self.axes[1:])

    def canonical(self) -> tuple[int, "AxisObservable"]:
        """``(sign, obs)`` with ``self == sign * obs`` and obs phase-positive.

        Each factor is flipped so its first nonzero X/Y/Z coefficient is
        positive; the accumulated sign is returned separately.
        """
        sign = 1
        axes = []
        for a in self.axes:
            lead = next(c for c in a if abs(c) > 1e-12)
            if lead < 0:
                sign = -sign
                a = tuple(-c for c in a)
            axes.append(a)
        return sign, AxisObservable(tuple(axes))

    def swapped(self) -> "AxisObservable":
        return AxisObservable(tuple(reversed(self.axes)))

    def as_pauli(self) -> PauliString | None:
        """The equal :class:`PauliString` if every factor is axis-aligned."""
        letters = []
        sign = 1
        for a in self.axes:
            nz = [i for i, c in enumerate(a) if abs(c) > 1e-12]
            if len(nz) != 1:
                return None
            i = nz[0]
            sign *= 1 if a[i] > 0 else -1
            letters.append("XYZ"[i])
        return PauliString.from_letters("".join(letters), 0 if sign > 0 else 2)

    def close_to(self, other: "AxisObservable", tol: float = 1e-9) -> bool:
        return self.arity == other.arity and all(
            abs(c1 - c2) < tol for a, b in zip(self.axes, other.axes) for c1, c2 in zip(a, b)
        )

    def same_up_to_sign_and_order(self, other: "AxisObservable", tol: float = 1e-9) -> bool:
        mine = self.canonical()[1]
        for cand in (other, other.swapped()):
            if mine.close_to(cand.canonical()[1], tol):
                return True
        return False

    @property
    def name(self) -> str:
        names = [_axis_name(a) for a in self.axes]
        if all(len(n) == 1 for n in names):
            return "".join(names)
        if all(len(n.lstrip("-")) == 1 for n in names):
            # plain letters with signs: collect the signs into one prefix
            neg = sum(n.startswith("-") for n in names) % 2
            return ("-" if neg else "") + "".join(n.lstrip("-") for n in names)
        return "⊗".join(names)

    def __str__(self) -> str:
        return self.name
