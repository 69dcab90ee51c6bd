"""Compile gate circuits into programs that contain nothing but measurements.

A program is a list of blocks.  Each block is a fixed list of one- and
two-qubit measurement steps plus a classical rule for updating the Pauli
frame, the per-qubit record of the Pauli that separates the physical state
from the logical one.  Blocks:

``Gadget1Q``
    Bell pair on ``(b, c)`` by measuring XX and ZZ, then the rotated Bell
    measurement ``B_{U^dagger}`` on ``(src, b)`` as two commuting observables.
    The logical qubit moves from ``src`` to ``c``.
``CnotGadget``
    The six-measurement CNOT ancilla schedule on ``(b1, b2, c1, c2)`` followed
    by Bell measurements ``(a1, b1)`` and ``(a2, b2)``.
``RepeatUntil``
    Runs its body while a frame condition fails.  Used to steer the frame
    into a class where a non-Clifford gadget acts as the wanted gate, and in
    literal mode to teleport a qubit until its frame is the identity.

For a non-Clifford native ``U`` the gadget applies ``F U F`` to the logical
state, where ``F`` is the frame of the input qubit.  The compiler records
which frames give the wanted gate, and a ``RepeatUntil`` ping-pong teleport
re-randomizes the frame until it lands in that class.
"""
from __future__ import annotations

import ast
import itertools
import math
import operator
import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterator, Sequence

import numpy as np

from .ancilla import PROTOCOL, label_from_outcomes
from .gadgets import BELL_FROM_SIGNS, RunawayCorrectionError, bu_observables, pauli_up_to_phase, sigma_product_index
from .outcomes import OutcomeSource
from .pauli import SIGMA, AxisObservable, CliffordGate, DimensionError, PauliString, X2, Z2, conjugate
from .statevector import (
    Gate,
    StateVector,
    apply_gate,
    apply_matrix,
    apply_pauli,
    equal_up_to_global_phase,
    factor_out,
    fidelity,
    random_state,
    tensor,
)

PURPOSES = ("ancilla-prep", "teleport", "correction-absorb", "readout")
MODES = ("frame", "literal")
SET_IDS = ("S0", "S1", "S2", "S3")
CIRCUIT_GATES = ("H", "P", "CNOT", "RZ", "RX", "RY")
MAX_SEARCH_DEPTH = 6
_LETTER = "IXYZ"


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CompileError(ValueError):
    """A gate that the chosen measurement set cannot express."""


class SetValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# circuits

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text: str) -> float:
    """A float or a small arithmetic expression in ``pi``, e.g. ``-3*pi/8``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"bad angle {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle {text!r}") from exc


@dataclass
class GateCircuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            if g.kind not in CIRCUIT_GATES:
                raise ValueError(f"circuits use {', '.join(CIRCUIT_GATES)}; got {g.kind}")
            if any(t >= self.n_qubits for t in g.targets):
                raise ValueError(f"{g} does not fit in {self.n_qubits} qubits")

    @classmethod
    def parse(cls, text: str) -> "GateCircuit":
        """One gate per line, ``GATE q [q2] [theta]``; ``#`` starts a comment.

        An optional ``QUBITS n`` line fixes the register size; otherwise it is
        one more than the largest qubit index used.
        """
        gates: list[Gate] = []
        n_decl = None
        for ln, raw in enumerate(text.splitlines(), start=1):
            toks = raw.split("#", 1)[0].split()
            if not toks:
                continue
            name = toks[0].upper()
            args = toks[1:]
            if name == "QUBITS":
                if len(args) != 1 or not args[0].isdigit():
                    raise ParseError(ln, "QUBITS takes one non-negative integer")
                n_decl = int(args[0])
                continue
            if name not in CIRCUIT_GATES:
                raise ParseError(ln, f"unknown gate {toks[0]!r}")
            n_q = 2 if name == "CNOT" else 1
            n_theta = 1 if name in ("RZ", "RX", "RY") else 0
            if len(args) != n_q + n_theta:
                raise ParseError(ln, f"{name} takes {n_q} qubit(s)" + (" and an angle" if n_theta else ""))
            qubits = []
            for a in args[:n_q]:
                m = re.fullmatch(r"q?(\d+)", a)
                if not m:
                    raise ParseError(ln, f"bad qubit index {a!r}")
                qubits.append(int(m.group(1)))
            if len(set(qubits)) != len(qubits):
                raise ParseError(ln, "repeated qubit")
            theta = None
            if n_theta:
                try:
                    theta = parse_angle(args[-1])
                except ValueError as exc:
                    raise ParseError(ln, str(exc)) from None
            gates.append(Gate(name, tuple(qubits), theta))
        used = 1 + max((t for g in gates for t in g.targets), default=-1)
        n = n_decl if n_decl is not None else max(used, 1)
        if used > n:
            raise ParseError(0, f"gates use {used} qubits but QUBITS says {n}")
        return cls(n, gates)

    def to_text(self) -> str:
        lines = [f"QUBITS {self.n_qubits}"]
        for g in self.gates:
            theta = f" {g.theta!r}" if g.theta is not None else ""
            lines.append(f"{g.kind} {' '.join(map(str, g.targets))}{theta}")
        return "\n".join(lines) + "\n"

    def apply(self, s: StateVector) -> StateVector:
        if s.n_qubits != self.n_qubits:
            raise DimensionError(f"{s.n_qubits}-qubit input for a {self.n_qubits}-qubit circuit")
        for g in self.gates:
            s = apply_gate(s, g)
        return s


def random_circuit(n_qubits: int, n_gates: int, rng: np.random.Generator, kinds=("H", "P", "CNOT", "RZ"), theta=math.pi / 4) -> GateCircuit:
    kinds = [k for k in kinds if k != "CNOT" or n_qubits > 1]
    gates = []
    for _ in range(n_gates):
        k = kinds[rng.integers(len(kinds))]
        if k == "CNOT":
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate("CNOT", (int(a), int(b))))
        else:
            q = int(rng.integers(n_qubits))
            gates.append(Gate(k, (q,), theta if k in ("RZ", "RX", "RY") else None))
    return GateCircuit(n_qubits, gates)


# ---------------------------------------------------------------------------
# universal measurement sets


def _rot(axis: np.ndarray, theta: float) -> np.ndarray:
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * axis


def _is_clifford_1q(u: np.ndarray) -> bool:
    return all(pauli_up_to_phase(u @ p @ u.conj().T) is not None for p in (X2, Z2))


@dataclass(frozen=True, eq=False)
class GadgetSpec:
    """A one-qubit gate reachable by one rotated Bell measurement."""

    name: str
    u_phys: np.ndarray = field(repr=False)
    observables: tuple[AxisObservable, AxisObservable]
    clifford: bool

    def variants(self) -> list[tuple[np.ndarray, tuple[int, ...]]]:
        """``(logical gate, frames producing it)``; a Clifford spec has one variant."""
        if self.clifford:
            return [(self.u_phys, (0, 1, 2, 3))]
        out: list[tuple[np.ndarray, list[int]]] = []
        for f in range(4):
            v = SIGMA[f] @ self.u_phys @ SIGMA[f]
            for w, frames in out:
                if _same_up_to_phase(v, w):
                    frames.append(f)
                    break
            else:
                out.append((v, [f]))
        return [(v, tuple(fr)) for v, fr in out]


def _spec(name: str, u: np.ndarray) -> GadgetSpec:
    return GadgetSpec(name, u, bu_observables(u), _is_clifford_1q(u))


@dataclass(frozen=True, eq=False)
class UniversalSet:
    set_id: str
    theta: float | None
    operators: tuple[AxisObservable, ...]
    native: GadgetSpec
    u: np.ndarray | None = field(default=None, repr=False)
    prep_operators: tuple[AxisObservable, ...] = (AxisObservable.parse("Z"), AxisObservable.parse("X"))

    def contains(self, obs: AxisObservable) -> bool:
        pool = self.operators if obs.arity == 2 else self.prep_operators
        return any(obs.same_up_to_sign_and_order(m) for m in pool)

    def literal_member(self, obs: AxisObservable) -> bool:
        pool = self.operators if obs.arity == 2 else self.prep_operators
        return any(obs.canonical()[1].close_to(m.canonical()[1]) for m in pool)

    @property
    def gadgets(self) -> list[GadgetSpec]:
        """Gadgets whose two observables lie in the set: identity, H, P when XY is present, the native."""
        cands = [_spec("I", np.eye(2, dtype=complex)), _spec("H", Gate("H", (0,)).matrix), _spec("P", Gate("P", (0,)).matrix), self.native]
        return [g for g in cands if all(self.contains(o) for o in g.observables)]

    def describe(self) -> str:
        ops = ", ".join(o.name for o in self.operators)
        return f"{self.set_id} = {{{ops}}} (+ 1-qubit {', '.join(o.name for o in self.prep_operators)} for prep/readout)"


def _check_theta(set_id: str, theta: float | None) -> float:
    if theta is None:
        raise SetValidationError(f"{set_id} needs an angle theta")
    m = theta / (math.pi / 2)
    if abs(m - round(m)) < 1e-9:
        raise SetValidationError(f"{set_id} requires theta != m*pi/2 for every integer m; got theta={theta!r}")
    return float(theta)


def universal_set(set_id: str, theta: float | None = None, u=None) -> UniversalSet:
    """The measurement set S0..S3 together with its native non-Clifford gate.

    ``S0`` takes an arbitrary non-Clifford ``u``; ``S1`` and ``S2`` take an
    angle; ``S3`` is fixed.  Natives are read off from the listed operators:
    ``RX(theta)`` for S1, ``RZ(-theta)`` for S2 and ``RZ(-pi/4)`` for S3.
    """
    sid = set_id.upper()
    base = [AxisObservable.parse(s) for s in ("XX", "ZZ", "XZ")]
    xy = AxisObservable.parse("XY")
    if sid == "S0":
        if u is None:
            raise SetValidationError("S0 needs a one-qubit gate u")
        m = u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)
        if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12):
            raise SetValidationError("S0 needs a one-qubit unitary")
        if _is_clifford_1q(m):
            raise SetValidationError("S0 needs u outside the Clifford group")
        native = _spec("U", m)
        ops = base + [xy, *native.observables]
        return UniversalSet("S0", theta, tuple(ops), native, m)
    if sid == "S1":
        th = _check_theta(sid, theta)
        zaxis = AxisObservable(((0.0, math.sin(th), math.cos(th)), (0.0, 0.0, 1.0)))
        return UniversalSet("S1", th, tuple(base + [xy, zaxis]), _spec("RX", _rot(X2, th)))
    if sid == "S2":
        th = _check_theta(sid, theta)
        xaxis = AxisObservable(((math.cos(th), math.sin(th), 0.0), (1.0, 0.0, 0.0)))
        return UniversalSet("S2", th, tuple(base + [xy, xaxis]), _spec("RZ", _rot(Z2, -th)))
    if sid == "S3":
        r = 2**-0.5
        return UniversalSet("S3", None, tuple(base + [AxisObservable(((r, r, 0.0), (1.0, 0.0, 0.0)))]), _spec("RZ", _rot(Z2, -math.pi / 4)))
    raise SetValidationError(f"unknown set {set_id!r}; choose one of {', '.join(SET_IDS)}")


def set_operators(set_id: str, theta: float | None = None, u=None) -> list[AxisObservable]:
    """Canonical two-qubit observables of a universal set."""
    return [o.canonical()[1] for o in universal_set(set_id, theta, u).operators]


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class MeasurementStep:
    """Measure ``observable`` on ``targets``; the recorded outcome is ``relabel`` times the eigenvalue."""

    observable: AxisObservable
    targets: tuple[int, ...]
    purpose: str
    key: str
    relabel: int = 1

    def __post_init__(self):
        if self.observable.arity != len(self.targets):
            raise ValueError(f"{self.observable.arity}-qubit observable on {self.targets}")
        if len(self.targets) > 2:
            raise ValueError("steps act on at most two qubits")
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")

    @property
    def arity(self) -> int:
        return len(self.targets)

    def line(self) -> str:
        sign = "" if self.relabel == 1 else "  (outcome negated)"
        tgt = " ".join(f"q{t}" for t in self.targets)
        return f"{self.purpose:<18}{self.observable.name:<14}{tgt:<9}{self.key}{sign}"

    def to_dict(self) -> dict:
        return {
            "purpose": self.purpose,
            "observable": self.observable.name,
            "axes": [list(a) for a in self.observable.axes],
            "targets": list(self.targets),
            "key": self.key,
            "relabel": self.relabel,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementStep":
        obs = AxisObservable(tuple(tuple(a) for a in d["axes"]))
        return cls(obs, tuple(d["targets"]), d["purpose"], d["key"], d.get("relabel", 1))


def make_step(raw: AxisObservable, targets: Sequence[int], purpose: str, key: str, uset: UniversalSet | None = None) -> MeasurementStep:
    """Canonical step for measuring ``raw`` on ``targets``.

    The observable is made phase-positive (the sign goes into ``relabel``) and
    its qubit order is chosen to match a listed set member when possible,
    otherwise ascending target order.
    """
    sign, obs = raw.canonical()
    targets = tuple(targets)
    if obs.arity == 2:
        swapped = (obs.swapped(), targets[::-1])
        straight = (obs, targets)
        if uset is not None and uset.literal_member(obs):
            pick = straight
        elif uset is not None and uset.literal_member(obs.swapped()):
            pick = swapped
        else:
            pick = straight if targets[0] < targets[1] else swapped
        obs, targets = pick
    return MeasurementStep(obs, targets, purpose, key, sign)


_XX, _ZZ = AxisObservable.parse("XX"), AxisObservable.parse("ZZ")


class Block:
    """Base class; subclasses define ``steps``, ``run`` and ``to_dict``."""

    gate_index: int

    def steps(self) -> Iterator[MeasurementStep]:
        raise NotImplementedError

    def lines(self, indent: str = "") -> list[str]:
        return [indent + s.line() for s in self.steps()]


def _frame_prod(*idx: int) -> int:
    out = 0
    for i in idx:
        out = sigma_product_index(out, i)
    return out


@dataclass
class Gadget1Q(Block):
    src: int
    b: int
    c: int
    spec_name: str
    u_phys: np.ndarray = field(repr=False)
    frame_map: tuple[int | None, ...]
    pair: tuple[MeasurementStep, MeasurementStep]
    rotated: tuple[MeasurementStep, MeasurementStep]
    gate_index: int = -1

    def steps(self):
        yield from self.pair
        yield from self.rotated

    def run(self, ctx: "_Runtime") -> None:
        k = BELL_FROM_SIGNS[ctx.measure(self.pair[0]), ctx.measure(self.pair[1])]
        j = BELL_FROM_SIGNS[ctx.measure(self.rotated[0]), ctx.measure(self.rotated[1])]
        f_in = ctx.frame[self.src]
        mapped = self.frame_map[f_in]
        if mapped is None:
            raise RuntimeError(f"{self.spec_name} gadget on q{self.src} reached with frame {_LETTER[f_in]}")
        ctx.frame[self.c] = _frame_prod(k, j, mapped)
        ctx.frame[self.src] = ctx.frame[self.b] = 0
        ctx.add_rounds(self.gate_index, 1)

    def to_dict(self) -> dict:
        return {
            "type": "gadget-1q",
            "src": self.src,
            "b": self.b,
            "c": self.c,
            "gadget": self.spec_name,
            "u": [[[z.real, z.imag] for z in row] for row in self.u_phys],
            "frame_map": list(self.frame_map),
            "steps": [s.to_dict() for s in self.steps()],
            "gate_index": self.gate_index,
        }


@dataclass
class CnotGadget(Block):
    a: tuple[int, int]
    b: tuple[int, int]
    c: tuple[int, int]
    prep: tuple[MeasurementStep, ...]
    bell: tuple[MeasurementStep, ...]
    gate_index: int = -1

    def steps(self):
        yield from self.prep
        yield from self.bell

    def run(self, ctx: "_Runtime") -> None:
        k, l = _acn_label(tuple(ctx.measure(s) for s in self.prep))
        j1 = BELL_FROM_SIGNS[ctx.measure(self.bell[0]), ctx.measure(self.bell[1])]
        j2 = BELL_FROM_SIGNS[ctx.measure(self.bell[2]), ctx.measure(self.bell[3])]
        g1 = _frame_prod(j1, k, ctx.frame[self.a[0]])
        g2 = _frame_prod(j2, l, ctx.frame[self.a[1]])
        f1, f2 = _cnot_frame(g1, g2)
        for q in self.a + self.b:
            ctx.frame[q] = 0
        ctx.frame[self.c[0]], ctx.frame[self.c[1]] = f1, f2
        ctx.add_rounds(self.gate_index, 1)

    def to_dict(self) -> dict:
        return {
            "type": "cnot",
            "a": list(self.a),
            "b": list(self.b),
            "c": list(self.c),
            "steps": [s.to_dict() for s in self.steps()],
            "gate_index": self.gate_index,
        }


@dataclass
class RepeatUntil(Block):
    """Run ``body`` until every listed qubit's frame is in its allowed set."""

    allowed: dict[int, tuple[int, ...]]
    body: list[Block]
    gate_index: int = -1
    max_rounds: int = 1000

    def satisfied(self, frame: list[int]) -> bool:
        return all(frame[q] in ok for q, ok in self.allowed.items())

    def steps(self):
        for blk in self.body:
            yield from blk.steps()

    @property
    def condition(self) -> str:
        parts = [f"frame(q{q}) in {{{','.join(_LETTER[f] for f in ok)}}}" for q, ok in self.allowed.items()]
        return " and ".join(parts)

    def lines(self, indent: str = "") -> list[str]:
        out = [f"{indent}repeat until {self.condition}:"]
        for blk in self.body:
            out += blk.lines(indent + "    ")
        return out + [f"{indent}end"]

    def run(self, ctx: "_Runtime") -> None:
        rounds = 0
        while not self.satisfied(ctx.frame):
            if rounds >= self.max_rounds:
                raise RunawayCorrectionError(f"frame condition {self.condition} unmet after {rounds} rounds")
            for blk in self.body:
                blk.run(ctx)
            rounds += 1
        ctx.add_rounds(self.gate_index, rounds)

    def to_dict(self) -> dict:
        return {
            "type": "repeat-until",
            "allowed": {str(q): list(ok) for q, ok in self.allowed.items()},
            "body": [b.to_dict() for b in self.body],
            "gate_index": self.gate_index,
        }


def _block_from_dict(d: dict) -> Block:
    steps = [MeasurementStep.from_dict(s) for s in d.get("steps", ())]
    if d["type"] == "gadget-1q":
        u = np.array([[complex(re_, im) for re_, im in row] for row in d["u"]])
        return Gadget1Q(d["src"], d["b"], d["c"], d["gadget"], u, tuple(d["frame_map"]), tuple(steps[:2]), tuple(steps[2:]), d["gate_index"])
    if d["type"] == "cnot":
        return CnotGadget(tuple(d["a"]), tuple(d["b"]), tuple(d["c"]), tuple(steps[: len(PROTOCOL)]), tuple(steps[len(PROTOCOL) :]), d["gate_index"])
    if d["type"] == "repeat-until":
        allowed = {int(q): tuple(ok) for q, ok in d["allowed"].items()}
        return RepeatUntil(allowed, [_block_from_dict(b) for b in d["body"]], d["gate_index"])
    raise ValueError(f"unknown block type {d['type']!r}")


@lru_cache(maxsize=None)
def _acn_label(outcomes: tuple[int, ...]) -> tuple[int, int]:
    return label_from_outcomes(outcomes)


@lru_cache(maxsize=None)
def _cnot_frame(f1: int, f2: int) -> tuple[int, int]:
    p = PauliString.from_letters(_LETTER[f1] + _LETTER[f2])
    q = conjugate(CliffordGate("CNOT", (0, 1)), p)
    return q.sigma_index(0), q.sigma_index(1)


@dataclass
class MeasurementProgram:
    n_inputs: int
    n_physical: int
    blocks: list[Block]
    input_qubits: tuple[int, ...]
    output_qubits: tuple[int, ...]
    set_id: str
    mode: str
    operators: tuple[AxisObservable, ...] = ()

    def steps(self) -> list[MeasurementStep]:
        """Every step in program order (loop bodies listed once)."""
        return [s for b in self.blocks for s in b.steps()]

    @property
    def n_gadgets(self) -> int:
        return sum(isinstance(b, (Gadget1Q, CnotGadget)) for b in self.blocks)

    def static_stats(self) -> dict:
        st = self.steps()
        return {
            "steps": len(st),
            "two_qubit_steps": sum(s.arity == 2 for s in st),
            "ancillas_used": self.n_physical - self.n_inputs,
            "rounds_total": None,
            "seed": None,
        }

    def to_text(self) -> str:
        head = [
            f"# measurement program: set {self.set_id}, mode {self.mode}",
            f"# qubits: {self.n_inputs} logical, {self.n_physical} physical",
            f"# inputs  {' '.join(f'q{q}' for q in self.input_qubits)}",
            f"# outputs {' '.join(f'q{q}' for q in self.output_qubits)}",
            f"# {'purpose':<16}{'observable':<14}{'targets':<9}key",
        ]
        body = [ln for b in self.blocks for ln in b.lines()]
        return "\n".join(head + body) + "\n"

    def to_dict(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "n_physical": self.n_physical,
            "input_qubits": list(self.input_qubits),
            "output_qubits": list(self.output_qubits),
            "set": self.set_id,
            "mode": self.mode,
            "operators": [[list(a) for a in o.axes] for o in self.operators],
            "blocks": [b.to_dict() for b in self.blocks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementProgram":
        ops = tuple(AxisObservable(tuple(tuple(a) for a in o)) for o in d.get("operators", ()))
        return cls(
            d["n_inputs"],
            d["n_physical"],
            [_block_from_dict(b) for b in d["blocks"]],
            tuple(d["input_qubits"]),
            tuple(d["output_qubits"]),
            d["set"],
            d["mode"],
            ops,
        )


# ---------------------------------------------------------------------------
# compilation


class _Allocator:
    """Lowest-index-first free list over physical qubits."""

    def __init__(self, n_initial: int):
        self.size = n_initial
        self.free: list[int] = []

    def alloc(self) -> int:
        if self.free:
            self.free.sort()
            return self.free.pop(0)
        self.size += 1
        return self.size - 1

    def release(self, *qubits: int) -> None:
        self.free.extend(qubits)


def _same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    d = len(a)
    return abs(abs(np.trace(a.conj().T @ b)) / d - 1) < tol


def _phase_key(m: np.ndarray) -> tuple:
    flat = m.reshape(-1)
    i = int(np.argmax(np.abs(flat) > 1e-9))
    z = flat / (flat[i] / abs(flat[i]))
    return tuple(np.round(z.real, 8) + 0.0) + tuple(np.round(z.imag, 8) + 0.0)


def decompose_1q(g: np.ndarray, uset: UniversalSet, max_depth: int = MAX_SEARCH_DEPTH) -> list[tuple[GadgetSpec, tuple[int, ...]]] | None:
    """Shortest sequence of gadget applications equal to ``g`` up to phase.

    Each entry is ``(spec, frames)``: run ``spec`` while the input frame is
    one of ``frames``.  The identity gives an empty list.
    """
    if _same_up_to_phase(g, np.eye(2)):
        return []
    moves = []
    for spec in uset.gadgets:
        if spec.name == "I":
            continue
        for v, frames in spec.variants():
            moves.append((spec, frames, v))
    start = np.eye(2, dtype=complex)
    seen = {_phase_key(start)}
    frontier = deque([(start, [])])
    while frontier:
        cur, path = frontier.popleft()
        if len(path) >= max_depth:
            continue
        for spec, frames, v in moves:
            nxt = v @ cur
            npath = path + [(spec, frames)]
            if _same_up_to_phase(nxt, g):
                return npath
            key = _phase_key(nxt)
            if key not in seen:
                seen.add(key)
                frontier.append((nxt, npath))
    return None


def _gate_label(g: Gate) -> str:
    arg = f"({g.theta:.6g})" if g.theta is not None else ""
    return f"{g.kind}{arg} on {' '.join(f'q{t}' for t in g.targets)}"


class _Builder:
    def __init__(self, n: int, uset: UniversalSet, mode: str):
        self.n = n
        self.uset = uset
        self.mode = mode
        self.alloc = _Allocator(n)
        self.loc = list(range(n))
        self.blocks: list[Block] = []
        self.counter = itertools.count()

    def step(self, raw: AxisObservable, targets, purpose: str, key: str) -> MeasurementStep:
        return make_step(raw, targets, purpose, key, self.uset)

    def gadget(self, src: int, b: int, c: int, spec: GadgetSpec, frames, purpose: str, gi: int) -> Gadget1Q:
        tag = f"g{next(self.counter)}"
        pair = (self.step(_XX, (b, c), "ancilla-prep", f"{tag}.pair.xx"), self.step(_ZZ, (b, c), "ancilla-prep", f"{tag}.pair.zz"))
        o1, o2 = spec.observables
        rot = (self.step(o1, (src, b), purpose, f"{tag}.{spec.name}.1"), self.step(o2, (src, b), purpose, f"{tag}.{spec.name}.2"))
        if spec.clifford:
            fmap = []
            for f in range(4):
                img = pauli_up_to_phase(spec.u_phys @ SIGMA[f] @ spec.u_phys.conj().T)
                fmap.append(img.sigma_index(0))
        else:
            fmap = [f if f in frames else None for f in range(4)]
        return Gadget1Q(src, b, c, spec.name, spec.u_phys, tuple(fmap), pair, rot, gi)

    def frame_loop(self, allowed: dict[int, tuple[int, ...]], gi: int) -> RepeatUntil:
        """Teleport each listed qubit out and back until its frame is allowed.

        Loop iterations count as rounds of gate ``gi``; the teleports inside
        do not count separately.
        """
        body: list[Block] = []
        held = []
        for p in allowed:
            s, r = self.alloc.alloc(), self.alloc.alloc()
            held += [s, r]
            ident = self.uset.gadgets[0]
            body.append(self.gadget(p, s, r, ident, (0, 1, 2, 3), "correction-absorb", -1))
            body.append(self.gadget(r, s, p, ident, (0, 1, 2, 3), "correction-absorb", -1))
        self.alloc.release(*held)
        return RepeatUntil(dict(allowed), body, gi)

    def one_qubit(self, g: Gate, gi: int) -> None:
        seq = decompose_1q(g.matrix, self.uset)
        if seq is None:
            raise CompileError(f"gate {_gate_label(g)} is not expressible in {self.uset.set_id}")
        q = g.targets[0]
        for spec, frames in seq:
            p = self.loc[q]
            if len(frames) < 4:
                self.blocks.append(self.frame_loop({p: frames}, gi))
            b, c = self.alloc.alloc(), self.alloc.alloc()
            self.blocks.append(self.gadget(p, b, c, spec, frames, "teleport", gi))
            self.alloc.release(p, b)
            self.loc[q] = c
            if self.mode == "literal":
                self.blocks.append(self.frame_loop({c: (0,)}, gi))

    def cnot(self, g: Gate, gi: int) -> None:
        a = (self.loc[g.targets[0]], self.loc[g.targets[1]])
        b1, b2, c1, c2 = (self.alloc.alloc() for _ in range(4))
        tag = f"g{next(self.counter)}"
        quad = (b1, b2, c1, c2)
        prep = tuple(
            self.step(AxisObservable.from_pauli(p.restrict(t)), tuple(quad[i] for i in t), "ancilla-prep", f"{tag}.acn.{name}")
            for name, p, t in PROTOCOL
        )
        bell = (
            self.step(_XX, (a[0], b1), "teleport", f"{tag}.bell1.xx"),
            self.step(_ZZ, (a[0], b1), "teleport", f"{tag}.bell1.zz"),
            self.step(_XX, (a[1], b2), "teleport", f"{tag}.bell2.xx"),
            self.step(_ZZ, (a[1], b2), "teleport", f"{tag}.bell2.zz"),
        )
        self.blocks.append(CnotGadget(a, (b1, b2), (c1, c2), prep, bell, gi))
        self.alloc.release(a[0], a[1], b1, b2)
        self.loc[g.targets[0]], self.loc[g.targets[1]] = c1, c2
        if self.mode == "literal":
            self.blocks.append(self.frame_loop({c1: (0,), c2: (0,)}, gi))


def compile_circuit(c: GateCircuit, uset: UniversalSet, mode: str = "frame") -> MeasurementProgram:
    """Measurement-only program for ``c`` over ``uset``.

    ``mode="frame"`` keeps Pauli corrections in the classical frame;
    ``mode="literal"`` teleports each gadget output until its frame is the
    identity, so the physical state equals the logical one after every gate.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    bld = _Builder(c.n_qubits, uset, mode)
    for gi, g in enumerate(c.gates):
        if g.kind == "CNOT":
            bld.cnot(g, gi)
        else:
            bld.one_qubit(g, gi)
    prog = MeasurementProgram(
        c.n_qubits, bld.alloc.size, bld.blocks, tuple(range(c.n_qubits)), tuple(bld.loc), uset.set_id, mode, uset.operators
    )
    check_closure(prog, uset)
    return prog


compile = compile_circuit  # noqa: A001  (the natural public name)


def check_closure(p: MeasurementProgram, uset: UniversalSet) -> None:
    for s in p.steps():
        if s.arity > 2:
            raise CompileError(f"step {s.key} touches {s.arity} qubits")
        if not uset.contains(s.observable):
            raise CompileError(f"step {s.key} measures {s.observable.name}, which is outside {uset.set_id}")


# ---------------------------------------------------------------------------
# simulation


class _Runtime:
    def __init__(self, state: StateVector, src: OutcomeSource, n_gates: int):
        self.vec = state.amplitudes.copy()
        self.n = state.n_qubits
        self.frame = [0] * self.n
        self.src = src
        self.log: list[tuple[str, int]] = []
        self.steps = 0
        self.two_qubit_steps = 0
        self.rounds = [0] * n_gates

    def add_rounds(self, gi: int, r: int) -> None:
        if gi >= 0:
            self.rounds[gi] += r

    def measure(self, step: MeasurementStep) -> int:
        obs = step.observable
        ov = apply_matrix(StateVector(self.vec), obs.matrix(), step.targets).amplitudes
        plus = (self.vec + ov) / 2
        minus = (self.vec - ov) / 2
        pp = float(np.vdot(plus, plus).real)
        pm = float(np.vdot(minus, minus).real)
        k = self.src.choose((1, -1), (pp, pm))
        out, vec, pr = ((1, plus, pp), (-1, minus, pm))[k]
        self.vec = vec / math.sqrt(pr)
        self.steps += 1
        self.two_qubit_steps += step.arity == 2
        value = step.relabel * out
        self.log.append((step.key, value))
        return value


@dataclass
class SimulationResult:
    state: StateVector
    log: list[tuple[str, int]]
    stats: dict
    frame: PauliString


def simulate(
    p: MeasurementProgram,
    input_state: StateVector,
    rng=None,
    forced: Sequence[int] | None = None,
    seed: int | None = None,
) -> SimulationResult:
    """Execute ``p`` on ``input_state`` and return the logical output.

    The input goes on the program's input qubits, everything else starts in
    ``|0>``.  Outcomes come from ``rng``/``forced``, or from a generator seeded
    with ``seed``.  The final frame is applied classically to interpret the
    output and never appears as a step.
    """
    if input_state.n_qubits != p.n_inputs:
        raise DimensionError(f"program takes {p.n_inputs} qubits, input has {input_state.n_qubits}")
    if seed is not None and rng is None:
        rng = np.random.default_rng(seed)
    src = OutcomeSource.wrap(rng, forced)
    extra = p.n_physical - p.n_inputs
    full = input_state if extra == 0 else tensor(input_state, StateVector(np.eye(2**extra, dtype=complex)[0]))
    # place inputs on their declared physical qubits
    order = list(p.input_qubits) + [q for q in range(p.n_physical) if q not in p.input_qubits]
    inv = [order.index(q) for q in range(p.n_physical)]
    full = StateVector(np.transpose(full.tensor(), inv).reshape(-1)) if order != list(range(p.n_physical)) else full
    n_gates = 1 + max((b.gate_index for b in p.blocks), default=-1)
    ctx = _Runtime(full, src, n_gates)
    for blk in p.blocks:
        blk.run(ctx)
    letters = "".join(_LETTER[f] for f in ctx.frame)
    frame = PauliString.from_letters(letters)
    corrected = apply_pauli(StateVector(ctx.vec), frame)
    out = factor_out(corrected, list(p.output_qubits))
    out_frame = PauliString.from_letters("".join(letters[q] for q in p.output_qubits)) if p.n_inputs else PauliString.identity(1)
    stats = {
        "steps": ctx.steps,
        "two_qubit_steps": ctx.two_qubit_steps,
        "ancillas_used": p.n_physical - p.n_inputs,
        "rounds_total": int(sum(ctx.rounds)),
        "rounds_per_gate": list(ctx.rounds),
        "seed": seed,
    }
    return SimulationResult(out, ctx.log, stats, out_frame)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    trials: int
    passed: int
    min_fidelity: float
    failures: list[dict]
    mean_rounds: float
    max_arity: int
    unitary_steps: int = 0

    @property
    def ok(self) -> bool:
        return self.passed == self.trials and self.max_arity <= 2 and self.unitary_steps == 0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "trials": self.trials,
            "passed": self.passed,
            "min_fidelity": self.min_fidelity,
            "mean_rounds": self.mean_rounds,
            "max_arity": self.max_arity,
            "unitary_steps": self.unitary_steps,
            "failures": self.failures,
        }


def verify_equivalence(c: GateCircuit, p: MeasurementProgram, trials: int = 10, seed: int = 0, tol: float = 1e-9) -> VerificationReport:
    """Simulate ``p`` on ``trials`` Haar-random inputs and compare with ``c``.

    Trial ``t`` draws its input from a generator seeded with ``(seed, t)`` and
    its outcomes from a generator seeded with ``seed + t``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fids, rounds, failures = [], [], []
    for t in range(trials):
        psi = random_state(c.n_qubits, np.random.default_rng((seed, t)))
        res = simulate(p, psi, seed=seed + t)
        f = fidelity(res.state, c.apply(psi))
        fids.append(f)
        rounds.append(res.stats["rounds_total"])
        if f <= 1 - tol:
            failures.append({"trial": t, "seed": seed + t, "fidelity": f})
    steps = p.steps()
    return VerificationReport(
        trials,
        trials - len(failures),
        float(min(fids)),
        failures,
        float(np.mean(rounds)),
        max((s.arity for s in steps), default=0),
        sum(not isinstance(s, MeasurementStep) for s in steps),
    )


def corrupt_program(p: MeasurementProgram) -> MeasurementProgram:
    """Copy of ``p`` with the first gadget measurement's outcome sign flipped.

    A negative control: the flipped sign silently mislabels the Bell outcome.
    """
    d = p.to_dict()

    def flip(blocks) -> bool:
        for b in blocks:
            if b["type"] == "repeat-until":
                if flip(b["body"]):
                    return True
                continue
            for s in b["steps"]:
                if s["purpose"] == "teleport":
                    s["relabel"] = -s["relabel"]
                    return True
        return False

    if not flip(d["blocks"]):
        raise ValueError("program has no gadget measurement to corrupt")
    return MeasurementProgram.from_dict(d)


# ---------------------------------------------------------------------------
# preparation and readout fragments


def prepare_zero_and_plus(schedule: str, qubits: Sequence[int] | None = None) -> list[MeasurementStep]:
    """Z measurement for each ``0`` and X measurement for each ``+`` in ``schedule``.

    An outcome of -1 leaves ``|1>`` (resp. ``|->``), which is ``|0>`` (``|+>``)
    with an X (Z) frame.
    """
    qubits = list(range(len(schedule))) if qubits is None else list(qubits)
    if len(qubits) != len(schedule):
        raise ValueError("one qubit per schedule entry")
    obs = {"0": AxisObservable.parse("Z"), "+": AxisObservable.parse("X")}
    try:
        return [make_step(obs[ch], (q,), "ancilla-prep", f"prep.{ch}.q{q}") for ch, q in zip(schedule, qubits)]
    except KeyError as exc:
        raise ValueError(f"schedule entries are '0' or '+', got {exc.args[0]!r}") from None


def prep_frame(schedule: str, outcomes: Sequence[int]) -> list[int]:
    """Frame (sigma index per qubit) left by :func:`prepare_zero_and_plus`."""
    return [0 if o == 1 else (1 if ch == "0" else 3) for ch, o in zip(schedule, outcomes)]


def parity_zero_fragment(qubits: Sequence[int] = (0, 1, 2)) -> list[MeasurementStep]:
    """ZZ on each pair of three qubits.

    On a general input the all-even branch is the projection onto
    ``span{|000>, |111>}``, not ``|000>`` alone; run it with
    :func:`run_steps` to see the state it actually leaves.
    """
    a, b, c = qubits
    return [make_step(_ZZ, pair, "ancilla-prep", f"parity.q{pair[0]}q{pair[1]}") for pair in ((a, b), (a, c), (b, c))]


def run_steps(steps: Sequence[MeasurementStep], state: StateVector, rng=None, forced: Sequence[int] | None = None) -> tuple[list[int], StateVector]:
    ctx = _Runtime(state, OutcomeSource.wrap(rng, forced), 0)
    outs = [ctx.measure(s) for s in steps]
    return outs, StateVector(ctx.vec)


def readout(state: StateVector, data: int, ancilla: int, frame: int = 0, rng=None, forced: Sequence[int] | None = None) -> tuple[int, StateVector]:
    """Read ``data`` in the computational basis through a ZZ measurement.

    ``ancilla`` is first set by a Z measurement; its outcome and the X part of
    the data qubit's frame ``frame`` (a sigma index) fix the reported bit.
    """
    steps = [
        make_step(AxisObservable.parse("Z"), (ancilla,), "readout", "readout.z"),
        make_step(_ZZ, (data, ancilla), "readout", "readout.zz"),
    ]
    (oz, ozz), post = run_steps(steps, state, rng, forced)
    physical_bit = (1 - oz * ozz) // 2
    return physical_bit ^ (1 if frame in (1, 2) else 0), post


__all__ = [
    "CompileError",
    "GateCircuit",
    "MeasurementProgram",
    "MeasurementStep",
    "ParseError",
    "SetValidationError",
    "UniversalSet",
    "compile_circuit",
    "corrupt_program",
    "decompose_1q",
    "parity_zero_fragment",
    "prepare_zero_and_plus",
    "random_circuit",
    "readout",
    "run_steps",
    "set_operators",
    "simulate",
    "universal_set",
    "verify_equivalence",
]
