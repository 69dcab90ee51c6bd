"""Monte-Carlo round counts for the gate gadgets.

Trial ``i`` draws both its input state and its measurement outcomes from a
generator seeded with ``seed + i``, so any trial can be replayed alone and the
aggregate does not depend on execution order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .gadgets import indirect_gate_1q, indirect_gate_2q, indirect_gate_bu
from .statevector import Gate, random_state

GADGETS = ("1q", "1q-shifted", "2q", "bu")


def controlled_phase(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(complex)


def default_gate(gadget: str) -> np.ndarray:
    """``RZ(pi/4)`` for the one-qubit gadgets, controlled ``e^{i pi/4}`` phase for 2q."""
    if gadget == "2q":
        return controlled_phase(math.pi / 4)
    return Gate("RZ", (0,), math.pi / 4).matrix


@dataclass
class RoundStats:
    gadget: str
    trials: int
    seed: int
    mean: float
    stderr: float
    min: int
    max: int
    one_round_fraction: float

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_se * self.stderr

    def to_dict(self) -> dict:
        return asdict(self)


def run_trial(gadget: str, seed: int, gate: np.ndarray | None = None) -> int:
    """Rounds used by one literal-mode run of ``gadget``."""
    u = default_gate(gadget) if gate is None else gate
    rng = np.random.default_rng(seed)
    if gadget == "2q":
        psi = random_state(2, rng)
        return indirect_gate_2q(psi, u, rng=rng, pauli_shortcut=False).rounds
    psi = random_state(1, rng)
    if gadget == "1q":
        return indirect_gate_1q(psi, u, mode="literal", rng=rng).rounds
    if gadget == "1q-shifted":
        return indirect_gate_1q(psi, u, mode="shifted", rng=rng).rounds
    if gadget == "bu":
        return indirect_gate_bu(psi, u, rng=rng).rounds
    raise ValueError(f"gadget must be one of {GADGETS}")


def round_statistics(gadget: str, trials: int, seed: int = 0, gate: np.ndarray | None = None) -> RoundStats:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rounds = np.array([run_trial(gadget, seed + i, gate) for i in range(trials)])
    se = float(rounds.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RoundStats(
        gadget,
        trials,
        seed,
        float(rounds.mean()),
        se,
        int(rounds.min()),
        int(rounds.max()),
        float(np.mean(rounds == 1)),
    )
