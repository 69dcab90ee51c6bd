"""Teleport a random qubit through a Bell pair and check every measurement branch."""
import numpy as np

from measonly.gadgets import indirect_gate_1q, indirect_gate_bu, teleport
from measonly.statevector import Gate, factor_out, fidelity, prepare_bell, random_state, tensor

rng = np.random.default_rng(7)
psi = random_state(1, rng)
print("input amplitudes:", np.round(psi.amplitudes, 4))

register = tensor(psi, prepare_bell(0))
for j in range(4):
    tr = teleport(register, 0, (1, 2), forced=[j])
    out = factor_out(tr.final_state, [2])
    print(f"Bell outcome {j}: fidelity after sigma_{j} correction = {fidelity(out, psi):.12f}")

# A non-Clifford gate by gate teleportation: literal retries vs a single rotated Bell measurement.
t_gate = Gate("RZ", (0,), np.pi / 4).matrix
literal = indirect_gate_1q(psi, t_gate, mode="literal", rng=rng)
rotated = indirect_gate_bu(psi, t_gate, rng=rng)
target = t_gate @ psi.amplitudes
print(f"literal gadget: {literal.rounds} round(s), outcomes {literal.outcomes}")
print(f"rotated-basis gadget: {rotated.rounds} round, outcome {rotated.outcomes}")
for name, tr in (("literal", literal), ("rotated", rotated)):
    print(f"{name} output fidelity: {abs(np.vdot(target, tr.final_state.amplitudes)) ** 2:.12f}")
