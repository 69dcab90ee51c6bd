"""Prepare the four-qubit CNOT ancilla with one- and two-qubit measurements only."""
from collections import Counter

import numpy as np

from measonly.ancilla import PROTOCOL, REFERENCE_OUTCOMES, classify_branch, enumerate_branches, prepare_acn

print("measurement schedule:", ", ".join(name for name, _, _ in PROTOCOL))

ref = prepare_acn(forced=REFERENCE_OUTCOMES)
nonzero = {f"{i:04b}": round(float(abs(a)), 6) for i, a in enumerate(ref.state.amplitudes) if abs(a) > 1e-12}
print("reference branch amplitudes:", nonzero, "label", ref.pauli_label)

for backend in ("statevector", "stabilizer"):
    branches = enumerate_branches(backend)
    labels = Counter(b.pauli_label for b in branches)
    ok = all(classify_branch(b.state) == b.pauli_label for b in branches)
    print(f"{backend}: {len(branches)} branches, {len(labels)} distinct Pauli labels, all classified: {ok}")

sampled = prepare_acn(rng=np.random.default_rng(3), backend="stabilizer")
print("one sampled run:", sampled.outcome_record, "->", sampled.pauli_label)
print("its stabilizer generators:", sampled.tableau.strings)
