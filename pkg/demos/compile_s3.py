"""Compile a small circuit to a measurement-only program over the set {XX, ZZ, XZ, (X+Y)/sqrt2 X}."""
from measonly.compiler import GateCircuit, compile_circuit, universal_set, verify_equivalence

circuit = GateCircuit.parse(
    """
    H 0
    CNOT 0 1
    RZ 1 pi/4
    P 0
    """
)
s3 = universal_set("S3")
print(s3.describe())

for mode in ("frame", "literal"):
    program = compile_circuit(circuit, s3, mode)
    print(f"\n--- mode {mode}: {program.static_stats()}")
    if mode == "frame":
        print(program.to_text())
    report = verify_equivalence(circuit, program, trials=20, seed=1)
    print(f"verified on {report.trials} random inputs: ok={report.ok}, min fidelity {report.min_fidelity:.12f}, "
          f"mean rounds {report.mean_rounds:.2f}, max arity {report.max_arity}")
