"""Command-line front end.

Exit codes: 0 success, 2 circuit parse error, 3 semantic error (bad set or a
gate the set cannot express), 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .ancilla import acn_state, all_outcome_records, classify_branch, labelled_acn, prepare_acn
from .compiler import (
    CompileError,
    GateCircuit,
    ParseError,
    SetValidationError,
    compile_circuit,
    corrupt_program,
    simulate,
    universal_set,
    verify_equivalence,
)
from .outcomes import ImpossibleOutcomeError
from .stats import GADGETS, round_statistics
from .statevector import Gate, overlap, prepare_basis

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_VERIFY = 0, 2, 3, 4


def _forced_list(text: str | None) -> list[int] | None:
    if not text:
        return None
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            vals.append(1)
        elif tok in ("-", "-1"):
            vals.append(-1)
        else:
            raise argparse.ArgumentTypeError(f"forced outcomes are +1/-1, got {tok!r}")
    return vals


def _uset(args):
    u = Gate("RY", (0,), args.theta).matrix if args.set.upper() == "S0" and args.theta is not None else None
    return universal_set(args.set, args.theta, u)


def _load_circuit(path: str) -> GateCircuit:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return GateCircuit.parse(text)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_compile(args) -> int:
    circ = _load_circuit(args.circuit)
    prog = compile_circuit(circ, _uset(args), args.mode)
    stats = prog.static_stats()
    if args.json:
        _emit(args, _dump({"program": prog.to_dict(), "stats": stats}))
    else:
        _emit(args, prog.to_text() + "# stats " + json.dumps(stats, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    circ = _load_circuit(args.circuit)
    prog = compile_circuit(circ, _uset(args), args.mode)
    bits = args.input or "0" * circ.n_qubits
    if len(bits) != circ.n_qubits or set(bits) - {"0", "1"}:
        print(f"error: --input needs {circ.n_qubits} bits", file=sys.stderr)
        return EXIT_SEMANTIC
    res = simulate(prog, prepare_basis(circ.n_qubits, bits), rng=np.random.default_rng(args.seed), forced=_forced_list(args.force))
    res.stats["seed"] = args.seed
    out = res.state.canonical_phase()
    record = {
        "output": [[i, re, im] for i, re, im in out.to_records(1e-12)],
        "log": [[k, v] for k, v in res.log],
        "stats": res.stats,
    }
    if args.json:
        _emit(args, _dump(record))
    else:
        lines = ["# output amplitudes (basis index, re, im)"]
        lines += [f"{i:0{circ.n_qubits}b}  {re:+.12f} {im:+.12f}" for i, re, im in record["output"]]
        lines.append("# outcome log")
        lines += [f"{k} {v:+d}" for k, v in res.log]
        lines.append("# stats " + json.dumps(res.stats, sort_keys=True))
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    circ = _load_circuit(args.circuit)
    prog = compile_circuit(circ, _uset(args), args.mode)
    if args.inject_fault:
        prog = corrupt_program(prog)
    rep = verify_equivalence(circ, prog, args.trials, args.seed)
    d = rep.to_dict()
    if args.json:
        _emit(args, _dump(d))
    else:
        verdict = "PASS" if rep.ok else "FAIL"
        text = (
            f"{verdict}: {rep.passed}/{rep.trials} trials match, min fidelity {rep.min_fidelity:.12f}, "
            f"mean rounds {rep.mean_rounds:.3f}, max arity {rep.max_arity}\n"
        )
        text += "".join(f"  trial {f['trial']} (seed {f['seed']}): fidelity {f['fidelity']:.6f}\n" for f in rep.failures)
        _emit(args, text)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_stats(args) -> int:
    st = round_statistics(args.gadget, args.trials, args.seed)
    if args.json:
        _emit(args, _dump(st.to_dict()))
    else:
        _emit(
            args,
            f"{st.gadget}: mean rounds {st.mean:.4f} ± {st.stderr:.4f} (SE) over {st.trials} trials, "
            f"seed {st.seed}, range [{st.min}, {st.max}], one-round fraction {st.one_round_fraction:.4f}\n",
        )
    return EXIT_OK


def cmd_acn(args) -> int:
    forced = _forced_list(args.force)
    records = [tuple(forced)] if forced else all_outcome_records()
    rows = []
    for rec in records:
        br = prepare_acn(forced=rec, backend=args.backend)
        found = classify_branch(br.state)
        ov = abs(overlap(labelled_acn(*br.pauli_label), br.state))
        rows.append(
            {
                "outcomes": list(rec),
                "label": list(br.pauli_label),
                "classified": list(found) if found else None,
                "overlap": round(ov, 12),
                "overlap_with_acn": round(abs(overlap(acn_state(), br.state)), 12),
            }
        )
    if args.json:
        _emit(args, _dump({"backend": args.backend, "branches": rows}))
    else:
        lines = ["# X0 Z1 XX23 ZZ23 P±12 ZZ02 -> (k, l)  overlap with (σk⊗σl⊗I⊗I)|a_cn>  overlap with |a_cn>"]
        for r in rows:
            outs = " ".join(f"{o:+d}" for o in r["outcomes"])
            lines.append(f"{outs} -> ({r['label'][0]}, {r['label'][1]})  {r['overlap']:.12f}  {r['overlap_with_acn']:.12f}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="measonly", description="Measurement-only quantum computation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, circuit=True):
        if circuit:
            p.add_argument("circuit", help="circuit file ('-' for stdin)")
            p.add_argument("--set", default="s3", type=str.lower, choices=["s0", "s1", "s2", "s3"])
            p.add_argument("--theta", type=float, default=None, help="angle for S1/S2; RY angle of the S0 gate")
            p.add_argument("--mode", default="frame", choices=["frame", "literal"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("compile", help="compile a circuit to a measurement program")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="compile and run on a basis-state input")
    common(p)
    p.add_argument("--input", default=None, help="input bitstring, default all zeros")
    p.add_argument("--force", default=None, help="comma list of forced +1/-1 outcomes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compile and check against the circuit unitary")
    common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--inject-fault", action="store_true", help="flip one outcome sign (negative control)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="Monte-Carlo round counts of a gadget")
    common(p, circuit=False)
    p.add_argument("--gadget", default="1q", choices=GADGETS)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("acn", help="branch table of the CNOT ancilla preparation")
    common(p, circuit=False)
    p.add_argument("--backend", default="statevector", choices=["statevector", "stabilizer"])
    p.add_argument("--force", default=None, help="six comma-separated outcomes; prints that branch only")
    p.set_defaults(func=cmd_acn)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_SEMANTIC
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CompileError, SetValidationError, ImpossibleOutcomeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
