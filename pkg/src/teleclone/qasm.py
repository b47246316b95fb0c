"""OpenQASM 3 subset exporter for interchange. Import is not supported."""

from __future__ import annotations

from .circuit import Circuit, Instruction, validate
from .exceptions import CircuitError

_EXPORTABLE = {"ry", "rz", "h", "x", "z", "sx", "cx", "barrier", "measure", "cond"}


def _gate_line(ins: Instruction) -> str:
    qs = ", ".join(f"q[{q}]" for q in ins.qubits)
    if ins.gate in ("ry", "rz"):
        return f"{ins.gate}({ins.angle!r}) {qs};"
    return f"{ins.gate} {qs};"


def export_qasm(circuit: Circuit) -> str:
    """Render the circuit as OpenQASM 3 text with `if (c[k] == v) { ... }`
    blocks for feed-forward. Output is deterministic for a given circuit."""
    errors = validate(circuit)
    if errors:
        raise CircuitError("; ".join(errors))
    lines = [
        "OPENQASM 3.0;",
        'include "stdgates.inc";',
        f"qubit[{circuit.num_qubits}] q;",
        f"bit[{circuit.num_clbits}] c;",
    ]
    for ins in circuit.instructions:
        if ins.gate not in _EXPORTABLE:
            raise CircuitError(f"gate '{ins.gate}' outside exportable set")
        if ins.gate == "barrier":
            if ins.qubits:
                lines.append(_gate_line(ins))
            else:
                lines.append("barrier q;")
        elif ins.gate == "measure":
            lines.append(f"c[{ins.clbit}] = measure q[{ins.qubits[0]}];")
        elif ins.gate == "cond":
            lines.append(f"if (c[{ins.cond_clbit}] == {ins.cond_value}) {{")
            for sub in ins.body:
                lines.append("  " + _gate_line(sub))
            lines.append("}")
        else:
            lines.append(_gate_line(ins))
    return "\n".join(lines) + "\n"
