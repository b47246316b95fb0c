"""Split & cyclic shift and Dicke state unitaries on nearest-neighbour lines.

The split gate on m qubits sends |1^i 0^(m-i)> to
sqrt((m-i)/m)|1^i 0^(m-i)> + sqrt(i/m)|1^(i-1) 0^(m-i) 1> with real
nonnegative amplitudes; composing them over shrinking prefixes yields the
unitary mapping |1^i 0^(M-i)> to the weight-i Dicke state. Every block acts
on at most three consecutive qubits of the register, so circuits stay
routable on a hardware line without SWAPs.
"""

from __future__ import annotations

import math

from .circuit import Circuit, Instruction, cx, ry, x
from .exceptions import CircuitError


def cry_instructions(theta: float, control: int, target: int) -> list[Instruction]:
    """Controlled RY via two CX; interacts only on (control, target)."""
    return [ry(theta / 2, target), cx(control, target),
            ry(-theta / 2, target), cx(control, target)]


def ccry_instructions(theta: float, ctrl_a: int, ctrl_b: int,
                      target: int) -> list[Instruction]:
    """Doubly-controlled RY touching only (ctrl_a,target) and (ctrl_b,target).

    Valid because X RY(-t) X = RY(t): the ctrl_b CX pair flips the sign of
    the second half-rotation exactly when ctrl_b is set.
    """
    return (cry_instructions(theta / 2, ctrl_a, target)
            + [cx(ctrl_b, target)]
            + cry_instructions(-theta / 2, ctrl_a, target)
            + [cx(ctrl_b, target)])


def _split_block(b: int, m: int, offset) -> list[Instruction]:
    """Boundary split at qubit b: Givens on (b, b+1), frozen when b+2 is set.

    Moves the topmost excitation one slot down with amplitude sqrt((b+1)/m),
    keeping sqrt((m-b-1)/m) in place. The b+2 anti-control stops the block
    from re-firing on branches already split further up the register.
    """
    theta = 2 * math.acos(math.sqrt((m - b - 1) / m))
    lo, hi = offset[b], offset[b + 1]
    if b == m - 2:
        return [cx(hi, lo)] + cry_instructions(theta, lo, hi) + [cx(hi, lo)]
    anti = offset[b + 2]
    return ([cx(hi, lo), x(anti)]
            + ccry_instructions(theta, lo, anti, hi)
            + [x(anti), cx(hi, lo)])


def _hop_block(p: int, offset) -> list[Instruction]:
    """Move a lone excitation from qubit p to p+1 when qubit p-1 is clear."""
    lo, hi, anti = offset[p], offset[p + 1], offset[p - 1]
    return ([cx(lo, hi), x(anti)]
            + ccry_instructions(-math.pi, hi, anti, lo)
            + [x(anti), cx(lo, hi)])


def scs_instructions(qubits) -> list[Instruction]:
    """Split & cyclic shift over an ordered qubit register (receiver last)."""
    qubits = list(qubits)
    m = len(qubits)
    if m < 2:
        raise CircuitError("split & cyclic shift needs at least 2 qubits")
    ops: list[Instruction] = []
    for b in range(m - 2, -1, -1):
        ops += _split_block(b, m, qubits)
    for p in range(1, m - 1):
        ops += _hop_block(p, qubits)
    return ops


def dsu_instructions(qubits) -> list[Instruction]:
    """Dicke state unitary: split blocks over shrinking register prefixes."""
    qubits = list(qubits)
    ops: list[Instruction] = []
    for mm in range(len(qubits), 1, -1):
        ops += scs_instructions(qubits[:mm])
    return ops


def build_scs(m: int) -> Circuit:
    """Split & cyclic shift circuit on m >= 2 qubits."""
    if m < 2:
        raise CircuitError(f"split & cyclic shift needs m >= 2, got {m}")
    return Circuit(m, 0, tuple(scs_instructions(range(m))))


def build_dsu(m: int) -> Circuit:
    """Unary-to-Dicke circuit on m >= 1 qubits (identity for m = 1)."""
    if m < 1:
        raise CircuitError(f"Dicke unitary needs m >= 1, got {m}")
    return Circuit(m, 0, tuple(dsu_instructions(range(m))))
