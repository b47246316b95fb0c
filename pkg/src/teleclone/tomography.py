"""Parallel single-qubit Pauli tomography of clone qubits with maximum
likelihood density-matrix reconstruction on the Bloch ball."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SimulationError, TomographyError
from .simulator import NoiseModel, run_shots
from .telecloning import MessageState, TelecloningVariant, build_protocol_circuit

BASES = ("x", "y", "z")

_MAX_ITER = 10_000
_GRAD_TOL = 1e-10
_BALL_EDGE = 1.0 - 1e-12

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class TomographyRecord:
    """Per-clone 0/1 counts in the X, Y, Z bases plus the fitted state."""

    counts: dict[str, tuple[int, int]]
    shots_per_basis: int
    reconstructed: np.ndarray | None = None

    def __post_init__(self):
        for b in BASES:
            n0, n1 = self.counts[b]
            if n0 + n1 != self.shots_per_basis:
                raise SimulationError(
                    f"basis {b}: counts {n0}+{n1} != shots {self.shots_per_basis}")

    def to_json_dict(self) -> dict:
        rho = self.reconstructed
        return {
            "counts": {b: list(self.counts[b]) for b in BASES},
            "shots_per_basis": self.shots_per_basis,
            "reconstructed": None if rho is None else
            [[[float(v.real), float(v.imag)] for v in row] for row in rho],
        }


def rho_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.eye(2, dtype=complex) + r[0] * _SX + r[1] * _SY + r[2] * _SZ)


def linear_inversion(counts: dict, shots_per_basis: int):
    """r_B = (n0 - n1)/shots per basis; the raw state may be unphysical."""
    if shots_per_basis < 1:
        raise SimulationError("linear inversion needs at least one shot")
    r = np.array([(counts[b][0] - counts[b][1]) / shots_per_basis for b in BASES])
    return r, rho_from_bloch(r)


def _log_likelihood(r, n0, n1):
    rp = np.clip(r, -_BALL_EDGE, _BALL_EDGE)
    return float(np.sum(n0 * np.log1p(rp) + n1 * np.log1p(-rp)))


def _grad(r, n0, n1):
    return n0 / (1.0 + r) - n1 / (1.0 - r)


def _project_ball(r):
    nrm = np.linalg.norm(r)
    if nrm > _BALL_EDGE:
        return r * (_BALL_EDGE / nrm)
    return r


def mle_fit(counts: dict, shots_per_basis: int) -> np.ndarray:
    """Physical single-qubit state maximizing the multinomial likelihood.

    Projected gradient ascent with backtracking over the Bloch ball, started
    from the (projected) linear-inversion point. When linear inversion is
    already physical it is the interior optimum and is returned directly.
    """
    n0 = np.array([counts[b][0] for b in BASES], dtype=float)
    n1 = np.array([counts[b][1] for b in BASES], dtype=float)
    total = n0 + n1
    if shots_per_basis < 1 or np.any(total != shots_per_basis):
        raise SimulationError("counts must sum to shots_per_basis in each basis")

    r_li = (n0 - n1) / shots_per_basis
    if np.linalg.norm(r_li) <= _BALL_EDGE:
        return rho_from_bloch(r_li)

    r = _project_ball(r_li)
    best_r, best_ll = r.copy(), _log_likelihood(r, n0, n1)
    step = 1.0 / max(shots_per_basis, 1)
    for _ in range(_MAX_ITER):
        r_safe = np.clip(r, -_BALL_EDGE, _BALL_EDGE)
        g = _grad(r_safe, n0, n1)
        moved = _project_ball(r + step * g)
        if np.linalg.norm(moved - r) <= _GRAD_TOL:
            return rho_from_bloch(moved)
        ll = _log_likelihood(moved, n0, n1)
        cur = _log_likelihood(r, n0, n1)
        if ll < cur - 1e-15:
            step *= 0.5  # backtrack
            if step < 1e-18:
                return rho_from_bloch(best_r)
            continue
        r = moved
        if ll > best_ll:
            best_ll, best_r = ll, r.copy()
    raise TomographyError("MLE did not converge within the iteration cap",
                          best=rho_from_bloch(best_r))


def tomography_run(m: int, variant: TelecloningVariant, message: MessageState,
                   shots_per_basis: int, seed: int,
                   noise: NoiseModel | None = None,
                   transform=None) -> list[TomographyRecord]:
    """Measure all clones in X, Y, Z (one circuit per basis,
    shots_per_basis each) and reconstruct every clone's state via MLE.

    ``transform`` optionally rewrites each basis circuit before execution
    (layout mapping, decoupling passes); it must preserve clone bit order.
    """
    if shots_per_basis < 1:
        raise SimulationError("shots_per_basis must be >= 1")
    per_clone: list[dict] = [dict() for _ in range(m)]
    for bi, basis in enumerate(BASES):
        circuit = build_protocol_circuit(m, variant, message, tomo_basis=basis)
        if transform is not None:
            circuit = transform(circuit)
        child = int(np.random.SeedSequence((seed, bi)).generate_state(1)[0])
        counts = run_shots(circuit, shots_per_basis, seed=child, noise=noise)
        for k in range(m):
            n1 = sum(c for key, c in counts.items() if key[2 + k] == "1")
            per_clone[k][basis] = (shots_per_basis - n1, n1)
    records = []
    for k in range(m):
        rec = TomographyRecord(per_clone[k], shots_per_basis)
        rec.reconstructed = mle_fit(rec.counts, shots_per_basis)
        records.append(rec)
    return records
