"""Linear inversion, MLE reconstruction, and the sampled tomography loop."""

import math

import numpy as np
import pytest

from teleclone import (MessageState, TelecloningVariant, exact_clone_states,
                       build_protocol_circuit, linear_inversion, mle_fit,
                       run_shots, tomography_run)
from teleclone.tomography import TomographyRecord, rho_from_bloch
from teleclone.exceptions import SimulationError

from .oracles import mle_grid_oracle, trace_distance

NOA = TelecloningVariant.NO_ANCILLA


def _counts(x, y, z, shots):
    return {"x": x, "y": y, "z": z}


def test_linear_inversion_pure_z():
    shots = 100
    counts = _counts((50, 50), (50, 50), (100, 0), shots)
    r, rho = linear_inversion(counts, shots)
    np.testing.assert_allclose(r, [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-12)


def test_linear_inversion_maximally_mixed():
    counts = _counts((50, 50), (50, 50), (50, 50), 100)
    r, rho = linear_inversion(counts, 100)
    np.testing.assert_allclose(r, [0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-12)


def test_linear_inversion_can_be_unphysical():
    counts = _counts((100, 0), (100, 0), (100, 0), 100)
    r, _ = linear_inversion(counts, 100)
    assert abs(np.linalg.norm(r) - math.sqrt(3)) < 1e-12


def test_mle_interior_equals_linear_inversion():
    rng = np.random.default_rng(21)
    for _ in range(200):
        shots = 1000
        # draw counts from a random physical state so LI is usually interior
        r = rng.normal(size=3)
        r = r / np.linalg.norm(r) * rng.uniform(0, 0.9)
        counts = {}
        for b, comp in zip(("x", "y", "z"), r):
            n0 = int(rng.binomial(shots, (1 + comp) / 2))
            counts[b] = (n0, shots - n0)
        r_li, rho_li = linear_inversion(counts, shots)
        rho = mle_fit(counts, shots)
        if np.linalg.norm(r_li) <= 1.0:
            assert trace_distance(rho, rho_li) < 1e-6


def test_mle_all_zero_counts_boundary():
    shots = 100
    counts = _counts((100, 0), (100, 0), (100, 0), shots)
    rho = mle_fit(counts, shots)
    from teleclone import bloch_vector
    r = bloch_vector(rho)
    want = np.ones(3) / math.sqrt(3)
    assert abs(np.linalg.norm(r) - 1.0) < 1e-6
    np.testing.assert_allclose(r, want, atol=1e-3)


def test_mle_uniform_counts_is_maximally_mixed():
    rho = mle_fit(_counts((50, 50), (50, 50), (50, 50), 100), 100)
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-9)


def test_mle_matches_grid_oracle_boundary_cases():
    shots = 200
    cases = [
        _counts((200, 0), (200, 0), (200, 0), shots),
        _counts((190, 10), (180, 20), (200, 0), shots),
        _counts((10, 190), (170, 30), (195, 5), shots),
        _counts((200, 0), (100, 100), (150, 50), shots),
    ]
    for counts in cases:
        rho = mle_fit(counts, shots)
        r_star = mle_grid_oracle(counts, shots, resolution=1e-3)
        dist = trace_distance(rho, rho_from_bloch(np.clip(r_star, -1, 1)))
        assert dist <= 2e-3, (counts, dist)


def test_mle_always_physical_fuzz():
    rng = np.random.default_rng(17)
    for _ in range(10_000):
        shots = int(rng.integers(1, 400))
        counts = {}
        for b in ("x", "y", "z"):
            n0 = int(rng.integers(0, shots + 1))
            counts[b] = (n0, shots - n0)
        rho = mle_fit(counts, shots)
        vals = np.linalg.eigvalsh(rho)
        assert vals.min() >= -1e-15
        assert abs(np.trace(rho).real - 1.0) < 1e-12


def test_record_requires_consistent_counts():
    with pytest.raises(SimulationError):
        TomographyRecord({"x": (5, 4), "y": (5, 5), "z": (5, 5)}, 10)


def test_mle_nonconvergence_carries_best_iterate(monkeypatch):
    import teleclone.tomography as tomo
    from teleclone.exceptions import TomographyError
    monkeypatch.setattr(tomo, "_MAX_ITER", 1)
    with pytest.raises(TomographyError) as err:
        tomo.mle_fit(_counts((200, 0), (150, 50), (190, 10), 200), 200)
    best = err.value.best
    assert best is not None
    vals = np.linalg.eigvalsh(best)
    assert vals.min() >= -1e-12 and abs(np.trace(best).real - 1) < 1e-12


def test_tomography_run_shapes_and_samples():
    recs = tomography_run(2, NOA, MessageState(0.4, 0.9), shots_per_basis=500,
                          seed=13)
    assert len(recs) == 2
    for rec in recs:
        assert sum(sum(rec.counts[b]) for b in ("x", "y", "z")) == 1500
        assert rec.reconstructed is not None


def test_tomography_single_shot_degenerate_but_physical():
    recs = tomography_run(2, NOA, MessageState(1.2, 0.3), shots_per_basis=1, seed=1)
    for rec in recs:
        vals = np.linalg.eigvalsh(rec.reconstructed)
        assert vals.min() >= -1e-12


def test_tomography_pole_message_z_frequency():
    shots = 10_000
    recs = tomography_run(2, NOA, MessageState(0.0, 0.0), shots_per_basis=shots,
                          seed=23)
    sigma = math.sqrt(shots * (5 / 6) * (1 / 6))
    for rec in recs:
        n0 = rec.counts["z"][0]
        assert abs(n0 - shots * 5 / 6) <= 4 * sigma


def test_tomography_close_to_exact_at_10k():
    msg = MessageState(0.9, 1.3)
    exact = exact_clone_states(build_protocol_circuit(2, NOA, msg))
    recs = tomography_run(2, NOA, msg, shots_per_basis=10_000, seed=29)
    for rec, rho in zip(recs, exact):
        assert trace_distance(rec.reconstructed, rho) < 0.02


def test_marginals_independent_of_other_clone_measures():
    """Measuring clone 1 alongside clone 0 must not change clone 0's counts
    distribution (noiseless): compare against a single-clone circuit."""
    from teleclone.circuit import Circuit
    msg = MessageState(0.7, 2.1)
    full = build_protocol_circuit(2, NOA, msg, tomo_basis="z")
    # drop the other clone's measurement
    keep_clone = full.roles["clones"][0]
    instrs = tuple(i for i in full.instructions
                   if not (i.gate == "measure" and i.qubits[0] != keep_clone
                           and i.qubits[0] in full.roles["clones"]))
    solo = Circuit(full.num_qubits, full.num_clbits, instrs, roles=full.roles)
    shots = 20_000
    c_full = run_shots(full, shots, seed=31)
    c_solo = run_shots(solo, shots, seed=31)
    f1 = sum(v for k, v in c_full.items() if k[2] == "1") / shots
    f2 = sum(v for k, v in c_solo.items() if k[2] == "1") / shots
    assert abs(f1 - f2) < 0.02


@pytest.mark.slow
def test_tomography_consistency_improves_with_shots():
    msg = MessageState(1.1, 0.7)
    exact = exact_clone_states(build_protocol_circuit(2, NOA, msg))[0]
    dists = []
    for shots in (1000, 10_000, 100_000, 1_000_000):
        recs = tomography_run(2, NOA, msg, shots_per_basis=shots, seed=37)
        dists.append(trace_distance(recs[0].reconstructed, exact))
    assert dists[-1] <= 0.005
    assert dists[-1] < dists[0]


@pytest.mark.slow
@pytest.mark.parametrize("m,variant", [(2, NOA), (3, NOA),
                                       (4, TelecloningVariant.WITH_ANCILLA_OPTIMIZED)])
def test_tomography_matches_exact_at_1m_shots(m, variant):
    msg = MessageState(0.8, 2.4)
    exact = exact_clone_states(build_protocol_circuit(m, variant, msg))
    recs = tomography_run(m, variant, msg, shots_per_basis=1_000_000, seed=41)
    for rec, rho in zip(recs, exact):
        assert trace_distance(rec.reconstructed, rho) <= 0.01
