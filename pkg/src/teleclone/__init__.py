"""Universal symmetric 1->M telecloning circuits: construction, dynamic
circuit simulation with feed-forward, tomography, and hardware mapping."""

from .circuit import (Circuit, CircuitStats, Instruction, barrier, cond, cx, h,
                      measure, ry, rz, stats, sx, to_json, from_json, validate, x, z)
from .dicke import build_dsu, build_scs
from .telecloning import (MessageState, TelecloningVariant,
                          build_protocol_circuit, build_telecloning_state)
from .simulator import (NoiseModel, apply_noise_channel, exact_clone_states,
                        exact_subsystem_state, noisy_clone_states, partial_trace,
                        run_shots, statevector)
from .tomography import TomographyRecord, linear_inversion, mle_fit, tomography_run
from .analysis import (CloneMetrics, bloch_vector, clone_metrics, concurrence,
                       fidelity, fidelity_general, negativity, shrinking_factor,
                       theoretical_fidelity)
from .qasm import export_qasm

__all__ = [
    "Circuit", "CircuitStats", "Instruction", "barrier", "cond", "cx", "h",
    "measure", "ry", "rz", "stats", "sx", "to_json", "from_json", "validate",
    "x", "z", "build_dsu", "build_scs", "MessageState", "TelecloningVariant",
    "build_protocol_circuit", "build_telecloning_state", "NoiseModel",
    "apply_noise_channel", "exact_clone_states", "exact_subsystem_state",
    "noisy_clone_states", "partial_trace", "run_shots", "statevector",
    "TomographyRecord", "linear_inversion", "mle_fit", "tomography_run",
    "CloneMetrics", "bloch_vector", "clone_metrics", "concurrence", "fidelity",
    "fidelity_general", "negativity", "shrinking_factor", "theoretical_fidelity",
    "export_qasm",
]

__version__ = "0.1.0"
