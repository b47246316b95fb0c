"""Experiment sweep over a grid of message states with persisted results.

Defaults reproduce the sampling protocol: a 20x20 grid of rotation angles
(400 message states), 10,000 shots per tomography basis. Exact mode skips
sampling entirely and is the acceptance path; shots mode reproduces the
statistical procedure.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import CloneMetrics, clone_metrics
from .circuit import Circuit
from .exceptions import ConfigError, TelecloneError
from .hardware import DurationTable, enumerate_layouts, insert_dd, transpile_to_native
from .simulator import NoiseModel, exact_clone_states, noisy_clone_states
from .telecloning import MessageState, TelecloningVariant, build_protocol_circuit
from .tomography import tomography_run

MODES = ("exact", "shots")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    variant: TelecloningVariant
    n_psi: int = 20
    n_phi: int = 20
    shots_per_basis: int = 10_000
    seed: int = 0
    layout_index: int | None = None
    dd: bool = False
    durations: DurationTable | None = None
    noise: NoiseModel | None = None
    mode: str = "exact"

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError("m must be >= 2")
        if self.n_psi < 1 or self.n_phi < 1:
            raise ConfigError("grid counts must be >= 1")
        if self.shots_per_basis < 1:
            raise ConfigError("shots_per_basis must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.layout_index is not None and not (0 <= self.layout_index <= 6):
            raise ConfigError("layout_index must be in 0..6")
        if self.dd and self.layout_index is None:
            raise ConfigError("decoupling requires a layout (set layout_index)")

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "variant": self.variant.value,
            "n_psi": self.n_psi,
            "n_phi": self.n_phi,
            "shots_per_basis": self.shots_per_basis,
            "seed": self.seed,
            "layout_index": self.layout_index,
            "dd": self.dd,
            "durations": None if self.durations is None
            else self.durations.to_json_dict(),
            "noise": None if self.noise is None else {
                "depolarizing_1q": self.noise.depolarizing_1q,
                "depolarizing_2q": self.noise.depolarizing_2q,
                "readout_flip": self.noise.readout_flip,
                "amplitude_damping_idle": self.noise.amplitude_damping_idle,
            },
            "mode": self.mode,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            variant = TelecloningVariant(d["variant"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad variant: {exc}")
        noise = d.get("noise")
        durations = d.get("durations")
        known = {"m", "variant", "n_psi", "n_phi", "shots_per_basis", "seed",
                 "layout_index", "dd", "durations", "noise", "mode"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kwargs = {k: d[k] for k in known - {"variant", "noise", "durations"}
                  if k in d}
        return cls(variant=variant,
                   noise=None if noise is None else NoiseModel(**noise),
                   durations=None if durations is None
                   else DurationTable.from_json_dict(durations),
                   **kwargs)


def angle_grid(n_psi: int, n_phi: int) -> list[MessageState]:
    """Linearly spaced message angles over [0, pi] x [0, 2pi], endpoints
    included (so phi = 0 and phi = 2pi both appear; they describe the same
    state and are kept for grid regularity)."""
    if n_psi < 1 or n_phi < 1:
        raise ConfigError("grid counts must be >= 1")
    psis = np.linspace(0.0, math.pi, n_psi) if n_psi > 1 else np.array([0.0])
    phis = np.linspace(0.0, 2 * math.pi, n_phi) if n_phi > 1 else np.array([0.0])
    return [MessageState(float(p), float(f)) for p in psis for f in phis]


def _transform_for(config: ExperimentConfig):
    if config.layout_index is None:
        return None
    layout = enumerate_layouts(config.m, config.variant)[config.layout_index]
    durations = config.durations or DurationTable()

    def run(circuit: Circuit) -> Circuit:
        native = transpile_to_native(circuit, layout)
        if config.dd:
            native = insert_dd(native, durations)
        return native

    return run


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def _run_point(config: ExperimentConfig, index: int, msg: MessageState) -> dict:
    transform = _transform_for(config)
    if config.mode == "exact":
        circuit = build_protocol_circuit(config.m, config.variant, msg,
                                         tomo_basis="none")
        if transform is not None:
            circuit = transform(circuit)
        if config.noise is None:
            rhos = exact_clone_states(circuit)
        else:
            rhos = noisy_clone_states(circuit, config.noise)
        tomo = [None] * config.m
    else:
        records = tomography_run(config.m, config.variant, msg,
                                 config.shots_per_basis,
                                 seed=_point_seed(config.seed, index),
                                 noise=config.noise, transform=transform)
        rhos = [rec.reconstructed for rec in records]
        tomo = [rec.to_json_dict() for rec in records]
    clones = []
    for k, rho in enumerate(rhos):
        met = clone_metrics(rho, msg.bloch())
        clones.append({
            "clone_index": k,
            "fidelity": met.fidelity_to_message,
            "bloch": list(met.bloch),
            "bloch_angle_error": met.bloch_angle_error,
            "bloch_magnitude": met.bloch_magnitude,
            "rho": [[[float(v.real), float(v.imag)] for v in row] for row in rho],
            "tomography": tomo[k],
        })
    return {"clones": clones, "error": None}


@dataclass
class ExperimentRecord:
    config: ExperimentConfig
    results: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "config": self.config.to_json_dict(),
            "results": self.results,
            "aggregate": self.aggregate,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRecord":
        d = json.loads(text)
        return cls(config=ExperimentConfig.from_json_dict(d["config"]),
                   results=d["results"], aggregate=d["aggregate"])


def _aggregate(config: ExperimentConfig, results: list) -> dict:
    per_clone = [[] for _ in range(config.m)]
    failed = 0
    for point in results:
        if point["error"] is not None:
            failed += 1
            continue
        for clone in point["clones"]:
            per_clone[clone["clone_index"]].append(clone["fidelity"])
    alls = [f for fs in per_clone for f in fs]
    return {
        "per_clone": [{"mean_fidelity": float(np.mean(fs)) if fs else None,
                       "std_fidelity": float(np.std(fs)) if fs else None}
                      for fs in per_clone],
        "overall_mean_fidelity": float(np.mean(alls)) if alls else None,
        "overall_std_fidelity": float(np.std(alls)) if alls else None,
        "n_points": len(results),
        "n_failed": failed,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentRecord:
    """Sweep the message grid, collect per-clone metrics and aggregates.

    Deterministic for a fixed config (per-point seeds derive from the config
    seed and grid index). A failing grid point is recorded with an error
    marker instead of aborting the sweep.
    """
    states = angle_grid(config.n_psi, config.n_phi)
    workers = int(os.environ.get("TELECLONE_WORKERS", "1"))
    results: list[dict | None] = [None] * len(states)

    def finish(index, msg, outcome, error):
        base = {"index": index,
                "psi_index": index // config.n_phi,
                "phi_index": index % config.n_phi,
                "psi": msg.psi, "phi": msg.phi,
                "message_bloch": list(msg.bloch())}
        if error is None:
            base.update(outcome)
        else:
            base.update({"clones": [], "error": error})
        results[index] = base

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_run_point, config, i, msg)
                       for i, msg in enumerate(states)}
            for i, msg in enumerate(states):
                try:
                    finish(i, msg, futures[i].result(), None)
                except TelecloneError as exc:
                    finish(i, msg, None, str(exc))
    else:
        for i, msg in enumerate(states):
            try:
                finish(i, msg, _run_point(config, i, msg), None)
            except TelecloneError as exc:
                finish(i, msg, None, str(exc))
    return ExperimentRecord(config=config, results=results,
                            aggregate=_aggregate(config, results))


def emit_heatmap(record: ExperimentRecord, clone_index: int) -> str:
    """Fidelity grid as CSV, rows = psi index, columns = phi index; no
    interpolation. Failed points render as nan."""
    cfg = record.config
    if not (0 <= clone_index < cfg.m):
        raise ConfigError(f"clone index {clone_index} out of range for m={cfg.m}")
    grid = np.full((cfg.n_psi, cfg.n_phi), math.nan)
    for point in record.results:
        if point["error"] is not None:
            continue
        row, col = point["psi_index"], point["phi_index"]
        grid[row, col] = point["clones"][clone_index]["fidelity"]
    lines = [",".join(repr(float(v)) for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def emit_bloch(record: ExperimentRecord) -> str:
    """Per-state message and clone Bloch vectors as a JSON list."""
    out = []
    for point in record.results:
        out.append({
            "psi_index": point["psi_index"],
            "phi_index": point["phi_index"],
            "message": point["message_bloch"],
            "clones": [c["bloch"] for c in point["clones"]],
            "error": point["error"],
        })
    return json.dumps(out, sort_keys=True, separators=(",", ":"))
