"""Payload weight estimation, input reconstruction and hammer classification."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np
import yaml

from .metrics import mse
from .readout import ReadoutWeights, predict, train_readout
from .substrate import (ChainConfig, StateTrajectory, add_measurement_noise, build_chain,
                        import_trajectory, simulate)
from .tasks import SampledSignal, SignalSpec, piecewise_constant_target

#: Items of the multitask payload set, grams. The last one is the hammer.
TASK3_WEIGHTS = (61.90, 100.64, 213.95, 161.25)
HAMMER_WEIGHT = 161.25
HAMMER_BAND = (140.0, 180.0)
#: Lateral offset of the hammer's centre of mass for orientation +-1, meters.
HAMMER_OFFSET = 0.01
PAYLOAD_MASSES = (0.0, 50.0, 90.0, 130.0, 170.0)


class Orientation(IntEnum):
    LEFT = -1
    FRONT = 0
    RIGHT = 1


@dataclass(frozen=True)
class LabeledRun:
    trajectory: StateTrajectory
    payload_mass: float
    input: SampledSignal
    orientation: Optional[Orientation] = None
    repetition: int = 0

    def __post_init__(self):
        if not self.payload_mass >= 0:
            raise ValueError("payload_mass must be non-negative")
        if self.orientation is not None:
            object.__setattr__(self, "orientation", Orientation(self.orientation))


@dataclass(frozen=True)
class EstimatorBundle:
    weights: ReadoutWeights
    training_masses: tuple[float, ...]
    window: float
    washout: float = 10.0

    def __post_init__(self):
        m = tuple(float(x) for x in self.training_masses)
        if not m or list(m) != sorted(set(m)):
            raise ValueError("training_masses must be non-empty, sorted and distinct")
        object.__setattr__(self, "training_masses", m)


def _segment(traj: StateTrajectory, washout: float, length: float) -> np.ndarray:
    fs = traj.sample_rate
    a = int(round(washout * fs))
    b = a + int(round(length * fs))
    if b > traj.n_samples:
        raise ValueError(f"run has {traj.n_samples} samples, needs {b}")
    return traj.displacements[:, a:b]


def _concatenate(runs: Sequence[LabeledRun], labels: Sequence[float], washout: float,
                 segment: float) -> tuple[np.ndarray, np.ndarray]:
    n = {r.trajectory.n_nodes for r in runs}
    if len(n) != 1:
        raise ValueError(f"runs disagree on node count: {sorted(n)}")
    fs = runs[0].trajectory.sample_rate
    S = np.hstack([_segment(r.trajectory, washout, segment) for r in runs])
    y = piecewise_constant_target([(lab, segment) for lab in labels], fs)
    return S, y


def train_weight_estimator(runs: Sequence[LabeledRun], masses_used: Sequence[float],
                           segment: float = 5.0, washout: float = 10.0,
                           ridge: float = 0.0) -> EstimatorBundle:
    """One readout over the per-mass state segments concatenated in mass order."""
    masses = sorted(float(m) for m in masses_used)
    chosen = []
    for m in masses:
        match = [r for r in runs if abs(r.payload_mass - m) < 1e-9]
        if not match:
            raise ValueError(f"no run with payload {m} g")
        chosen.append(match[0])
    S, y = _concatenate(chosen, masses, washout, segment)
    w = train_readout(S, y, ridge, provenance=f"weight:{'/'.join(f'{m:g}' for m in masses)}")
    return EstimatorBundle(w, tuple(masses), segment, washout)


def estimate_weight(bundle: EstimatorBundle, run: LabeledRun) -> float:
    """Time-mean of the readout output over the evaluation window."""
    S = _segment(run.trajectory, bundle.washout, bundle.window)
    return float(np.mean(predict(bundle.weights, S)))


def train_orientation_readout(runs: Sequence[LabeledRun], segment: float = 5.0,
                              washout: float = 10.0, ridge: float = 0.0) -> ReadoutWeights:
    """Regress the -1/0/+1 orientation label on hammer runs, one segment per run."""
    labelled = [r for r in runs if r.orientation is not None]
    if not labelled:
        raise ValueError("no runs carry an orientation label")
    labelled.sort(key=lambda r: int(r.orientation))
    S, y = _concatenate(labelled, [int(r.orientation) for r in labelled], washout, segment)
    return train_readout(S, y, ridge, provenance="orientation")


def snap_orientation(value: float) -> Orientation:
    """Nearest of -1, 0, +1; a value exactly halfway goes to 0."""
    if value > 0.5:
        return Orientation.RIGHT
    if value < -0.5:
        return Orientation.LEFT
    return Orientation.FRONT


def classify_payload(bundle: EstimatorBundle, orientation_weights: ReadoutWeights,
                     run: LabeledRun, band: tuple[float, float] = HAMMER_BAND):
    """Weight first; only an item inside ``band`` gets an orientation label."""
    grams = estimate_weight(bundle, run)
    if not band[0] <= grams <= band[1]:
        return grams, None
    S = _segment(run.trajectory, bundle.washout, bundle.window)
    return grams, snap_orientation(float(np.mean(predict(orientation_weights, S))))


def reconstruct_inputs(run: LabeledRun, train: float = 15.0, test: float = 15.0,
                       washout: float = 0.0, ridge: float = 0.0):
    """Recover each PWM channel from the states with its own readout.

    Returns the three test-window reconstructions and their MSEs.
    """
    if run.input.n_channels != 3:
        raise ValueError("input reconstruction needs a three-channel input")
    traj = run.trajectory
    fs = traj.sample_rate
    a = int(round(washout * fs))
    b = a + int(round(train * fs))
    c = b + int(round(test * fs))
    if c > traj.n_samples:
        raise ValueError(f"run has {traj.n_samples} samples, needs {c}")
    u = _resample_channels(run.input, traj.times)
    S_tr, S_te = traj.displacements[:, a:b], traj.displacements[:, b:c]
    recon, errors = [], []
    for ch in range(3):
        w = train_readout(S_tr, u[ch, a:b], ridge, provenance=f"reconstruct:{ch}")
        p = predict(w, S_te)
        recon.append(p)
        errors.append(mse(u[ch, b:c], p))
    return recon, errors


def _resample_channels(signal: SampledSignal, times: np.ndarray) -> np.ndarray:
    # sample-and-hold at the trajectory times
    idx = np.searchsorted(signal.times, times + 1e-9, side="right") - 1
    return signal.values[:, np.clip(idx, 0, signal.n_samples - 1)]


def simulate_labeled_run(config: ChainConfig, signal: SampledSignal, duration: float,
                         payload_grams: float, orientation: Optional[int] = None,
                         repetition: int = 0, seed: int = 0, noise: float = 0.0,
                         perturbation: float = 1e-4) -> LabeledRun:
    """Simulate one payload run and wrap it with its labels.

    Orientation moves the payload's centre of mass sideways by
    ``HAMMER_OFFSET`` meters per unit label.
    """
    ecc = 0.0 if orientation is None else int(orientation) * HAMMER_OFFSET
    model = build_chain(config.with_payload(payload_grams / 1000.0, ecc))
    rng = np.random.default_rng([seed, repetition, int(round(payload_grams * 100)),
                                 0 if orientation is None else int(orientation) + 2])
    x0 = rng.uniform(-perturbation, perturbation, model.masses.size)
    traj = simulate(model, signal, duration, initial_displacement=x0).trajectory
    traj = add_measurement_noise(traj, noise, rng)
    return LabeledRun(traj, payload_grams, signal, orientation, repetition)


def load_manifest(path) -> list[LabeledRun]:
    """Read labeled runs from a YAML manifest.

    The file holds a list (or a mapping with a ``runs`` list). Each entry has
    ``trajectory`` (CSV path, relative to the manifest), ``payload_mass`` in
    grams, an ``input`` mapping with the SignalSpec fields and optionally
    ``orientation`` (-1, 0, +1) and ``repetition``.
    """
    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    entries = doc.get("runs") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ValueError(f"{path}: expected a list of runs")
    runs = []
    for i, e in enumerate(entries):
        try:
            traj = import_trajectory(path.parent / e["trajectory"])
            spec = SignalSpec(**e["input"])
            runs.append(LabeledRun(traj, float(e["payload_mass"]), spec.sample(),
                                   e.get("orientation"), int(e.get("repetition", 0))))
        except (KeyError, TypeError) as err:
            raise ValueError(f"{path}: run {i} is malformed ({err})") from err
    return runs


def save_manifest(entries: Sequence[dict], path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump({"runs": list(entries)}, sort_keys=False))
    return path
