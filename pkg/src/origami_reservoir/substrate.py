"""Lumped multistable module chain: model assembly, simulation and trajectory I/O.

The chain hangs from a base plate. Node 0 is the base; every other node is a
lumped mass joined to its neighbour by a spring ``f(x) = k1*x + k3*x**3``.
Displacements are measured along the chain axis (positive away from the
base) relative to the chain's self-weight rest shape, so the gravity preload
of each segment shows up as an asymmetric, non-uniform effective stiffness.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh

from ._kernel import integrate
from .tasks import SampledSignal

GRAVITY = 9.81

#: Angular position of each SMA column around the module axis, rad.
COLUMN_ANGLES = 0.25 + 2.0 * np.pi * np.arange(3) / 3.0


class InstabilityError(RuntimeError):
    """Raised when the integrated state leaves the blow-up bounds."""

    def __init__(self, step: int, time: float, what: str = "simulation"):
        self.step = step
        self.time = time
        super().__init__(f"{what} diverged at integration step {step} (t = {time:.6g} s)")


class TrajectoryFormatError(ValueError):
    """Base class for trajectory file problems."""


class MalformedHeaderError(TrajectoryFormatError):
    pass


class RowLengthError(TrajectoryFormatError):
    pass


class NonMonotonicTimeError(TrajectoryFormatError):
    pass


class NonUniformSamplingError(TrajectoryFormatError):
    pass


class NonFiniteValueError(TrajectoryFormatError):
    pass


@dataclass(frozen=True)
class ModuleState:
    """Soft (0) / stiff (1) state of the three panels of one module."""

    bits: tuple[int, int, int]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != 3 or any(b not in (0, 1) for b in bits):
            raise ValueError(f"module state must be three bits in {{0,1}}, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, word: str) -> "ModuleState":
        word = word.strip().strip("[]")
        if len(word) != 3 or set(word) - {"0", "1"}:
            raise ValueError(f"bad module state word {word!r}")
        return cls(tuple(int(ch) for ch in word))

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def stiffness_factor(self, ratio: float) -> float:
        return sum(ratio if b else 1.0 for b in self.bits) / 3.0


SOFT = ModuleState((0, 0, 0))
STIFF = ModuleState((1, 1, 1))


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of a module chain. SI units throughout."""

    modules: tuple[ModuleState, ...]
    nodes_per_module: int = 8
    node_mass: float = 0.02
    damping_ratio: float = 0.05
    soft_linear_stiffness: float = 1000.0
    stiffness_ratio: float = 4.00
    cubic_coefficient: float = 6.0e5
    payload_mass: float = 0.0
    payload_eccentricity: float = 0.0
    eccentric_lever: float = 0.2
    gravity: float = GRAVITY
    actuation_gain: float = 0.2
    module_twist: float = 0.6
    integration_dt: float = 1.0 / 3000.0
    sample_rate: float = 60.0
    blowup_displacement: float = 1.0
    blowup_velocity: float = 1.0e3
    label: str = ""

    def __post_init__(self):
        mods = tuple(m if isinstance(m, ModuleState) else ModuleState.parse(m) if isinstance(m, str)
                     else ModuleState(tuple(m)) for m in self.modules)
        object.__setattr__(self, "modules", mods)

    @property
    def n_nodes(self) -> int:
        return len(self.modules) * self.nodes_per_module

    def validate(self):
        if not self.modules:
            raise ValueError("chain needs at least one module")
        if self.nodes_per_module < 1 or self.n_nodes < 2:
            raise ValueError("chain needs at least two nodes")
        names = ("node_mass", "damping_ratio", "soft_linear_stiffness", "stiffness_ratio",
                 "cubic_coefficient", "payload_mass", "payload_eccentricity", "eccentric_lever",
                 "gravity", "actuation_gain", "module_twist", "integration_dt", "sample_rate",
                 "blowup_displacement", "blowup_velocity")
        for name in names:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.node_mass <= 0:
            raise ValueError("node_mass must be positive")
        if not 0 < self.damping_ratio < 1:
            raise ValueError("damping_ratio must lie in (0, 1)")
        if self.stiffness_ratio <= 0 or self.soft_linear_stiffness <= 0:
            raise ValueError("stiffness must be positive")
        if self.cubic_coefficient < 0 or self.payload_mass < 0:
            raise ValueError("cubic_coefficient and payload_mass must be non-negative")
        if self.eccentric_lever <= 0:
            raise ValueError("eccentric_lever must be positive")
        if self.sample_rate <= 0 or self.integration_dt <= 0:
            raise ValueError("sample_rate and integration_dt must be positive")
        if self.integration_dt > 1.0 / (2.0 * self.sample_rate):
            raise ValueError("integration_dt must not exceed half the sampling interval")

    def with_payload(self, mass: float, eccentricity: float = 0.0) -> "ChainConfig":
        return replace(self, payload_mass=mass, payload_eccentricity=eccentricity)


def chain_config(states: Sequence[str] | str, n_modules: Optional[int] = None, **kw) -> ChainConfig:
    """Shorthand: ``chain_config("000", 5)`` or ``chain_config(["111", "000"])``."""
    if isinstance(states, str):
        states = [states] * (n_modules or 1)
    return ChainConfig(modules=tuple(ModuleState.parse(s) for s in states), **kw)


#: Named configurations. C1-C5 are the time-series emulation set (C5 is the
#: five-module all-soft chain), C6 the all-stiff five-module chain, C7/C8 the
#: four-module SMA arm in [000] and [010].
PRESETS = {
    "C1": ["000"],
    "C2": ["111", "000"],
    "C3": ["000", "111", "000"],
    "C4": ["111", "000", "111", "000"],
    "C5": ["000"] * 5,
    "C6": ["111"] * 5,
    "C7": ["000"] * 4,
    "C8": ["010"] * 4,
}


def preset(name: str, **kw) -> ChainConfig:
    return chain_config(PRESETS[name], label=name, **kw)


@dataclass(frozen=True)
class StateTrajectory:
    times: np.ndarray
    displacements: np.ndarray
    node_labels: tuple[str, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        disp = np.atleast_2d(np.asarray(self.displacements, dtype=float))
        labels = tuple(str(x) for x in self.node_labels)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if disp.shape != (len(labels), times.size):
            raise ValueError(f"displacements shape {disp.shape} does not match "
                             f"{len(labels)} labels x {times.size} samples")
        if not np.all(np.isfinite(disp)) or not np.all(np.isfinite(times)):
            raise ValueError("trajectory contains non-finite values")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "displacements", disp)
        object.__setattr__(self, "node_labels", labels)

    @property
    def n_nodes(self) -> int:
        return self.displacements.shape[0]

    @property
    def n_samples(self) -> int:
        return self.displacements.shape[1]

    @property
    def sample_rate(self) -> float:
        return 1.0 / float(np.mean(np.diff(self.times))) if self.n_samples > 1 else float("nan")

    def window(self, start: int, stop: int) -> "StateTrajectory":
        return StateTrajectory(self.times[start:stop], self.displacements[:, start:stop], self.node_labels)

    def select(self, rows: Sequence[int]) -> "StateTrajectory":
        rows = list(rows)
        return StateTrajectory(self.times, self.displacements[rows],
                               tuple(self.node_labels[i] for i in rows))

    def scaled(self, factor: float) -> "StateTrajectory":
        return StateTrajectory(self.times, self.displacements * factor, self.node_labels)

    def moving_nodes(self) -> "StateTrajectory":
        """Drop rows with zero variance (e.g. a clamped base plate)."""
        keep = [i for i in range(self.n_nodes) if np.ptp(self.displacements[i]) > 0]
        return self.select(keep)


@dataclass(frozen=True)
class SimOutcome:
    trajectory: StateTrajectory
    final_energy: float
    max_displacement: float
    energy: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Immutable, assembled chain ready for integration.

    Arrays are indexed by free node (chain nodes 1..n-1); segment ``i``
    joins chain node ``i`` to chain node ``i + 1``.
    """

    config: ChainConfig
    linear_stiffness: np.ndarray
    cubic_coefficient: float
    preload_stretch: np.ndarray
    masses: np.ndarray
    damping: np.ndarray
    static_force: np.ndarray
    actuation_gains: np.ndarray
    first_mode_hz: float

    @property
    def n_nodes(self) -> int:
        return self.masses.size + 1

    @property
    def node_labels(self) -> tuple[str, ...]:
        return tuple(f"n{i:02d}" for i in range(self.n_nodes))

    def segment_tension(self, stretch: np.ndarray) -> np.ndarray:
        e, d = self.preload_stretch, stretch
        return self.linear_stiffness * d + self.cubic_coefficient * d * (3 * e * e + 3 * e * d + d * d)

    def segment_energy(self, stretch: np.ndarray) -> np.ndarray:
        e, d, k3 = self.preload_stretch, stretch, self.cubic_coefficient
        return 0.5 * self.linear_stiffness * d * d + k3 * (((e + d) ** 4 - e ** 4) / 4.0 - e ** 3 * d)

    def energy(self, q: np.ndarray, v: np.ndarray, base: float = 0.0) -> float:
        """Kinetic plus spring energy relative to the self-weight rest shape."""
        stretch = np.diff(np.concatenate(([base], q)))
        return float(0.5 * np.sum(self.masses * v * v) + np.sum(self.segment_energy(stretch)))

    def static_equilibrium(self, base: float = 0.0, actuation: Optional[np.ndarray] = None) -> np.ndarray:
        """Free-node displacements that balance the constant loads."""
        load = np.cumsum(self.static_force[::-1])[::-1]
        if actuation is not None:
            load = load - self.actuation_gains.T @ np.asarray(actuation, dtype=float)
        slope = self.linear_stiffness + 3 * self.cubic_coefficient * self.preload_stretch ** 2
        stretch = load / slope
        for _ in range(60):
            resid = self.segment_tension(stretch) - load
            e = self.preload_stretch + stretch
            step = resid / (self.linear_stiffness + 3 * self.cubic_coefficient * e * e)
            stretch = stretch - step
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(stretch))):
                break
        return base + np.cumsum(stretch)


def _rest_stretch(k1: np.ndarray, k3: float, tension: np.ndarray) -> np.ndarray:
    # solve k1*e + k3*e**3 = tension; the left side is monotone so Newton converges
    e = tension / k1
    for _ in range(100):
        step = (k1 * e + k3 * e ** 3 - tension) / (k1 + 3 * k3 * e * e)
        e = e - step
        if np.all(np.abs(step) <= 1e-16 * (1.0 + np.abs(e))):
            break
    return e


def build_chain(config: ChainConfig) -> ChainModel:
    """Assemble segment stiffnesses, masses, damping and static loads."""
    config.validate()
    n_seg = config.n_nodes - 1
    module_of = np.minimum(np.arange(n_seg) // config.nodes_per_module, len(config.modules) - 1)
    factors = np.array([m.stiffness_factor(config.stiffness_ratio) for m in config.modules])
    k1 = config.soft_linear_stiffness * factors[module_of]
    k3 = float(config.cubic_coefficient)

    masses = np.full(n_seg, config.node_mass)
    # self-weight tension carried by each segment (everything below it)
    hanging = config.node_mass * np.arange(n_seg, 0, -1)
    e = _rest_stretch(k1, k3, config.gravity * hanging)

    masses[-1] += config.payload_mass
    static = np.zeros(n_seg)
    weight = config.payload_mass * config.gravity
    static[-1] = weight * (1.0 + config.payload_eccentricity / config.eccentric_lever)

    # a stiff panel contracts less under the same SMA pull
    column_soft = np.array([[1.0 if b == 0 else 1.0 / config.stiffness_ratio for b in m.bits]
                            for m in config.modules])
    # each module sits rotated by module_twist against the one above, so a
    # column's pull projects differently onto the tracked axis per module
    angle = COLUMN_ANGLES[:, None] + config.module_twist * module_of[None, :]
    gains = config.actuation_gain * np.cos(angle) * column_soft[module_of].T

    k_eff = k1 + 3 * k3 * e * e
    K = np.zeros((n_seg, n_seg))
    for i in range(n_seg):
        K[i, i] += k_eff[i]
        if i + 1 < n_seg:
            K[i, i] += k_eff[i + 1]
            K[i, i + 1] = K[i + 1, i] = -k_eff[i + 1]
    w2 = eigh(K, np.diag(masses), eigvals_only=True, subset_by_index=[0, 0])[0]
    omega1 = math.sqrt(max(w2, 0.0))
    # mass-proportional damping: the first mode gets exactly damping_ratio
    damping = 2.0 * config.damping_ratio * omega1 * masses

    for arr in (k1, e, masses, damping, static, gains):
        arr.setflags(write=False)
    return ChainModel(config=config, linear_stiffness=k1, cubic_coefficient=k3,
                      preload_stretch=e, masses=masses, damping=damping, static_force=static,
                      actuation_gains=gains, first_mode_hz=omega1 / (2 * math.pi))


def simulate(model: ChainModel, input: SampledSignal, duration: float, *,
             initial_displacement: Optional[np.ndarray] = None,
             initial_velocity: Optional[np.ndarray] = None,
             start_at_equilibrium: bool = True,
             record_energy: bool = False) -> SimOutcome:
    """Integrate the chain under ``input`` for ``duration`` seconds.

    A one-channel input is base excitation (node 0 follows it); a
    three-channel input drives the SMA columns with the base clamped.
    The chain starts from the static equilibrium of its constant loads plus
    ``initial_displacement`` (free nodes only). Output is sampled at
    ``config.sample_rate``, at times ``k / sample_rate``.
    """
    cfg = model.config
    if duration <= 0:
        raise ValueError("duration must be positive")
    if input.n_channels not in (1, 3):
        raise ValueError("input must have 1 (base excitation) or 3 (PWM actuation) channels")
    if input.bandwidth is not None and input.sample_rate < 10 * input.bandwidth:
        raise ValueError(f"input sampled at {input.sample_rate} Hz, needs >= 10x its "
                         f"{input.bandwidth} Hz bandwidth")
    fs = cfg.sample_rate
    stride = max(1, math.ceil(round(1.0 / (fs * cfg.integration_dt), 9)))
    h = 1.0 / (fs * stride)
    n_samples = int(round(duration * fs))
    if n_samples < 1:
        raise ValueError("duration shorter than one sample")
    n_steps = (n_samples - 1) * stride

    half_t = np.arange(2 * n_steps + 1) * (h / 2.0)
    if input.n_channels == 1:
        base = np.interp(half_t, input.times, input.values[0])
        act = np.zeros((3, half_t.size))
    else:
        base = np.zeros(half_t.size)
        act = np.stack([np.interp(half_t, input.times, ch) for ch in input.values])

    n_free = model.masses.size
    if start_at_equilibrium:
        q0 = model.static_equilibrium(base[0], act[:, 0])
    else:
        q0 = np.full(n_free, base[0])
    if initial_displacement is not None:
        q0 = q0 + np.asarray(initial_displacement, dtype=float)
    v0 = np.zeros(n_free) if initial_velocity is None else np.asarray(initial_velocity, dtype=float).copy()

    record, record_v, q, v, fail = integrate(
        np.ascontiguousarray(q0, dtype=float), np.ascontiguousarray(v0, dtype=float),
        base, act, np.ascontiguousarray(model.linear_stiffness), model.cubic_coefficient,
        np.ascontiguousarray(model.preload_stretch), np.ascontiguousarray(model.actuation_gains),
        np.ascontiguousarray(model.masses), np.ascontiguousarray(model.damping),
        np.ascontiguousarray(model.static_force), h, n_steps, stride,
        cfg.blowup_displacement, cfg.blowup_velocity)
    if fail >= 0:
        raise InstabilityError(fail, fail * h)

    times = np.arange(n_samples) / fs
    base_rows = base[::2 * stride][:n_samples]
    disp = np.vstack([base_rows, record])
    traj = StateTrajectory(times, disp, model.node_labels)

    energy = None
    if record_energy:
        energy = np.array([model.energy(record[:, k], record_v[:, k], base_rows[k])
                           for k in range(n_samples)])
    final = model.energy(q, v, base[-1])
    return SimOutcome(trajectory=traj, final_energy=final,
                      max_displacement=float(np.max(np.abs(disp))), energy=energy)


def export_trajectory(traj: StateTrajectory, path) -> Path:
    """Write ``time,<node_0>,...`` CSV, one row per sample, exact float repr."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", *traj.node_labels])
        for k in range(traj.n_samples):
            w.writerow([repr(float(traj.times[k]))] + [repr(float(x)) for x in traj.displacements[:, k]])
    return path


def import_trajectory(path, format: str = "csv", *, rtol: float = 1e-6) -> StateTrajectory:
    """Read a trajectory CSV. Non-uniform timestamps are rejected, not resampled."""
    if format != "csv":
        raise ValueError(f"unsupported trajectory format {format!r}")
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedHeaderError("empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "time" or any(not h for h in header[1:]):
        raise MalformedHeaderError(f"header must be 'time,<node_0>,...', got {rows[0]!r}")
    if len(set(header[1:])) != len(header) - 1:
        raise MalformedHeaderError("duplicate node labels in header")
    data = np.empty((len(rows) - 1, len(header)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RowLengthError(f"row {r} has {len(row)} fields, expected {len(header)}")
        for c, cell in enumerate(row):
            try:
                x = float(cell)
            except ValueError:
                raise TrajectoryFormatError(f"row {r}, column {header[c]!r}: cannot parse {cell!r}") from None
            if not math.isfinite(x):
                raise NonFiniteValueError(f"non-finite value at row {r}, column {header[c]!r}")
            data[r - 2, c] = x
    times = data[:, 0]
    if times.size > 1:
        dt = np.diff(times)
        if np.any(dt <= 0):
            bad = int(np.argmax(dt <= 0)) + 3
            raise NonMonotonicTimeError(f"time not strictly increasing at row {bad}")
        if np.any(np.abs(dt - dt[0]) > rtol * dt[0]):
            bad = int(np.argmax(np.abs(dt - dt[0]) > rtol * dt[0])) + 3
            raise NonUniformSamplingError(f"non-uniform sampling at row {bad}")
    return StateTrajectory(times, data[:, 1:].T.copy(), tuple(header[1:]))


def add_measurement_noise(traj: StateTrajectory, sigma: float,
                          rng: np.random.Generator) -> StateTrajectory:
    """Gaussian tracking noise of standard deviation ``sigma`` (m) on every sample.

    Rows that never move (a clamped base) stay exact, as a fixed marker would.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return traj
    noise = sigma * rng.standard_normal(traj.displacements.shape)
    still = np.ptp(traj.displacements, axis=1) == 0
    noise[still] = 0.0
    return StateTrajectory(traj.times, traj.displacements + noise, traj.node_labels)
