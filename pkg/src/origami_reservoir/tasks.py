"""Input streams and target series for the three benchmark tasks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernel import narma_recursion

NARMA_FREQUENCIES = (2.11, 3.73, 4.33)


class NarmaDivergenceError(RuntimeError):
    def __init__(self, order: int, step: int):
        self.order = order
        self.step = step
        super().__init__(f"NARMA{order} target diverged at step {step}")


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled, possibly multi-channel stream.

    ``amplitude`` is the peak bound |value| <= amplitude the generator
    guarantees; ``bandwidth`` is the highest frequency it contains, if finite.
    """

    times: np.ndarray
    values: np.ndarray
    amplitude: Optional[float] = None
    bandwidth: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if times.ndim != 1 or values.shape[1] != times.size:
            raise ValueError("values must be (n_channels, n_samples) matching times")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(times))):
            raise ValueError("signal contains non-finite values")
        if times.size > 1:
            dt = np.diff(times)
            if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * max(dt[0], 1e-300) + 1e-12:
                raise ValueError("signal must be uniformly sampled")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def sample_rate(self) -> float:
        return 1.0 / (self.times[1] - self.times[0]) if self.times.size > 1 else float("inf")

    @property
    def channel(self) -> np.ndarray:
        if self.n_channels != 1:
            raise ValueError("signal has more than one channel")
        return self.values[0]

    def scaled(self, factor: float) -> "SampledSignal":
        amp = None if self.amplitude is None else abs(factor) * self.amplitude
        return SampledSignal(self.times, self.values * factor, amp, self.bandwidth)


@dataclass(frozen=True)
class SignalSpec:
    """Parametric description of an input stream, serialisable to a plan file."""

    kind: str
    amplitude: float
    duration: float
    sample_rate: float
    frequencies: tuple[float, ...] = ()
    pwm_on: float = 0.0
    pwm_off: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if self.kind not in ("TripleHarmonic", "SingleHarmonic", "PWM3"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ValueError("duration and sample_rate must be positive")
        if any(f <= 0 for f in self.frequencies):
            raise ValueError("frequencies must be positive")
        if self.kind == "PWM3" and (self.pwm_on <= 0 or self.pwm_off < 0):
            raise ValueError("PWM3 needs pwm_on > 0 and pwm_off >= 0")
        if self.kind == "SingleHarmonic" and len(self.frequencies) != 1:
            raise ValueError("SingleHarmonic needs exactly one frequency")

    def sample(self, sample_rate: Optional[float] = None) -> SampledSignal:
        fs = self.sample_rate if sample_rate is None else sample_rate
        if self.kind == "TripleHarmonic":
            return triple_harmonic(self.amplitude, self.duration, fs, self.frequencies or NARMA_FREQUENCIES)
        if self.kind == "SingleHarmonic":
            return single_harmonic(self.amplitude, self.frequencies[0], self.duration, fs)
        return pwm3(self.pwm_on, self.pwm_off, self.amplitude, self.duration, fs)


@dataclass(frozen=True)
class NarmaParams:
    order: int
    alpha: float = 0.3
    beta: float = 0.05
    gamma: float = 1.5
    delta: float = 0.1
    classic: bool = False

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ValueError("NARMA order must be an integer >= 2")


def sample_times(duration: float, sample_rate: float) -> np.ndarray:
    n = int(round(duration * sample_rate))
    return np.arange(n) / sample_rate


def triple_harmonic(amplitude: float, duration: float, sample_rate: float,
                    frequencies: Sequence[float] = NARMA_FREQUENCIES) -> SampledSignal:
    """A * sin(2 pi f1 t) * sin(2 pi f2 t) * sin(2 pi f3 t)."""
    if sample_rate < 2 * max(frequencies):
        raise ValueError("sample_rate below twice the highest harmonic")
    t = sample_times(duration, sample_rate)
    f1, f2, f3 = frequencies
    v = amplitude * np.sin(2 * np.pi * f1 * t) * np.sin(2 * np.pi * f2 * t) * np.sin(2 * np.pi * f3 * t)
    return SampledSignal(t, v[None, :], abs(amplitude), float(sum(frequencies)))


def single_harmonic(amplitude: float, frequency: float, duration: float, sample_rate: float) -> SampledSignal:
    if sample_rate < 2 * frequency:
        raise ValueError("sample_rate below twice the frequency")
    t = sample_times(duration, sample_rate)
    return SampledSignal(t, (amplitude * np.sin(2 * np.pi * frequency * t))[None, :],
                         abs(amplitude), float(frequency))


def pwm3(on: float, off: float, amplitude: float, duration: float, sample_rate: float) -> SampledSignal:
    """Three square-wave channels firing in turn, each high for ``on`` seconds.

    The cycle is ``3 * (on + off)`` long; channel ``c`` is high on
    ``[c * (on + off), c * (on + off) + on)`` within it.
    """
    if on <= 0 or off < 0:
        raise ValueError("need on > 0 and off >= 0")
    if sample_rate * on < 2 - 1e-9:
        raise ValueError("pulse shorter than two samples")
    t = sample_times(duration, sample_rate)
    slot = on + off
    # integer sample arithmetic keeps slot edges exact
    k = np.arange(t.size)
    phase = np.mod(k, round(3 * slot * sample_rate)) / sample_rate if _is_whole(3 * slot * sample_rate) \
        else np.mod(t, 3 * slot)
    values = np.zeros((3, t.size))
    for c in range(3):
        start = c * slot
        high = (phase >= start - 1e-12) & (phase < start + on - 1e-12)
        values[c, high] = amplitude
    return SampledSignal(t, values, abs(amplitude), None)


def _is_whole(x: float) -> bool:
    return abs(x - round(x)) < 1e-9


def piecewise_constant_target(segments: Sequence[tuple[float, float]], sample_rate: float) -> np.ndarray:
    """Step function; each ``(value, duration)`` occupies round(duration * fs) samples."""
    out = []
    for value, dur in segments:
        if dur <= 0:
            raise ValueError("segment durations must be positive")
        out.append(np.full(int(round(dur * sample_rate)), float(value)))
    return np.concatenate(out) if out else np.zeros(0)


def rescale_input(values: np.ndarray, amplitude: Optional[float] = None,
                  low: float = 0.0, high: float = 0.5) -> np.ndarray:
    """Affine map of [-amplitude, amplitude] onto [low, high].

    With ``amplitude=None`` the series' own peak |value| is used, which makes
    the mapping depend on the whole series.
    """
    values = np.asarray(values, dtype=float)
    if amplitude is None:
        amplitude = float(np.max(np.abs(values))) if values.size else 0.0
    mid = 0.5 * (low + high)
    if amplitude == 0:
        return np.full_like(values, mid)
    return mid + 0.5 * (high - low) * values / amplitude


def narma(u: np.ndarray, params: NarmaParams, bound: float = 1e6) -> np.ndarray:
    """NARMA-N recursion on an already rescaled input ``u``.

    N = 2: y[t+1] = 0.4 y[t] + 0.4 y[t] y[t-1] + 0.6 u[t]^3 + 0.1.
    N > 2: y[t+1] = a y[t] + 5 b y[t] sum_{j<N} u[t-j] + g u[t-N+1] u[t] + d,
    or, with ``params.classic``, the sum runs over y[t-j] and the 5 is dropped.
    The first N samples are zero.
    """
    u = np.ascontiguousarray(u, dtype=float)
    N = int(params.order)
    y, fail = narma_recursion(u, N, params.alpha, params.beta, params.gamma, params.delta,
                              bool(params.classic), float(bound))
    if fail >= 0:
        raise NarmaDivergenceError(N, int(fail))
    return y


def narma_target(signal: SampledSignal, params: NarmaParams, rescale: bool = True) -> np.ndarray:
    """NARMA-N target driven by a single-channel signal.

    The signal is first mapped from [-A, A] to [0, 0.5] using its declared
    peak amplitude A, so the target does not depend on the drive amplitude.
    """
    u = signal.channel
    if rescale:
        u = rescale_input(u, signal.amplitude)
    return narma(u, params)


def downsample(signal: SampledSignal, sample_rate: float) -> SampledSignal:
    """Keep every k-th sample; the rate ratio must be an integer."""
    ratio = signal.sample_rate / sample_rate
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-6 * k:
        raise ValueError(f"cannot downsample {signal.sample_rate} Hz to {sample_rate} Hz")
    n = signal.n_samples // k + (1 if signal.n_samples % k else 0)
    return SampledSignal(np.arange(n) / sample_rate, signal.values[:, ::k][:, :n],
                         signal.amplitude, signal.bandwidth)
