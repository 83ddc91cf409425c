"""Error, spectral-similarity and spatial-correlation measures."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .substrate import StateTrajectory

N_PEAKS = 8


class UndefinedVarianceError(ValueError):
    pass


class ZeroVarianceNodeError(ValueError):
    def __init__(self, index: int, label: str):
        self.index = index
        self.label = label
        super().__init__(f"node {label!r} (row {index}) has zero variance")


def _pair(target, predicted):
    y = np.asarray(target, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if y.size != p.size:
        raise ValueError(f"length mismatch: {y.size} vs {p.size}")
    return y, p


def nmse(target, predicted) -> float:
    """sum (y - p)^2 / sum (y - mean y)^2."""
    y, p = _pair(target, predicted)
    if y.size < 2:
        raise ValueError("need at least two samples")
    centered = y - y.mean()
    denom = float(centered @ centered)
    if denom == 0:
        raise UndefinedVarianceError("target is constant; NMSE undefined")
    r = y - p
    return float(r @ r) / denom


def mse(target, predicted) -> float:
    y, p = _pair(target, predicted)
    if y.size == 0:
        raise ValueError("empty series")
    r = y - p
    return float(r @ r) / y.size


def magnitude_spectrum(x, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided Hann-windowed magnitude spectrum of the mean-removed series."""
    x = np.asarray(x, dtype=float)
    w = np.hanning(x.size)
    mag = np.abs(np.fft.rfft((x - x.mean()) * w)) * (2.0 / w.sum())
    return np.fft.rfftfreq(x.size, 1.0 / sample_rate), mag


def dominant_peaks(mag: np.ndarray, n_peaks: int = N_PEAKS) -> tuple[np.ndarray, bool]:
    """Bins of the ``n_peaks`` largest local maxima (DC excluded).

    Peaks are at least two bins apart. If there are too few, the largest
    remaining bins pad the list and the second return value is True.
    """
    cand, _ = find_peaks(mag, distance=2)
    cand = cand[cand > 0]
    # stable sort: equal magnitudes keep ascending-frequency order
    order = cand[np.argsort(-mag[cand], kind="stable")]
    chosen = list(order[:n_peaks])
    degenerate = len(chosen) < n_peaks
    if degenerate:
        rest = [k for k in np.argsort(-mag[1:], kind="stable") + 1 if k not in chosen]
        chosen.extend(rest[:n_peaks - len(chosen)])
    return np.array(chosen, dtype=int), degenerate


@dataclass(frozen=True)
class PsiReport:
    peak_frequencies: np.ndarray
    target_magnitudes: np.ndarray
    predicted_magnitudes: np.ndarray
    occupancy: np.ndarray
    psi: float
    degenerate: bool = False


def psi(target, predicted, sample_rate: float, n_peaks: int = N_PEAKS, clamp: bool = True) -> PsiReport:
    """Peak similarity: sum over the target's dominant peaks of A_pred / A_target.

    Each ratio is capped at 1 unless ``clamp`` is False, so the index lies
    in [0, n_peaks].
    """
    y, p = _pair(target, predicted)
    if y.size // 2 + 1 < 2 * n_peaks:
        raise ValueError("series too short for the requested number of peaks")
    freqs, a_t = magnitude_spectrum(y, sample_rate)
    _, a_p = magnitude_spectrum(p, sample_rate)
    bins, degenerate = dominant_peaks(a_t, n_peaks)
    t_mag = a_t[bins]
    p_mag = a_p[bins]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t_mag > 0, p_mag / t_mag, 0.0)
    if clamp:
        ratio = np.minimum(ratio, 1.0)
    return PsiReport(freqs[bins], t_mag, p_mag, ratio, float(ratio.sum()), degenerate)


@dataclass(frozen=True)
class CorrelationReport:
    matrix: np.ndarray
    node_index: np.ndarray
    avg_ci: float
    avg_ci_normalized: float


def correlation_matrix(states) -> CorrelationReport:
    """Pearson matrix across nodes, correlation index R_i = row sums, Avg. CI.

    ``avg_ci`` is sum(R_i) / n; ``avg_ci_normalized`` divides once more by n
    so it lies in [-1, 1] whatever the node count.
    """
    if isinstance(states, StateTrajectory):
        S, labels = states.displacements, states.node_labels
    else:
        S = np.atleast_2d(np.asarray(states, dtype=float))
        labels = tuple(str(i) for i in range(S.shape[0]))
    if S.shape[1] < 2:
        raise ValueError("need at least two samples")
    X = S - S.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    for i, nv in enumerate(norms):
        if nv == 0:
            raise ZeroVarianceNodeError(i, labels[i])
    Z = X / norms[:, None]
    C = np.clip(Z @ Z.T, -1.0, 1.0)
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    R = C.sum(axis=1)
    n = C.shape[0]
    avg = float(R.sum() / n)
    return CorrelationReport(C, R, avg, avg / n)


@dataclass
class MetricReport:
    run_id: str
    nmse: Optional[float] = None
    mse: Optional[float] = None
    psi: Optional[PsiReport] = None
    correlation: Optional[CorrelationReport] = None
    extra: dict = field(default_factory=dict)

    HEADER = ["run_id", "nmse", "mse", "psi"] + [f"occupancy_{i + 1}" for i in range(N_PEAKS)] + \
        ["avg_ci", "avg_ci_normalized"]

    def row(self) -> list[str]:
        def fmt(x):
            return "" if x is None else repr(float(x))
        occ = list(self.psi.occupancy) if self.psi is not None else [None] * N_PEAKS
        occ = (occ + [None] * N_PEAKS)[:N_PEAKS]
        corr = self.correlation
        return [self.run_id, fmt(self.nmse), fmt(self.mse), fmt(self.psi.psi if self.psi else None)] + \
            [fmt(x) for x in occ] + [fmt(corr.avg_ci if corr else None),
                                     fmt(corr.avg_ci_normalized if corr else None)]


def export_reports(reports: Sequence[MetricReport], path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MetricReport.HEADER)
        for rep in sorted(reports, key=lambda r: r.run_id):
            w.writerow(rep.row())
    return path
