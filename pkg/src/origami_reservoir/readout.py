"""Linear readout: O(t) = w0 + sum_i w_i s_i(t), fitted by pseudo-inverse."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .substrate import StateTrajectory
from .tasks import SampledSignal

#: Singular values below RCOND * sigma_max are treated as zero.
RCOND = 1e-10

StatesLike = Union[StateTrajectory, np.ndarray]


class RankDeficiencyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ReadoutWeights:
    bias: float
    weights: np.ndarray
    ridge: float = 0.0
    provenance: str = ""
    rank_deficient: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if not (np.isfinite(self.bias) and np.all(np.isfinite(w))):
            raise ValueError("readout weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_nodes(self) -> int:
        return self.weights.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(([self.bias], self.weights))


@dataclass(frozen=True)
class SplitSpec:
    washout: int = 600
    train: int = 300
    test: int = 300

    def __post_init__(self):
        if min(self.washout, self.train, self.test) < 0 or self.train <= 0:
            raise ValueError("split windows must be non-negative with train > 0")

    @property
    def total(self) -> int:
        return self.washout + self.train + self.test


def _matrix(states: StatesLike) -> np.ndarray:
    if isinstance(states, StateTrajectory):
        return states.displacements
    m = np.asarray(states, dtype=float)
    return m[None, :] if m.ndim == 1 else m


def design_matrix(states: StatesLike) -> np.ndarray:
    """[1 S^T]: one row per sample, bias column first."""
    S = _matrix(states)
    return np.column_stack([np.ones(S.shape[1]), S.T])


def solve_least_squares(phi: np.ndarray, y: np.ndarray, ridge: float = 0.0,
                        rcond: float = RCOND) -> tuple[np.ndarray, bool]:
    """Minimum-norm least squares via SVD; Tikhonov-filtered when ridge > 0.

    Returns the coefficient vector and whether the matrix was rank deficient.
    """
    U, s, Vt = np.linalg.svd(phi, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(phi.shape[1]), True
    keep = s > rcond * s[0]
    deficient = bool(np.sum(keep) < phi.shape[1])
    s_k = s[keep]
    if ridge > 0:
        filt = s_k / (s_k * s_k + ridge)
    else:
        filt = 1.0 / s_k
    coef = Vt[keep].T @ (filt * (U[:, keep].T @ y))
    return coef, deficient


def train_readout(states: StatesLike, target, ridge: float = 0.0, provenance: str = "",
                  rcond: float = RCOND) -> ReadoutWeights:
    """Fit bias and per-node weights so that predict(w, states) ~ target.

    ``ridge = 0`` gives the Moore-Penrose solution; a rank deficient design
    still solves (minimum norm) but sets ``rank_deficient`` and warns.
    """
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    y = np.asarray(target, dtype=float).ravel()
    phi = design_matrix(states)
    if phi.shape[0] != y.size:
        raise ValueError(f"target has {y.size} samples, states have {phi.shape[0]}")
    coef, deficient = solve_least_squares(phi, y, ridge, rcond)
    if deficient and ridge == 0:
        warnings.warn("design matrix is rank deficient; using the minimum-norm solution",
                      RankDeficiencyWarning, stacklevel=2)
    return ReadoutWeights(coef[0], coef[1:], ridge, provenance, deficient)


def predict(weights: ReadoutWeights, states: StatesLike) -> np.ndarray:
    S = _matrix(states)
    if S.shape[0] != weights.n_nodes:
        raise ValueError(f"readout expects {weights.n_nodes} nodes, got {S.shape[0]}")
    return weights.bias + weights.weights @ S


def split(trajectory: StateTrajectory, target, spec: SplitSpec = SplitSpec()):
    """Cut washout | train | test windows; returns ((S_tr, y_tr), (S_te, y_te))."""
    y = np.asarray(target, dtype=float).ravel()
    if y.size != trajectory.n_samples:
        raise ValueError("target and trajectory lengths differ")
    if spec.total > trajectory.n_samples:
        raise ValueError(f"split needs {spec.total} samples, trajectory has {trajectory.n_samples}")
    a = spec.washout
    b = a + spec.train
    c = b + spec.test
    return (trajectory.window(a, b), y[a:b]), (trajectory.window(b, c), y[b:c])


def baseline_input_regression(input, target, provenance: str = "baseline") -> ReadoutWeights:
    """One-feature affine fit y ~ w0 + w1 * u(t) with the readout solver."""
    u = input.channel if isinstance(input, SampledSignal) else np.asarray(input, dtype=float).ravel()
    return train_readout(u[None, :], target, 0.0, provenance)


def export_weights(weights: ReadoutWeights, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "weight"])
        for i, x in enumerate(weights.vector):
            w.writerow([i, repr(float(x))])
    return path


def import_weights(path, provenance: str = "") -> ReadoutWeights:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["index", "weight"]:
        raise ValueError("weights file must start with 'index,weight'")
    idx = [int(r[0]) for r in rows[1:]]
    if idx != list(range(len(idx))) or not idx:
        raise ValueError("weight indices must run 0..n without gaps")
    vec = np.array([float(r[1]) for r in rows[1:]])
    return ReadoutWeights(vec[0], vec[1:], provenance=provenance)
