import warnings

import numpy as np
import pytest

from origami_reservoir.metrics import nmse
from origami_reservoir.readout import (RankDeficiencyWarning, ReadoutWeights, SplitSpec,
                                       baseline_input_regression, design_matrix, export_weights,
                                       import_weights, predict, split, train_readout)
from origami_reservoir.substrate import StateTrajectory

import oracles


def test_exact_representability():
    rng = np.random.default_rng(0)
    S = rng.normal(size=(6, 200))
    y = S[3].copy()
    w = train_readout(S, y)
    assert nmse(y, predict(w, S)) < 1e-10


def test_constant_target_absorbed_by_bias():
    S = np.random.default_rng(1).normal(size=(4, 100))
    w = train_readout(S, np.full(100, 2.5))
    assert np.mean(predict(w, S)) == pytest.approx(2.5, rel=1e-12)


def test_matches_normal_equations():
    rng = np.random.default_rng(2)
    S = rng.normal(size=(5, 200))
    y = rng.normal(size=200)
    w = train_readout(S, y)
    ref = oracles.least_squares(S, y)
    assert np.allclose(w.vector, ref, rtol=1e-8, atol=1e-12)


def test_residual_orthogonal_to_regressors():
    rng = np.random.default_rng(3)
    S = rng.normal(size=(7, 150))
    y = np.sin(np.arange(150) / 7.0) + rng.normal(size=150)
    w = train_readout(S, y)
    r = y - predict(w, S)
    phi = design_matrix(S)
    assert np.all(np.abs(phi.T @ r) < 1e-6 * np.linalg.norm(phi, axis=0) * np.linalg.norm(y))


def test_rank_deficiency_warns_and_flags():
    rng = np.random.default_rng(4)
    a = rng.normal(size=80)
    S = np.vstack([a, 2 * a, rng.normal(size=80)])
    y = rng.normal(size=80)
    with pytest.warns(RankDeficiencyWarning):
        w = train_readout(S, y)
    assert w.rank_deficient
    # minimum norm: the duplicated direction is shared 1:2
    assert w.weights[1] == pytest.approx(2 * w.weights[0], rel=1e-8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_readout(S, y, ridge=1e-3)


def test_ridge_monotone_training_error():
    rng = np.random.default_rng(5)
    S = rng.normal(size=(8, 120))
    y = S[0] * 0.3 + rng.normal(size=120)
    errs = [nmse(y, predict(train_readout(S, y, r), S)) for r in (0, 1e-3, 1e-1, 1, 10, 100)]
    assert all(b >= a - 1e-12 for a, b in zip(errs, errs[1:]))


def test_ridge_matches_tikhonov_formula():
    rng = np.random.default_rng(6)
    S = rng.normal(size=(4, 60))
    y = rng.normal(size=60)
    lam = 0.7
    phi = design_matrix(S)
    ref = np.linalg.solve(phi.T @ phi + lam * np.eye(5), phi.T @ y)
    assert np.allclose(train_readout(S, y, lam).vector, ref, rtol=1e-10)


def test_dimension_errors():
    with pytest.raises(ValueError):
        train_readout(np.zeros((2, 10)), np.zeros(9))
    w = ReadoutWeights(1.0, [0.0, 0.0])
    with pytest.raises(ValueError):
        predict(w, np.zeros((3, 5)))
    with pytest.raises(ValueError):
        train_readout(np.zeros((2, 10)), np.zeros(10), ridge=-1)
    with pytest.raises(ValueError):
        ReadoutWeights(np.nan, [1.0])


def test_predict_affine_and_pick():
    S = np.arange(12.0).reshape(3, 4)
    assert np.all(predict(ReadoutWeights(4.0, np.zeros(3)), S) == 4.0)
    assert np.array_equal(predict(ReadoutWeights(0.0, [0.0, 1.0, 0.0]), S), S[1])
    w = ReadoutWeights(0.5, [1.0, -2.0, 3.0])
    assert np.allclose(predict(w, S), 0.5 + np.array([1.0, -2.0, 3.0]) @ S)


def test_split_windows_on_ramp():
    n = 20
    traj = StateTrajectory(np.arange(n) / 10.0, np.arange(n, dtype=float)[None, :], ("a",))
    y = np.arange(n) * 10.0
    (S_tr, y_tr), (S_te, y_te) = split(traj, y, SplitSpec(5, 8, 4))
    assert list(S_tr.displacements[0]) == list(range(5, 13))
    assert list(S_te.displacements[0]) == list(range(13, 17))
    assert list(y_tr) == [10.0 * k for k in range(5, 13)]
    (S0, _), _ = split(traj, y, SplitSpec(0, 3, 0))
    assert list(S0.displacements[0]) == [0, 1, 2]
    with pytest.raises(ValueError):
        split(traj, y, SplitSpec(10, 8, 4))
    assert SplitSpec().total == 1200


def test_baseline_regression():
    u = np.linspace(-1, 1, 50)
    w = baseline_input_regression(u, 2 * u + 3)
    assert w.bias == pytest.approx(3.0) and w.weights[0] == pytest.approx(2.0)
    w = baseline_input_regression(u, np.full(50, 4.0))
    assert w.bias == pytest.approx(4.0) and abs(w.weights[0]) < 1e-12
    y = np.random.default_rng(0).normal(size=50)
    assert np.allclose(baseline_input_regression(u, y).vector, oracles.least_squares(u, y))


def test_full_states_never_worse_than_baseline_on_training():
    rng = np.random.default_rng(8)
    u = rng.normal(size=100)
    S = np.vstack([u, rng.normal(size=(5, 100))])
    y = u ** 2
    full = nmse(y, predict(train_readout(S, y), S))
    base = nmse(y, predict(baseline_input_regression(u, y), u[None, :]))
    assert full <= base + 1e-12


def test_weights_csv_round_trip(tmp_path):
    w = ReadoutWeights(0.1, [1 / 3, -2e-17, 5.0])
    path = export_weights(w, tmp_path / "w.csv")
    assert path.read_text().splitlines()[0] == "index,weight"
    back = import_weights(path)
    assert np.array_equal(back.vector, w.vector)
    (tmp_path / "bad.csv").write_text("index,weight\n0,1\n2,3\n")
    with pytest.raises(ValueError):
        import_weights(tmp_path / "bad.csv")
