"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line with the measured quantity and the
wall time against its budget, then asserts both.
"""

import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from origami_reservoir.harness import ExperimentPlan, default_plan, run_plan
from origami_reservoir.metrics import correlation_matrix, mse, nmse, psi
from origami_reservoir.perception import HAMMER_BAND, HAMMER_WEIGHT
from origami_reservoir.readout import RankDeficiencyWarning, train_readout
from origami_reservoir.substrate import preset
from origami_reservoir.tasks import NarmaParams, narma

import oracles

A1, A2, A3 = 0.002, 0.006, 0.02
SEEDS = range(5)


@pytest.fixture
def verdict(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(number, ok, detail, elapsed, budget):
        ok = bool(ok) and elapsed < budget
        line = (f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} "
                f"[{elapsed:.1f} s, budget {budget:g} s]")
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        return ok

    return emit


def test_criterion_01_formula_oracles(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0

    def rel(a, b):
        a, b = np.asarray(a, float), np.asarray(b, float)
        return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))

    for _ in range(100):
        nodes = int(rng.integers(2, 11))
        n = int(rng.integers(64, 501))
        S = rng.normal(size=(nodes, n)) + 0.5 * rng.normal(size=n)
        y = S.T @ rng.normal(size=nodes) + rng.normal(size=n)
        p = y + rng.normal(scale=rng.uniform(0.05, 2.0), size=n)
        worst = max(worst, rel(nmse(y, p), oracles.nmse(y, p)))
        worst = max(worst, rel(mse(y, p), oracles.mse(y, p)))
        rep = psi(y, p, 60.0)
        total, occ, _ = oracles.psi(y, p, 60.0)
        worst = max(worst, rel(rep.psi, total), rel(rep.occupancy, occ))
        C, R, avg, avg_n = oracles.pearson_matrix(S)
        cr = correlation_matrix(S)
        worst = max(worst, rel(cr.matrix, C), rel(cr.node_index, R), rel(cr.avg_ci, avg),
                    rel(cr.avg_ci_normalized, avg_n))
        worst = max(worst, rel(train_readout(S, y).vector, oracles.least_squares(S, y)))
    elapsed = time.perf_counter() - t0
    ok = verdict(1, worst <= 1e-8, f"worst relative deviation {worst:.2e} (limit 1e-8)", elapsed, 10)
    assert ok


def test_criterion_02_narma_recursion(verdict):
    t0 = time.perf_counter()
    y = narma(np.zeros(5), NarmaParams(2))
    hand = y[2] == 0.1 and y[3] == 0.14 and abs(y[4] - 0.1616) <= 4 * np.spacing(0.1616)
    fixed = 0.1 / (1 - 0.3)
    devs = [abs(narma(np.zeros(200), NarmaParams(n))[-1] - fixed) for n in (3, 5, 10, 15)]
    elapsed = time.perf_counter() - t0
    detail = f"NARMA2 {[float(v) for v in y[2:5]]}, fixed-point deviation {max(devs):.1e}"
    ok = verdict(2, hand and max(devs) <= 1e-9, detail, elapsed, 1)
    assert ok


def test_criterion_03_psi_bounds(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    ok_all = True
    for _ in range(20):
        n = int(rng.integers(100, 600))
        t = np.arange(n) / 60.0
        y = sum(rng.uniform(0.1, 1) * np.sin(2 * np.pi * rng.uniform(0.3, 29) * t + rng.uniform(0, 6))
                for _ in range(10)) + 0.1 * rng.normal(size=n)
        noisy = psi(y, y + rng.normal(size=n), 60.0)
        ok_all &= psi(y, y, 60.0).psi == 8.0 and psi(y, np.zeros(n), 60.0).psi == 0.0
        ok_all &= bool(np.all((noisy.occupancy >= 0) & (noisy.occupancy <= 1)))
    elapsed = time.perf_counter() - t0
    assert verdict(3, ok_all, "psi(y,y)=8, psi(y,0)=0, occupancies in [0,1] on 20 signals",
                   elapsed, 5)


def _narma_runs(amplitude, orders, seeds):
    out = []
    for s in seeds:
        plan = ExperimentPlan("NarmaSweep", (preset("C5"),), amplitudes=(amplitude,),
                              narma_orders=orders, repetitions=1, seed=s)
        out.append(run_plan(plan))
    return out


def test_criterion_04_reservoir_beats_baseline(verdict):
    t0 = time.perf_counter()
    rows = [t.rows[0] for t in _narma_runs(A3, (2,), SEEDS)]
    wins = sum(not r.failed and r.nmse < r.baseline_nmse for r in rows)
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"{r.nmse:.4f}<{r.baseline_nmse:.4f}" for r in rows)
    assert verdict(4, wins == 5, f"{wins}/5 seeds, NMSE vs baseline: {detail}", elapsed, 120)


def test_criterion_05_amplitude_trend(verdict):
    t0 = time.perf_counter()
    med = {}
    for amp in (A1, A3):
        vals = [t.rows[0].nmse for t in _narma_runs(amp, (10,), SEEDS)]
        med[amp] = float(np.median(vals))
    elapsed = time.perf_counter() - t0
    assert verdict(5, med[A3] <= med[A1],
                   f"median NARMA10 NMSE {med[A3]:.4f} at A={A3} vs {med[A1]:.4f} at A={A1}",
                   elapsed, 300)


def test_criterion_06_psi_nmse_inverse(verdict):
    t0 = time.perf_counter()
    table = run_plan(default_plan("NarmaSweep", seed=0))
    cells = [r for r in table.averaged().rows if r.item == "NARMA10" and not r.failed]
    rho = spearmanr([r.psi for r in cells], [r.nmse for r in cells]).statistic
    elapsed = time.perf_counter() - t0
    assert verdict(6, len(cells) == 15 and rho <= -0.4,
                   f"Spearman(PSI, NMSE) = {rho:.3f} over {len(cells)} cells (limit -0.4)",
                   elapsed, 600)


def test_criterion_07_training_data_trend(verdict):
    t0 = time.perf_counter()
    err = {1: [], 2: [], 5: []}
    single = []
    for s in SEEDS:
        plan = ExperimentPlan("PayloadSweep", (preset("C5"),), amplitudes=(A2,), frequencies=(4.0,),
                              repetitions=1, seed=s, ridge=0.0)
        table = run_plan(plan)
        assert not table.failures
        for r in table.rows:
            if r.item.startswith("train"):
                k = int(r.item[5:r.item.index("/")])
                truth = float(r.item.split("/m")[1])
                err[k].append(abs(r.estimate - truth))
                if k == 1:
                    single.append(r.estimate)
    mae = {k: float(np.mean(v)) for k, v in err.items()}
    spread = max(abs(e) for e in single)
    elapsed = time.perf_counter() - t0
    ok = mae[5] <= mae[2] <= mae[1] and spread <= 10.0
    assert verdict(7, ok, f"MAE 5/2/1 masses = {mae[5]:.2f}/{mae[2]:.2f}/{mae[1]:.2f} g, "
                          f"1-mass estimates within {spread:.1e} g of 0", elapsed, 300)


def test_criterion_08_correlation_vs_stiffness(verdict):
    t0 = time.perf_counter()
    freqs = tuple(np.arange(2.0, 10.01, 0.5))
    plan = ExperimentPlan("PayloadSweep", (preset("C5"), preset("C6")), amplitudes=(A2,),
                          frequencies=freqs, repetitions=1, masses=(0.0,), training_sets=(),
                          ridge=0.0)
    table = run_plan(plan)
    first = {}
    for cfg in ("C5", "C6"):
        curve = {float(r.signal[8:-2]): r.avg_ci_normalized
                 for r in table.select(config=cfg, item="corr")}
        below = [f for f in sorted(curve) if curve[f] < 0.9]
        first[cfg] = below[0] if below else float("inf")
    elapsed = time.perf_counter() - t0
    assert verdict(8, first["C6"] > first["C5"],
                   f"first drop below 0.9: stiff {first['C6']} Hz, soft {first['C5']} Hz",
                   elapsed, 300)


def test_criterion_09_two_stage_classification(verdict):
    t0 = time.perf_counter()
    plan = ExperimentPlan("MultiTask", (preset("C7"),), amplitudes=(1.0,), pwm=((0.1, 0.2),),
                          repetitions=10, seed=0, ridge=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        table = run_plan(plan)
    correct = 0
    for rep in range(10):
        items = [r for r in table.select(repetition=rep) if r.item.startswith("item")]
        good = bool(items)
        for r in items:
            in_band = HAMMER_BAND[0] <= r.estimate <= HAMMER_BAND[1]
            if r.item.startswith(f"item{HAMMER_WEIGHT:g}/"):
                good &= in_band and r.label == r.item.split("/")[1]
            else:
                good &= not in_band and r.label == "none"
        correct += good
    elapsed = time.perf_counter() - t0
    assert verdict(9, correct >= 9, f"{correct}/10 repetitions fully correct", elapsed, 300)


def test_criterion_10_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        proc = subprocess.run([sys.executable, "-m", "origami_reservoir.harness", "narma",
                               "--seed", "17", "--out-dir", str(d)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append({p.name: p.read_bytes() for p in sorted(Path(d).glob("*.csv"))})
    rows = outs[0]["narmasweep.csv"].count(b"\n") - 1
    same = outs[0] == outs[1] and len(outs[0]) == 3
    elapsed = time.perf_counter() - t0
    assert verdict(10, same and rows == 75 * 3,
                   f"{len(outs[0])} CSVs byte-identical across runs, {rows} result rows",
                   elapsed, 900)
