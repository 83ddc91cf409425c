from dataclasses import replace

import numpy as np
import pytest
import yaml

from origami_reservoir.harness import (COLUMNS, ExperimentPlan, ResultTable, Row, cell_rng,
                                       default_plan, export_csv, load_plan, main,
                                       optimal_config_matrix, plan_from_dict, read_table, run_plan)
from origami_reservoir.readout import SplitSpec
from origami_reservoir.substrate import preset

SMALL_SPLIT = SplitSpec(300, 300, 300)


def _small_narma(**kw):
    base = dict(task="NarmaSweep", configurations=(preset("C1"), preset("C5")),
                amplitudes=(0.006,), narma_orders=(2, 5), repetitions=2, split=SMALL_SPLIT, seed=3)
    base.update(kw)
    return ExperimentPlan(**base)


@pytest.fixture(scope="module")
def small_table():
    return run_plan(_small_narma())


def test_row_count_and_order(small_table):
    assert len(small_table.rows) == 2 * 1 * 2 * 2
    assert not small_table.failures
    keys = [r.key for r in small_table.rows]
    assert keys == sorted(keys)
    assert all(r.nmse is not None and r.psi is not None for r in small_table.rows)


def test_export_is_byte_stable(small_table, tmp_path):
    a = export_csv(small_table, tmp_path / "a.csv").read_bytes()
    again = run_plan(_small_narma())
    b = export_csv(again, tmp_path / "b.csv").read_bytes()
    assert a == b and b"\r" not in a
    assert a.splitlines()[0].decode() == ",".join(COLUMNS)


def test_seed_changes_results(small_table):
    other = run_plan(_small_narma(seed=4))
    assert [r.nmse for r in other.rows] != [r.nmse for r in small_table.rows]


def test_read_table_round_trip(small_table, tmp_path):
    path = export_csv(small_table, tmp_path / "t.csv")
    back = read_table(path)
    assert back.rows == small_table.rows
    (tmp_path / "bad.csv").write_text("config,nmse\nC1,0.1\n")
    with pytest.raises(ValueError):
        read_table(tmp_path / "bad.csv")


def test_averaged_excludes_failed_rows():
    rows = [Row("C1", "s", 1.0, "NARMA2", 0, nmse=0.2),
            Row("C1", "s", 1.0, "NARMA2", 1, nmse=0.4),
            Row("C1", "s", 1.0, "NARMA2", 2, nmse=None, status="failed: boom")]
    avg = ResultTable(rows).averaged()
    assert len(avg.rows) == 1
    assert avg.rows[0].nmse == pytest.approx(0.3) and avg.rows[0].repetition == -1


def _hand_table(scale=1.0):
    nm = {("C1", "NARMA2"): 0.5, ("C2", "NARMA2"): 0.2, ("C5", "NARMA2"): 0.4,
          ("C1", "NARMA10"): 0.9, ("C2", "NARMA10"): 0.8, ("C5", "NARMA10"): 0.3}
    return ResultTable([Row(c, "s", 0.01, item, 0, nmse=scale * v) for (c, item), v in nm.items()])


def test_optimal_matrix_on_hand_table():
    cells = optimal_config_matrix(_hand_table())
    assert [c.item for c in cells] == ["NARMA2", "NARMA10"]
    assert cells[0].best_config == "C2" and cells[0].reduction_percent == pytest.approx(50.0)
    # baseline best gives zero reduction
    assert cells[1].best_config == "C5" and cells[1].reduction_percent == 0.0
    scaled = optimal_config_matrix(_hand_table(7.5))
    assert [c.best_config for c in scaled] == [c.best_config for c in cells]
    assert [c.reduction_percent for c in scaled] == pytest.approx([c.reduction_percent for c in cells])
    with pytest.raises(ValueError):
        optimal_config_matrix(_hand_table(), baseline_config="C9")


def test_optimal_matrix_export(tmp_path):
    path = export_csv(optimal_config_matrix(_hand_table()), tmp_path / "o.csv")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("amplitude,item,best_config")
    assert len(lines) == 3


def test_failed_cells_are_marked_not_raised():
    plan = _small_narma(configurations=(replace(preset("C1"), blowup_displacement=1e-6),
                                        preset("C5")), repetitions=1, narma_orders=(2, 20))
    table = run_plan(plan)
    c1 = table.select(config="C1")
    assert c1 and all(r.failed and "InstabilityError" in r.status for r in c1)
    c5 = {r.item: r for r in table.select(config="C5")}
    assert not c5["NARMA2"].failed
    assert c5["NARMA20"].failed and "NarmaDivergence" in c5["NARMA20"].status


def test_plan_validation():
    with pytest.raises(ValueError):
        _small_narma(task="Other")
    with pytest.raises(ValueError):
        _small_narma(amplitudes=())
    with pytest.raises(ValueError):
        _small_narma(configurations=(preset("C1"), preset("C1")))
    with pytest.raises(ValueError):
        plan_from_dict({"task": "NarmaSweep", "configurations": ["C1"], "colour": 1})


def test_plan_yaml_loading(tmp_path):
    doc = {"task": "NarmaSweep", "seed": 11,
           "configurations": ["C2", {"label": "mix", "modules": ["010", "101"],
                                     "damping_ratio": 0.05}],
           "amplitudes": [0.004], "narma_orders": [2], "repetitions": 1,
           "split": {"washout": 300, "train": 300, "test": 300}}
    path = tmp_path / "plan.yaml"
    path.write_text(yaml.safe_dump(doc))
    plan = load_plan(path)
    assert plan.seed == 11 and plan.split == SMALL_SPLIT
    assert [c.label for c in plan.configurations] == ["C2", "mix"]
    assert plan.configurations[1].damping_ratio == 0.05
    assert len(plan.configurations[1].modules) == 2


def test_example_plan_file_loads():
    from pathlib import Path
    plan = load_plan(Path(__file__).resolve().parents[1] / "plans" / "narma_small.yaml")
    assert plan.task == "NarmaSweep"


def test_default_plans():
    assert len(default_plan("NarmaSweep").configurations) == 5
    assert default_plan("PayloadSweep").frequencies == (2.0, 4.0, 6.0, 8.0, 10.0)
    assert default_plan("MultiTask").amplitudes == (1.0,)
    with pytest.raises(ValueError):
        default_plan("Nope")


def test_cell_rng_depends_on_key_only():
    a = cell_rng(5, "narma", "C1", 0.01, 0).random(3)
    assert np.array_equal(a, cell_rng(5, "narma", "C1", 0.01, 0).random(3))
    assert not np.array_equal(a, cell_rng(5, "narma", "C1", 0.01, 1).random(3))
    assert not np.array_equal(a, cell_rng(6, "narma", "C1", 0.01, 0).random(3))


def test_payload_cell_rows():
    plan = ExperimentPlan("PayloadSweep", (preset("C5"),), amplitudes=(0.006,), frequencies=(4.0,),
                          repetitions=1, ridge=0.0, masses=(0.0, 170.0),
                          training_sets=((0.0,), (0.0, 170.0)))
    table = run_plan(plan)
    items = sorted(r.item for r in table.rows)
    assert items == sorted(["corr", "train1/m0", "train1/m170", "train2/m0", "train2/m170"])
    est = {r.item: r.estimate for r in table.rows}
    assert est["train1/m170"] == pytest.approx(0.0, abs=1e-6)
    assert abs(est["train2/m170"] - 170.0) < abs(est["train1/m170"] - 170.0)


def _write_plan(tmp_path, **kw):
    doc = {"task": "NarmaSweep", "configurations": ["C1"], "amplitudes": [0.006],
           "narma_orders": [2], "repetitions": 1,
           "split": {"washout": 300, "train": 300, "test": 300}}
    doc.update(kw)
    path = tmp_path / "plan.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


def test_cli_exit_codes(tmp_path, capsys):
    plan = _write_plan(tmp_path)
    assert main(["narma", "--plan", str(plan), "--out-dir", str(tmp_path / "ok")]) == 0
    assert (tmp_path / "ok" / "narmasweep.csv").exists()
    bad = _write_plan(tmp_path, configurations=[{"preset": "C1", "blowup_displacement": 1e-6}])
    assert main(["sweep", "--plan", str(bad), "--out-dir", str(tmp_path / "bad")]) == 1
    assert "InstabilityError" in capsys.readouterr().err
    assert main(["payload", "--plan", str(plan), "--out-dir", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        main(["narma", "--bogus"])


def test_cli_report_and_simulate(tmp_path):
    plan = _write_plan(tmp_path, configurations=["C1", "C5"])
    main(["narma", "--plan", str(plan), "--out-dir", str(tmp_path)])
    assert main(["report", str(tmp_path / "narmasweep.csv"), "--out-dir", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "narmasweep_optimal.csv").exists()
    assert main(["simulate", "--config", "C2", "--duration", "2", "--out-dir",
                 str(tmp_path / "sim")]) == 0
    assert (tmp_path / "sim" / "trajectory_C2.csv").exists()
