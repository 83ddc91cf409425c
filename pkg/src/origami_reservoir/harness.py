"""Experiment grids, result tables and the command-line entry point.

A plan is a YAML mapping, for example::

    task: NarmaSweep
    seed: 7
    configurations: [C1, C2, C3, C4, C5]
    amplitudes: [0.002, 0.006, 0.02]
    narma_orders: [2, 5, 10]
    repetitions: 5
    split: {washout: 600, train: 300, test: 300}

Configurations are preset names or mappings with ``label``, ``modules``
(list of state words) and any ``ChainConfig`` field as an override.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
import zlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import yaml

from .metrics import correlation_matrix, nmse, psi
from .perception import (HAMMER_WEIGHT, PAYLOAD_MASSES, TASK3_WEIGHTS, classify_payload,
                         estimate_weight, reconstruct_inputs, simulate_labeled_run,
                         train_orientation_readout, train_weight_estimator)
from .readout import RankDeficiencyWarning, SplitSpec, baseline_input_regression, predict, split, \
    train_readout
from .substrate import (ChainConfig, InstabilityError, ModuleState, PRESETS, add_measurement_noise,
                        build_chain, chain_config, export_trajectory, preset, simulate)
from .tasks import (NarmaDivergenceError, NarmaParams, downsample, narma_target,
                    pwm3, single_harmonic, triple_harmonic)

TASKS = ("NarmaSweep", "PayloadSweep", "MultiTask")
#: Drive signals are generated at this rate and interpolated by the integrator.
DRIVE_RATE = 600.0


@dataclass(frozen=True)
class ExperimentPlan:
    task: str
    configurations: tuple[ChainConfig, ...]
    amplitudes: tuple[float, ...] = (0.002, 0.006, 0.02)
    frequencies: tuple[float, ...] = ()
    narma_orders: tuple[int, ...] = (2, 5, 10)
    repetitions: int = 5
    seed: int = 0
    split: SplitSpec = SplitSpec()
    ridge: float = 1e-7
    measurement_noise: float = 1e-5
    perturbation: float = 1e-4
    narma_classic: bool = False
    masses: tuple[float, ...] = PAYLOAD_MASSES
    training_sets: tuple[tuple[float, ...], ...] = ((0.0,), (0.0, 170.0), PAYLOAD_MASSES)
    pwm: tuple[tuple[float, float], ...] = ((0.1, 0.2), (0.05, 0.1))
    segment: float = 5.0
    washout: float = 10.0

    def __post_init__(self):
        conv = {
            "configurations": tuple(self.configurations),
            "amplitudes": tuple(float(a) for a in self.amplitudes),
            "frequencies": tuple(float(f) for f in self.frequencies),
            "narma_orders": tuple(int(n) for n in self.narma_orders),
            "masses": tuple(float(m) for m in self.masses),
            "training_sets": tuple(tuple(float(m) for m in s) for s in self.training_sets),
            "pwm": tuple((float(a), float(b)) for a, b in self.pwm),
        }
        for k, v in conv.items():
            object.__setattr__(self, k, v)
        self.validate()

    def validate(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.configurations:
            raise ValueError("plan needs at least one configuration")
        labels = [c.label for c in self.configurations]
        if len(set(labels)) != len(labels) or not all(labels):
            raise ValueError("configurations need distinct, non-empty labels")
        grid = {"NarmaSweep": (self.amplitudes, self.narma_orders),
                "PayloadSweep": (self.amplitudes, self.frequencies, self.masses),
                "MultiTask": (self.amplitudes, self.pwm)}[self.task]
        if not all(grid):
            raise ValueError(f"{self.task} plan has an empty grid axis")
        if self.ridge < 0 or self.measurement_noise < 0 or self.perturbation < 0:
            raise ValueError("ridge, measurement_noise and perturbation must be non-negative")


def _config_from(entry) -> ChainConfig:
    if isinstance(entry, ChainConfig):
        return entry
    if isinstance(entry, str):
        return preset(entry)
    entry = dict(entry)
    label = entry.pop("label", None)
    modules = entry.pop("modules", None)
    base = entry.pop("preset", None)
    if base is not None:
        cfg = preset(base)
        if modules is not None:
            cfg = replace(cfg, modules=tuple(ModuleState.parse(str(m)) for m in modules))
    elif modules is not None:
        cfg = chain_config([str(m) for m in modules])
    else:
        raise ValueError("configuration entry needs 'preset' or 'modules'")
    known = {f.name for f in fields(ChainConfig)}
    unknown = set(entry) - known
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    cfg = replace(cfg, **{k: float(v) if isinstance(v, (int, float)) and k != "nodes_per_module"
                          else v for k, v in entry.items()})
    return replace(cfg, label=label or cfg.label or "custom")


def plan_from_dict(data: dict) -> ExperimentPlan:
    data = dict(data)
    known = {f.name for f in fields(ExperimentPlan)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown plan keys: {sorted(unknown)}")
    data["configurations"] = tuple(_config_from(c) for c in data.get("configurations", ()))
    if "split" in data:
        data["split"] = SplitSpec(**data["split"])
    for key in ("ridge", "measurement_noise", "perturbation", "segment", "washout"):
        if key in data:
            data[key] = float(data[key])
    return ExperimentPlan(**data)


def load_plan(path) -> ExperimentPlan:
    with Path(path).open(encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError("plan file must hold a mapping")
    return plan_from_dict(data)


def default_plan(task: str, seed: int = 0) -> ExperimentPlan:
    """The stock grids: 5x3 NARMA, soft/stiff payload, SMA arm multitask."""
    if task == "NarmaSweep":
        cfgs = tuple(preset(f"C{i}") for i in range(1, 6))
        return ExperimentPlan(task, cfgs, seed=seed)
    if task == "PayloadSweep":
        return ExperimentPlan(task, (preset("C5"), preset("C6")), amplitudes=(0.006,),
                              frequencies=(2.0, 4.0, 6.0, 8.0, 10.0), repetitions=3, seed=seed,
                              ridge=0.0)
    if task == "MultiTask":
        return ExperimentPlan(task, (preset("C7"), preset("C8")), amplitudes=(1.0,),
                              repetitions=3, seed=seed, ridge=0.0)
    raise ValueError(f"unknown task {task!r}")


# ----------------------------------------------------------------------------
# result table

COLUMNS = ("config", "signal", "amplitude", "item", "repetition", "nmse", "psi", "mse",
           "avg_ci", "avg_ci_normalized", "baseline_nmse", "estimate", "label", "status")
_NUMERIC = ("nmse", "psi", "mse", "avg_ci", "avg_ci_normalized", "baseline_nmse", "estimate")


@dataclass
class Row:
    config: str
    signal: str
    amplitude: float
    item: str
    repetition: int
    nmse: Optional[float] = None
    psi: Optional[float] = None
    mse: Optional[float] = None
    avg_ci: Optional[float] = None
    avg_ci_normalized: Optional[float] = None
    baseline_nmse: Optional[float] = None
    estimate: Optional[float] = None
    label: str = ""
    status: str = "ok"

    @property
    def key(self):
        return (self.config, self.signal, self.amplitude, _item_order(self.item), self.repetition)

    @property
    def failed(self) -> bool:
        return self.status != "ok"


def _item_order(item: str):
    # NARMA10 after NARMA2: split off a trailing number for natural ordering
    head = item.rstrip("0123456789.-")
    tail = item[len(head):]
    try:
        return (head, float(tail), item)
    except ValueError:
        return (item, 0.0, item)


@dataclass
class ResultTable:
    rows: list[Row] = field(default_factory=list)
    plan: Optional[ExperimentPlan] = None

    def sorted(self) -> "ResultTable":
        return ResultTable(sorted(self.rows, key=lambda r: r.key), self.plan)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if r.failed]

    def select(self, **match) -> list[Row]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]

    def averaged(self) -> "ResultTable":
        """Mean of each numeric column over repetitions, failed rows excluded."""
        groups: dict = {}
        for r in self.rows:
            groups.setdefault((r.config, r.signal, r.amplitude, r.item), []).append(r)
        out = []
        for (cfg, sig, amp, item), rs in groups.items():
            good = [r for r in rs if not r.failed]
            avg = Row(cfg, sig, amp, item, -1, status="ok" if good else "failed")
            for col in _NUMERIC:
                vals = [getattr(r, col) for r in good if getattr(r, col) is not None]
                setattr(avg, col, float(np.mean(vals)) if vals else None)
            labels = sorted({r.label for r in good if r.label})
            avg.label = "|".join(labels)
            out.append(avg)
        return ResultTable(out, self.plan).sorted()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def read_table(path) -> ResultTable:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError("not a result table: unexpected header")
        rows = []
        for d in reader:
            kw: dict[str, Any] = {}
            for col in COLUMNS:
                v = d[col]
                if col in _NUMERIC:
                    kw[col] = float(v) if v != "" else None
                elif col == "amplitude":
                    kw[col] = float(v)
                elif col == "repetition":
                    kw[col] = int(v)
                else:
                    kw[col] = v
            rows.append(Row(**kw))
    return ResultTable(rows)


@dataclass(frozen=True)
class OptimalCell:
    amplitude: float
    item: str
    best_config: str
    best_nmse: float
    baseline_nmse: float
    reduction_percent: float


def optimal_config_matrix(table: ResultTable, baseline_config: str = "C5") -> list[OptimalCell]:
    """Per (amplitude, item) cell: lowest-NMSE configuration and its gain over the baseline.

    Reduction is ``100 * (base - best) / base``; the baseline competes too,
    so the figure is never negative.
    """
    avg = table.averaged() if any(r.repetition >= 0 for r in table.rows) else table
    cells: dict = {}
    for r in avg.rows:
        if r.nmse is None or r.failed:
            continue
        cells.setdefault((r.amplitude, r.item), {})[r.config] = r.nmse
    out = []
    for (amp, item), by_cfg in sorted(cells.items(), key=lambda kv: (kv[0][0], _item_order(kv[0][1]))):
        if baseline_config not in by_cfg:
            raise ValueError(f"baseline {baseline_config!r} missing for amplitude {amp}, {item}")
        best = min(sorted(by_cfg), key=lambda c: by_cfg[c])
        base = by_cfg[baseline_config]
        red = 100.0 * (base - by_cfg[best]) / base if base > 0 else 0.0
        out.append(OptimalCell(amp, item, best, by_cfg[best], base, red))
    return out


def export_csv(obj, path) -> Path:
    """Byte-stable CSV for a ResultTable, an optimal-config matrix or metric reports."""
    if isinstance(obj, ResultTable):
        tab = obj.sorted()
        return _write_rows(path, COLUMNS, ([getattr(r, c) for c in COLUMNS] for r in tab.rows))
    items = list(obj)
    if not items or isinstance(items[0], OptimalCell):
        header = [f.name for f in fields(OptimalCell)]
        return _write_rows(path, header, ([getattr(c, h) for h in header] for c in items))
    from .metrics import MetricReport, export_reports
    if isinstance(items[0], MetricReport):
        return export_reports(items, path)
    raise TypeError(f"cannot export {type(items[0]).__name__}")


# ----------------------------------------------------------------------------
# grid execution

def cell_rng(seed: int, *key) -> np.random.Generator:
    """Generator fixed by the plan seed and the cell key, independent of run order."""
    tag = zlib.crc32("|".join(str(k) for k in key).encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, tag]))


def _failure(exc: Exception) -> str:
    return f"failed: {type(exc).__name__}: {exc}"


def _narma_cell(plan: ExperimentPlan, cfg: ChainConfig, amp: float, rep: int) -> list[Row]:
    fs = cfg.sample_rate
    duration = plan.split.total / fs
    signal = f"triple{amp:g}"
    rows = [Row(cfg.label, signal, amp, f"NARMA{n}", rep) for n in plan.narma_orders]
    try:
        rng = cell_rng(plan.seed, "narma", cfg.label, amp, rep)
        model = build_chain(cfg)
        drive = triple_harmonic(amp, duration, DRIVE_RATE)
        x0 = rng.uniform(-plan.perturbation, plan.perturbation, model.masses.size)
        traj = simulate(model, drive, duration, initial_displacement=x0).trajectory
        traj = add_measurement_noise(traj, plan.measurement_noise, rng)
        u = downsample(drive, fs)
        corr = correlation_matrix(traj.window(plan.split.washout, plan.split.total).moving_nodes())
    except (InstabilityError, ValueError) as exc:
        for r in rows:
            r.status = _failure(exc)
        return rows
    for row, order in zip(rows, plan.narma_orders):
        try:
            y = narma_target(u, NarmaParams(order, classic=plan.narma_classic))
            (S_tr, y_tr), (S_te, y_te) = split(traj, y, plan.split)
            w = train_readout(S_tr, y_tr, plan.ridge, provenance=row.item)
            p = predict(w, S_te)
            a, b = plan.split.washout, plan.split.washout + plan.split.train
            base = baseline_input_regression(u.channel[a:b], y_tr)
            p0 = predict(base, u.channel[b:b + plan.split.test][None, :])
            row.nmse = nmse(y_te, p)
            row.mse = float(np.mean((y_te - p) ** 2))
            row.psi = psi(y_te, p, fs).psi
            row.baseline_nmse = nmse(y_te, p0)
            row.avg_ci, row.avg_ci_normalized = corr.avg_ci, corr.avg_ci_normalized
        except (NarmaDivergenceError, ValueError) as exc:
            row.status = _failure(exc)
    return rows


def _payload_cell(plan: ExperimentPlan, cfg: ChainConfig, amp: float, freq: float,
                  rep: int) -> list[Row]:
    signal = f"harmonic{freq:g}Hz"
    duration = plan.washout + plan.segment
    rows: list[Row] = []
    try:
        drive = single_harmonic(amp, freq, duration, DRIVE_RATE)
        seed = int(cell_rng(plan.seed, "payload", cfg.label, amp, freq, rep).integers(2 ** 31))
        common = dict(seed=seed, noise=plan.measurement_noise, perturbation=plan.perturbation)
        train = [simulate_labeled_run(cfg, drive, duration, m, repetition=0, **common)
                 for m in plan.masses]
        test = [simulate_labeled_run(cfg, drive, duration, m, repetition=1, **common)
                for m in plan.masses]
        fs = cfg.sample_rate
        a = int(round(plan.washout * fs))
        corr = correlation_matrix(test[0].trajectory.window(a, test[0].trajectory.n_samples)
                                  .moving_nodes())
    except (InstabilityError, ValueError) as exc:
        return [Row(cfg.label, signal, amp, "corr", rep, status=_failure(exc))]
    rows.append(Row(cfg.label, signal, amp, "corr", rep, avg_ci=corr.avg_ci,
                    avg_ci_normalized=corr.avg_ci_normalized))
    for tset in plan.training_sets:
        tag = f"train{len(tset)}"
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RankDeficiencyWarning)
                bundle = train_weight_estimator(train, tset, plan.segment, plan.washout, plan.ridge)
        except ValueError as exc:
            rows.extend(Row(cfg.label, signal, amp, f"{tag}/m{m:g}", rep, status=_failure(exc))
                        for m in plan.masses)
            continue
        for run in test:
            est = estimate_weight(bundle, run)
            rows.append(Row(cfg.label, signal, amp, f"{tag}/m{run.payload_mass:g}", rep,
                            mse=(est - run.payload_mass) ** 2, estimate=est))
    return rows


def _multitask_cell(plan: ExperimentPlan, cfg: ChainConfig, amp: float, on: float, off: float,
                    rep: int) -> list[Row]:
    signal = f"pwm{on:g}/{off:g}"
    duration = max(plan.washout + plan.segment, 30.0)
    try:
        drive = pwm3(on, off, amp, duration, DRIVE_RATE)
        seed = int(cell_rng(plan.seed, "multitask", cfg.label, amp, on, off, rep).integers(2 ** 31))
        common = dict(seed=seed, noise=plan.measurement_noise, perturbation=plan.perturbation)
        items = [simulate_labeled_run(cfg, drive, duration, m, 0 if m == HAMMER_WEIGHT else None,
                                      repetition=0, **common) for m in TASK3_WEIGHTS]
        hammer = [simulate_labeled_run(cfg, drive, duration, HAMMER_WEIGHT, o, repetition=0, **common)
                  for o in (-1, 0, 1)]
        tests = [simulate_labeled_run(cfg, drive, duration, m, None, repetition=1, **common)
                 for m in TASK3_WEIGHTS[:-1]]
        tests += [simulate_labeled_run(cfg, drive, duration, HAMMER_WEIGHT, o, repetition=1, **common)
                  for o in (-1, 0, 1)]
        bare = simulate_labeled_run(cfg, drive, duration, 0.0, repetition=1, **common)
    except (InstabilityError, ValueError) as exc:
        return [Row(cfg.label, signal, amp, "run", rep, status=_failure(exc))]
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        _, errors = reconstruct_inputs(bare, ridge=plan.ridge)
        fs = cfg.sample_rate
        corr = correlation_matrix(bare.trajectory.window(int(round(plan.washout * fs)),
                                                         bare.trajectory.n_samples).moving_nodes())
        for ch, e in enumerate(errors):
            rows.append(Row(cfg.label, signal, amp, f"reconstruct{ch + 1}", rep, mse=e,
                            avg_ci=corr.avg_ci, avg_ci_normalized=corr.avg_ci_normalized))
        bundle = train_weight_estimator(items, TASK3_WEIGHTS, plan.segment, plan.washout, plan.ridge)
        orient = train_orientation_readout(hammer, plan.segment, plan.washout, plan.ridge)
    for run in tests:
        grams, label = classify_payload(bundle, orient, run)
        truth = "" if run.orientation is None else f"{int(run.orientation):+d}"
        item = f"item{run.payload_mass:g}" + (f"/{truth}" if truth else "")
        got = "none" if label is None else f"{int(label):+d}"
        rows.append(Row(cfg.label, signal, amp, item, rep, mse=(grams - run.payload_mass) ** 2,
                        estimate=grams, label=got))
    return rows


def run_plan(plan: ExperimentPlan) -> ResultTable:
    """Execute every grid point; failures are recorded per cell, never raised."""
    rows: list[Row] = []
    for cfg in plan.configurations:
        for amp in plan.amplitudes:
            for rep in range(plan.repetitions):
                if plan.task == "NarmaSweep":
                    rows += _narma_cell(plan, cfg, amp, rep)
                elif plan.task == "PayloadSweep":
                    for freq in plan.frequencies:
                        rows += _payload_cell(plan, cfg, amp, freq, rep)
                else:
                    for on, off in plan.pwm:
                        rows += _multitask_cell(plan, cfg, amp, on, off, rep)
    return ResultTable(rows, plan).sorted()


def write_outputs(table: ResultTable, out_dir, stem: str) -> list[Path]:
    out = Path(out_dir)
    paths = [export_csv(table, out / f"{stem}.csv"),
             export_csv(table.averaged(), out / f"{stem}_mean.csv")]
    if table.plan is not None and table.plan.task == "NarmaSweep":
        labels = {c.label for c in table.plan.configurations}
        base = "C5" if "C5" in labels else table.plan.configurations[0].label
        try:
            paths.append(export_csv(optimal_config_matrix(table, base), out / f"{stem}_optimal.csv"))
        except ValueError:
            pass
    return paths


# ----------------------------------------------------------------------------
# command line

_VERB_TASK = {"narma": "NarmaSweep", "payload": "PayloadSweep", "multitask": "MultiTask"}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="origami-reservoir",
                                description="Simulated modular reservoir experiments.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, plan=True):
        if plan:
            sp.add_argument("--plan", type=Path, help="YAML plan file")
        sp.add_argument("--seed", type=int, default=None, help="override the plan seed")
        sp.add_argument("--out-dir", type=Path, default=Path("results"))

    sim = sub.add_parser("simulate", help="simulate one chain and write its trajectory")
    common(sim, plan=False)
    sim.add_argument("--config", default="C5", choices=sorted(PRESETS))
    sim.add_argument("--signal", default="triple", choices=["triple", "harmonic", "pwm"])
    sim.add_argument("--amplitude", type=float, default=0.006)
    sim.add_argument("--frequency", type=float, default=4.0)
    sim.add_argument("--duration", type=float, default=20.0)
    sim.add_argument("--payload", type=float, default=0.0, help="grams")
    for verb in ("narma", "payload", "multitask"):
        common(sub.add_parser(verb, help=f"run the {_VERB_TASK[verb]} grid"))
    common(sub.add_parser("sweep", help="run whatever grid the plan file describes"))
    rep = sub.add_parser("report", help="average a result table and rank configurations")
    rep.add_argument("results", type=Path)
    rep.add_argument("--baseline", default="C5")
    rep.add_argument("--out-dir", type=Path, default=None)
    return p


def _cmd_simulate(args) -> int:
    cfg = preset(args.config).with_payload(args.payload / 1000.0)
    model = build_chain(cfg)
    if args.signal == "triple":
        drive = triple_harmonic(args.amplitude, args.duration, DRIVE_RATE)
    elif args.signal == "harmonic":
        drive = single_harmonic(args.amplitude, args.frequency, args.duration, DRIVE_RATE)
    else:
        drive = pwm3(0.1, 0.2, args.amplitude, args.duration, DRIVE_RATE)
    rng = np.random.default_rng(args.seed or 0)
    x0 = rng.uniform(-1e-4, 1e-4, model.masses.size) if args.seed is not None else None
    out = simulate(model, drive, args.duration, initial_displacement=x0)
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    path = export_trajectory(out.trajectory, Path(args.out_dir) / f"trajectory_{args.config}.csv")
    print(f"{path}  first mode {model.first_mode_hz:.3f} Hz  max |x| {out.max_displacement:.4g} m")
    return 0


def _cmd_grid(args, task: Optional[str]) -> int:
    if args.plan is not None:
        plan = load_plan(args.plan)
        if task is not None and plan.task != task:
            print(f"plan task {plan.task} does not match verb {args.verb}", file=sys.stderr)
            return 2
    else:
        if task is None:
            print("sweep needs --plan", file=sys.stderr)
            return 2
        plan = default_plan(task)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    table = run_plan(plan)
    stem = plan.task.lower()
    for path in write_outputs(table, args.out_dir, stem):
        print(path)
    if table.failures:
        print(f"{len(table.failures)} failed cells:", file=sys.stderr)
        for r in table.failures:
            print(f"  {r.config} {r.signal} {r.item} rep {r.repetition}: {r.status}", file=sys.stderr)
        return 1
    return 0


def _cmd_report(args) -> int:
    table = read_table(args.results)
    out_dir = args.out_dir or args.results.parent
    stem = args.results.stem
    mean = table.averaged()
    print(export_csv(mean, Path(out_dir) / f"{stem}_mean.csv"))
    if any(r.nmse is not None for r in table.rows):
        cells = optimal_config_matrix(table, args.baseline)
        print(export_csv(cells, Path(out_dir) / f"{stem}_optimal.csv"))
        for c in cells:
            print(f"  A={c.amplitude:g} {c.item:>8}: {c.best_config} "
                  f"(NMSE {c.best_nmse:.4g}, {c.reduction_percent:.1f}% below {args.baseline})")
    return 1 if table.failures else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "simulate":
        return _cmd_simulate(args)
    if args.verb == "report":
        return _cmd_report(args)
    return _cmd_grid(args, _VERB_TASK.get(args.verb))


if __name__ == "__main__":
    sys.exit(main())
