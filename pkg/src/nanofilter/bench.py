"""Monte Carlo benchmark driver: trials, reports, sweeps, ablation.

Trials are paired: trial ``i`` of every filter replays the identical simulated
trajectory, because the trajectory is derived only from the scenario config
and the trial index (seed = config seed + trial index, a fresh PCG64 stream).
A trial counts as diverged when the filter raises an estimation error, a
natural-gradient update reports a positive-definiteness failure, or any mean
component exceeds ``DIVERGENCE_LIMIT`` in magnitude; diverged trials are
excluded from RMSE aggregates and counted separately.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import EstimationError, LengthMismatch, ModelNotLinear
from .filters import FILTER_IDS, GaussianBelief, UpdateDiagnostics, filter_step
from .models import Trajectory, simulate_trajectory
from .nano import NANO_PRESETS, NanoConfig, preset_with_overrides
from .quadrature import SigmaPointRule, parse_rule
from .scenarios import ScenarioConfig, ScenarioSetup, scenario_models

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6
RNG_NAME = "pcg64"

TRIALS_HEADER = ("scenario", "filter", "trial", "rmse", "diverged", "steps", "update_ms")


def rmse(truth: np.ndarray, estimates: np.ndarray) -> float:
    """Root mean squared error over all steps and state components."""
    truth = np.asarray(truth, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    if truth.shape != estimates.shape:
        raise LengthMismatch(f"shape mismatch: truth {truth.shape} vs estimates {estimates.shape}")
    if truth.size == 0:
        raise LengthMismatch("empty sequences")
    return float(np.sqrt(np.mean((truth - estimates) ** 2)))


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one filter on one simulated trajectory."""

    trial: int
    rmse: float | None
    diverged: bool
    steps: int
    update_ms: float | None


@dataclass(frozen=True)
class FilterRun:
    """Raw per-step output of one filter pass (used by tests and demos)."""

    means: np.ndarray                 # (steps, n)
    covs: np.ndarray                  # (steps, n, n)
    diagnostics: tuple[UpdateDiagnostics, ...]
    steps: int                        # completed update steps
    diverged: bool


def scenario_label(cfg: ScenarioConfig) -> str:
    return f"{cfg.model}:{cfg.mismatch_kind}:{cfg.mismatch_level:g}"


def run_filter(
    setup: ScenarioSetup,
    filter_id: str,
    traj: Trajectory,
    rule: SigmaPointRule,
    nano_cfg: NanoConfig | None = None,
) -> FilterRun:
    """Run one filter along one trajectory, stopping early on divergence."""
    model = setup.filter_view
    belief = GaussianBelief(setup.init_mean, setup.init_cov)
    total = traj.measurements.shape[0]
    means = np.empty((total, model.n))
    covs = np.empty((total, model.n, model.n))
    diags: list[UpdateDiagnostics] = []
    steps = 0
    diverged = False

    for t in range(1, total + 1):
        u = traj.inputs[t - 1] if traj.inputs is not None else None
        try:
            belief, diag = filter_step(
                filter_id, belief, u, traj.measurements[t - 1], model,
                t=t - 1, rule=rule, nano_cfg=nano_cfg,
            )
        except EstimationError:
            diverged = True
            break
        diags.append(diag)
        if diag.pd_failure:
            diverged = True
            break
        means[t - 1] = belief.mean
        covs[t - 1] = belief.cov
        steps = t
        if np.any(np.abs(belief.mean) > DIVERGENCE_LIMIT):
            diverged = True
            break

    return FilterRun(means[:steps], covs[:steps], tuple(diags), steps, diverged)


def make_trajectory(cfg: ScenarioConfig, trial: int, setup: ScenarioSetup | None = None) -> Trajectory:
    """Simulate the (shared) trajectory for one trial index."""
    setup = setup or scenario_models(cfg)
    rng = np.random.default_rng(cfg.seed + trial)
    traj = simulate_trajectory(
        setup.truth, setup.process_noise, setup.measurement_noise,
        setup.init_mean, setup.init_cov, cfg.horizon, rng,
    )
    if log.isEnabledFor(logging.DEBUG):
        digest = hashlib.sha256(np.ascontiguousarray(traj.states).tobytes()).hexdigest()[:16]
        log.debug("trajectory %s trial=%d hash=%s", scenario_label(cfg), trial, digest)
    return traj


def run_trial(
    cfg: ScenarioConfig,
    filter_id: str,
    trial: int,
    nano_overrides: dict | None = None,
    setup: ScenarioSetup | None = None,
) -> TrialResult:
    """Simulate trial ``trial`` and run one filter over it."""
    setup = setup or scenario_models(cfg)
    traj = make_trajectory(cfg, trial, setup)
    nano_cfg = preset_with_overrides(filter_id, nano_overrides) if filter_id in NANO_PRESETS else None
    run = run_filter(setup, filter_id, traj, parse_rule(cfg.mm), nano_cfg)
    err = None if run.diverged else rmse(traj.states[1:], run.means)
    times = [d.update_ms for d in run.diagnostics]
    mean_ms = float(np.mean(times)) if times else None
    return TrialResult(trial, err, run.diverged, run.steps, mean_ms)


@dataclass(frozen=True)
class FilterStats:
    """Aggregates over the non-diverged trials of one filter."""

    filter_id: str
    trials: int
    divergences: int
    mean_rmse: float        # nan when every trial diverged
    median_rmse: float
    q1_rmse: float
    q3_rmse: float
    mean_update_ms: float

    @property
    def label(self) -> str:
        """Table cell: the mean RMSE, or 'diverge' past the majority threshold."""
        if self.divergences > self.trials // 2:
            return "diverge"
        return f"{self.mean_rmse:.3f}"


@dataclass
class BenchmarkReport:
    """All trial results of one scenario, per filter, in trial order."""

    scenario: ScenarioConfig
    filter_ids: tuple[str, ...]
    results: dict[str, list[TrialResult]]

    def stats(self, filter_id: str) -> FilterStats:
        rows = self.results[filter_id]
        errs = np.array([r.rmse for r in rows if not r.diverged], dtype=float)
        times = np.array([r.update_ms for r in rows if r.update_ms is not None], dtype=float)
        if errs.size:
            q1, med, q3 = (float(v) for v in np.percentile(errs, [25.0, 50.0, 75.0]))
            mean = float(errs.mean())
        else:
            q1 = med = q3 = mean = float("nan")
        return FilterStats(
            filter_id=filter_id,
            trials=len(rows),
            divergences=sum(r.diverged for r in rows),
            mean_rmse=mean,
            median_rmse=med,
            q1_rmse=q1,
            q3_rmse=q3,
            mean_update_ms=float(times.mean()) if times.size else float("nan"),
        )

    def summary(self) -> list[FilterStats]:
        return [self.stats(fid) for fid in self.filter_ids]


def _worker_count() -> int:
    raw = os.environ.get("NANO_BENCH_THREADS", "0")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ValueError(f"NANO_BENCH_THREADS must be an integer, got {raw!r}") from exc
    if count <= 0:
        return os.cpu_count() or 1
    return count


def run_monte_carlo(
    cfg: ScenarioConfig,
    filter_ids: tuple[str, ...] = ("nano",),
    nano_overrides: dict | None = None,
) -> BenchmarkReport:
    """Paired Monte Carlo over ``cfg.trials`` trajectories for each filter."""
    for fid in filter_ids:
        if fid not in FILTER_IDS:
            raise ValueError(f"unknown filter {fid!r}; expected one of {FILTER_IDS}")
    setup = scenario_models(cfg)
    if "kf" in filter_ids and setup.filter_view.linear is None:
        raise ModelNotLinear(f"model {cfg.model!r} has no exact linear parts; 'kf' cannot run")

    jobs = [(fid, trial) for fid in filter_ids for trial in range(cfg.trials)]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(lambda job: run_trial(cfg, job[0], job[1], nano_overrides), jobs)
            )
    else:
        outcomes = [run_trial(cfg, fid, trial, nano_overrides) for fid, trial in jobs]

    results: dict[str, list[TrialResult]] = {fid: [] for fid in filter_ids}
    for (fid, _), res in zip(jobs, outcomes):
        results[fid].append(res)
    for fid in filter_ids:
        results[fid].sort(key=lambda r: r.trial)
    return BenchmarkReport(scenario=cfg, filter_ids=tuple(filter_ids), results=results)


# ---------------------------------------------------------------------------
# Sweeps and ablation


@dataclass
class SweepTable:
    """One report per mismatch level, same filters throughout."""

    model: str
    kind: str
    levels: tuple[float, ...]
    filter_ids: tuple[str, ...]
    reports: dict[float, BenchmarkReport]


def sweep_mismatch(
    base: ScenarioConfig,
    kind: str,
    levels: tuple[float, ...],
    filter_ids: tuple[str, ...],
    nano_overrides: dict | None = None,
) -> SweepTable:
    """Run the same Monte Carlo at each mismatch level of one kind.

    Level 0 reproduces the nominal scenario (shared base seed).  Off-grid
    levels raise UnknownLevel via the scenario config validation; a filter
    diverging never aborts the sweep, the cell just reports its divergences.
    """
    reports: dict[float, BenchmarkReport] = {}
    for level in levels:
        cfg = replace(base, mismatch_kind=kind, mismatch_level=float(level))
        reports[float(level)] = run_monte_carlo(cfg, filter_ids, nano_overrides)
    return SweepTable(base.model, kind, tuple(float(lv) for lv in levels),
                      tuple(filter_ids), reports)


ABLATION_VARIANTS = ("nano-nopd", "nano-ekf", "nano")


@dataclass
class AblationTable:
    """Update-variant comparison across benchmark models."""

    models: tuple[str, ...]
    variants: tuple[str, ...]
    reports: dict[str, BenchmarkReport]   # model id -> report over the variants


def ablate(
    models: tuple[str, ...] = ("fm", "attitude", "duffing"),
    trials: int = 100,
    horizon: int = 200,
    seed: int = 0,
    mm: str = "cubature",
) -> AblationTable:
    """Compare the natural-gradient update variants on each benchmark model."""
    reports = {}
    for model in models:
        cfg = ScenarioConfig(model=model, trials=trials, horizon=horizon, seed=seed, mm=mm)
        reports[model] = run_monte_carlo(cfg, ABLATION_VARIANTS)
    return AblationTable(tuple(models), ABLATION_VARIANTS, reports)


# ---------------------------------------------------------------------------
# Emission / parsing


def _fmt_float(value: float | None) -> str:
    # repr of a Python float round-trips exactly through float()
    return "" if value is None else repr(float(value))


def emit_report(report: BenchmarkReport, out_dir, include_timing: bool = False) -> list[Path]:
    """Write ``trials.csv`` and ``summary.txt``; returns the paths.

    Timing columns are opt-in: without ``include_timing`` the outputs are
    byte-for-byte reproducible across runs with the same config.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    label = scenario_label(report.scenario)

    trials_path = out / "trials.csv"
    with trials_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_HEADER)
        for fid in report.filter_ids:
            for row in report.results[fid]:
                writer.writerow(
                    [
                        label,
                        fid,
                        row.trial,
                        _fmt_float(row.rmse),
                        "true" if row.diverged else "false",
                        row.steps,
                        _fmt_float(row.update_ms) if include_timing else "",
                    ]
                )

    cfg = report.scenario
    lines = [
        f"scenario={label}",
        f"horizon={cfg.horizon} trials={cfg.trials} seed={cfg.seed} mm={cfg.mm} rng={RNG_NAME}",
    ]
    for st in report.summary():
        line = (
            f"filter={st.filter_id} trials={st.trials} divergences={st.divergences} "
            f"mean_rmse={st.mean_rmse:.6g} median_rmse={st.median_rmse:.6g} "
            f"q1_rmse={st.q1_rmse:.6g} q3_rmse={st.q3_rmse:.6g}"
        )
        if include_timing:
            line += f" mean_update_ms={st.mean_update_ms:.6g}"
        lines.append(line)
    summary_path = out / "summary.txt"
    summary_path.write_text("\n".join(lines) + "\n")
    return [trials_path, summary_path]


def parse_trials_csv(path) -> dict[str, list[TrialResult]]:
    """Read a ``trials.csv`` back into per-filter TrialResult lists."""
    out: dict[str, list[TrialResult]] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRIALS_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for rec in reader:
            _, fid, trial, err, diverged, steps, ms = rec
            out.setdefault(fid, []).append(
                TrialResult(
                    trial=int(trial),
                    rmse=float(err) if err else None,
                    diverged=diverged == "true",
                    steps=int(steps),
                    update_ms=float(ms) if ms else None,
                )
            )
    return out


def emit_sweep(table: SweepTable, out_dir) -> list[Path]:
    """Write ``sweep.csv`` with one row per (level, filter)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "mismatch_kind", "level", "filter", "trials",
             "divergences", "mean_rmse", "median_rmse", "q1_rmse", "q3_rmse"]
        )
        for level in table.levels:
            report = table.reports[level]
            for st in report.summary():
                writer.writerow(
                    [
                        table.model,
                        table.kind,
                        _fmt_float(level),
                        st.filter_id,
                        st.trials,
                        st.divergences,
                        f"{st.mean_rmse:.6g}",
                        f"{st.median_rmse:.6g}",
                        f"{st.q1_rmse:.6g}",
                        f"{st.q3_rmse:.6g}",
                    ]
                )
    return [path]


def emit_ablation(table: AblationTable, out_dir) -> list[Path]:
    """Write ``ablation.csv`` plus a human-readable ``ablation.txt`` grid."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "ablation.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model", "filter", "trials", "divergences", "label", "mean_rmse", "mean_update_ms"]
        )
        for model in table.models:
            for st in table.reports[model].summary():
                writer.writerow(
                    [model, st.filter_id, st.trials, st.divergences, st.label,
                     f"{st.mean_rmse:.6g}", f"{st.mean_update_ms:.6g}"]
                )

    width = max(len(v) for v in table.variants) + 2
    lines = ["RMSE (mean over non-diverged trials; 'diverge' = majority failed)"]
    header = "model".ljust(10) + "".join(v.rjust(width) for v in table.variants)
    lines.append(header)
    for model in table.models:
        stats = {st.filter_id: st for st in table.reports[model].summary()}
        lines.append(
            model.ljust(10)
            + "".join(stats[v].label.rjust(width) for v in table.variants)
        )
    lines.append("")
    lines.append("mean update time per step [ms]")
    lines.append(header)
    for model in table.models:
        stats = {st.filter_id: st for st in table.reports[model].summary()}
        lines.append(
            model.ljust(10)
            + "".join(f"{stats[v].mean_update_ms:.3f}".rjust(width) for v in table.variants)
        )
    txt_path = out / "ablation.txt"
    txt_path.write_text("\n".join(lines) + "\n")
    return [csv_path, txt_path]
