# harness.py: seeded Monte Carlo sweeps over d and their summaries
import asyncio
import logging
import time
from collections import defaultdict
from typing import Optional

import numpy as np

from errors import ConfigError, DomainError, InputError, KernelGramError
from estimators import (estimate_full_noise, estimate_partial_noise,
                        noise_level_from_lambda, oracle_debias)
from kernel_core import gaussian_gram, max_abs_deviation, scaling_parameter
from models import (ESTIMATORS, ConvergenceReport, ExperimentConfig, KernelMatrix,
                    PartitionedKernel, ReportRow, ScalingRule, Scenario, SummaryRow)
from spectral import smallest_eigenvalue, subspace_angle, sym_eigen, top_eigenspace
from synthesis import (check_assumptions, effective_signals, limit_gram,
                       observe, sample_noise, sample_signals)

logger = logging.getLogger("harness")


# ─── One trial ────────────────────────────────────────────────────────────────

def _raw_estimate(k: KernelMatrix, gamma: float) -> tuple[KernelMatrix, float, float]:
    lambda1 = smallest_eigenvalue(k)
    try:
        implied = noise_level_from_lambda(lambda1, gamma)
    except DomainError:
        implied = float("nan")
    return k, lambda1, implied


def run_estimator(name: str, k: KernelMatrix, scenario: Scenario,
                  cond_threshold: float) -> tuple[KernelMatrix, float, float]:
    """(estimate, debias eigenvalue, implied σ̂²) for one named estimator."""
    gamma = scenario.gamma
    if name == "raw":
        return _raw_estimate(k, gamma)
    if name == "full_noise":
        result = estimate_full_noise(k, gamma=gamma)
    elif name == "partial_noise":
        result = estimate_partial_noise(PartitionedKernel(k, scenario.clean_prefix),
                                        cond_threshold, gamma=gamma)
    elif name == "oracle":
        result = oracle_debias(k, scenario.noise.sigma_bar_sq, gamma,
                               clean_prefix=scenario.clean_prefix)
    else:
        raise ConfigError(f"unknown estimator {name!r}")
    implied = result.implied_noise if result.implied_noise is not None else float("nan")
    return result.estimate, result.debias_eigenvalue, implied


def _top_angle_deg(estimate: KernelMatrix, top_limit: np.ndarray) -> float:
    r = top_limit.shape[1]
    top_est = sym_eigen(estimate).vectors[:, -r:]
    return float(np.degrees(subspace_angle(top_limit, top_est)))


def run_trial(cfg: ExperimentConfig, d: int, trial: int, limit: KernelMatrix,
              top_limit: np.ndarray) -> list[ReportRow]:
    scenario = cfg.scenario
    x = observe(scenario, d, trial)
    k = gaussian_gram(x, scaling_parameter(ScalingRule(scenario.gamma), d))
    rows = []
    for name in cfg.estimators:
        started = time.perf_counter()
        row = ReportRow(scenario_id=cfg.scenario_id, d=d, trial=trial, estimator=name,
                        seed=scenario.noise.seed)
        try:
            estimate, eigenvalue, implied = run_estimator(name, k, scenario, cfg.cond_threshold)
            row.frob_error = float(np.linalg.norm(estimate.entries - limit.entries, "fro"))
            row.max_entry_error = max_abs_deviation(estimate, limit)
            row.debias_eigenvalue = float(eigenvalue)
            row.implied_noise = float(implied)
            row.min_eig_estimate = estimate.min_eigenvalue()
            row.subspace_angle_deg = _top_angle_deg(estimate, top_limit)
        except KernelGramError as e:
            logger.warning(f"[SWEEP] {name} failed at d={d} trial={trial}: {e}")
            row.error_code = e.code
        row.wall_ms = int(round((time.perf_counter() - started) * 1000))
        rows.append(row)
    return rows


# ─── Sweep ────────────────────────────────────────────────────────────────────

async def _run_concurrently(cfg, jobs, limit, top_limit, workers: int) -> list[list[ReportRow]]:
    semaphore = asyncio.Semaphore(workers)
    done = 0

    async def run_with_sem(d, trial):
        nonlocal done
        async with semaphore:
            rows = await asyncio.to_thread(run_trial, cfg, d, trial, limit, top_limit)
            done += 1
            logger.debug(f"[SWEEP] {done}/{len(jobs)} trials finished")
            return rows

    return await asyncio.gather(*(run_with_sem(d, trial) for d, trial in jobs))


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> ConvergenceReport:
    """Every (d, trial) pair, every requested estimator, metrics against K^(∞)(s).

    Rows are sorted by (d, trial, estimator); each trial draws its noise from
    streams keyed on (seed, trial, row), so the worker count never changes
    the result.
    """
    if workers < 1:
        raise ConfigError(f"workers must be ≥ 1, got {workers}")
    scenario = cfg.scenario
    limit = limit_gram(effective_signals(scenario), scenario.gamma)
    top_limit = top_eigenspace(limit)
    jobs = [(d, trial) for d in cfg.dims for trial in range(cfg.trials)]
    logger.info(f"[SWEEP] {cfg.scenario_id}: {len(jobs)} trials, dims={list(cfg.dims)}, "
                f"estimators={list(cfg.estimators)}, workers={workers}")

    if workers == 1:
        batches = [run_trial(cfg, d, trial, limit, top_limit) for d, trial in jobs]
    else:
        batches = asyncio.run(_run_concurrently(cfg, jobs, limit, top_limit, workers))

    report = ConvergenceReport([row for batch in batches for row in batch]).sorted()
    failed = sum(1 for row in report.rows if not row.ok)
    logger.info(f"[SWEEP] {cfg.scenario_id} completed: {len(report.rows)} rows, {failed} error rows")
    return report


# ─── Summary ──────────────────────────────────────────────────────────────────

def _median(values: list[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.median(finite)) if finite else float("nan")


def loglog_slope(dims: list[int], medians: list[float]) -> Optional[float]:
    points = [(d, m) for d, m in zip(dims, medians) if np.isfinite(m) and m > 0]
    if len({d for d, _ in points}) < 2:
        return None
    x = np.log([d for d, _ in points])
    y = np.log([m for _, m in points])
    return float(np.polyfit(x, y, 1)[0])


def _summary_order(item) -> tuple:
    (est, d), _ = item
    return (ESTIMATORS.index(est) if est in ESTIMATORS else len(ESTIMATORS), est, d)


def summarize(report: ConvergenceReport) -> list[SummaryRow]:
    """Per (estimator, d): median/IQR of frob_error, median implied noise, log-log slope."""
    if not report.rows:
        raise InputError("cannot summarize an empty report")
    groups: dict[tuple[str, int], list[ReportRow]] = defaultdict(list)
    for row in report.sorted().rows:
        groups[(row.estimator, row.d)].append(row)

    stats = {}
    for key, rows in groups.items():
        frob = [r.frob_error for r in rows if r.ok and np.isfinite(r.frob_error)]
        q25, q75 = np.percentile(frob, [25, 75]) if frob else (float("nan"), float("nan"))
        stats[key] = (
            len(rows),
            sum(1 for r in rows if not r.ok),
            _median(frob),
            float(q75 - q25),
            _median([r.implied_noise for r in rows if r.ok]),
        )

    slopes = {}
    for estimator in {est for est, _ in stats}:
        dims = sorted(d for est, d in stats if est == estimator)
        slopes[estimator] = loglog_slope(dims, [stats[(estimator, d)][2] for d in dims])

    return [
        SummaryRow(estimator=est, d=d, rows=n_rows, errors=n_err, median_frob=med,
                   iqr_frob=iqr, median_implied_noise=noise, slope=slopes[est])
        for (est, d), (n_rows, n_err, med, iqr, noise) in sorted(stats.items(), key=_summary_order)
    ]


def summary_table(summary: list[SummaryRow]) -> str:
    def cell(v):
        if v is None:
            return "null"
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    header = ("estimator", "d", "rows", "errors", "median_frob", "iqr_frob", "median_noise", "slope")
    body = [(s.estimator, s.d, s.rows, s.errors, s.median_frob, s.iqr_frob,
             s.median_implied_noise, s.slope) for s in summary]
    cells = [header] + [tuple(cell(v) for v in row) for row in body]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells)


# ─── Assumption check sweep ───────────────────────────────────────────────────

def assumption_sweep(scenario: Scenario, dims: list[int], trials: int) -> list[dict]:
    """Median over trials of the three noise-limit deviations, per d."""
    if trials < 1 or not dims:
        raise ConfigError("check-assumptions needs at least one d and one trial")
    ens = effective_signals(scenario)
    out = []
    for d in dims:
        s = sample_signals(ens, d)
        reports = [check_assumptions(s, sample_noise(scenario.noise, scenario.n, d, t),
                                     scenario.noise.sigma_bar_sq)
                   for t in range(trials)]
        out.append({
            "d": d,
            "trials": trials,
            "median_norm_dev": float(np.median([r.max_norm_dev for r in reports])),
            "median_cross_dev": float(np.median([r.max_cross_dev for r in reports])),
            "median_signal_noise_dev": float(np.median([r.max_signal_noise_dev for r in reports])),
        })
        logger.info(f"[SWEEP] assumptions d={d}: {out[-1]}")
    return out
