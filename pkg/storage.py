# storage.py: CSV / JSON persistence of scenarios, reports and summaries
import csv
import json
import logging
import math
from dataclasses import fields
from pathlib import Path

from config import scenario_to_dict
from errors import InputError
from models import ConvergenceReport, ReportRow, Scenario, SummaryRow

logger = logging.getLogger("storage")

REPORT_HEADER = [
    "scenario_id", "d", "trial", "estimator", "frob_error", "max_entry_error",
    "debias_eigenvalue", "implied_noise", "min_eig_estimate", "subspace_angle_deg",
    "seed", "wall_ms", "error_code",
]
_FLOAT_COLUMNS = {f.name for f in fields(ReportRow) if f.type in ("float", float)}
_INT_COLUMNS = {"d", "trial", "seed", "wall_ms"}


def format_float(value) -> str:
    """17 significant digits; missing values (None / NaN) become an empty cell."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), ".17g")


def _parse_float(cell: str) -> float:
    return float(cell) if cell != "" else float("nan")


# ─── Reports ──────────────────────────────────────────────────────────────────

def write_report_csv(report: ConvergenceReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in report.sorted().rows:
            cells = []
            for name in REPORT_HEADER:
                value = getattr(row, name)
                if name in _FLOAT_COLUMNS:
                    cells.append(format_float(value))
                elif name == "error_code":
                    cells.append(value or "")
                else:
                    cells.append(str(value))
            writer.writerow(cells)
    logger.info(f"[REPORT] Wrote {len(report.rows)} rows to {path}")
    return path


def read_report_csv(path) -> ConvergenceReport:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != REPORT_HEADER:
            raise InputError(f"{path} does not have the report header")
        rows = []
        for rec in reader:
            kwargs = {}
            for name in REPORT_HEADER:
                cell = rec[name]
                if name in _FLOAT_COLUMNS:
                    kwargs[name] = _parse_float(cell)
                elif name in _INT_COLUMNS:
                    kwargs[name] = int(cell)
                elif name == "error_code":
                    kwargs[name] = cell or None
                else:
                    kwargs[name] = cell
            rows.append(ReportRow(**kwargs))
    logger.info(f"[REPORT] Read {len(rows)} rows from {path}")
    return ConvergenceReport(rows)


# ─── Summaries ────────────────────────────────────────────────────────────────

SUMMARY_HEADER = ["estimator", "d", "rows", "errors", "median_frob", "iqr_frob",
                  "median_implied_noise", "slope"]


def write_summary_csv(summary: list[SummaryRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for s in summary:
            writer.writerow([
                s.estimator, s.d, s.rows, s.errors,
                format_float(s.median_frob), format_float(s.iqr_frob),
                format_float(s.median_implied_noise),
                "null" if s.slope is None else format_float(s.slope),
            ])
    logger.info(f"[REPORT] Wrote summary ({len(summary)} rows) to {path}")
    return path


def write_scenario_json(scenario: Scenario, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(scenario), f, indent=4)
        f.write("\n")
    logger.info(f"[REPORT] Wrote scenario to {path}")
    return path
