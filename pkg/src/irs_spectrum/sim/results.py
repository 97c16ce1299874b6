"""Result records, CSV persistence and summary statistics."""

import csv
from collections import defaultdict
from dataclasses import astuple, dataclass, fields

import numpy as np


@dataclass(frozen=True)
class ResultRecord:
    setup_id: int
    design: str
    p_max_dbm: float
    trial: int
    seed: int
    rate: float
    gamma_p: float
    gamma_s: float
    p_s: float
    outer_iterations: int
    inner_iterations: int
    feasible: bool
    wall_time_ms: float = None  # None unless timing was requested


COLUMNS = tuple(f.name for f in fields(ResultRecord))
_INT = {"setup_id", "trial", "seed", "outer_iterations", "inner_iterations"}
_FLOAT = {"p_max_dbm", "rate", "gamma_p", "gamma_s", "p_s"}


def _format(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-tripping form
    return str(value)


def _parse(name, text):
    if name in _INT:
        return int(text)
    if name in _FLOAT:
        return float(text)
    if name == "feasible":
        if text not in ("true", "false"):
            raise ValueError(f"feasible: expected true/false, got {text!r}")
        return text == "true"
    if name == "wall_time_ms":
        return float(text) if text else None
    return text


def write_results(records, path):
    """CSV with a header row and one line per record, columns in field order."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow([_format(v) for v in astuple(rec)])


def read_results(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [ResultRecord(*(_parse(n, t) for n, t in zip(COLUMNS, row))) for row in reader]


@dataclass(frozen=True)
class SummaryRow:
    setup_id: int
    design: str
    p_max_dbm: float
    mean_rate: float
    stderr_rate: float
    feasible_fraction: float
    count: int


def summarize(records):
    """Mean and standard error of the rate per (setup, design, P_max).

    Rows keep the first-appearance order of the keys.
    """
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.setup_id, rec.design, rec.p_max_dbm)].append(rec)
    if not groups:
        raise ValueError("no records to summarize")
    rows = []
    for (setup, design, p_max), recs in groups.items():
        rates = np.array([r.rate for r in recs])
        stderr = float(rates.std(ddof=1) / np.sqrt(rates.size)) if rates.size > 1 else 0.0
        rows.append(SummaryRow(setup, design, p_max, float(rates.mean()), stderr,
                               float(np.mean([r.feasible for r in recs])), rates.size))
    return rows


def mean_rate_table(records):
    """``{design: {p_max_dbm: mean rate}}`` for quick comparisons."""
    table = defaultdict(dict)
    for row in summarize(records):
        table[row.design][row.p_max_dbm] = row.mean_rate
    return dict(table)


def format_summary(rows):
    lines = [f"{'setup':>5} {'design':<16} {'P_max[dBm]':>10} {'rate':>10} {'stderr':>9} {'feasible':>8} {'n':>4}"]
    for r in rows:
        lines.append(f"{r.setup_id:>5} {r.design:<16} {r.p_max_dbm:>10g} {r.mean_rate:>10.4f} "
                     f"{r.stderr_rate:>9.4f} {r.feasible_fraction:>8.2f} {r.count:>4}")
    return "\n".join(lines)
