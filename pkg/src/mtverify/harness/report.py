"""Rendering and aggregation of kill matrices.

A matrix is emitted three ways: a JSON document that round-trips every
verdict, a CSV for spreadsheets, and an aligned text table for eyes.
``summarize`` folds one or more matrices into kill counts and an
overall kill rate.
"""

from __future__ import annotations

import csv
import io
import math
import os

SYMBOLS = {"pass": "✓", "killed": "✗", "inconclusive": "?"}
CLEAN_ROW = "clean"


def _fmt(value):
    value = float(value)
    if math.isnan(value):
        return "-"
    if math.isinf(value):
        return "inf"
    return f"{value:.3g}"


def _cell_text(verdict):
    return f"{SYMBOLS[verdict.status]} ({_fmt(verdict.evidence)})"


def row_outcome(matrix, row):
    """killed | uncaught | inconclusive for a mutant; pass/killed for clean."""
    cells = matrix.verdicts[row].values()
    if any(v.killed for v in cells):
        return "killed"
    if row == CLEAN_ROW:
        return "pass"
    if all(v.status == "inconclusive" for v in cells):
        return "inconclusive"
    return "uncaught"


def render_text(matrix):
    """Aligned text table with one symbol-and-evidence cell per verdict."""
    header = ["subject"] + list(matrix.mr_ids) + ["outcome"]
    lines = [header]
    for row in matrix.rows:
        cells = [_cell_text(matrix.verdicts[row][mr]) for mr in matrix.mr_ids]
        lines.append([row] + cells + [row_outcome(matrix, row)])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    rendered = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
                for line in lines]
    meta = matrix.meta
    footer = (f"target: {matrix.target}   backend: {meta.get('backend', '?')}   "
              f"elapsed: {meta.get('elapsed_seconds', '?')}s")
    return "\n".join(rendered + [footer]) + "\n"


def render_csv(matrix):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["subject"] + list(matrix.mr_ids) + ["outcome"])
    for row in matrix.rows:
        cells = [f"{v.status}:{_fmt(v.evidence)}"
                 for v in (matrix.verdicts[row][mr] for mr in matrix.mr_ids)]
        writer.writerow([row] + cells + [row_outcome(matrix, row)])
    return buf.getvalue()


def emit_report(matrix, out_dir, basename="matrix"):
    """Write {basename}.json/.csv/.txt under out_dir; returns the paths."""
    from .runner import save_matrix  # local import: runner imports this module too

    os.makedirs(out_dir, exist_ok=True)
    paths = {fmt: os.path.join(out_dir, f"{basename}.{fmt}")
             for fmt in ("json", "csv", "txt")}
    save_matrix(matrix, paths["json"])
    with open(paths["csv"], "w", encoding="utf-8", newline="") as f:
        f.write(render_csv(matrix))
    with open(paths["txt"], "w", encoding="utf-8") as f:
        f.write(render_text(matrix))
    return paths


def emit_loss_curves(report, row, out_dir):
    """One CSV per trained variant: step, test loss, test accuracy."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for label in report.names:
        rows = report.traces.get(label)
        if rows is None:
            continue
        path = os.path.join(out_dir, f"{row}__{report.mr}__{label}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["step", "test_loss", "test_accuracy"])
            writer.writerows(rows)
        paths.append(path)
    return paths


def summarize(*matrices):
    """Kill counts per matrix and overall; the clean row never counts."""
    per = []
    total = {"mutants": 0, "killed": 0, "uncaught": 0, "inconclusive": 0}
    for matrix in matrices:
        entry = {"target": matrix.target, "mutants": 0, "killed": 0,
                 "uncaught": 0, "inconclusive": 0,
                 "killed_ids": [], "uncaught_ids": [], "inconclusive_ids": []}
        for row in matrix.mutant_rows():
            outcome = row_outcome(matrix, row)
            entry["mutants"] += 1
            entry[outcome] += 1
            entry[f"{outcome}_ids"].append(row)
        entry["kill_rate_percent"] = _rate(entry["killed"], entry["mutants"])
        per.append(entry)
        for key in total:
            total[key] += entry[key]
    total["kill_rate_percent"] = _rate(total["killed"], total["mutants"])
    return {"matrices": per, "total": total}


def _rate(killed, mutants):
    return round(100.0 * killed / mutants) if mutants else 0


def render_summary(summary):
    lines = []
    for entry in summary["matrices"]:
        ids = ", ".join(entry["killed_ids"]) or "none"
        lines.append(f"{entry['target']}: {entry['killed']}/{entry['mutants']} "
                     f"killed ({entry['kill_rate_percent']}%)  [{ids}]")
        if entry["uncaught_ids"]:
            lines.append(f"  uncaught: {', '.join(entry['uncaught_ids'])}")
        if entry["inconclusive_ids"]:
            lines.append(f"  inconclusive: {', '.join(entry['inconclusive_ids'])}")
    total = summary["total"]
    lines.append(f"overall: {total['killed']}/{total['mutants']} mutants killed "
                 f"({total['kill_rate_percent']}%)")
    return "\n".join(lines) + "\n"
