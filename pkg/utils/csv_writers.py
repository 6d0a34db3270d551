"""
CSV writers for the files an experiment run leaves in its output directory.
"""

import csv
import os
from dataclasses import asdict
from typing import Iterable, List

from compression.admm import DiagRow
from compression.metrics import CompressionReport, LayerStats
from training.trainer import HistoryRow

HISTORY_COLUMNS = ["epoch", "stage", "split", "loss", "accuracy", "avg_spike_rate"]
DIAG_COLUMNS = ["epoch", "stage", "layer", "w_minus_z", "y_tilde_norm", "alpha", "violations"]
REPORT_COLUMNS = [
    "lambda", "sparsity", "bitwidth", "spike_rate",
    "r_mem_pct", "r_mem_x", "r_ops_pct", "r_ops_x",
    "accuracy", "accuracy_loss", "baseline_rate", "baseline_accuracy",
]
LAYER_COLUMNS = ["network", "layer", "kind", "weights", "pruned", "kept_pct", "distinct_values", "alpha"]


def _write(path: str, columns: List[str], rows: Iterable[dict]) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in columns})
    return path


def write_history(path: str, rows: Iterable[HistoryRow]) -> str:
    return _write(path, HISTORY_COLUMNS, (asdict(r) for r in rows))


def write_diagnostics(path: str, rows: Iterable[DiagRow]) -> str:
    return _write(path, DIAG_COLUMNS, (asdict(r) for r in rows))


def write_report(path: str, reports: Iterable[CompressionReport]) -> str:
    return _write(path, REPORT_COLUMNS, (r.to_row() for r in reports))


def write_layer_stats(path: str, stats: Iterable[LayerStats]) -> str:
    return _write(path, LAYER_COLUMNS, (s.to_row() for s in stats))


def read_rows(path: str) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
