"""Evaluation report serialization: text table, CSV, plot data, JSON.

Accuracy cells render as percent with two decimals ("86.05%") and timing
cells as seconds with three decimals ("0.323s"), i.e. millisecond
resolution. Plot-data rows carry time in integer milliseconds so the
value column stays unit-free; a footnote records the unit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFormatError
from .pipeline import ComparisonBlock, EvaluationReport, FoldOutcome

__all__ = ["emit_report", "report_to_json", "report_from_json",
           "save_report_json", "load_report_json", "REPORT_FORMATS"]

REPORT_FORMATS = ("text-table", "comma-separated", "plot-data", "json")

_FILENAMES = {
    "text-table": "report.txt",
    "comma-separated": "report.csv",
    "plot-data": "plot_data.csv",
    "json": "report.json",
}

_TIME_FOOTNOTE = ("Processing time is the median per-sample classification "
                  "latency, millisecond resolution.")


def _pct(value) -> str:
    return f"{100.0 * value:.2f}%"


def _sec(time_ms) -> str:
    return f"{time_ms / 1000.0:.3f}s"


def _fold_rows(folds):
    for o in folds:
        if o.failure is not None:
            yield (str(o.fold_index), "failed", "failed", o.failure)
        else:
            yield (str(o.fold_index), _pct(o.accuracy), _sec(o.time_ms),
                   str(int(o.support.size)))


def _text_table(report: EvaluationReport) -> str:
    lines = []
    lines.append("Evaluation report")
    lines.append("=" * len(lines[0]))
    lines.append(f"Group: {report.group}    Selector: {report.selector}    "
                 f"Folds: {report.k_folds}    Seed: {report.seed}")
    lines.append("")

    header = f"{'Variant':<24}{'Accuracy (%)':<16}{'Processing time (sec)':<24}"
    lines.append(header)
    lines.append("-" * len(header))
    comp = report.comparison
    if comp is not None:
        lines.append(f"{comp.baseline_selector:<24}"
                     f"{_pct(comp.baseline_mean_accuracy):<16}"
                     f"{_sec(comp.baseline_mean_time_ms):<24}")
        lines.append(f"{comp.proposed_selector:<24}"
                     f"{_pct(comp.proposed_mean_accuracy):<16}"
                     f"{_sec(comp.proposed_mean_time_ms):<24}")
        delta_pct = f"{100.0 * comp.mean_accuracy_delta:+.2f}%"
        delta_sec = f"{comp.mean_time_delta_ms / 1000.0:+.3f}s"
        lines.append(f"{'delta':<24}{delta_pct:<16}{delta_sec:<24}")
    else:
        lines.append(f"{report.selector:<24}{_pct(report.mean_accuracy):<16}"
                     f"{_sec(report.mean_time_ms):<24}")
    lines.append("")
    lines.append(f"Fold accuracy sigma (population): {_pct(report.accuracy_sigma)}")
    lines.append(f"Mean selected features: {report.mean_support_size:.1f} "
                 f"of {max((o.n_candidate_features for o in report.folds), default=0)}")
    lines.append("")

    lines.append(f"{'Fold':<8}{'Accuracy (%)':<16}"
                 f"{'Processing time (sec)':<24}{'Selected':<10}")
    for row in _fold_rows(report.folds):
        lines.append(f"{row[0]:<8}{row[1]:<16}{row[2]:<24}{row[3]:<10}")
    if comp is not None and comp.baseline_folds:
        lines.append("")
        lines.append(f"Baseline folds ({comp.baseline_selector}):")
        for row in _fold_rows(comp.baseline_folds):
            lines.append(f"{row[0]:<8}{row[1]:<16}{row[2]:<24}{row[3]:<10}")
    if report.warnings:
        lines.append("")
        lines.append("Warnings:")
        for w in report.warnings:
            lines.append(f"  - {w}")
    lines.append("")
    lines.append(_TIME_FOOTNOTE)
    return "\n".join(lines) + "\n"


def _csv_fold_lines(group, selector, folds):
    for o in folds:
        if o.failure is not None:
            yield f"{group},{selector},{o.fold_index},,,,{o.failure}"
        else:
            yield (f"{group},{selector},{o.fold_index},{o.accuracy:.4f},"
                   f"{o.time_ms:.3f},{int(o.support.size)},")


def _comma_separated(report: EvaluationReport) -> str:
    lines = ["group,selector,fold,accuracy,time_ms,support_size,note"]
    comp = report.comparison
    if comp is not None:
        lines.extend(_csv_fold_lines(report.group, comp.baseline_selector,
                                     comp.baseline_folds))
        lines.append(f"{report.group},{comp.baseline_selector},mean,"
                     f"{comp.baseline_mean_accuracy:.4f},"
                     f"{comp.baseline_mean_time_ms:.3f},,")
    lines.extend(_csv_fold_lines(report.group, report.selector, report.folds))
    lines.append(f"{report.group},{report.selector},mean,"
                 f"{report.mean_accuracy:.4f},{report.mean_time_ms:.3f},"
                 f"{report.mean_support_size:.1f},")
    lines.append(f"{report.group},{report.selector},sigma,"
                 f"{report.accuracy_sigma:.4f},,,")
    return "\n".join(lines) + "\n"


def _plot_data(report: EvaluationReport) -> str:
    lines = ["group,variant,metric,value"]

    def emit(variant, mean_acc, mean_time_ms):
        lines.append(f"{report.group},{variant},accuracy_percent,"
                     f"{100.0 * mean_acc:.2f}")
        lines.append(f"{report.group},{variant},time_ms,"
                     f"{int(round(mean_time_ms))}")

    comp = report.comparison
    if comp is not None:
        emit(comp.baseline_selector, comp.baseline_mean_accuracy,
             comp.baseline_mean_time_ms)
        emit(comp.proposed_selector, comp.proposed_mean_accuracy,
             comp.proposed_mean_time_ms)
    else:
        emit(report.selector, report.mean_accuracy, report.mean_time_ms)
    lines.append("# time_ms values are milliseconds")
    return "\n".join(lines) + "\n"


def _fold_to_dict(o: FoldOutcome) -> dict:
    return {
        "fold_index": o.fold_index,
        "test_indices": np.asarray(o.test_indices).tolist(),
        "accuracy": o.accuracy,
        "time_ms": o.time_ms,
        "support": None if o.support is None else np.asarray(o.support).tolist(),
        "n_candidate_features": o.n_candidate_features,
        "lambda1": o.lambda1,
        "lambda2": o.lambda2,
        "warnings": list(o.warnings),
        "failure": o.failure,
    }


def _fold_from_dict(d: dict) -> FoldOutcome:
    return FoldOutcome(
        fold_index=d["fold_index"],
        test_indices=np.asarray(d["test_indices"], dtype=np.int64),
        accuracy=d["accuracy"],
        time_ms=d["time_ms"],
        support=None if d["support"] is None else np.asarray(d["support"],
                                                             dtype=np.int64),
        n_candidate_features=d["n_candidate_features"],
        lambda1=d["lambda1"],
        lambda2=d["lambda2"],
        warnings=tuple(d["warnings"]),
        failure=d["failure"],
    )


def report_to_json(report: EvaluationReport) -> str:
    payload = {
        "group": report.group,
        "selector": report.selector,
        "k_folds": report.k_folds,
        "seed": report.seed,
        "folds": [_fold_to_dict(o) for o in report.folds],
        "mean_accuracy": report.mean_accuracy,
        "accuracy_sigma": report.accuracy_sigma,
        "mean_time_ms": report.mean_time_ms,
        "mean_support_size": report.mean_support_size,
        "warnings": list(report.warnings),
        "fold_hash": report.fold_hash,
        "comparison": None,
    }
    comp = report.comparison
    if comp is not None:
        payload["comparison"] = {
            "baseline_selector": comp.baseline_selector,
            "proposed_selector": comp.proposed_selector,
            "baseline_mean_accuracy": comp.baseline_mean_accuracy,
            "proposed_mean_accuracy": comp.proposed_mean_accuracy,
            "baseline_mean_time_ms": comp.baseline_mean_time_ms,
            "proposed_mean_time_ms": comp.proposed_mean_time_ms,
            "fold_accuracy_deltas": list(comp.fold_accuracy_deltas),
            "fold_time_deltas_ms": list(comp.fold_time_deltas_ms),
            "mean_accuracy_delta": comp.mean_accuracy_delta,
            "mean_time_delta_ms": comp.mean_time_delta_ms,
            "baseline_folds": [_fold_to_dict(o) for o in comp.baseline_folds],
        }
    return json.dumps(payload, indent=2) + "\n"


def report_from_json(text: str) -> EvaluationReport:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataFormatError("report JSON must be an object at top level")
    required = {"group", "selector", "k_folds", "seed", "folds",
                "mean_accuracy", "accuracy_sigma", "mean_time_ms"}
    missing = required - payload.keys()
    if missing:
        raise DataFormatError(f"report JSON is missing {sorted(missing)}")
    comparison = None
    comp = payload.get("comparison")
    if comp is not None:
        comparison = ComparisonBlock(
            baseline_selector=comp["baseline_selector"],
            proposed_selector=comp["proposed_selector"],
            baseline_mean_accuracy=comp["baseline_mean_accuracy"],
            proposed_mean_accuracy=comp["proposed_mean_accuracy"],
            baseline_mean_time_ms=comp["baseline_mean_time_ms"],
            proposed_mean_time_ms=comp["proposed_mean_time_ms"],
            fold_accuracy_deltas=comp["fold_accuracy_deltas"],
            fold_time_deltas_ms=comp["fold_time_deltas_ms"],
            mean_accuracy_delta=comp["mean_accuracy_delta"],
            mean_time_delta_ms=comp["mean_time_delta_ms"],
            baseline_folds=[_fold_from_dict(d)
                            for d in comp.get("baseline_folds", [])],
        )
    return EvaluationReport(
        group=payload["group"],
        selector=payload["selector"],
        k_folds=payload["k_folds"],
        seed=payload["seed"],
        folds=[_fold_from_dict(d) for d in payload["folds"]],
        mean_accuracy=payload["mean_accuracy"],
        accuracy_sigma=payload["accuracy_sigma"],
        mean_time_ms=payload["mean_time_ms"],
        mean_support_size=payload.get("mean_support_size", 0.0),
        warnings=tuple(payload.get("warnings", ())),
        fold_hash=payload.get("fold_hash", ""),
        comparison=comparison,
    )


def save_report_json(path, report: EvaluationReport) -> Path:
    path = Path(path)
    path.write_text(report_to_json(report))
    return path


def load_report_json(path) -> EvaluationReport:
    return report_from_json(Path(path).read_text())


def emit_report(report: EvaluationReport, fmt: str, out_dir) -> Path:
    """Render one format into out_dir; returns the file written."""
    if fmt not in REPORT_FORMATS:
        raise ConfigError(
            f"unknown report format {fmt!r}; choose from {REPORT_FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "text-table":
        content = _text_table(report)
    elif fmt == "comma-separated":
        content = _comma_separated(report)
    elif fmt == "plot-data":
        content = _plot_data(report)
    else:
        content = report_to_json(report)
    target = out_dir / _FILENAMES[fmt]
    target.write_text(content)
    return target
