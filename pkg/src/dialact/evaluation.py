"""Scoring and reporting: accuracy, per-tag P/R/F1, confusion matrices.

All rendered outputs (CSV, SVG, text tables) are byte-deterministic
functions of their inputs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .corpus import Dataset
from .models import Model, ModelError
from .training import EncoderContext, encode_dataset


class EvalError(ValueError):
    pass


def round_half_up(x: float, places: int) -> float:
    """Display rounding: ties away from zero, unlike float banker's rounding."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def _fmt(x: float | None, places: int = 4) -> str:
    if x is None:
        return ""
    return f"{round_half_up(x, places):.{places}f}"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true tags, columns predicted tags."""

    labels: tuple[str, ...]
    counts: np.ndarray  # (n, n) non-negative ints

    def __post_init__(self):
        n = len(self.labels)
        if self.counts.shape != (n, n):
            raise EvalError(f"counts shape {self.counts.shape} != ({n}, {n})")
        if (self.counts < 0).any():
            raise EvalError("negative confusion counts")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def filter_by_support(self, min_support: int) -> "ConfusionMatrix":
        """Submatrix of the classes whose true-instance count reaches the bar."""
        keep = np.flatnonzero(self.support() >= min_support)
        labels = tuple(self.labels[i] for i in keep)
        return ConfusionMatrix(labels, self.counts[np.ix_(keep, keep)])


@dataclass(frozen=True)
class ClassReport:
    labels: tuple[str, ...]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    class_report: ClassReport
    macro_avg: tuple[float, float, float]
    weighted_avg: tuple[float, float, float]
    confusion: ConfusionMatrix


def precision_recall_f1(cm: ConfusionMatrix) -> ClassReport:
    """Per-tag metrics; zero denominators yield 0 by contract."""
    diag = np.diag(cm.counts).astype(np.float64)
    col = cm.counts.sum(axis=0).astype(np.float64)
    row = cm.counts.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(col > 0, diag / np.maximum(col, 1), 0.0)
        recall = np.where(row > 0, diag / np.maximum(row, 1), 0.0)
    pr = precision + recall
    f1 = np.where(pr > 0, 2.0 * precision * recall / np.maximum(pr, 1e-300), 0.0)
    return ClassReport(cm.labels, precision, recall, f1, cm.counts.sum(axis=1))


def averages(report: ClassReport) -> tuple[tuple[float, float, float],
                                           tuple[float, float, float]]:
    """(macro, weighted) triples of (precision, recall, f1)."""
    macro = (
        float(report.precision.mean()),
        float(report.recall.mean()),
        float(report.f1.mean()),
    )
    total = report.support.sum()
    if total == 0:
        weighted = (0.0, 0.0, 0.0)
    else:
        w = report.support / total
        weighted = (
            float(report.precision @ w),
            float(report.recall @ w),
            float(report.f1 @ w),
        )
    return macro, weighted


def evaluate(model: Model, dataset: Dataset, ctx: EncoderContext) -> EvalReport:
    """One prediction per utterance, in dataset order, rolled into a report."""
    labels = dataset.tagset.labels
    n = len(labels)
    for utt in dataset.utterances:
        if utt.tag is None:
            raise EvalError(
                f"unlabeled utterance ({utt.dialogue_id!r}, {utt.turn_index})"
            )
    examples = encode_dataset(dataset, model.config, ctx)
    counts = np.zeros((n, n), dtype=np.int64)
    for ex in examples:
        logits, _ = model.forward(ex.input)
        counts[ex.label, int(np.argmax(logits))] += 1
    cm = ConfusionMatrix(labels, counts)
    report = precision_recall_f1(cm)
    macro, weighted = averages(report)
    acc = float(np.trace(counts) / counts.sum()) if counts.sum() else 0.0
    return EvalReport(acc, report, macro, weighted, cm)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_metrics_csv(report: EvalReport) -> bytes:
    """``tag,precision,recall,f1,support`` rows plus macro/weighted rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tag", "precision", "recall", "f1", "support"])
    cr = report.class_report
    for i, label in enumerate(cr.labels):
        writer.writerow([
            label, repr(float(cr.precision[i])), repr(float(cr.recall[i])),
            repr(float(cr.f1[i])), int(cr.support[i]),
        ])
    total = int(cr.support.sum())
    writer.writerow(["macro"] + [repr(v) for v in report.macro_avg] + [total])
    writer.writerow(["weighted"] + [repr(v) for v in report.weighted_avg] + [total])
    return buf.getvalue().encode("utf-8")


def render_confusion(cm: ConfusionMatrix, fmt: str, min_support: int = 0) -> bytes:
    """CSV (labels header + count rows) or a self-contained SVG heatmap.

    Cell intensity in the SVG is proportional to the row-normalized count.
    """
    if min_support > 0:
        cm = cm.filter_by_support(min_support)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(cm.labels))
        for i, label in enumerate(cm.labels):
            writer.writerow([label] + [int(v) for v in cm.counts[i]])
        return buf.getvalue().encode("utf-8")
    if fmt == "svg":
        return _confusion_svg(cm)
    raise EvalError(f"unknown confusion format {fmt!r}")


def _svg_escape(s: str) -> str:
    return (
        s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _confusion_svg(cm: ConfusionMatrix) -> bytes:
    n = len(cm.labels)
    cell = 18
    margin = 90
    size = margin + n * cell + 10
    row_sums = cm.counts.sum(axis=1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{margin + (n * cell) // 2}" y="16" text-anchor="middle" '
        f'font-family="monospace" font-size="12">predicted →</text>',
    ]
    for i, true_label in enumerate(cm.labels):
        y = margin + i * cell
        parts.append(
            f'<text x="{margin - 4}" y="{y + cell - 5}" text-anchor="end" '
            f'font-family="monospace" font-size="9">{_svg_escape(true_label)}</text>'
        )
        for j in range(n):
            frac = (cm.counts[i, j] / row_sums[i]) if row_sums[i] else 0.0
            shade = 255 - int(round(frac * 225))
            x = margin + j * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="rgb(200,200,200)">'
                f'<title>{_svg_escape(cm.labels[i])}→'
                f'{_svg_escape(cm.labels[j])}: {int(cm.counts[i, j])}</title></rect>'
            )
    for j, pred_label in enumerate(cm.labels):
        x = margin + j * cell
        parts.append(
            f'<text x="{x + cell - 5}" y="{margin - 4}" text-anchor="start" '
            f'font-family="monospace" font-size="9" '
            f'transform="rotate(-60 {x + cell - 5} {margin - 4})">'
            f'{_svg_escape(pred_label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")


def render_results_table(rows: list[tuple[str, float | None, float | None, float | None]],
                         fmt: str = "text") -> bytes:
    """One (model, acc, val_acc, test_acc) row per trained model, 4 decimals."""
    header = ("model", "acc", "val_acc", "test_acc")
    cells = [header] + [
        (name, _fmt(acc), _fmt(val_acc), _fmt(test_acc))
        for name, acc, val_acc, test_acc in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(cells)
        return buf.getvalue().encode("utf-8")
    if fmt == "text":
        widths = [max(len(r[c]) for r in cells) for c in range(4)]
        lines = [
            "  ".join(r[c].ljust(widths[c]) for c in range(4)).rstrip()
            for r in cells
        ]
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise EvalError(f"unknown results-table format {fmt!r}")
