"""Classification scores: confusion matrix, accuracy, balanced accuracy, per-class P/R/F1."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np

from .errors import EmptyMatrix, MissingPrediction


def label_sort_key(label: str):
    """Numeric labels in numeric order, then everything else alphabetically."""
    s = str(label)
    try:
        return (0, float(s), s)
    except ValueError:
        return (1, 0.0, s)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[t, p]`` is the number of items of truth ``labels[t]`` predicted ``labels[p]``.

    ``truth_support`` lists which labels occur in the ground truth; labels that
    only appear as predictions (or were added through ``extra_labels``) have
    a zero row.
    """

    labels: tuple
    counts: np.ndarray
    extra_predictions: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def truth_support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def index(self, label) -> int:
        return self.labels.index(label)


def confusion(truth: Mapping[str, str], predictions: Mapping[str, str],
              extra_labels: Optional[Iterable[str]] = None) -> ConfusionMatrix:
    """Count truth/prediction pairs over the sorted union of labels.

    Every truth id needs a prediction. Predictions for ids absent from the
    truth are ignored and counted in ``extra_predictions``. ``extra_labels``
    adds known classes (for example all training classes) so that classes
    with no test items still show up in the report.
    """
    missing = [i for i in truth if i not in predictions]
    if missing:
        raise MissingPrediction(missing)
    extra = sum(1 for i in predictions if i not in truth)
    used = set(truth.values()) | {predictions[i] for i in truth}
    if extra_labels is not None:
        used |= set(extra_labels)
    labels = tuple(sorted(used, key=label_sort_key))
    pos = {lab: j for j, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for i, t in truth.items():
        counts[pos[t], pos[predictions[i]]] += 1
    return ConfusionMatrix(labels, counts, extra)


@dataclass(frozen=True)
class ClassScore:
    label: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """Scores over one confusion matrix.

    Macro averages and balanced accuracy run over classes with truth support.
    ``empty_class_predictions`` maps each class without truth items to the
    number of items predicted into it.
    """

    accuracy: float
    balanced_accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: List[ClassScore]
    empty_class_predictions: Dict[str, int]
    n_items: int
    matrix: ConfusionMatrix = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "n_items": self.n_items,
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": [vars(c).copy() for c in self.per_class],
            "empty_class_predictions": dict(self.empty_class_predictions),
            "extra_predictions": self.matrix.extra_predictions,
            "confusion": {"labels": list(self.matrix.labels),
                          "counts": self.matrix.counts.tolist()},
        }


def _ratio(num, den):
    return float(num) / float(den) if den else 0.0


def score(matrix: ConfusionMatrix) -> MetricsReport:
    c = matrix.counts
    total = c.sum()
    if total == 0:
        raise EmptyMatrix("no scored items")
    tp = np.diag(c)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    support = c.sum(axis=1)

    rows = []
    for j, lab in enumerate(matrix.labels):
        p = _ratio(tp[j], tp[j] + fp[j])
        r = _ratio(tp[j], tp[j] + fn[j])
        f = _ratio(2 * tp[j], 2 * tp[j] + fp[j] + fn[j])
        rows.append(ClassScore(lab, int(tp[j]), int(fp[j]), int(fn[j]), p, r, f, int(support[j])))

    present = [r for r in rows if r.support > 0]
    macro = lambda attr: float(np.mean([getattr(r, attr) for r in present]))
    empty = {r.label: r.fp for r in rows if r.support == 0}
    return MetricsReport(
        accuracy=float(tp.sum()) / float(total),
        balanced_accuracy=macro("recall"),
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
        per_class=rows,
        empty_class_predictions=empty,
        n_items=int(total),
        matrix=matrix,
    )


def format_table(report: MetricsReport) -> str:
    """Plain-text summary followed by one row per class."""
    lines = [
        f"items              {report.n_items}",
        f"accuracy           {report.accuracy:.4f}",
        f"balanced accuracy  {report.balanced_accuracy:.4f}",
        f"macro precision    {report.macro_precision:.4f}",
        f"macro recall       {report.macro_recall:.4f}",
        f"macro F1           {report.macro_f1:.4f}",
    ]
    if report.matrix.extra_predictions:
        lines.append(f"ignored predictions {report.matrix.extra_predictions}")
    if report.empty_class_predictions:
        lines.append("")
        lines.append("classes without test items (predicted count):")
        for lab, n in report.empty_class_predictions.items():
            lines.append(f"  {lab}: {n}")
    lines.append("")
    width = max([5] + [len(str(r.label)) for r in report.per_class])
    lines.append(f"{'class':<{width}}  {'TP':>6} {'FP':>6} {'FN':>6} "
                 f"{'prec':>7} {'recall':>7} {'F1':>7} {'support':>8}")
    for r in report.per_class:
        lines.append(f"{str(r.label):<{width}}  {r.tp:>6} {r.fp:>6} {r.fn:>6} "
                     f"{r.precision:>7.4f} {r.recall:>7.4f} {r.f1:>7.4f} {r.support:>8}")
    return "\n".join(lines) + "\n"
