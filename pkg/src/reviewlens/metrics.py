"""Confusion-matrix evaluation: accuracy, balanced accuracy, per-label
precision/recall/F1 and macro/micro averages.

Zero denominators yield 0 for precision, recall and F1 so that degenerate
all-one-class predictions score poorly instead of raising.
"""

import csv
import json
from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    balanced_accuracy: float
    f1_macro: float
    f1_micro: float
    f1_label1: float
    f1_label0: float
    precision_macro: float
    precision_micro: float
    precision_label1: float
    precision_label0: float
    recall_macro: float
    recall_micro: float
    recall_label1: float
    recall_label0: float

    def to_json(self):
        return asdict(self)


# column order mirrors the published report tables
REPORT_COLUMNS = [
    "accuracy",
    "balanced_accuracy",
    "f1_macro",
    "f1_micro",
    "f1_label1",
    "f1_label0",
    "precision_macro",
    "precision_micro",
    "precision_label1",
    "precision_label0",
    "recall_macro",
    "recall_micro",
    "recall_label1",
    "recall_label0",
]


def confusion(labels, preds):
    if len(labels) != len(preds):
        raise ValueError("labels and preds must have equal length")
    if not labels:
        raise ValueError("empty input")
    tp = fp = fn = tn = 0
    for y, p in zip(labels, preds):
        if y not in (0, 1) or p not in (0, 1):
            raise ValueError("labels and preds must be 0/1")
        if y == 1 and p == 1:
            tp += 1
        elif y == 0 and p == 1:
            fp += 1
        elif y == 1 and p == 0:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _safe_div(num, den):
    return num / den if den else 0.0


def compute_metrics(cm):
    """All report metrics from one binary confusion matrix.

    Label-0 metrics come from the complemented matrix; micro averages pool
    the two one-vs-rest views, which makes micro-F1 equal accuracy for a
    single binary task.
    """
    if cm.n == 0:
        raise ValueError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.n

    p1 = _safe_div(cm.tp, cm.tp + cm.fp)
    r1 = _safe_div(cm.tp, cm.tp + cm.fn)
    # F1 from integer counts: algebraically the harmonic mean of
    # precision and recall, but with a single correctly-rounded division
    f1_1 = _safe_div(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)

    # complemented matrix: label 0 as the positive class
    p0 = _safe_div(cm.tn, cm.tn + cm.fn)
    r0 = _safe_div(cm.tn, cm.tn + cm.fp)
    f1_0 = _safe_div(2 * cm.tn, 2 * cm.tn + cm.fn + cm.fp)

    # pooled over both one-vs-rest label views; the pooled counts make
    # micro precision, recall and F1 all equal accuracy exactly
    micro_tp = cm.tp + cm.tn
    micro_fp = cm.fp + cm.fn
    micro_fn = cm.fn + cm.fp
    p_micro = _safe_div(micro_tp, micro_tp + micro_fp)
    r_micro = _safe_div(micro_tp, micro_tp + micro_fn)
    f1_micro = _safe_div(2 * micro_tp, 2 * micro_tp + micro_fp + micro_fn)

    return EvalReport(
        accuracy=accuracy,
        balanced_accuracy=(r1 + r0) / 2,
        f1_macro=(f1_1 + f1_0) / 2,
        f1_micro=f1_micro,
        f1_label1=f1_1,
        f1_label0=f1_0,
        precision_macro=(p1 + p0) / 2,
        precision_micro=p_micro,
        precision_label1=p1,
        precision_label0=p0,
        recall_macro=(r1 + r0) / 2,
        recall_micro=r_micro,
        recall_label1=r1,
        recall_label0=r0,
    )


def evaluate(labels, preds):
    return compute_metrics(confusion(labels, preds))


def write_report_csv(path, rows):
    """rows: list of (name, EvalReport); emits the 15-column table."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category"] + REPORT_COLUMNS)
        for name, report in rows:
            d = report.to_json()
            writer.writerow([name] + [f"{d[c]:.6f}" for c in REPORT_COLUMNS])


def write_report_json(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({name: report.to_json() for name, report in rows}, fh, indent=2)
