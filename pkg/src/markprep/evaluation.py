"""Band-prediction evaluation: feature preparation, confusion matrices,
one-vs-rest AUC, and the with/without-ratio comparison.

The headline error rate follows the source convention: error rate is
1 - overall AUC, not 1 - accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DEFAULT_BANDING,
    BandingScheme,
    DegreeBand,
    StudentModuleOutcome,
    classify_band,
    compute_car,
    year_average,
)
from .fixtures import PUBLISHED_CLASS_ORDER
from .forest import (
    FeatureRow,
    FeatureTable,
    ForestModel,
    ForestParams,
    holdout_split,
    proba_vector,
    train_forest,
)

# Mirrors the published evaluation, which scored 284 of 406 students.
DEFAULT_TEST_FRACTION = 0.6995

CAR_COLUMN = "mean_car"

# Internal matrix axes run worst band to best; rendering permutes to the
# published column order.
BAND_ORDER: tuple[DegreeBand, ...] = tuple(DegreeBand)


class UndefinedAucError(ValueError):
    """Raised when AUC is requested for single-class labels."""


def build_feature_table(
    records: Sequence[StudentModuleOutcome],
    refined_marks: Sequence[float] | None = None,
    predictor_years: Sequence[int] = (1, 2),
    target_year: int = 3,
    include_car: bool = True,
    scheme: BandingScheme = DEFAULT_BANDING,
) -> FeatureTable:
    """One row per student: predictor-year averages, optionally the mean
    coursework ratio over all the student's modules, labeled with the
    target-year band.

    ``refined_marks`` (aligned with ``records``) substitutes refined for
    raw marks in every average.  Students lacking modules in any
    predictor or target year are left out; rows must be complete.
    Averages are clamped to the mark scale before banding, since
    unclamped refinement can step slightly outside it.
    """
    if refined_marks is not None and len(refined_marks) != len(records):
        raise ValueError(
            f"refined marks length {len(refined_marks)} does not match "
            f"record count {len(records)}"
        )
    by_student: dict[str, list[int]] = {}
    for index, record in enumerate(records):
        by_student.setdefault(record.student_id, []).append(index)

    needed_years = [*predictor_years, target_year]
    rows: list[FeatureRow] = []
    for student_id, indexes in by_student.items():
        outcomes = [records[i] for i in indexes]
        years_present = {outcome.year_level for outcome in outcomes}
        if not all(year in years_present for year in needed_years):
            continue
        marks = (
            [refined_marks[i] for i in indexes] if refined_marks is not None else None
        )
        features = [
            year_average(outcomes, year, marks) for year in predictor_years
        ]
        if include_car:
            cars = [compute_car(outcome.weighting).value for outcome in outcomes]
            features.append(sum(cars) / len(cars))
        target_average = year_average(outcomes, target_year, marks)
        label = classify_band(min(100.0, max(0.0, target_average)), scheme)
        rows.append(FeatureRow(student_id, tuple(features), label))

    columns = [f"year{year}_avg" for year in predictor_years]
    if include_car:
        columns.append(CAR_COLUMN)
    return FeatureTable(tuple(columns), tuple(rows))


@dataclass(frozen=True, slots=True)
class ConfusionMatrix:
    """Counts indexed (true band, predicted band) in ``class_order``."""

    class_order: tuple[DegreeBand, ...]
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.class_order)
        if len(self.cells) != size or any(len(row) != size for row in self.cells):
            raise ValueError("cells must be square over class_order")
        if any(cell < 0 for row in self.cells for cell in row):
            raise ValueError("cell counts must be non-negative")

    def trace(self) -> int:
        return sum(self.cells[i][i] for i in range(len(self.class_order)))

    def total(self) -> int:
        return sum(sum(row) for row in self.cells)

    def row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.cells)

    def column_totals(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.cells))

    @property
    def accuracy(self) -> float:
        return self.trace() / self.total()

    def in_order(self, order: Sequence[DegreeBand]) -> tuple[tuple[int, ...], ...]:
        """Cells permuted to another class order on both axes."""
        position = {band: i for i, band in enumerate(self.class_order)}
        return tuple(
            tuple(self.cells[position[true]][position[predicted]] for predicted in order)
            for true in order
        )

    def to_json_dict(self) -> dict:
        return {
            "class_order": [band.name for band in self.class_order],
            "cells": [list(row) for row in self.cells],
        }


def confusion_matrix(
    truths: Sequence[DegreeBand], predictions: Sequence[DegreeBand]
) -> ConfusionMatrix:
    if len(truths) != len(predictions):
        raise ValueError(
            f"length mismatch: {len(truths)} truths vs {len(predictions)} predictions"
        )
    size = len(BAND_ORDER)
    counts = [[0] * size for _ in range(size)]
    for truth, predicted in zip(truths, predictions):
        counts[int(truth)][int(predicted)] += 1
    return ConfusionMatrix(BAND_ORDER, tuple(tuple(row) for row in counts))


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    i = 0
    sorted_values = values[order]
    while i < len(values):
        j = i
        while j < len(values) and sorted_values[j] == sorted_values[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j + 1)
        i = j
    return ranks


def auc_binary(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Probability a positive outscores a negative, ties counting half.

    Rank-based Mann-Whitney form; identical to the exhaustive pairwise
    count and to the trapezoidal area under the ROC curve.
    """
    scores_arr = np.asarray(scores, dtype=float)
    labels_arr = np.asarray(labels, dtype=bool)
    if scores_arr.shape != labels_arr.shape:
        raise ValueError("scores and labels must align")
    n_pos = int(labels_arr.sum())
    n_neg = len(labels_arr) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAucError("need at least one positive and one negative label")
    ranks = _midranks(scores_arr)
    rank_sum = float(ranks[labels_arr].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_multiclass(
    probabilities: Sequence[Sequence[float]],
    labels: Sequence[DegreeBand],
    average: str = "weighted",
) -> tuple[float, dict[DegreeBand, float]]:
    """One-vs-rest AUC per present band plus an averaged overall value.

    ``weighted`` weighs per-band AUCs by band prevalence; ``macro``
    weighs them equally.  Bands absent from ``labels`` are excluded.
    """
    if average not in ("weighted", "macro"):
        raise ValueError(f"average must be 'weighted' or 'macro', got {average!r}")
    probs = np.asarray(probabilities, dtype=float)
    if probs.ndim != 2 or probs.shape[1] != len(BAND_ORDER):
        raise ValueError(
            f"probabilities must be n x {len(BAND_ORDER)}, got shape {probs.shape}"
        )
    if probs.shape[0] != len(labels):
        raise ValueError("probabilities and labels must align")
    label_indexes = np.array([int(label) for label in labels])
    present = [band for band in BAND_ORDER if (label_indexes == int(band)).any()]
    if len(present) < 2:
        raise UndefinedAucError("need at least two bands in the labels")

    per_class: dict[DegreeBand, float] = {}
    for band in present:
        positives = label_indexes == int(band)
        per_class[band] = auc_binary(probs[:, int(band)], positives)

    if average == "weighted":
        weights = {
            band: float((label_indexes == int(band)).sum()) / len(labels)
            for band in present
        }
        overall = sum(per_class[band] * weights[band] for band in present) / sum(
            weights.values()
        )
    else:
        overall = sum(per_class.values()) / len(present)
    return float(overall), per_class


@dataclass(frozen=True, slots=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    classification_accuracy: float
    auc: float
    error_rate: float
    per_class_auc: dict[DegreeBand, float]
    auc_average: str

    def __post_init__(self) -> None:
        if abs(self.error_rate - (1.0 - self.auc)) > 1e-9:
            raise ValueError("error_rate must equal 1 - auc")

    def to_json_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_json_dict(),
            "classification_accuracy": self.classification_accuracy,
            "auc": self.auc,
            "error_rate": self.error_rate,
            "per_class_auc": {
                band.name: value for band, value in self.per_class_auc.items()
            },
            "auc_average": self.auc_average,
        }


def evaluate_forest(
    model: ForestModel,
    rows: Sequence[FeatureRow],
    average: str = "weighted",
) -> EvaluationReport:
    """Score a trained forest on labeled rows."""
    if not rows:
        raise ValueError("cannot evaluate on zero rows")
    probabilities = np.array([proba_vector(model, row.features) for row in rows])
    predictions = [DegreeBand(int(np.argmax(p))) for p in probabilities]
    truths = [row.label for row in rows]
    matrix = confusion_matrix(truths, predictions)
    overall_auc, per_class = auc_multiclass(probabilities, truths, average)
    return EvaluationReport(
        confusion=matrix,
        classification_accuracy=matrix.accuracy,
        auc=overall_auc,
        error_rate=1.0 - overall_auc,
        per_class_auc=per_class,
        auc_average=average,
    )


@dataclass(frozen=True, slots=True)
class ComparisonResult:
    with_car: EvaluationReport
    without_car: EvaluationReport
    auc_delta: float

    def to_json_dict(self) -> dict:
        return {
            "with_car": self.with_car.to_json_dict(),
            "without_car": self.without_car.to_json_dict(),
            "auc_delta": self.auc_delta,
        }


def _mask_column(rows: Iterable[FeatureRow], column_index: int) -> list[FeatureRow]:
    masked = []
    for row in rows:
        features = list(row.features)
        features[column_index] = 0.0
        masked.append(FeatureRow(row.student_id, tuple(features), row.label))
    return masked


def compare_with_without_car(
    table: FeatureTable,
    params: ForestParams,
    seed: int,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    average: str = "weighted",
    n_jobs: int = 1,
) -> ComparisonResult:
    """Train and score twice on one identical split: ratio column live,
    then masked to a constant.

    Masking zero-fills the column instead of dropping it, keeping arity
    and stream consumption identical, so the only difference between the
    two runs is the information the column carries.
    """
    if CAR_COLUMN not in table.column_names:
        raise ValueError(f"feature table has no {CAR_COLUMN!r} column")
    car_index = table.column_names.index(CAR_COLUMN)
    train_rows, test_rows = holdout_split(list(table.rows), test_fraction, seed)

    model_with = train_forest(train_rows, params, seed, n_jobs=n_jobs)
    report_with = evaluate_forest(model_with, test_rows, average)

    masked_train = _mask_column(train_rows, car_index)
    masked_test = _mask_column(test_rows, car_index)
    model_without = train_forest(masked_train, params, seed, n_jobs=n_jobs)
    report_without = evaluate_forest(model_without, masked_test, average)

    return ComparisonResult(
        with_car=report_with,
        without_car=report_without,
        auc_delta=report_with.auc - report_without.auc,
    )


def render_confusion_text(
    cells: Sequence[Sequence[int]],
    class_order: Sequence[DegreeBand] = PUBLISHED_CLASS_ORDER,
    row_totals: Sequence[int] | None = None,
    column_totals: Sequence[int] | None = None,
    grand_total: int | None = None,
) -> str:
    """Aligned text table in the published layout (true class per row).

    Margins default to the cell sums; the published fixtures pass their
    stated margins instead, which differ from the sums for one table.
    """
    if row_totals is None:
        row_totals = [sum(row) for row in cells]
    if column_totals is None:
        column_totals = [sum(col) for col in zip(*cells)]
    if grand_total is None:
        grand_total = sum(row_totals)

    labels = [band.label for band in class_order]
    header = ["Correct class", *labels, "Total"]
    body = [
        [labels[i], *[str(c) for c in cells[i]], str(row_totals[i])]
        for i in range(len(class_order))
    ]
    footer = ["Total", *[str(c) for c in column_totals], str(grand_total)]
    table = [header, *body, footer]
    widths = [max(len(row[col]) for row in table) for col in range(len(header))]
    lines = []
    for row in table:
        first = row[0].ljust(widths[0])
        rest = "  ".join(cell.rjust(widths[i + 1]) for i, cell in enumerate(row[1:]))
        lines.append(f"{first}  {rest}".rstrip())
    return "\n".join(lines)


def render_report_text(report: EvaluationReport) -> str:
    """Confusion matrix plus headline metrics, published column order."""
    lines = [
        render_confusion_text(
            report.confusion.in_order(PUBLISHED_CLASS_ORDER), PUBLISHED_CLASS_ORDER
        ),
        "",
        f"classification accuracy: {report.classification_accuracy:.4f}",
        f"AUC ({report.auc_average}): {report.auc:.4f}",
        f"error rate: {report.error_rate:.4f}",
    ]
    return "\n".join(lines)
