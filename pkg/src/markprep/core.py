"""Domain types for module transcripts and degree-band classification.

A transcript row records one student's outcome on one module: the overall
module mark, the exam and coursework component marks where applicable, and
the weighting that combined them.  The coursework assessment ratio (CAR) is
the coursework share of that weighting, as a fraction in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence


class EmptySelectionError(ValueError):
    """Raised when an aggregate is requested over zero matching records."""


class DegreeBand(IntEnum):
    """Final degree classification bands, ordered worst to best."""

    FAIL = 0
    PASS = 1
    THIRD = 2
    LOWER_SECOND = 3
    UPPER_SECOND = 4
    FIRST = 5

    @property
    def label(self) -> str:
        return _BAND_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "DegreeBand":
        for band, text in _BAND_LABELS.items():
            if text == label or band.name == label:
                return band
        raise ValueError(f"unknown degree band {label!r}")


_BAND_LABELS = {
    DegreeBand.FAIL: "Fail",
    DegreeBand.PASS: "Pass",
    DegreeBand.THIRD: "Third",
    DegreeBand.LOWER_SECOND: "Lower second",
    DegreeBand.UPPER_SECOND: "Upper second",
    DegreeBand.FIRST: "First",
}


@dataclass(frozen=True, slots=True)
class AssessmentWeighting:
    """Integer percentage split between exam and coursework assessment."""

    exam_weight: int
    coursework_weight: int

    def __post_init__(self) -> None:
        for name in ("exam_weight", "coursework_weight"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if self.exam_weight + self.coursework_weight != 100:
            raise ValueError(
                "weights must sum to 100, got "
                f"{self.exam_weight} + {self.coursework_weight}"
            )


@dataclass(frozen=True, slots=True)
class Car:
    """Coursework assessment ratio: the coursework share of the weighting.

    0 means purely exam-assessed, 1 purely coursework-assessed.
    """

    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"ratio must lie in [0, 1], got {self.value!r}")

    @property
    def is_exam_only(self) -> bool:
        return self.value == 0.0

    @property
    def is_coursework_only(self) -> bool:
        return self.value == 1.0


def compute_car(weighting: AssessmentWeighting) -> Car:
    """Coursework assessment ratio of a weighting: coursework_weight / 100."""
    return Car(weighting.coursework_weight / 100)


@dataclass(frozen=True, slots=True)
class StudentModuleOutcome:
    """One student's result on one module.

    A component mark must be None when the matching weight is zero: a purely
    exam-assessed module has no coursework mark to record, and vice versa.
    A None mark on a weighted component is legal and means the value is
    missing; the ingest missing-data policy decides what to do with it.
    """

    student_id: str
    department: str
    year_level: int
    module_code: str
    module_mark: float
    exam_mark: float | None
    cswk_mark: float | None
    weighting: AssessmentWeighting

    def __post_init__(self) -> None:
        if not self.student_id:
            raise ValueError("student_id must be non-empty")
        if not self.module_code:
            raise ValueError("module_code must be non-empty")
        if not isinstance(self.year_level, int) or isinstance(self.year_level, bool):
            raise ValueError(f"year_level must be an integer, got {self.year_level!r}")
        if self.year_level < 0:
            raise ValueError(f"year_level must be >= 0, got {self.year_level}")
        if not 0.0 <= self.module_mark <= 100.0:
            raise ValueError(f"module_mark must lie in [0, 100], got {self.module_mark!r}")
        for name, mark, weight in (
            ("exam_mark", self.exam_mark, self.weighting.exam_weight),
            ("cswk_mark", self.cswk_mark, self.weighting.coursework_weight),
        ):
            if weight == 0 and mark is not None:
                raise ValueError(f"{name} must be absent when its weight is 0")
            if mark is not None and not 0.0 <= mark <= 100.0:
                raise ValueError(f"{name} must lie in [0, 100], got {mark!r}")

    @property
    def missing_component_fields(self) -> tuple[str, ...]:
        """Names of weighted components whose mark is absent."""
        missing = []
        if self.weighting.exam_weight > 0 and self.exam_mark is None:
            missing.append("exam_mark")
        if self.weighting.coursework_weight > 0 and self.cswk_mark is None:
            missing.append("cswk_mark")
        return tuple(missing)

    @property
    def car(self) -> Car:
        return compute_car(self.weighting)


@dataclass(frozen=True, slots=True)
class BandingScheme:
    """Lower-bound mark thresholds mapping averages on [0, 100] to bands.

    Thresholds are (lower_bound, band) pairs in ascending bound order; each
    band covers [its bound, next bound), the last band runs to 100 inclusive.
    """

    thresholds: tuple[tuple[float, DegreeBand], ...]

    def __post_init__(self) -> None:
        if not self.thresholds:
            raise ValueError("scheme needs at least one threshold")
        bounds = [bound for bound, _ in self.thresholds]
        bands = [band for _, band in self.thresholds]
        if bounds[0] != 0:
            raise ValueError(f"lowest bound must be 0, got {bounds[0]}")
        for lo, hi in zip(bounds, bounds[1:]):
            if hi <= lo:
                raise ValueError(f"bounds must strictly increase, got {lo} then {hi}")
        if bounds[-1] > 100:
            raise ValueError(f"bounds must not exceed 100, got {bounds[-1]}")
        for worse, better in zip(bands, bands[1:]):
            if better <= worse:
                raise ValueError(
                    "bands must improve with higher marks, got "
                    f"{worse.name} then {better.name}"
                )

    def classify(self, average_mark: float) -> DegreeBand:
        if not 0.0 <= average_mark <= 100.0:
            raise ValueError(f"average mark must lie in [0, 100], got {average_mark!r}")
        chosen = self.thresholds[0][1]
        for bound, band in self.thresholds:
            if average_mark >= bound:
                chosen = band
        return chosen


DEFAULT_BANDING = BandingScheme(
    (
        (0.0, DegreeBand.FAIL),
        (35.0, DegreeBand.PASS),
        (40.0, DegreeBand.THIRD),
        (50.0, DegreeBand.LOWER_SECOND),
        (60.0, DegreeBand.UPPER_SECOND),
        (70.0, DegreeBand.FIRST),
    )
)


def classify_band(average_mark: float, scheme: BandingScheme = DEFAULT_BANDING) -> DegreeBand:
    """Band for a year or degree average under the given scheme."""
    return scheme.classify(average_mark)


def year_average(
    outcomes: Iterable[StudentModuleOutcome],
    year_level: int,
    marks: Sequence[float] | None = None,
) -> float:
    """Unweighted mean module mark for one year of one student's transcript.

    The caller is expected to pass a single student's outcomes; records from
    other years are ignored.  ``marks`` optionally overrides the stored
    module marks positionally (e.g. with refined marks); it must align with
    ``outcomes``.
    """
    outcomes = list(outcomes)
    if marks is not None and len(marks) != len(outcomes):
        raise ValueError(
            f"marks length {len(marks)} does not match outcomes length {len(outcomes)}"
        )
    selected = [
        outcome.module_mark if marks is None else marks[i]
        for i, outcome in enumerate(outcomes)
        if outcome.year_level == year_level
    ]
    if not selected:
        raise EmptySelectionError(f"no modules recorded for year {year_level}")
    return sum(selected) / len(selected)
