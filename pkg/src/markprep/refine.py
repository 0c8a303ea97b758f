"""Coursework-ratio mark refinement.

Fits module mark against the coursework assessment ratio (CAR) with an
ordinary-least-squares polynomial (degree 1 or 2, chosen by R-squared),
then removes the fitted non-intercept component from each mark:

    refined = mark - (b1 * car + b2 * car^2)

The intercept is the ratio-independent baseline and is never subtracted,
so a purely exam-assessed module (CAR 0) keeps its mark unchanged.  The
reference coefficient pair (12.77, -5.873) reproduces the published
refinement rule exactly.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import Car, StudentModuleOutcome
from .fixtures import REFERENCE_R_SQUARED_QUADRATIC

REFERENCE_LINEAR_COEFFICIENT = 12.77
REFERENCE_QUADRATIC_COEFFICIENT = -5.873

# R-squared differences at or below this are treated as ties, and ties
# prefer the lower degree.
R_SQUARED_TIE_TOLERANCE = 1e-12


class ModelKind(Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class SingularFitError(ValueError):
    """Raised when the design matrix cannot support the requested degree."""


@dataclass(frozen=True, slots=True)
class RefinementModel:
    """Polynomial refinement coefficients with fit diagnostics.

    Models produced by ``fit_polynomial`` always have n_observations of
    at least degree + 1; n_observations == 0 marks a model whose
    coefficients were supplied externally rather than fitted here.
    """

    intercept: float
    linear: float
    quadratic: float
    r_squared: float
    model_kind: ModelKind
    n_observations: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared!r}")
        if self.n_observations < 0:
            raise ValueError(f"n_observations must be >= 0, got {self.n_observations}")
        if self.model_kind is ModelKind.LINEAR and self.quadratic != 0.0:
            raise ValueError("a linear model must have a zero quadratic coefficient")

    def decrement(self, car: Car) -> float:
        """The amount subtracted from a mark at the given ratio."""
        return self.linear * car.value + self.quadratic * car.value**2

    def to_json_dict(self) -> dict:
        return {
            "b0": self.intercept,
            "b1": self.linear,
            "b2": self.quadratic,
            "r_squared": self.r_squared,
            "model_kind": self.model_kind.value,
            "n_observations": self.n_observations,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RefinementModel":
        expected = {"b0", "b1", "b2", "r_squared", "model_kind", "n_observations"}
        unknown = set(data) - expected
        if unknown:
            raise ValueError(f"unknown model fields: {sorted(unknown)}")
        missing = expected - set(data)
        if missing:
            raise ValueError(f"missing model fields: {sorted(missing)}")
        return cls(
            intercept=float(data["b0"]),
            linear=float(data["b1"]),
            quadratic=float(data["b2"]),
            r_squared=float(data["r_squared"]),
            model_kind=ModelKind(data["model_kind"]),
            n_observations=int(data["n_observations"]),
        )


def reference_model() -> RefinementModel:
    """The published refinement rule with pinned coefficients.

    The recorded r_squared is the published fit quality of the original
    (unavailable) data; n_observations 0 marks the model as pinned.
    """
    return RefinementModel(
        intercept=0.0,
        linear=REFERENCE_LINEAR_COEFFICIENT,
        quadratic=REFERENCE_QUADRATIC_COEFFICIENT,
        r_squared=REFERENCE_R_SQUARED_QUADRATIC,
        model_kind=ModelKind.QUADRATIC,
        n_observations=0,
    )


def derive_ratio_classes(
    records: Iterable[StudentModuleOutcome],
) -> dict[str, tuple[int, ...]]:
    """Sorted distinct coursework weights observed per department.

    Never fills gaps across departments; each department's class set is
    exactly what its own records contain.
    """
    observed: dict[str, set[int]] = {}
    count = 0
    for record in records:
        count += 1
        observed.setdefault(record.department, set()).add(
            record.weighting.coursework_weight
        )
    if count == 0:
        raise ValueError("cannot derive ratio classes from zero records")
    return {dept: tuple(sorted(weights)) for dept, weights in observed.items()}


def fit_polynomial(
    points: Sequence[tuple[Car, float]], degree: int
) -> RefinementModel:
    """OLS fit of mark on {1, car} or {1, car, car^2}.

    Solved via singular-value decomposition, not normal equations: car
    and car^2 are strongly collinear on [0, 1].  R-squared is
    1 - SS_res/SS_tot, defined as 1 when SS_tot is zero (a constant
    response is fitted exactly thanks to the intercept column).
    """
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if len(points) < degree + 1:
        raise SingularFitError(
            f"need at least {degree + 1} points for degree {degree}, got {len(points)}"
        )
    x = np.array([car.value for car, _ in points], dtype=float)
    y = np.array([mark for _, mark in points], dtype=float)
    design = np.vander(x, degree + 1, increasing=True)
    coefficients, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise SingularFitError(
            f"rank-deficient design for degree {degree}: "
            f"{np.unique(x).size} distinct ratio value(s)"
        )
    residual = y - design @ coefficients
    ss_res = float(residual @ residual)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        # clamp away float dust; with an intercept the true value is in [0, 1]
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RefinementModel(
        intercept=float(coefficients[0]),
        linear=float(coefficients[1]),
        quadratic=float(coefficients[2]) if degree == 2 else 0.0,
        r_squared=r_squared,
        model_kind=ModelKind.QUADRATIC if degree == 2 else ModelKind.LINEAR,
        n_observations=len(points),
    )


def choose_model_kind(
    r_squared_linear: float,
    r_squared_quadratic: float,
    tie_tolerance: float = R_SQUARED_TIE_TOLERANCE,
) -> ModelKind:
    """Selection rule: higher R-squared wins, ties go to the lower degree."""
    if r_squared_quadratic > r_squared_linear + tie_tolerance:
        return ModelKind.QUADRATIC
    return ModelKind.LINEAR


def select_model(points: Sequence[tuple[Car, float]]) -> RefinementModel:
    """Fit both degrees and keep the one the selection rule prefers."""
    linear = fit_polynomial(points, 1)
    quadratic = fit_polynomial(points, 2)
    kind = choose_model_kind(linear.r_squared, quadratic.r_squared)
    return quadratic if kind is ModelKind.QUADRATIC else linear


def refine_mark(
    module_mark: float, car: Car, model: RefinementModel, clamp: bool = False
) -> float:
    """Remove the fitted ratio-dependent component from one mark.

    Unclamped by default: clamping would break the property that
    refining with a self-fitted model leaves no ratio effect behind.
    """
    refined = module_mark - model.decrement(car)
    if clamp:
        refined = min(100.0, max(0.0, refined))
    return refined


@dataclass(frozen=True, slots=True)
class RefinementResult:
    """Pipeline output: refined marks aligned with the input records."""

    records: tuple[StudentModuleOutcome, ...]
    refined_marks: tuple[float, ...]
    ratio_classes: dict[str, tuple[int, ...]]
    model: RefinementModel | None
    department_models: dict[str, RefinementModel] | None
    linear_candidate: RefinementModel | None
    quadratic_candidate: RefinementModel | None
    warnings: tuple[str, ...]


def _fit_with_fallback(
    points: Sequence[tuple[Car, float]],
) -> tuple[RefinementModel, RefinementModel | None, RefinementModel | None, list[str]]:
    """Select a model, degrading gracefully when ratios lack variety."""
    distinct = len({car.value for car, _ in points})
    if distinct >= 3:
        linear = fit_polynomial(points, 1)
        quadratic = fit_polynomial(points, 2)
        kind = choose_model_kind(linear.r_squared, quadratic.r_squared)
        selected = quadratic if kind is ModelKind.QUADRATIC else linear
        return selected, linear, quadratic, []
    if distinct == 2:
        linear = fit_polynomial(points, 1)
        return linear, linear, None, [
            "only 2 distinct coursework ratios; fitted the linear model only"
        ]
    # One ratio value: no ratio effect is estimable, so refinement is a
    # no-op (zero slope) and the intercept carries the mean.
    marks = [mark for _, mark in points]
    mean_mark = statistics.fmean(marks)
    constant_response = all(mark == marks[0] for mark in marks)
    fallback = RefinementModel(
        intercept=mean_mark,
        linear=0.0,
        quadratic=0.0,
        r_squared=1.0 if constant_response else 0.0,
        model_kind=ModelKind.LINEAR,
        n_observations=len(points),
    )
    return fallback, None, None, [
        "all records share one coursework ratio; no ratio effect can be "
        "fitted and marks are left unchanged"
    ]


def run_refinement_pipeline(
    records: Sequence[StudentModuleOutcome],
    *,
    model: RefinementModel | None = None,
    per_department: bool = False,
    clamp: bool = False,
) -> RefinementResult:
    """Derive ratio classes, fit (or accept) a model, refine every mark.

    With ``model`` supplied, fitting is skipped and the given coefficients
    are applied as-is.  With ``per_department``, each department gets its
    own fit.  Input order is preserved; module marks are never mutated.
    """
    records = tuple(records)
    if not records:
        raise ValueError("cannot refine zero records")
    if model is not None and per_department:
        raise ValueError("a pinned model and per-department fitting are exclusive")
    ratio_classes = derive_ratio_classes(records)
    cars = [record.car for record in records]

    department_models: dict[str, RefinementModel] | None = None
    linear_candidate: RefinementModel | None = None
    quadratic_candidate: RefinementModel | None = None
    warnings: list[str] = []

    if model is not None:
        models_by_record = [model] * len(records)
        selected: RefinementModel | None = model
    elif per_department:
        department_models = {}
        for department in ratio_classes:
            points = [
                (car, record.module_mark)
                for car, record in zip(cars, records)
                if record.department == department
            ]
            fitted, _, _, fit_warnings = _fit_with_fallback(points)
            department_models[department] = fitted
            warnings.extend(f"{department}: {w}" for w in fit_warnings)
        models_by_record = [department_models[r.department] for r in records]
        selected = None
    else:
        points = list(zip(cars, (r.module_mark for r in records)))
        fitted, linear_candidate, quadratic_candidate, warnings = _fit_with_fallback(
            points
        )
        models_by_record = [fitted] * len(records)
        selected = fitted

    refined = tuple(
        refine_mark(record.module_mark, car, record_model, clamp=clamp)
        for record, car, record_model in zip(records, cars, models_by_record)
    )
    return RefinementResult(
        records=records,
        refined_marks=refined,
        ratio_classes=ratio_classes,
        model=selected,
        department_models=department_models,
        linear_candidate=linear_candidate,
        quadratic_candidate=quadratic_candidate,
        warnings=tuple(warnings),
    )
