"""Command-line surface for the transcript preparation pipeline.

Every command is a pure function of its inputs, flags, and seed: no
wall-clock, no OS entropy, byte-identical output on reruns.  Exit codes:
0 success, 1 data or model failure, 2 usage or configuration failure.

Flags override values from an optional JSON config file (``--config``),
which in turn override built-in defaults.  Config keys match the flag
names with underscores; unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import NoReturn

import click
from click.core import ParameterSource

from .core import DEFAULT_BANDING, BandingScheme, DegreeBand
from .evaluation import (
    DEFAULT_TEST_FRACTION,
    ComparisonResult,
    UndefinedAucError,
    build_feature_table,
    compare_with_without_car,
    render_confusion_text,
    render_report_text,
)
from .fixtures import CONFUSION_WITH_CAR, CONFUSION_WITHOUT_CAR, PublishedConfusionTable
from .forest import ForestParams, SingleClassError
from .ingest import (
    IngestReport,
    MissingPolicy,
    Severity,
    TranscriptSchemaError,
    apply_missing_policy,
    deduplicate,
    parse_refined_transcript_csv,
    parse_transcript_csv,
    write_transcript_csv,
)
from .refine import (
    RefinementModel,
    RefinementResult,
    SingularFitError,
    reference_model,
    run_refinement_pipeline,
)
from .stats import (
    AssessmentMethodClass,
    DegenerateSampleError,
    TTestResult,
    TTestVariant,
    group_mean_table,
    two_sample_t,
)
from .synthgen import CohortSpec, CohortSpecError, default_cohort_spec, generate_cohort

DEFAULT_SEED = 42

_METHOD_ORDER = (
    AssessmentMethodClass.EXAM_BASED,
    AssessmentMethodClass.COURSEWORK_BASED,
    AssessmentMethodClass.MIXED,
)
_METHOD_TITLES = {
    AssessmentMethodClass.EXAM_BASED: "Exam",
    AssessmentMethodClass.COURSEWORK_BASED: "Coursework",
    AssessmentMethodClass.MIXED: "Mixed",
}

_COMPARISONS = (
    ("exam_vs_coursework", AssessmentMethodClass.EXAM_BASED, AssessmentMethodClass.COURSEWORK_BASED),
    ("mixed_vs_exam", AssessmentMethodClass.MIXED, AssessmentMethodClass.EXAM_BASED),
    ("mixed_vs_coursework", AssessmentMethodClass.MIXED, AssessmentMethodClass.COURSEWORK_BASED),
)


def _usage_error(message: str) -> NoReturn:
    raise click.UsageError(message)


def _data_error(message: str) -> NoReturn:
    raise click.ClickException(message)


def _load_config(path: str, known_keys: set[str]) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        _usage_error(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        _usage_error(f"config {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        _usage_error(f"config {path} must hold a JSON object")
    unknown = set(raw) - known_keys
    if unknown:
        _usage_error(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
    return raw


def _merged_settings(ctx: click.Context, defaults: dict) -> dict:
    """Defaults, overlaid by config file, overlaid by explicit flags."""
    merged = dict(defaults)
    config_path = ctx.params.get("config_path")
    if config_path:
        merged.update(_load_config(config_path, set(defaults)))
    for key in defaults:
        if key in ctx.params and ctx.get_parameter_source(key) == ParameterSource.COMMANDLINE:
            merged[key] = ctx.params[key]
    return merged


def _emit(text: str, output_path: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output_path:
        Path(output_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _json_text(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _read_records(path: str):
    try:
        return parse_transcript_csv(path)
    except OSError as exc:
        _usage_error(f"cannot read {path}: {exc}")
    except TranscriptSchemaError as exc:
        _usage_error(str(exc))


def _config_option(fn):
    return click.option(
        "--config",
        "config_path",
        type=click.Path(),
        default=None,
        help="JSON config file; explicit flags override its values.",
    )(fn)


def _format_option(fn):
    return click.option(
        "--format",
        "output_format",
        type=click.Choice(["json", "csv", "text"]),
        default=None,
        help="Report format.  [default: text]",
    )(fn)


def _output_option(fn):
    return click.option(
        "--output",
        "output_path",
        type=click.Path(),
        default=None,
        help="Write the report to this file instead of stdout.",
    )(fn)


def _seed_option(fn):
    return click.option(
        "--seed",
        type=int,
        default=None,
        help=f"Root seed for all randomness.  [default: {DEFAULT_SEED}]",
    )(fn)


@click.group()
@click.version_option(package_name="markprep")
def main() -> None:
    """Prepare transcript data: coursework-ratio refinement and degree-band
    prediction.

    Typical flow: generate (or bring) a transcript CSV, validate it, look
    at stats, refine marks, then evaluate band prediction with and
    without the coursework assessment ratio (CAR) attribute.
    """


@main.command()
@click.option("--out", type=click.Path(), default=None, help="Cohort CSV path.  [default: cohort.csv]")
@click.option("--spec", "spec_path", type=click.Path(), default=None, help="Cohort spec JSON to generate from (defaults to a built-in single-department profile).")
@click.option("--spec-out", type=click.Path(), default=None, help="Where to record the spec actually used.  [default: <out> with .spec.json]")
@click.option("--students", type=int, default=None, help="Student count for the built-in profile.  [default: 406]")
@_seed_option
@_config_option
@click.pass_context
def generate(ctx: click.Context, **_: object) -> None:
    """Write a deterministic synthetic cohort CSV plus its spec JSON."""
    settings = _merged_settings(
        ctx,
        {"out": "cohort.csv", "spec": None, "spec_out": None, "students": None, "seed": None},
    )
    if ctx.params.get("spec_path") is not None:
        settings["spec"] = ctx.params["spec_path"]

    try:
        if settings["spec"]:
            try:
                spec = CohortSpec.from_json(Path(settings["spec"]).read_text(encoding="utf-8"))
            except OSError as exc:
                _usage_error(f"cannot read spec {settings['spec']}: {exc}")
            except json.JSONDecodeError as exc:
                _usage_error(f"spec {settings['spec']} is not valid JSON: {exc}")
            if settings["seed"] is not None:
                spec = dataclasses.replace(spec, seed=settings["seed"])
            if settings["students"] is not None:
                _usage_error("--students applies only to the built-in profile; edit the spec file instead")
        else:
            seed = settings["seed"] if settings["seed"] is not None else DEFAULT_SEED
            students = settings["students"] if settings["students"] is not None else 406
            spec = default_cohort_spec(seed, students)
        records = generate_cohort(spec)
    except CohortSpecError as exc:
        _usage_error(str(exc))

    out_path = Path(settings["out"])
    spec_out = Path(settings["spec_out"]) if settings["spec_out"] else out_path.with_suffix(".spec.json")
    write_transcript_csv(records, out_path)
    spec_out.write_text(spec.to_json(), encoding="utf-8")
    students_written = len({record.student_id for record in records})
    click.echo(f"wrote {len(records)} records for {students_written} students to {out_path}")
    click.echo(f"wrote cohort spec to {spec_out}")


def _issues_json(stage_reports: dict[str, IngestReport]) -> dict:
    return {stage: report.to_json_dict() for stage, report in stage_reports.items()}


def _issues_csv(stage_reports: dict[str, IngestReport]) -> str:
    lines = ["stage,row,field,category,severity,detail"]
    for stage, report in stage_reports.items():
        for issue in report.issues:
            detail = issue.detail.replace('"', '""')
            lines.append(
                f'{stage},{issue.row_number},{issue.field},{issue.category.value},'
                f'{issue.severity.value},"{detail}"'
            )
    return "\n".join(lines) + "\n"


def _issues_text(stage_reports: dict[str, IngestReport], final_count: int, total_rows: int) -> str:
    lines = []
    for stage, report in stage_reports.items():
        lines.append(
            f"{stage}: {report.accepted_count} accepted, {report.rejected_count} rejected"
        )
        for issue in report.issues:
            lines.append(
                f"  row {issue.row_number} [{issue.field}] "
                f"{issue.category.value}/{issue.severity.value}: {issue.detail}"
            )
    lines.append(f"final: {final_count} of {total_rows} input rows accepted")
    return "\n".join(lines) + "\n"


@main.command()
@click.argument("input_csv", type=click.Path())
@click.option(
    "--missing-policy",
    type=click.Choice(["drop", "flag"]),
    default=None,
    help="Treatment of records missing a weighted component mark.  [default: flag]",
)
@_config_option
@_format_option
@_output_option
@click.pass_context
def validate(ctx: click.Context, input_csv: str, **_: object) -> None:
    """Check a transcript CSV; exit 1 when any row is rejected.

    Runs the full cleaning sequence: schema and field validation,
    duplicate handling, then the missing-mark policy.
    """
    settings = _merged_settings(
        ctx, {"missing_policy": "flag", "format": None, "output": None}
    )
    if ctx.get_parameter_source("output_format") == ParameterSource.COMMANDLINE:
        settings["format"] = ctx.params["output_format"]
    if ctx.get_parameter_source("output_path") == ParameterSource.COMMANDLINE:
        settings["output"] = ctx.params["output_path"]
    output_format = settings["format"] or "text"

    records, parse_report = _read_records(input_csv)
    deduped, dedupe_report = deduplicate(records)
    policy = MissingPolicy.DROP_RECORD if settings["missing_policy"] == "drop" else MissingPolicy.FLAG_ONLY
    final_records, missing_report = apply_missing_policy(deduped, policy)

    stages = {
        "parse": parse_report,
        "deduplicate": dedupe_report,
        "missing_policy": missing_report,
    }
    total_rows = parse_report.accepted_count + parse_report.rejected_count
    if output_format == "json":
        text = _json_text(
            {
                "stages": _issues_json(stages),
                "accepted": len(final_records),
                "total_rows": total_rows,
            }
        )
    elif output_format == "csv":
        text = _issues_csv(stages)
    else:
        text = _issues_text(stages, len(final_records), total_rows)
    _emit(text, settings["output"])

    any_reject = any(
        issue.severity is Severity.REJECT
        for report in stages.values()
        for issue in report.issues
    )
    if any_reject:
        ctx.exit(1)


def _class_samples(
    table: dict[str, dict[AssessmentMethodClass, object]],
) -> dict[AssessmentMethodClass, list[float]]:
    """Department-level mean per method class, one point per department.

    Comparisons run on these per-department means, mirroring how the
    reference analysis compared its published per-department averages.
    """
    samples: dict[AssessmentMethodClass, list[float]] = {m: [] for m in _METHOD_ORDER}
    for department in sorted(table):
        for method, summary in table[department].items():
            samples[method].append(summary.mean)
    return samples


def _stats_json(
    table,
    tests: dict[str, TTestResult | None],
    variant: TTestVariant,
) -> dict:
    return {
        "group_means": {
            department: {
                method.value: {"mean": summary.mean, "count": summary.count}
                for method, summary in by_method.items()
            }
            for department, by_method in table.items()
        },
        "t_tests": {
            name: (result.to_json_dict() if result is not None else "not applicable")
            for name, result in tests.items()
        },
        "variant": variant.value,
    }


def _stats_text(table, tests: dict[str, TTestResult | None]) -> str:
    departments = sorted(table)
    headers = ["Department", *[_METHOD_TITLES[m] for m in _METHOD_ORDER]]
    rows = []
    for department in departments:
        row = [department]
        for method in _METHOD_ORDER:
            summary = table[department].get(method)
            row.append(f"{summary.mean:.2f}" if summary is not None else "-")
        rows.append(row)
    widths = [
        max(len(str(line[i])) for line in [headers, *rows]) for i in range(len(headers))
    ]
    lines = []
    for line in [headers, *rows]:
        cells = [line[0].ljust(widths[0])] + [
            str(value).rjust(widths[i + 1]) for i, value in enumerate(line[1:])
        ]
        lines.append("  ".join(cells).rstrip())
    lines.append("")
    for name, result in tests.items():
        if result is None:
            lines.append(f"{name}: not applicable")
        else:
            lines.append(
                f"{name}: t = {result.t_statistic:.4f}, "
                f"df = {result.degrees_of_freedom:g}, p = {result.p_value_two_sided:.4g}"
            )
    return "\n".join(lines) + "\n"


def _stats_csv(table, tests: dict[str, TTestResult | None]) -> str:
    lines = [
        "department,exam_mean,exam_count,coursework_mean,coursework_count,mixed_mean,mixed_count"
    ]
    for department in sorted(table):
        cells = [department]
        for method in _METHOD_ORDER:
            summary = table[department].get(method)
            if summary is None:
                cells.extend(["", ""])
            else:
                cells.extend([repr(summary.mean), str(summary.count)])
        lines.append(",".join(cells))
    lines.append("")
    lines.append("comparison,t,df,p,variant,n_a,n_b")
    for name, result in tests.items():
        if result is None:
            lines.append(f"{name},not applicable,,,,,")
        else:
            lines.append(
                f"{name},{result.t_statistic!r},{result.degrees_of_freedom!r},"
                f"{result.p_value_two_sided!r},{result.variant.value},"
                f"{result.n_a},{result.n_b}"
            )
    return "\n".join(lines) + "\n"


@main.command()
@click.argument("input_csv", type=click.Path())
@click.option(
    "--variant",
    type=click.Choice(["pooled", "welch"]),
    default=None,
    help="t-test variant.  [default: pooled]",
)
@_config_option
@_format_option
@_output_option
@click.pass_context
def stats(ctx: click.Context, input_csv: str, **_: object) -> None:
    """Group mean marks by department and assessment method, with the
    three pairwise t-tests on the per-department means."""
    settings = _merged_settings(
        ctx, {"variant": "pooled", "format": None, "output": None}
    )
    if ctx.get_parameter_source("output_format") == ParameterSource.COMMANDLINE:
        settings["format"] = ctx.params["output_format"]
    if ctx.get_parameter_source("output_path") == ParameterSource.COMMANDLINE:
        settings["output"] = ctx.params["output_path"]
    output_format = settings["format"] or "text"
    variant = TTestVariant(settings["variant"])

    records, _report = _read_records(input_csv)
    if not records:
        _data_error(f"no valid records in {input_csv}")
    table = group_mean_table(records)
    samples = _class_samples(table)

    tests: dict[str, TTestResult | None] = {}
    for name, method_a, method_b in _COMPARISONS:
        sample_a, sample_b = samples[method_a], samples[method_b]
        if len(sample_a) < 2 or len(sample_b) < 2:
            tests[name] = None
            continue
        try:
            tests[name] = two_sample_t(sample_a, sample_b, variant)
        except DegenerateSampleError:
            tests[name] = None

    if output_format == "json":
        text = _json_text(_stats_json(table, tests, variant))
    elif output_format == "csv":
        text = _stats_csv(table, tests)
    else:
        text = _stats_text(table, tests)
    _emit(text, settings["output"])


def _model_lines(result: RefinementResult) -> list[str]:
    lines = []
    if result.linear_candidate is not None:
        lines.append(f"linear fit:    R^2 = {result.linear_candidate.r_squared:.6f}")
    if result.quadratic_candidate is not None:
        lines.append(f"quadratic fit: R^2 = {result.quadratic_candidate.r_squared:.6f}")
    if result.model is not None:
        model = result.model
        lines.append(
            f"applied {model.model_kind.value} model: b0 = {model.intercept:.6g}, "
            f"b1 = {model.linear:.6g}, b2 = {model.quadratic:.6g}"
        )
    if result.department_models is not None:
        for department in sorted(result.department_models):
            model = result.department_models[department]
            lines.append(
                f"{department}: {model.model_kind.value} b1 = {model.linear:.6g}, "
                f"b2 = {model.quadratic:.6g}, R^2 = {model.r_squared:.6f}"
            )
    for warning in result.warnings:
        lines.append(f"warning: {warning}")
    return lines


def _refine_report_json(result: RefinementResult) -> dict:
    return {
        "model": result.model.to_json_dict() if result.model else None,
        "department_models": (
            {d: m.to_json_dict() for d, m in result.department_models.items()}
            if result.department_models is not None
            else None
        ),
        "linear_candidate": (
            result.linear_candidate.to_json_dict() if result.linear_candidate else None
        ),
        "quadratic_candidate": (
            result.quadratic_candidate.to_json_dict()
            if result.quadratic_candidate
            else None
        ),
        "ratio_classes": {d: list(w) for d, w in sorted(result.ratio_classes.items())},
        "warnings": list(result.warnings),
        "record_count": len(result.records),
    }


@main.command()
@click.argument("input_csv", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Augmented CSV path.  [default: <input> with .refined.csv]")
@click.option("--model-out", type=click.Path(), default=None, help="Model JSON path.  [default: <input> with .model.json]")
@click.option(
    "--reference-coefficients",
    is_flag=True,
    default=False,
    help="Skip fitting and apply the published coefficient pair (12.77, -5.873).",
)
@click.option("--per-department", is_flag=True, default=False, help="Fit one model per department instead of pooling.")
@click.option("--clamp", is_flag=True, default=False, help="Clamp refined marks into [0, 100].")
@_config_option
@_format_option
@_output_option
@click.pass_context
def refine(ctx: click.Context, input_csv: str, **_: object) -> None:
    """Fit the ratio model and write marks with the fitted ratio effect
    removed, as a trailing refined_module_mark column."""
    settings = _merged_settings(
        ctx,
        {
            "out": None,
            "model_out": None,
            "reference_coefficients": False,
            "per_department": False,
            "clamp": False,
            "format": None,
            "output": None,
        },
    )
    if ctx.get_parameter_source("output_format") == ParameterSource.COMMANDLINE:
        settings["format"] = ctx.params["output_format"]
    if ctx.get_parameter_source("output_path") == ParameterSource.COMMANDLINE:
        settings["output"] = ctx.params["output_path"]
    output_format = settings["format"] or "text"

    records, _report = _read_records(input_csv)
    if not records:
        _data_error(f"no valid records in {input_csv}")
    pinned = reference_model() if settings["reference_coefficients"] else None
    try:
        result = run_refinement_pipeline(
            records,
            model=pinned,
            per_department=bool(settings["per_department"]),
            clamp=bool(settings["clamp"]),
        )
    except (SingularFitError, ValueError) as exc:
        _data_error(str(exc))

    out_path = Path(settings["out"]) if settings["out"] else Path(input_csv).with_suffix(".refined.csv")
    write_transcript_csv(result.records, out_path, refined_marks=result.refined_marks)

    model_out = (
        Path(settings["model_out"])
        if settings["model_out"]
        else Path(input_csv).with_suffix(".model.json")
    )
    if result.department_models is not None:
        model_doc = {d: m.to_json_dict() for d, m in sorted(result.department_models.items())}
    else:
        model_doc = result.model.to_json_dict()
    model_out.write_text(_json_text(model_doc), encoding="utf-8")

    if output_format == "json":
        text = _json_text(_refine_report_json(result))
    elif output_format == "csv":
        lines = ["scope,model_kind,b0,b1,b2,r_squared,n_observations"]
        scoped = (
            sorted(result.department_models.items())
            if result.department_models is not None
            else [("pooled", result.model)]
        )
        for scope, model in scoped:
            lines.append(
                f"{scope},{model.model_kind.value},{model.intercept!r},"
                f"{model.linear!r},{model.quadratic!r},{model.r_squared!r},"
                f"{model.n_observations}"
            )
        text = "\n".join(lines) + "\n"
    else:
        lines = _model_lines(result)
        lines.append(f"wrote {len(result.records)} refined records to {out_path}")
        lines.append(f"wrote model to {model_out}")
        text = "\n".join(lines) + "\n"
    _emit(text, settings["output"])


def _parse_predictor_years(value: str) -> tuple[int, ...]:
    try:
        years = tuple(int(part) for part in value.split(",") if part.strip() != "")
    except ValueError:
        _usage_error(f"predictor years must be comma-separated integers, got {value!r}")
    if not years:
        _usage_error("predictor years must not be empty")
    return years


def _parse_banding(value: object) -> BandingScheme:
    if not isinstance(value, list):
        _usage_error("banding must be a list of [lower_bound, band_name] pairs")
    try:
        thresholds = tuple(
            (float(bound), DegreeBand.from_label(str(name))) for bound, name in value
        )
        return BandingScheme(thresholds)
    except (TypeError, ValueError) as exc:
        _usage_error(f"invalid banding scheme: {exc}")


def _fixture_text(without: PublishedConfusionTable, with_car: PublishedConfusionTable) -> str:
    blocks = []
    for title, table in (
        ("without ratio attribute", without),
        ("with ratio attribute", with_car),
    ):
        rendered = render_confusion_text(
            table.cells,
            table.class_order,
            row_totals=table.row_totals,
            column_totals=table.column_totals,
            grand_total=table.grand_total,
        )
        blocks.append(f"published confusion matrix, {title}:\n{rendered}")
        blocks.append(
            f"classification accuracy ({title}): {table.classification_accuracy:.4f}"
        )
    return "\n\n".join(blocks) + "\n"


def _fixture_json(without: PublishedConfusionTable, with_car: PublishedConfusionTable) -> dict:
    def block(table: PublishedConfusionTable) -> dict:
        return {
            "class_order": [band.name for band in table.class_order],
            "cells": [list(row) for row in table.cells],
            "row_totals": list(table.row_totals),
            "column_totals": list(table.column_totals),
            "grand_total": table.grand_total,
            "classification_accuracy": table.classification_accuracy,
        }

    return {"without_car": block(without), "with_car": block(with_car)}


def _comparison_csv(result: ComparisonResult) -> str:
    lines = ["metric,with_car,without_car"]
    lines.append(
        "classification_accuracy,"
        f"{result.with_car.classification_accuracy!r},"
        f"{result.without_car.classification_accuracy!r}"
    )
    lines.append(f"auc,{result.with_car.auc!r},{result.without_car.auc!r}")
    lines.append(
        f"error_rate,{result.with_car.error_rate!r},{result.without_car.error_rate!r}"
    )
    lines.append(f"auc_delta,{result.auc_delta!r},")
    return "\n".join(lines) + "\n"


def _comparison_text(result: ComparisonResult) -> str:
    parts = [
        "with ratio attribute:",
        render_report_text(result.with_car),
        "",
        "without ratio attribute:",
        render_report_text(result.without_car),
        "",
        f"AUC delta (with - without): {result.auc_delta:+.4f}",
    ]
    return "\n".join(parts) + "\n"


@main.command()
@click.argument("input_csv", type=click.Path(), required=False)
@click.option("--from-fixture", is_flag=True, default=False, help="Print the published confusion-matrix fixtures instead of evaluating data.")
@click.option("--test-fraction", type=float, default=None, help=f"Holdout test share.  [default: {DEFAULT_TEST_FRACTION}]")
@click.option("--trees", type=int, default=None, help="Number of trees.  [default: 100]")
@click.option("--max-features", type=int, default=None, help="Features tried per node.  [default: ceil(sqrt(d))]")
@click.option("--min-leaf", type=int, default=None, help="Minimum rows per leaf.  [default: 1]")
@click.option("--no-bootstrap", is_flag=True, default=False, help="Train every tree on the full training set instead of bootstrap resamples.")
@click.option("--auc-average", type=click.Choice(["weighted", "macro"]), default=None, help="Multiclass AUC averaging.  [default: weighted]")
@click.option("--jobs", type=int, default=None, help="Worker threads for training.  [default: 1]")
@click.option("--target-year", type=int, default=None, help="Year whose band is predicted.  [default: 3]")
@click.option("--predictor-years", type=str, default=None, help="Comma-separated predictor years.  [default: 1,2]")
@_seed_option
@_config_option
@_format_option
@_output_option
@click.pass_context
def evaluate(ctx: click.Context, input_csv: str | None, **_: object) -> None:
    """Predict target-year bands from earlier years, with and without the
    mean coursework ratio attribute, on one identical holdout split.

    INPUT_CSV must be a refined transcript (the output of `refine`).
    """
    settings = _merged_settings(
        ctx,
        {
            "from_fixture": False,
            "test_fraction": DEFAULT_TEST_FRACTION,
            "trees": 100,
            "max_features": None,
            "min_leaf": 1,
            "no_bootstrap": False,
            "auc_average": "weighted",
            "jobs": 1,
            "target_year": 3,
            "predictor_years": "1,2",
            "seed": DEFAULT_SEED,
            "format": None,
            "output": None,
            "banding": None,
        },
    )
    if ctx.get_parameter_source("output_format") == ParameterSource.COMMANDLINE:
        settings["format"] = ctx.params["output_format"]
    if ctx.get_parameter_source("output_path") == ParameterSource.COMMANDLINE:
        settings["output"] = ctx.params["output_path"]
    output_format = settings["format"] or "text"

    if settings["from_fixture"]:
        if output_format == "json":
            text = _json_text(_fixture_json(CONFUSION_WITHOUT_CAR, CONFUSION_WITH_CAR))
        else:
            text = _fixture_text(CONFUSION_WITHOUT_CAR, CONFUSION_WITH_CAR)
        _emit(text, settings["output"])
        return

    if input_csv is None:
        _usage_error("INPUT_CSV is required unless --from-fixture is given")
    try:
        records, refined_marks, _report = parse_refined_transcript_csv(input_csv)
    except OSError as exc:
        _usage_error(f"cannot read {input_csv}: {exc}")
    except TranscriptSchemaError as exc:
        _usage_error(f"{exc} (expected the refined schema written by `refine`)")
    if not records:
        _data_error(f"no valid records in {input_csv}")

    scheme = _parse_banding(settings["banding"]) if settings["banding"] else DEFAULT_BANDING
    predictor_years = _parse_predictor_years(str(settings["predictor_years"]))
    table = build_feature_table(
        records,
        refined_marks=refined_marks,
        predictor_years=predictor_years,
        target_year=int(settings["target_year"]),
        include_car=True,
        scheme=scheme,
    )
    if len(table.rows) < 2:
        _data_error(
            f"only {len(table.rows)} students have complete year coverage; cannot evaluate"
        )
    try:
        params = ForestParams(
            tree_count=int(settings["trees"]),
            max_features=settings["max_features"],
            min_leaf=int(settings["min_leaf"]),
            bootstrap=not settings["no_bootstrap"],
        )
    except ValueError as exc:
        _usage_error(str(exc))
    try:
        result = compare_with_without_car(
            table,
            params,
            seed=int(settings["seed"]),
            test_fraction=float(settings["test_fraction"]),
            average=str(settings["auc_average"]),
            n_jobs=int(settings["jobs"]),
        )
    except (SingleClassError, UndefinedAucError) as exc:
        _data_error(str(exc))
    except ValueError as exc:
        _data_error(str(exc))

    if output_format == "json":
        text = _json_text(result.to_json_dict())
    elif output_format == "csv":
        text = _comparison_csv(result)
    else:
        text = _comparison_text(result)
    _emit(text, settings["output"])


def _render_saved_report(data: dict, output_format: str) -> str:
    if "with_car" in data and "without_car" in data:
        if output_format == "csv":
            lines = ["metric,with_car,without_car"]
            for metric in ("classification_accuracy", "auc", "error_rate"):
                lines.append(
                    f"{metric},{data['with_car'][metric]!r},{data['without_car'][metric]!r}"
                )
            lines.append(f"auc_delta,{data['auc_delta']!r},")
            return "\n".join(lines) + "\n"
        parts = []
        for title, key in (("with ratio attribute", "with_car"), ("without ratio attribute", "without_car")):
            block = data[key]
            order = tuple(DegreeBand.from_label(name) for name in block["confusion"]["class_order"])
            cells = tuple(tuple(int(c) for c in row) for row in block["confusion"]["cells"])
            parts.append(f"{title}:")
            parts.append(render_confusion_text(cells, order))
            parts.append(f"classification accuracy: {block['classification_accuracy']:.4f}")
            parts.append(f"AUC ({block['auc_average']}): {block['auc']:.4f}")
            parts.append(f"error rate: {block['error_rate']:.4f}")
            parts.append("")
        parts.append(f"AUC delta (with - without): {data['auc_delta']:+.4f}")
        return "\n".join(parts) + "\n"
    if "b0" in data:
        model = RefinementModel.from_json_dict(data)
        return (
            f"{model.model_kind.value} model: b0 = {model.intercept:.6g}, "
            f"b1 = {model.linear:.6g}, b2 = {model.quadratic:.6g}, "
            f"R^2 = {model.r_squared:.6f}, n = {model.n_observations}\n"
        )
    if data and all(isinstance(value, dict) and "b0" in value for value in data.values()):
        lines = []
        for scope in sorted(data):
            model = RefinementModel.from_json_dict(data[scope])
            lines.append(
                f"{scope}: {model.model_kind.value} b0 = {model.intercept:.6g}, "
                f"b1 = {model.linear:.6g}, b2 = {model.quadratic:.6g}, "
                f"R^2 = {model.r_squared:.6f}, n = {model.n_observations}"
            )
        return "\n".join(lines) + "\n"
    _usage_error("unrecognized report JSON; expected evaluate or refine output")


@main.command()
@click.argument("input_json", type=click.Path())
@_config_option
@_format_option
@_output_option
@click.pass_context
def report(ctx: click.Context, input_json: str, **_: object) -> None:
    """Re-render a saved JSON report (from `evaluate` or `refine`) as
    text or CSV without recomputing anything."""
    settings = _merged_settings(ctx, {"format": None, "output": None})
    if ctx.get_parameter_source("output_format") == ParameterSource.COMMANDLINE:
        settings["format"] = ctx.params["output_format"]
    if ctx.get_parameter_source("output_path") == ParameterSource.COMMANDLINE:
        settings["output"] = ctx.params["output_path"]
    output_format = settings["format"] or "text"

    try:
        data = json.loads(Path(input_json).read_text(encoding="utf-8"))
    except OSError as exc:
        _usage_error(f"cannot read {input_json}: {exc}")
    except json.JSONDecodeError as exc:
        _usage_error(f"{input_json} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        _usage_error(f"{input_json} must hold a JSON object")

    if output_format == "json":
        text = _json_text(data)
    else:
        text = _render_saved_report(data, output_format)
    _emit(text, settings["output"])


if __name__ == "__main__":
    main()
