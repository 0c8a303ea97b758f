"""Transcript preparation toolkit.

Derives coursework assessment ratios from module weightings, removes the
fitted ratio effect from module marks, and measures how much the ratio
attribute helps a from-scratch random forest predict final degree bands.
Everything downstream of a seed is deterministic.
"""
from .core import (
    DEFAULT_BANDING,
    AssessmentWeighting,
    BandingScheme,
    Car,
    DegreeBand,
    EmptySelectionError,
    StudentModuleOutcome,
    classify_band,
    compute_car,
    year_average,
)
from .evaluation import (
    CAR_COLUMN,
    DEFAULT_TEST_FRACTION,
    ComparisonResult,
    ConfusionMatrix,
    EvaluationReport,
    UndefinedAucError,
    auc_binary,
    auc_multiclass,
    build_feature_table,
    compare_with_without_car,
    confusion_matrix,
    evaluate_forest,
    render_confusion_text,
    render_report_text,
)
from .forest import (
    FeatureRow,
    FeatureTable,
    ForestModel,
    ForestParams,
    SingleClassError,
    TreeNode,
    forest_from_json_dict,
    forest_to_json_dict,
    gini_impurity,
    holdout_split,
    predict_band,
    predict_proba,
    proba_vector,
    train_forest,
)
from .ingest import (
    RECOMBINATION_TOLERANCE,
    REFINED_MARK_COLUMN,
    TRANSCRIPT_COLUMNS,
    IngestReport,
    IssueCategory,
    MissingPolicy,
    Severity,
    TranscriptSchemaError,
    ValidationIssue,
    apply_missing_policy,
    deduplicate,
    parse_refined_transcript_csv,
    parse_transcript_csv,
    write_transcript_csv,
)
from .refine import (
    REFERENCE_LINEAR_COEFFICIENT,
    REFERENCE_QUADRATIC_COEFFICIENT,
    ModelKind,
    RefinementModel,
    RefinementResult,
    SingularFitError,
    choose_model_kind,
    derive_ratio_classes,
    fit_polynomial,
    reference_model,
    refine_mark,
    run_refinement_pipeline,
    select_model,
)
from .stats import (
    AssessmentMethodClass,
    DegenerateSampleError,
    GroupSummary,
    TTestResult,
    TTestVariant,
    classify_method,
    group_mean_table,
    regularized_incomplete_beta,
    student_t_cdf,
    two_sample_t,
)
from .streams import normal_deviate, substream
from .synthgen import (
    DEFAULT_WEIGHT_CLASSES,
    CohortSpec,
    CohortSpecError,
    DepartmentProfile,
    default_cohort_spec,
    generate_cohort,
)

__version__ = "0.1.0"

__all__ = [
    "AssessmentMethodClass",
    "AssessmentWeighting",
    "BandingScheme",
    "CAR_COLUMN",
    "Car",
    "CohortSpec",
    "CohortSpecError",
    "ComparisonResult",
    "ConfusionMatrix",
    "DEFAULT_BANDING",
    "DEFAULT_TEST_FRACTION",
    "DEFAULT_WEIGHT_CLASSES",
    "DegenerateSampleError",
    "DegreeBand",
    "DepartmentProfile",
    "EmptySelectionError",
    "EvaluationReport",
    "FeatureRow",
    "FeatureTable",
    "ForestModel",
    "ForestParams",
    "GroupSummary",
    "IngestReport",
    "IssueCategory",
    "MissingPolicy",
    "ModelKind",
    "RECOMBINATION_TOLERANCE",
    "REFERENCE_LINEAR_COEFFICIENT",
    "REFERENCE_QUADRATIC_COEFFICIENT",
    "REFINED_MARK_COLUMN",
    "RefinementModel",
    "RefinementResult",
    "Severity",
    "SingleClassError",
    "SingularFitError",
    "StudentModuleOutcome",
    "TRANSCRIPT_COLUMNS",
    "TTestResult",
    "TTestVariant",
    "TranscriptSchemaError",
    "TreeNode",
    "UndefinedAucError",
    "ValidationIssue",
    "auc_binary",
    "auc_multiclass",
    "build_feature_table",
    "choose_model_kind",
    "classify_band",
    "classify_method",
    "compare_with_without_car",
    "compute_car",
    "confusion_matrix",
    "deduplicate",
    "default_cohort_spec",
    "derive_ratio_classes",
    "evaluate_forest",
    "fit_polynomial",
    "forest_from_json_dict",
    "forest_to_json_dict",
    "generate_cohort",
    "gini_impurity",
    "group_mean_table",
    "holdout_split",
    "normal_deviate",
    "parse_refined_transcript_csv",
    "parse_transcript_csv",
    "predict_band",
    "predict_proba",
    "proba_vector",
    "reference_model",
    "refine_mark",
    "regularized_incomplete_beta",
    "render_confusion_text",
    "render_report_text",
    "run_refinement_pipeline",
    "select_model",
    "student_t_cdf",
    "substream",
    "train_forest",
    "two_sample_t",
    "write_transcript_csv",
    "year_average",
]
