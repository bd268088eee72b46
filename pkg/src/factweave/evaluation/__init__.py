from .aggregate import (
    MissingAnnotation,
    UnknownGrouping,
    build_report,
    response_scores,
    write_report_csv,
    write_report_json,
)
from .assign import Assignment, InfeasibleAssignment, assign_tasks
from .rubric import (
    CRITERIA,
    OVERALL,
    Annotation,
    AnnotationTask,
    HelpfulnessClass,
    Phase,
    ValidationError,
    classify_helpfulness,
    rubric_schema,
)
from .stats import (
    NOT_APPLICABLE,
    EmptySample,
    LengthMismatch,
    MannWhitneyResult,
    mann_whitney_u,
    observed_agreement,
    spearman_rho,
    weighted_kappa,
)
from .store import AnnotationStore, DuplicateAnnotation

__all__ = [
    "Annotation",
    "AnnotationStore",
    "AnnotationTask",
    "Assignment",
    "CRITERIA",
    "DuplicateAnnotation",
    "EmptySample",
    "HelpfulnessClass",
    "InfeasibleAssignment",
    "LengthMismatch",
    "MannWhitneyResult",
    "MissingAnnotation",
    "NOT_APPLICABLE",
    "OVERALL",
    "Phase",
    "UnknownGrouping",
    "ValidationError",
    "assign_tasks",
    "build_report",
    "classify_helpfulness",
    "mann_whitney_u",
    "observed_agreement",
    "response_scores",
    "rubric_schema",
    "spearman_rho",
    "weighted_kappa",
    "write_report_csv",
    "write_report_json",
]
