"""AIC/BIC-optimal feature subset selection for sequential logit models."""

from .data import (
    Dataset,
    OrdinalEncoding,
    PreprocessOptions,
    PreprocessWarning,
    RawTable,
    dataset_to_csv,
    encode_labels,
    load_csv,
    preprocess,
)
from .estimator import (
    ClassProblem,
    FitError,
    FitResult,
    class_problems,
    fit_exact,
    fit_pwl,
    fit_quad,
    log_likelihood,
    predict_proba,
)
from .loss import (
    DEFAULT_TANGENT_POINTS,
    TangentSet,
    default_tangents,
    logistic_loss,
    logistic_loss_curv,
    logistic_loss_grad,
    make_tangents,
    pwl_loss,
    quad_loss,
    read_tangent_points,
    sigmoid,
)
from .model_io import (
    LpExportOptions,
    evaluate_lp_objective,
    export_lp,
    parse_lp_file,
    read_report,
    violated_constraints,
    write_report,
)
from .selector import (
    Node,
    SelectionProblem,
    SelectionReport,
    branch_and_bound,
    criterion_value,
    evaluate_subset,
    exhaustive_select,
    stepwise_warm_start,
)
from .simplex import CyclingError, LpError, LpProblem, LpSolution, solve_lp
from .synth import synth_dataset, synth_instance, write_synth_csv

__version__ = "0.1.0"

__all__ = [
    "ClassProblem",
    "CyclingError",
    "DEFAULT_TANGENT_POINTS",
    "Dataset",
    "FitError",
    "FitResult",
    "LpError",
    "LpExportOptions",
    "LpProblem",
    "LpSolution",
    "Node",
    "OrdinalEncoding",
    "PreprocessOptions",
    "PreprocessWarning",
    "RawTable",
    "SelectionProblem",
    "SelectionReport",
    "TangentSet",
    "branch_and_bound",
    "class_problems",
    "criterion_value",
    "dataset_to_csv",
    "default_tangents",
    "encode_labels",
    "evaluate_lp_objective",
    "evaluate_subset",
    "exhaustive_select",
    "export_lp",
    "fit_exact",
    "fit_pwl",
    "fit_quad",
    "load_csv",
    "log_likelihood",
    "logistic_loss",
    "logistic_loss_curv",
    "logistic_loss_grad",
    "make_tangents",
    "parse_lp_file",
    "predict_proba",
    "preprocess",
    "pwl_loss",
    "quad_loss",
    "read_report",
    "read_tangent_points",
    "sigmoid",
    "solve_lp",
    "stepwise_warm_start",
    "synth_dataset",
    "synth_instance",
    "violated_constraints",
    "write_report",
    "write_synth_csv",
]
