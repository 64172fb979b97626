"""Shared right-singular-subspace estimation across noisy tables."""

from ._core import (
    AlignmentReport,
    Error,
    PredictionReport,
    ProblemSpec,
    SubspaceEstimate,
    alignment,
    auto_weights,
    beta_from_theta,
    count_pipeline,
    detection_thresholds,
    estimate_theta,
    estimate_theta_cross_table,
    eval_weighted_stack_svd,
    generate_tables,
    inadmissibility_instance,
    optimal_weights_stack_svd,
    optimal_weights_svd_stack,
    predict_rank_r,
    predict_stack_svd,
    predict_stack_svd_binary,
    predict_stack_svd_subset,
    predict_stack_svd_weighted,
    predict_svd_stack,
    predict_svd_stack_weighted,
    read_matrix,
    run_experiment,
    sample_random_spec,
    stack_svd,
    stack_svd_rank_r,
    svd_stack,
    svd_stack_rank_r,
    write_matrix_binary,
    write_matrix_csv,
)

__all__ = [
    "AlignmentReport",
    "Error",
    "PredictionReport",
    "ProblemSpec",
    "SubspaceEstimate",
    "alignment",
    "auto_weights",
    "beta_from_theta",
    "count_pipeline",
    "detection_thresholds",
    "estimate_theta",
    "estimate_theta_cross_table",
    "eval_weighted_stack_svd",
    "generate_tables",
    "inadmissibility_instance",
    "optimal_weights_stack_svd",
    "optimal_weights_svd_stack",
    "predict_rank_r",
    "predict_stack_svd",
    "predict_stack_svd_binary",
    "predict_stack_svd_subset",
    "predict_stack_svd_weighted",
    "predict_svd_stack",
    "predict_svd_stack_weighted",
    "read_matrix",
    "run_experiment",
    "sample_random_spec",
    "stack_svd",
    "stack_svd_rank_r",
    "svd_stack",
    "svd_stack_rank_r",
    "write_matrix_binary",
    "write_matrix_csv",
]
