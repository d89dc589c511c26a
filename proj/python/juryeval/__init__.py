"""Reference-free ensemble evaluation of language-model outputs.

Thin Python surface over the C++ core: verdict parsing, vote aggregation,
agreement/error/correlation metrics, ensemble subset sweeps, and ground-truth
helpers. Structured values are plain dicts and lists mirroring the JSON Lines
schemas the command-line tool reads and writes.
"""

from ._core import (
    accuracy,
    aggregate,
    annotator_majority,
    average_ranks,
    binary_majority,
    builtin_task,
    builtin_task_ids,
    cohens_kappa,
    confusion,
    correlations,
    derive_oid_truth,
    error_metrics,
    macro_f1,
    majority_vote,
    mcc,
    parse_choice,
    parse_verdict,
    quorum_threshold,
    render_prompt,
    strip_reasoning,
    subset_sweep,
)

__all__ = [
    "accuracy",
    "aggregate",
    "annotator_majority",
    "average_ranks",
    "binary_majority",
    "builtin_task",
    "builtin_task_ids",
    "cohens_kappa",
    "confusion",
    "correlations",
    "derive_oid_truth",
    "error_metrics",
    "macro_f1",
    "majority_vote",
    "mcc",
    "parse_choice",
    "parse_verdict",
    "quorum_threshold",
    "render_prompt",
    "strip_reasoning",
    "subset_sweep",
]

__version__ = "0.1.0"
