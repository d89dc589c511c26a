/// @file analysis.hpp
/// @brief Post-hoc ensemble studies: exhaustive subset-size accuracy sweeps
///        and pairwise inter-evaluator agreement matrices.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jury/types.hpp"
#include "jury/verdict.hpp"

namespace jury {

// ---------------------------------------------------------------------------
// Subset sweep
// ---------------------------------------------------------------------------

struct SubsetSweepRow {
    int k = 0;
    long long subset_count = 0;        ///< C(N, k)
    double mean_accuracy = 0.0;        ///< unweighted mean over all subsets
    std::optional<double> se;          ///< stddev / sqrt(subset_count); absent at 1 subset
};

struct SubsetSweepResult {
    int ensemble_size = 0;
    std::vector<SubsetSweepRow> rows;  ///< k = 1..N in order
};

long long binomial(int n, int k);

/// Exhaustively re-aggregates every size-k subset of evaluators with the
/// majority rule and scores accuracy against `truth` (sample id -> label:
/// canonical choice string for pairwise tasks, 0/1 number for binary tasks).
/// A sample counts for a subset iff it has truth and at least one parsed
/// subset verdict. `verdicts` must cover every (sample, evaluator) pair,
/// parse failures included; otherwise IncompleteVerdicts. Ensemble sizes
/// above 20 are rejected (exact enumeration only).
SubsetSweepResult subset_sweep(const TaskSpec& task, const std::vector<Verdict>& verdicts,
                               const std::map<std::string, LabelValue>& truth);

/// CSV with header k,subset_count,mean_accuracy,se (se empty when absent).
std::string sweep_to_csv(const SubsetSweepResult& result);

// ---------------------------------------------------------------------------
// Agreement matrix
// ---------------------------------------------------------------------------

struct AgreementMatrix {
    std::string measure;                      ///< "pearson" or "kappa"
    std::vector<std::string> evaluator_ids;   ///< row/column order
    /// Symmetric; diagonal 1. An entry is absent when the measure is
    /// undefined for that pair (e.g. a constant vector under Pearson).
    std::vector<std::vector<std::optional<double>>> values;
};

/// Pairwise agreement between evaluators over samples both parsed.
/// Pairwise-choice verdicts are encoded numerically for Pearson as
/// Assistant1 -> 1, Assistant2 -> 2, Equal -> 0; kappa treats them as
/// categories. Rubric tasks compare `dimension` (default: first declared
/// base dimension). Fewer than 2 overlapping samples for a pair ->
/// InsufficientOverlap. Throws ConfigError on an unknown measure.
AgreementMatrix agreement_matrix(const TaskSpec& task, const std::vector<Verdict>& verdicts,
                                 const std::string& measure,
                                 const std::string& dimension = "");

/// CSV with one header row/column of evaluator ids; empty cell = undefined.
std::string matrix_to_csv(const AgreementMatrix& matrix);

}  // namespace jury
