/// @file metrics.hpp
/// @brief Agreement, error, and correlation statistics between ensemble
///        verdicts and human labels, plus the per-run report that carries
///        them alongside query accounting.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/aggregate.hpp"
#include "jury/types.hpp"

namespace jury {

// ---------------------------------------------------------------------------
// Confusion matrix and classification metrics
// ---------------------------------------------------------------------------

/// Square count matrix; rows index truth labels, columns predicted labels.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<long long>> counts;

    long long total() const;
    long long trace() const;
    long long row_sum(size_t i) const;
    long long col_sum(size_t j) const;

    /// Builds from (truth, prediction) pairs. With `labels` empty the label
    /// set is the sorted union of observed values; otherwise the given order
    /// is kept and unseen pairs reject with LabelError.
    static ConfusionMatrix from_pairs(
        const std::vector<std::pair<std::string, std::string>>& truth_pred,
        std::vector<std::string> labels = {});
};

/// trace / total. Throws EmptyMatrix when no samples were counted.
double accuracy(const ConfusionMatrix& cm);

/// Unweighted mean of per-class F1 over every label in the matrix; a class
/// with no true and no predicted members contributes F1 = 0.
double macro_f1(const ConfusionMatrix& cm);

/// (p_o - p_e) / (1 - p_e) with p_e from marginal products; 0 when the
/// denominator vanishes (degenerate single-label data).
double cohens_kappa(const ConfusionMatrix& cm);

/// Multiclass Matthews correlation coefficient (Gorodkin form); 0 when
/// either denominator factor is 0.
double mcc(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// Error and correlation metrics for graded dimensions
// ---------------------------------------------------------------------------

struct ErrorMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

/// Standard definitions; rmse = sqrt(mse). Throws LengthMismatch /
/// EmptyInput.
ErrorMetrics error_metrics(const std::vector<double>& pred, const std::vector<double>& truth);

/// 1-based average ranks, ties receiving the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

struct CorrelationMetrics {
    std::optional<double> pearson;
    std::optional<double> spearman;   ///< Pearson over average ranks
    std::optional<double> kendall;    ///< tau-b, tie corrected
};

/// Throws LengthMismatch / TooFewPoints (< 2). A coefficient is absent when
/// its value is undefined (constant input, or all-tied pairs for tau-b).
CorrelationMetrics correlations(const std::vector<double>& pred,
                                const std::vector<double>& truth);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// How human truth is derived from per-annotator labels.
struct TruthPolicy {
    enum class Kind { Annotator, Majority, Mean };
    Kind kind = Kind::Majority;
    std::string annotator_id;  ///< Kind::Annotator only
};

/// Parses "annotator:<id>" | "majority" | "mean". Throws ConfigError.
TruthPolicy parse_truth_policy(const std::string& text);
std::string to_string(const TruthPolicy& policy);

/// Metrics actually applicable to one dimension's scale; absent otherwise.
struct DimensionMetrics {
    int n = 0;  ///< scored samples carrying truth for this dimension
    std::optional<double> accuracy, macro_f1, kappa, mcc;
    std::optional<double> mse, rmse, mae;
    std::optional<double> pearson, spearman, kendall;
    std::optional<ConfusionMatrix> confusion;  ///< classification dimensions
};

struct MetricsReport {
    std::string task_id;
    std::string truth_policy;
    std::map<std::string, DimensionMetrics> dimensions;
    long long total_queries = 0;
    int excluded_samples = 0;  ///< quorum failures
    int missing_truth = 0;     ///< valid samples with no usable truth
    int scored_samples = 0;    ///< valid samples entering at least one metric
};

/// Scores valid aggregate verdicts against human labels under `policy`.
/// Majority-aggregated dimensions get classification metrics; mean
/// dimensions get error + correlation metrics; composite truth is the mean
/// of its constituents' truths. Throws MissingLabels(dimension) when no
/// sample carries truth for a dimension.
MetricsReport build_report(const TaskSpec& task,
                           const std::vector<AggregateVerdict>& aggregates,
                           const std::vector<Sample>& samples, const TruthPolicy& policy,
                           long long total_queries);

/// Per-sample truth for the task's vote dimension (pairwise: canonical
/// choice string; binary: 0/1 number), for the subset sweep. Samples
/// without usable truth are omitted.
std::map<std::string, LabelValue> truth_labels(const TaskSpec& task,
                                               const std::vector<Sample>& samples,
                                               const TruthPolicy& policy);

nlohmann::json report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);
std::string report_to_table(const MetricsReport& report);

}  // namespace jury
