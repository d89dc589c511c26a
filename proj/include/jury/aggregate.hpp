/// @file aggregate.hpp
/// @brief Per-sample combination of evaluator verdicts: majority vote over
///        pairwise choices, strict majority for binary dimensions, means for
///        graded rubric dimensions, and composite dimensions derived from
///        their aggregated constituents.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/types.hpp"
#include "jury/verdict.hpp"

namespace jury {

/// Ensemble-level verdict for one sample.
struct AggregateVerdict {
    std::string sample_id;
    bool valid = false;       ///< quorum of parsed verdicts reached
    int contributing = 0;     ///< parsed verdicts that entered the vote/means
    std::optional<Choice> choice;            ///< pairwise tasks only
    std::map<std::string, double> scores;    ///< per-dimension aggregates
    std::map<std::string, int> tally;        ///< vote counts (choice / binary)
};

/// Majority vote with a fixed tie rule:
///   - a tie between Assistant1 and Assistant2 resolves to Equal,
///   - a tie between Equal and exactly one assistant resolves to that
///     assistant,
///   - a three-way tie resolves to Equal.
/// Throws PreconditionError on an empty ballot.
Choice majority_vote(const std::vector<Choice>& votes);

/// Strict majority for 0/1 ballots: 1 iff ones outnumber zeros (ties -> 0).
/// Throws PreconditionError on an empty ballot.
int binary_majority(const std::vector<int>& votes);

/// Arithmetic mean. Throws PreconditionError on an empty list.
double mean_score(const std::vector<double>& values);

/// Number of parsed verdicts required for a sample to be valid:
/// max(1, ceil(quorum_fraction * ensemble_size)), with an epsilon guard so
/// exact products are not pushed up by floating point.
int quorum_threshold(double quorum_fraction, int ensemble_size);

/// Reduces a (possibly multi-turn) verdict stream to the contributing verdict
/// of each (sample, evaluator): the one with the highest turn index.
std::vector<Verdict> contributing_verdicts(const std::vector<Verdict>& verdicts);

/// Aggregates the contributing verdicts of a single sample. `verdicts` must
/// all carry the same sample_id; unparsed ones count toward nothing.
/// `ensemble_size` is the configured number of evaluators (the quorum base),
/// not the number of verdicts present.
AggregateVerdict aggregate_sample(const TaskSpec& task, const std::string& sample_id,
                                  const std::vector<Verdict>& verdicts,
                                  double quorum_fraction, int ensemble_size);

/// Groups a verdict stream by sample, reduces each evaluator to its last
/// turn, and aggregates. Output is sorted by sample_id.
std::vector<AggregateVerdict> aggregate_all(const TaskSpec& task,
                                            const std::vector<Verdict>& verdicts,
                                            double quorum_fraction, int ensemble_size);

nlohmann::json aggregate_to_json(const AggregateVerdict& aggregate);
AggregateVerdict aggregate_from_json(const nlohmann::json& j);

}  // namespace jury
