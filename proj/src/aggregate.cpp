/// @file aggregate.cpp
/// @brief Ensemble aggregation implementation.

#include "jury/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "jury/errors.hpp"

namespace jury {

using nlohmann::json;

Choice majority_vote(const std::vector<Choice>& votes) {
    if (votes.empty()) throw Error("PreconditionError", "majority_vote on empty ballot");
    int a1 = 0, a2 = 0, eq = 0;
    for (Choice c : votes) {
        if (c == Choice::Assistant1) ++a1;
        else if (c == Choice::Assistant2) ++a2;
        else ++eq;
    }
    const int top = std::max({a1, a2, eq});
    const bool t1 = a1 == top, t2 = a2 == top, te = eq == top;
    if (t1 && !t2 && !te) return Choice::Assistant1;
    if (t2 && !t1 && !te) return Choice::Assistant2;
    if (te && !t1 && !t2) return Choice::Equal;
    if (t1 && t2) return Choice::Equal;        // assistants tied (with or without Equal)
    return t1 ? Choice::Assistant1 : Choice::Assistant2;  // Equal tied with one assistant
}

int binary_majority(const std::vector<int>& votes) {
    if (votes.empty()) throw Error("PreconditionError", "binary_majority on empty ballot");
    const int ones = static_cast<int>(std::count(votes.begin(), votes.end(), 1));
    const int zeros = static_cast<int>(votes.size()) - ones;
    return ones > zeros ? 1 : 0;
}

double mean_score(const std::vector<double>& values) {
    if (values.empty()) throw Error("PreconditionError", "mean_score on empty list");
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

int quorum_threshold(double quorum_fraction, int ensemble_size) {
    if (ensemble_size <= 0)
        throw Error("PreconditionError", "quorum_threshold needs a positive ensemble size");
    const int need =
        static_cast<int>(std::ceil(quorum_fraction * ensemble_size - 1e-9));
    return std::max(1, need);
}

std::vector<Verdict> contributing_verdicts(const std::vector<Verdict>& verdicts) {
    std::map<std::pair<std::string, std::string>, Verdict> last;
    for (const Verdict& v : verdicts) {
        auto key = std::make_pair(v.sample_id, v.evaluator_id);
        auto it = last.find(key);
        if (it == last.end() || v.turn >= it->second.turn) last[key] = v;
    }
    std::vector<Verdict> out;
    out.reserve(last.size());
    for (auto& [key, v] : last) out.push_back(std::move(v));
    return out;
}

AggregateVerdict aggregate_sample(const TaskSpec& task, const std::string& sample_id,
                                  const std::vector<Verdict>& verdicts,
                                  double quorum_fraction, int ensemble_size) {
    AggregateVerdict out;
    out.sample_id = sample_id;

    // A verdict contributes only when it actually carries what the task
    // needs; a parse_ok flag alone is not trusted on loaded files.
    const auto base = task.base_dimensions();
    auto usable = [&](const Verdict& v) {
        if (!v.parse_ok) return false;
        if (task.kind == TaskKind::PairwiseChoice) return v.choice.has_value();
        return std::all_of(base.begin(), base.end(), [&](const DimensionSpec& dim) {
            return v.scores.count(dim.name) > 0;
        });
    };
    std::vector<const Verdict*> parsed;
    for (const Verdict& v : verdicts)
        if (usable(v)) parsed.push_back(&v);
    out.contributing = static_cast<int>(parsed.size());
    out.valid = out.contributing >= quorum_threshold(quorum_fraction, ensemble_size);
    if (!out.valid || parsed.empty()) return out;

    if (task.kind == TaskKind::PairwiseChoice) {
        std::vector<Choice> votes;
        votes.reserve(parsed.size());
        for (const Verdict* v : parsed) votes.push_back(*v->choice);
        for (Choice c : votes) ++out.tally[to_string(c)];
        out.choice = majority_vote(votes);
        return out;
    }

    // Graded and binary dimensions, then composites over aggregated values.
    for (const DimensionSpec& dim : base) {
        std::vector<double> values;
        for (const Verdict* v : parsed) values.push_back(v->scores.at(dim.name));
        if (dim.aggregation == Aggregation::Majority) {
            std::vector<int> votes;
            for (double value : values) votes.push_back(value > 0.5 ? 1 : 0);
            for (int b : votes) ++out.tally[std::to_string(b)];
            out.scores[dim.name] = binary_majority(votes);
        } else {
            out.scores[dim.name] = mean_score(values);
        }
    }
    for (const DimensionSpec& dim : task.dimensions) {
        if (!dim.is_composite()) continue;
        std::vector<double> parts;
        for (const std::string& name : dim.composite_of) parts.push_back(out.scores.at(name));
        out.scores[dim.name] = mean_score(parts);
    }
    return out;
}

std::vector<AggregateVerdict> aggregate_all(const TaskSpec& task,
                                            const std::vector<Verdict>& verdicts,
                                            double quorum_fraction, int ensemble_size) {
    std::map<std::string, std::vector<Verdict>> by_sample;
    for (Verdict& v : contributing_verdicts(verdicts))
        by_sample[v.sample_id].push_back(std::move(v));

    std::vector<AggregateVerdict> out;
    out.reserve(by_sample.size());
    for (const auto& [sample_id, group] : by_sample)
        out.push_back(aggregate_sample(task, sample_id, group, quorum_fraction, ensemble_size));
    return out;
}

json aggregate_to_json(const AggregateVerdict& a) {
    return json{{"sample_id", a.sample_id},
                {"valid", a.valid},
                {"contributing", a.contributing},
                {"choice", a.choice ? json(to_string(*a.choice)) : json(nullptr)},
                {"scores", a.scores},
                {"tally", a.tally}};
}

AggregateVerdict aggregate_from_json(const json& j) {
    AggregateVerdict a;
    a.sample_id = j.at("sample_id").get<std::string>();
    a.valid = j.at("valid").get<bool>();
    a.contributing = j.at("contributing").get<int>();
    if (!j.at("choice").is_null()) a.choice = choice_from_string(j.at("choice").get<std::string>());
    a.scores = j.at("scores").get<std::map<std::string, double>>();
    a.tally = j.at("tally").get<std::map<std::string, int>>();
    return a;
}

}  // namespace jury
