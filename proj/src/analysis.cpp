/// @file analysis.cpp
/// @brief Subset sweep and agreement matrix implementations.

#include "jury/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "jury/aggregate.hpp"
#include "jury/errors.hpp"
#include "jury/metrics.hpp"

namespace jury {

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long result = 1;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

namespace {

/// Per-sample parsed values aligned to a fixed evaluator order; -1 = unparsed.
/// Pairwise choices are encoded 0=Equal, 1=Assistant1, 2=Assistant2.
struct SweepTable {
    std::vector<std::string> evaluators;
    std::vector<std::vector<int>> values;  ///< [sample][evaluator]
    std::vector<int> truth;                ///< encoded truth per sample
    bool pairwise = false;
};

int encode_choice(Choice c) {
    switch (c) {
        case Choice::Assistant1: return 1;
        case Choice::Assistant2: return 2;
        case Choice::Equal: return 0;
    }
    return 0;
}

SweepTable build_table(const TaskSpec& task, const std::vector<Verdict>& verdicts,
                       const std::map<std::string, LabelValue>& truth) {
    if (task.kind == TaskKind::Rubric)
        throw config_error("subset sweep applies to pairwise and binary tasks only");
    SweepTable table;
    table.pairwise = task.kind == TaskKind::PairwiseChoice;
    const std::string dim = table.pairwise ? std::string{} : task.dimensions.front().name;

    std::set<std::string> evaluator_set, sample_set;
    for (const Verdict& v : verdicts) {
        evaluator_set.insert(v.evaluator_id);
        sample_set.insert(v.sample_id);
    }
    table.evaluators.assign(evaluator_set.begin(), evaluator_set.end());
    std::map<std::string, size_t> evaluator_index;
    for (size_t i = 0; i < table.evaluators.size(); ++i)
        evaluator_index[table.evaluators[i]] = i;

    std::map<std::string, std::vector<int>> rows;
    std::map<std::string, std::set<std::string>> seen;
    for (const std::string& id : sample_set)
        rows[id].assign(table.evaluators.size(), -1);
    for (const Verdict& v : contributing_verdicts(verdicts)) {
        seen[v.sample_id].insert(v.evaluator_id);
        if (!v.parse_ok) continue;
        int encoded = -1;
        if (table.pairwise) {
            if (v.choice) encoded = encode_choice(*v.choice);
        } else if (auto it = v.scores.find(dim); it != v.scores.end()) {
            encoded = it->second > 0.5 ? 1 : 0;
        }
        rows[v.sample_id][evaluator_index[v.evaluator_id]] = encoded;
    }
    for (const auto& [sample_id, evaluators] : seen)
        if (evaluators.size() != table.evaluators.size())
            throw Error("IncompleteVerdicts",
                        "sample " + sample_id + " lacks a verdict for some evaluators");

    for (const auto& [sample_id, row] : rows) {
        auto label = truth.find(sample_id);
        if (label == truth.end()) continue;
        int encoded_truth;
        if (table.pairwise) {
            const std::string text = std::holds_alternative<std::string>(label->second)
                                         ? std::get<std::string>(label->second)
                                         : std::string{};
            encoded_truth = encode_choice(choice_from_string(text));
        } else {
            encoded_truth = std::get<double>(label->second) > 0.5 ? 1 : 0;
        }
        table.values.push_back(row);
        table.truth.push_back(encoded_truth);
    }
    return table;
}

/// Accuracy of one subset; samples without any parsed member are skipped.
double subset_accuracy(const SweepTable& table, const std::vector<int>& members) {
    long long correct = 0, scored = 0;
    std::vector<Choice> choices;
    std::vector<int> bits;
    for (size_t s = 0; s < table.values.size(); ++s) {
        choices.clear();
        bits.clear();
        for (int e : members) {
            const int v = table.values[s][e];
            if (v < 0) continue;
            if (table.pairwise)
                choices.push_back(v == 1   ? Choice::Assistant1
                                  : v == 2 ? Choice::Assistant2
                                           : Choice::Equal);
            else
                bits.push_back(v);
        }
        int predicted;
        if (table.pairwise) {
            if (choices.empty()) continue;
            predicted = encode_choice(majority_vote(choices));
        } else {
            if (bits.empty()) continue;
            predicted = binary_majority(bits);
        }
        ++scored;
        if (predicted == table.truth[s]) ++correct;
    }
    if (scored == 0) return 0.0;
    return static_cast<double>(correct) / static_cast<double>(scored);
}

}  // namespace

SubsetSweepResult subset_sweep(const TaskSpec& task, const std::vector<Verdict>& verdicts,
                               const std::map<std::string, LabelValue>& truth) {
    SweepTable table = build_table(task, verdicts, truth);
    const int n = static_cast<int>(table.evaluators.size());
    if (n == 0) throw Error("IncompleteVerdicts", "no verdicts to sweep");
    if (n > 20) throw config_error("subset sweep enumerates exactly; ensemble size > 20");

    SubsetSweepResult result;
    result.ensemble_size = n;
    for (int k = 1; k <= n; ++k) {
        std::vector<double> accuracies;
        accuracies.reserve(static_cast<size_t>(binomial(n, k)));
        // Lexicographic combination enumeration.
        std::vector<int> members(k);
        for (int i = 0; i < k; ++i) members[i] = i;
        while (true) {
            accuracies.push_back(subset_accuracy(table, members));
            int i = k - 1;
            while (i >= 0 && members[i] == n - k + i) --i;
            if (i < 0) break;
            ++members[i];
            for (int j = i + 1; j < k; ++j) members[j] = members[j - 1] + 1;
        }

        SubsetSweepRow row;
        row.k = k;
        row.subset_count = static_cast<long long>(accuracies.size());
        // A uniform set has its common value as exact mean and zero spread;
        // bypassing the summation keeps both free of rounding drift.
        const bool uniform = std::all_of(accuracies.begin(), accuracies.end(),
                                         [&](double a) { return a == accuracies.front(); });
        if (uniform) {
            row.mean_accuracy = accuracies.front();
        } else {
            double sum = 0.0;
            for (double a : accuracies) sum += a;
            row.mean_accuracy = sum / static_cast<double>(accuracies.size());
        }
        if (accuracies.size() > 1) {
            double ss = 0.0;
            if (!uniform)
                for (double a : accuracies)
                    ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
            const double stddev = std::sqrt(ss / static_cast<double>(accuracies.size() - 1));
            row.se = stddev / std::sqrt(static_cast<double>(accuracies.size()));
        }
        result.rows.push_back(row);
    }
    return result;
}

std::string sweep_to_csv(const SubsetSweepResult& result) {
    std::ostringstream out;
    out << "k,subset_count,mean_accuracy,se\n";
    char buffer[32];
    for (const SubsetSweepRow& row : result.rows) {
        std::snprintf(buffer, sizeof(buffer), "%.10g", row.mean_accuracy);
        out << row.k << ',' << row.subset_count << ',' << buffer << ',';
        if (row.se) {
            std::snprintf(buffer, sizeof(buffer), "%.10g", *row.se);
            out << buffer;
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Agreement matrix
// ---------------------------------------------------------------------------

AgreementMatrix agreement_matrix(const TaskSpec& task, const std::vector<Verdict>& verdicts,
                                 const std::string& measure, const std::string& dimension) {
    if (measure != "pearson" && measure != "kappa")
        throw config_error("agreement measure must be 'pearson' or 'kappa', got '" + measure +
                           "'");
    std::string dim = dimension;
    if (dim.empty() && task.kind != TaskKind::PairwiseChoice)
        dim = task.base_dimensions().front().name;

    // Per-evaluator sample -> value (numeric code or score).
    std::map<std::string, std::map<std::string, double>> series;
    std::map<std::string, std::map<std::string, std::string>> labels;
    for (const Verdict& v : contributing_verdicts(verdicts)) {
        if (!v.parse_ok) continue;
        if (task.kind == TaskKind::PairwiseChoice) {
            if (!v.choice) continue;
            series[v.evaluator_id][v.sample_id] = static_cast<double>(encode_choice(*v.choice));
            labels[v.evaluator_id][v.sample_id] = to_string(*v.choice);
        } else if (auto it = v.scores.find(dim); it != v.scores.end()) {
            series[v.evaluator_id][v.sample_id] = it->second;
            labels[v.evaluator_id][v.sample_id] = std::to_string(it->second);
        }
    }
    if (series.size() < 2)
        throw Error("InsufficientOverlap", "agreement matrix needs at least 2 evaluators");

    AgreementMatrix matrix;
    matrix.measure = measure;
    for (const auto& [id, unused] : series) matrix.evaluator_ids.push_back(id);
    const size_t n = matrix.evaluator_ids.size();
    matrix.values.assign(n, std::vector<std::optional<double>>(n));

    for (size_t i = 0; i < n; ++i) {
        matrix.values[i][i] = 1.0;
        for (size_t j = i + 1; j < n; ++j) {
            const auto& a = series[matrix.evaluator_ids[i]];
            const auto& b = series[matrix.evaluator_ids[j]];
            std::vector<double> x, y;
            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& [sample_id, value] : a) {
                auto other = b.find(sample_id);
                if (other == b.end()) continue;
                x.push_back(value);
                y.push_back(other->second);
                pairs.emplace_back(labels[matrix.evaluator_ids[i]][sample_id],
                                   labels[matrix.evaluator_ids[j]][sample_id]);
            }
            if (x.size() < 2)
                throw Error("InsufficientOverlap",
                            matrix.evaluator_ids[i] + " vs " + matrix.evaluator_ids[j] +
                                ": fewer than 2 overlapping samples");
            std::optional<double> value;
            if (measure == "pearson") {
                value = correlations(x, y).pearson;
            } else {
                value = cohens_kappa(ConfusionMatrix::from_pairs(pairs));
            }
            matrix.values[i][j] = value;
            matrix.values[j][i] = value;
        }
    }
    return matrix;
}

std::string matrix_to_csv(const AgreementMatrix& matrix) {
    std::ostringstream out;
    out << "evaluator";
    for (const std::string& id : matrix.evaluator_ids) out << ',' << id;
    out << '\n';
    char buffer[32];
    for (size_t i = 0; i < matrix.evaluator_ids.size(); ++i) {
        out << matrix.evaluator_ids[i];
        for (size_t j = 0; j < matrix.evaluator_ids.size(); ++j) {
            out << ',';
            if (matrix.values[i][j]) {
                std::snprintf(buffer, sizeof(buffer), "%.10g", *matrix.values[i][j]);
                out << buffer;
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace jury
