/// @file metrics.cpp
/// @brief Metric implementations and report assembly.

#include "jury/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jury/errors.hpp"

namespace jury {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ConfusionMatrix
// ---------------------------------------------------------------------------

long long ConfusionMatrix::total() const {
    long long sum = 0;
    for (const auto& row : counts)
        for (long long c : row) sum += c;
    return sum;
}

long long ConfusionMatrix::trace() const {
    long long sum = 0;
    for (size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

long long ConfusionMatrix::row_sum(size_t i) const {
    return std::accumulate(counts[i].begin(), counts[i].end(), 0LL);
}

long long ConfusionMatrix::col_sum(size_t j) const {
    long long sum = 0;
    for (const auto& row : counts) sum += row[j];
    return sum;
}

ConfusionMatrix ConfusionMatrix::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& truth_pred,
    std::vector<std::string> labels) {
    if (labels.empty()) {
        std::set<std::string> seen;
        for (const auto& [t, p] : truth_pred) {
            seen.insert(t);
            seen.insert(p);
        }
        labels.assign(seen.begin(), seen.end());
    }
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;

    ConfusionMatrix cm;
    cm.labels = std::move(labels);
    cm.counts.assign(cm.labels.size(), std::vector<long long>(cm.labels.size(), 0));
    for (const auto& [t, p] : truth_pred) {
        auto ti = index.find(t), pi = index.find(p);
        if (ti == index.end() || pi == index.end())
            throw Error("LabelError", "label outside the matrix label set: " +
                                          (ti == index.end() ? t : p));
        ++cm.counts[ti->second][pi->second];
    }
    return cm;
}

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.labels.empty() || cm.total() == 0)
        throw Error("EmptyMatrix", "metric on empty confusion matrix");
}

}  // namespace

double accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double macro_f1(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (size_t k = 0; k < cm.labels.size(); ++k) {
        const double tp = static_cast<double>(cm.counts[k][k]);
        const double predicted = static_cast<double>(cm.col_sum(k));
        const double actual = static_cast<double>(cm.row_sum(k));
        const double precision = predicted > 0 ? tp / predicted : 0.0;
        const double recall = actual > 0 ? tp / actual : 0.0;
        const double f1 =
            (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        sum += f1;  // empty class contributes 0 by convention
    }
    return sum / static_cast<double>(cm.labels.size());
}

double cohens_kappa(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const double n = static_cast<double>(cm.total());
    const double p_o = static_cast<double>(cm.trace()) / n;
    double p_e = 0.0;
    for (size_t k = 0; k < cm.labels.size(); ++k)
        p_e += (static_cast<double>(cm.row_sum(k)) / n) *
               (static_cast<double>(cm.col_sum(k)) / n);
    const double denom = 1.0 - p_e;
    if (std::abs(denom) < 1e-12) return 0.0;  // degenerate single-label data
    return (p_o - p_e) / denom;
}

double mcc(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const double s = static_cast<double>(cm.total());
    const double c = static_cast<double>(cm.trace());
    double tp_dot = 0.0, p_sq = 0.0, t_sq = 0.0;
    for (size_t k = 0; k < cm.labels.size(); ++k) {
        const double t_k = static_cast<double>(cm.row_sum(k));
        const double p_k = static_cast<double>(cm.col_sum(k));
        tp_dot += t_k * p_k;
        p_sq += p_k * p_k;
        t_sq += t_k * t_k;
    }
    const double f1 = s * s - p_sq;
    const double f2 = s * s - t_sq;
    if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
    return (c * s - tp_dot) / std::sqrt(f1 * f2);
}

// ---------------------------------------------------------------------------
// Error and correlation metrics
// ---------------------------------------------------------------------------

ErrorMetrics error_metrics(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw Error("LengthMismatch", "error_metrics on unequal-length vectors");
    if (pred.empty()) throw Error("EmptyInput", "error_metrics on empty vectors");
    double se = 0.0, ae = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        se += d * d;
        ae += std::abs(d);
    }
    ErrorMetrics out;
    out.mse = se / static_cast<double>(pred.size());
    out.rmse = std::sqrt(out.mse);
    out.mae = ae / static_cast<double>(pred.size());
    return out;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

std::optional<double> pearson_raw(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;  // constant vector
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;  // joint tie: in both tie terms
            if (dx == 0.0) ++ties_x;
            else if (dy == 0.0) ++ties_y;
            else if ((dx > 0.0) == (dy > 0.0)) ++concordant;
            else ++discordant;
        }
    }
    // tau-b = (C-D)/sqrt((n0-n1)(n0-n2)) over all pairs, with n1/n2 counting
    // tied pairs in x resp. y (joint ties count in both).
    long long joint = 0;
    {
        std::map<std::pair<double, double>, long long> groups;
        for (size_t i = 0; i < n; ++i) ++groups[{x[i], y[i]}];
        for (const auto& [key, count] : groups) joint += count * (count - 1) / 2;
    }
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double n1 = static_cast<double>(ties_x + joint);
    const double n2 = static_cast<double>(ties_y + joint);
    const double denom = std::sqrt((n0 - n1) * (n0 - n2));
    if (denom <= 0.0) return std::nullopt;  // one vector entirely tied
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace

CorrelationMetrics correlations(const std::vector<double>& pred,
                                const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw Error("LengthMismatch", "correlations on unequal-length vectors");
    if (pred.size() < 2) throw Error("TooFewPoints", "correlations need at least 2 points");
    CorrelationMetrics out;
    out.pearson = pearson_raw(pred, truth);
    out.spearman = pearson_raw(average_ranks(pred), average_ranks(truth));
    out.kendall = kendall_tau_b(pred, truth);
    return out;
}

// ---------------------------------------------------------------------------
// Truth policy
// ---------------------------------------------------------------------------

TruthPolicy parse_truth_policy(const std::string& text) {
    TruthPolicy policy;
    if (text == "majority") {
        policy.kind = TruthPolicy::Kind::Majority;
    } else if (text == "mean") {
        policy.kind = TruthPolicy::Kind::Mean;
    } else if (text.starts_with("annotator:") && text.size() > 10) {
        policy.kind = TruthPolicy::Kind::Annotator;
        policy.annotator_id = text.substr(10);
    } else {
        throw config_error("truth policy must be 'annotator:<id>', 'majority' or 'mean', got '" +
                           text + "'");
    }
    return policy;
}

std::string to_string(const TruthPolicy& policy) {
    switch (policy.kind) {
        case TruthPolicy::Kind::Annotator: return "annotator:" + policy.annotator_id;
        case TruthPolicy::Kind::Majority: return "majority";
        case TruthPolicy::Kind::Mean: return "mean";
    }
    return "majority";
}

// ---------------------------------------------------------------------------
// build_report
// ---------------------------------------------------------------------------

namespace {

double label_as_number(const LabelValue& value) {
    if (std::holds_alternative<double>(value)) return std::get<double>(value);
    throw Error("LabelError", "expected a numeric human label, got '" +
                                  std::get<std::string>(value) + "'");
}

Choice label_as_choice(const LabelValue& value) {
    if (std::holds_alternative<std::string>(value))
        return choice_from_string(std::get<std::string>(value));
    throw Error("LabelError", "expected a categorical human label");
}

/// Per-annotator values for one dimension, in annotator-id order.
template <typename T, typename Convert>
std::vector<T> annotator_values(const Sample& sample, const std::string& dim, Convert convert) {
    std::vector<T> out;
    for (const auto& [annotator, labels] : sample.human_labels) {
        auto it = labels.find(dim);
        if (it != labels.end()) out.push_back(convert(it->second));
    }
    return out;
}

std::optional<double> numeric_truth(const Sample& sample, const std::string& dim,
                                    const TruthPolicy& policy) {
    if (policy.kind == TruthPolicy::Kind::Annotator) {
        auto annot = sample.human_labels.find(policy.annotator_id);
        if (annot == sample.human_labels.end()) return std::nullopt;
        auto it = annot->second.find(dim);
        if (it == annot->second.end()) return std::nullopt;
        return label_as_number(it->second);
    }
    auto values = annotator_values<double>(sample, dim, label_as_number);
    if (values.empty()) return std::nullopt;
    if (policy.kind == TruthPolicy::Kind::Mean) return mean_score(values);
    // Majority over numeric labels: strict majority of the 0/1 votes.
    std::vector<int> votes;
    for (double v : values) votes.push_back(v > 0.5 ? 1 : 0);
    return binary_majority(votes);
}

std::optional<Choice> choice_truth(const Sample& sample, const std::string& dim,
                                   const TruthPolicy& policy) {
    if (policy.kind == TruthPolicy::Kind::Annotator) {
        auto annot = sample.human_labels.find(policy.annotator_id);
        if (annot == sample.human_labels.end()) return std::nullopt;
        auto it = annot->second.find(dim);
        if (it == annot->second.end()) return std::nullopt;
        return label_as_choice(it->second);
    }
    auto votes = annotator_values<Choice>(sample, dim, label_as_choice);
    if (votes.empty()) return std::nullopt;
    return majority_vote(votes);  // Mean is rejected earlier for choice dims
}

}  // namespace

MetricsReport build_report(const TaskSpec& task,
                           const std::vector<AggregateVerdict>& aggregates,
                           const std::vector<Sample>& samples, const TruthPolicy& policy,
                           long long total_queries) {
    MetricsReport report;
    report.task_id = task.id;
    report.truth_policy = to_string(policy);
    report.total_queries = total_queries;

    if (task.kind == TaskKind::PairwiseChoice && policy.kind == TruthPolicy::Kind::Mean)
        throw config_error("truth policy 'mean' does not apply to pairwise choice tasks");

    std::map<std::string, const Sample*> by_id;
    for (const Sample& sample : samples) by_id[sample.id] = &sample;

    std::vector<const AggregateVerdict*> valid;
    std::set<std::string> scored_ids;
    for (const AggregateVerdict& a : aggregates) {
        if (!a.valid) {
            ++report.excluded_samples;
            continue;
        }
        valid.push_back(&a);
    }

    const std::string choice_dim =
        task.kind == TaskKind::PairwiseChoice ? task.dimensions.front().name : std::string{};

    // Truth for a composite dimension is the mean of its constituents' truths,
    // mirroring how the predicted composite is formed.
    auto dim_truth = [&](const Sample& sample, const DimensionSpec& dim)
        -> std::optional<double> {
        if (!dim.is_composite()) return numeric_truth(sample, dim.name, policy);
        std::vector<double> parts;
        for (const std::string& name : dim.composite_of) {
            auto part = numeric_truth(sample, name, policy);
            if (!part) return std::nullopt;
            parts.push_back(*part);
        }
        return mean_score(parts);
    };

    if (task.kind == TaskKind::PairwiseChoice) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const AggregateVerdict* a : valid) {
            auto sample = by_id.find(a->sample_id);
            if (sample == by_id.end() || !a->choice) continue;
            auto truth = choice_truth(*sample->second, choice_dim, policy);
            if (!truth) {
                ++report.missing_truth;
                continue;
            }
            pairs.emplace_back(to_string(*truth), to_string(*a->choice));
            scored_ids.insert(a->sample_id);
        }
        if (pairs.empty()) throw Error("MissingLabels", choice_dim);
        const auto& scale = std::get<CategoricalScale>(task.dimensions.front().scale);
        DimensionMetrics m;
        m.n = static_cast<int>(pairs.size());
        m.confusion = ConfusionMatrix::from_pairs(pairs, scale.labels);
        m.accuracy = accuracy(*m.confusion);
        m.macro_f1 = macro_f1(*m.confusion);
        m.kappa = cohens_kappa(*m.confusion);
        m.mcc = mcc(*m.confusion);
        report.dimensions[choice_dim] = std::move(m);
    } else {
        for (const DimensionSpec& dim : task.dimensions) {
            const bool classify =
                !dim.is_composite() && dim.aggregation == Aggregation::Majority;
            std::vector<std::pair<std::string, std::string>> pairs;
            std::vector<double> pred, truth;
            int missing = 0;
            for (const AggregateVerdict* a : valid) {
                auto sample = by_id.find(a->sample_id);
                auto score = a->scores.find(dim.name);
                if (sample == by_id.end() || score == a->scores.end()) continue;
                auto t = dim_truth(*sample->second, dim);
                if (!t) {
                    ++missing;
                    continue;
                }
                if (classify) {
                    pairs.emplace_back(std::to_string(*t > 0.5 ? 1 : 0),
                                       std::to_string(score->second > 0.5 ? 1 : 0));
                } else {
                    pred.push_back(score->second);
                    truth.push_back(*t);
                }
                scored_ids.insert(a->sample_id);
            }
            DimensionMetrics m;
            if (classify) {
                if (pairs.empty()) throw Error("MissingLabels", dim.name);
                m.n = static_cast<int>(pairs.size());
                m.confusion = ConfusionMatrix::from_pairs(pairs, {"0", "1"});
                m.accuracy = accuracy(*m.confusion);
                m.macro_f1 = macro_f1(*m.confusion);
                m.kappa = cohens_kappa(*m.confusion);
                m.mcc = mcc(*m.confusion);
            } else {
                if (pred.empty()) throw Error("MissingLabels", dim.name);
                m.n = static_cast<int>(pred.size());
                const ErrorMetrics err = error_metrics(pred, truth);
                m.mse = err.mse;
                m.rmse = err.rmse;
                m.mae = err.mae;
                if (pred.size() >= 2) {
                    const CorrelationMetrics corr = correlations(pred, truth);
                    m.pearson = corr.pearson;
                    m.spearman = corr.spearman;
                    m.kendall = corr.kendall;
                }
            }
            report.missing_truth = std::max(report.missing_truth, missing);
            report.dimensions[dim.name] = std::move(m);
        }
    }

    report.scored_samples = static_cast<int>(scored_ids.size());
    return report;
}

std::map<std::string, LabelValue> truth_labels(const TaskSpec& task,
                                               const std::vector<Sample>& samples,
                                               const TruthPolicy& policy) {
    if (task.kind == TaskKind::Rubric)
        throw config_error("vote-dimension truth applies to pairwise and binary tasks only");
    if (task.kind == TaskKind::PairwiseChoice && policy.kind == TruthPolicy::Kind::Mean)
        throw config_error("truth policy 'mean' does not apply to pairwise choice tasks");
    std::map<std::string, LabelValue> out;
    const std::string dim = task.dimensions.front().name;
    for (const Sample& sample : samples) {
        if (task.kind == TaskKind::PairwiseChoice) {
            if (auto choice = choice_truth(sample, dim, policy))
                out[sample.id] = LabelValue{to_string(*choice)};
        } else {
            if (auto value = numeric_truth(sample, dim, policy))
                out[sample.id] = LabelValue{*value > 0.5 ? 1.0 : 0.0};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

json optional_to_json(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

std::string format_cell(const std::optional<double>& value, bool percent) {
    if (!value) return "-";
    char buffer[32];
    if (percent)
        std::snprintf(buffer, sizeof(buffer), "%.2f", *value * 100.0);
    else
        std::snprintf(buffer, sizeof(buffer), "%.4f", *value);
    return buffer;
}

std::string csv_number(const std::optional<double>& value) {
    if (!value) return "";
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.10g", *value);
    return buffer;
}

const std::vector<std::pair<const char*, bool>> kColumns = {
    {"accuracy", true}, {"macro_f1", true}, {"kappa", false}, {"mcc", false},
    {"mse", false},     {"rmse", false},    {"mae", false},   {"pearson", false},
    {"spearman", false}, {"kendall", false}};

std::optional<double> metric_by_name(const DimensionMetrics& m, const std::string& name) {
    if (name == "accuracy") return m.accuracy;
    if (name == "macro_f1") return m.macro_f1;
    if (name == "kappa") return m.kappa;
    if (name == "mcc") return m.mcc;
    if (name == "mse") return m.mse;
    if (name == "rmse") return m.rmse;
    if (name == "mae") return m.mae;
    if (name == "pearson") return m.pearson;
    if (name == "spearman") return m.spearman;
    return m.kendall;
}

}  // namespace

json report_to_json(const MetricsReport& report) {
    json dims = json::object();
    for (const auto& [name, m] : report.dimensions) {
        json d{{"n", m.n}};
        for (const auto& [metric, unused] : kColumns) {
            auto value = metric_by_name(m, metric);
            if (value) d[metric] = *value;
        }
        if (m.confusion) {
            d["confusion"] = json{{"labels", m.confusion->labels},
                                  {"counts", m.confusion->counts}};
        }
        dims[name] = std::move(d);
    }
    return json{{"task", report.task_id},
                {"truth_policy", report.truth_policy},
                {"dimensions", std::move(dims)},
                {"total_queries", report.total_queries},
                {"excluded_samples", report.excluded_samples},
                {"missing_truth", report.missing_truth},
                {"scored_samples", report.scored_samples}};
}

std::string report_to_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "task,truth_policy,dimension,n";
    for (const auto& [metric, unused] : kColumns) out << ',' << metric;
    out << ",total_queries,excluded_samples\n";
    for (const auto& [name, m] : report.dimensions) {
        out << report.task_id << ',' << report.truth_policy << ',' << name << ',' << m.n;
        for (const auto& [metric, unused] : kColumns)
            out << ',' << csv_number(metric_by_name(m, metric));
        out << ',' << report.total_queries << ',' << report.excluded_samples << '\n';
    }
    return out.str();
}

std::string report_to_table(const MetricsReport& report) {
    const std::vector<std::pair<std::string, bool>> headers = {
        {"Acc.(%)", true},  {"F1-ma.(%)", true}, {"Kap.", false}, {"MCC", false},
        {"MSE", false},     {"RMSE", false},     {"MAE", false},  {"r", false},
        {"rho", false},     {"tau", false}};

    size_t name_width = std::string("Dimension").size();
    for (const auto& [name, m] : report.dimensions) name_width = std::max(name_width, name.size());

    std::vector<std::vector<std::string>> rows;
    for (const auto& [name, m] : report.dimensions) {
        std::vector<std::string> row{name, std::to_string(m.n)};
        for (size_t c = 0; c < kColumns.size(); ++c)
            row.push_back(format_cell(metric_by_name(m, kColumns[c].first), kColumns[c].second));
        rows.push_back(std::move(row));
    }

    std::vector<size_t> widths{name_width, std::string("N").size()};
    for (const auto& [header, unused] : headers) widths.push_back(header.size());
    for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    auto pad = [](const std::string& text, size_t width) {
        return text + std::string(width - text.size(), ' ');
    };

    std::ostringstream out;
    out << "Task: " << report.task_id << "   Truth: " << report.truth_policy << "\n";
    out << pad("Dimension", widths[0]) << "  " << pad("N", widths[1]);
    for (size_t c = 0; c < headers.size(); ++c) out << "  " << pad(headers[c].first, widths[c + 2]);
    out << "\n";
    size_t rule = widths[0] + widths[1] + 2;
    for (size_t c = 0; c < headers.size(); ++c) rule += widths[c + 2] + 2;
    out << std::string(rule, '-') << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "  " : "") << pad(row[c], widths[c]);
        out << "\n";
    }
    out << std::string(rule, '-') << "\n";
    out << "LLM Queries: " << report.total_queries
        << "   Excluded samples (quorum): " << report.excluded_samples
        << "   Scored samples: " << report.scored_samples << "\n";
    return out.str();
}

}  // namespace jury
