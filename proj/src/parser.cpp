/// @file parser.cpp
/// @brief Marker-based verdict extraction. Last occurrence wins everywhere:
///        reasoning models restate scores and labels before the final line.

#include "jury/verdict.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jury {

using nlohmann::json;

namespace {

std::string lowercase(const std::string& s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

/// Byte offsets of every case-insensitive occurrence of `needle`.
std::vector<size_t> find_all(const std::string& haystack_lower, const std::string& needle) {
    std::vector<size_t> out;
    size_t pos = 0;
    while ((pos = haystack_lower.find(needle, pos)) != std::string::npos) {
        out.push_back(pos);
        pos += 1;
    }
    return out;
}

/// Advances `pos` past markdown emphasis, quotes (straight and curly),
/// whitespace and list punctuation.
void skip_decoration(const std::string& text, size_t& pos) {
    while (pos < text.size()) {
        unsigned char c = text[pos];
        if (c == '*' || c == '_' || c == '"' || c == '\'' || c == '`' || c == ' ' ||
            c == '\t' || c == ':' || c == '-') {
            ++pos;
        } else if (c == 0xe2 && pos + 2 < text.size() &&
                   static_cast<unsigned char>(text[pos + 1]) == 0x80) {
            pos += 3;  // U+2018..U+201D curly quotes and dashes
        } else {
            break;
        }
    }
}

/// Parses a non-negative decimal at `pos` after decoration; returns nullopt
/// when the next token is not a number.
std::optional<double> number_at(const std::string& text, size_t pos) {
    skip_decoration(text, pos);
    size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) return std::nullopt;
    if (pos < text.size() && text[pos] == '.') {
        size_t frac = ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == frac) --pos;  // trailing dot is sentence punctuation
    }
    return std::stod(text.substr(start, pos - start));
}

constexpr const char* kChoiceMarker = "final best assistant";
constexpr const char* kScoreMarker = "final score";

}  // namespace

// ---------------------------------------------------------------------------
// strip_reasoning
// ---------------------------------------------------------------------------

StripResult strip_reasoning(const std::string& text) {
    const std::string lower = lowercase(text);
    const auto opens = find_all(lower, "<think>");
    const auto closes = find_all(lower, "</think>");

    if (opens.empty() && closes.empty()) return {text, {}};

    // Well-formed means strictly alternating open/close pairs.
    bool balanced = opens.size() == closes.size();
    for (size_t i = 0; balanced && i < opens.size(); ++i) {
        if (closes[i] < opens[i]) balanced = false;
        if (i + 1 < opens.size() && opens[i + 1] < closes[i]) balanced = false;
    }
    if (!balanced)
        return {text, {"unbalanced <think> tags; text left unchanged"}};

    std::string out;
    size_t pos = 0;
    for (size_t i = 0; i < opens.size(); ++i) {
        out.append(text, pos, opens[i] - pos);
        pos = closes[i] + std::string("</think>").size();
    }
    out.append(text, pos, std::string::npos);
    return {std::move(out), {}};
}

// ---------------------------------------------------------------------------
// parse_choice
// ---------------------------------------------------------------------------

Choice parse_choice(const std::string& text) {
    const std::string lower = lowercase(text);
    const auto markers = find_all(lower, kChoiceMarker);
    if (markers.empty())
        throw Error("ParseError", "no-marker: expected 'Final Best Assistant'");

    size_t pos = markers.back() + std::string(kChoiceMarker).size();
    skip_decoration(text, pos);

    // Normalize the label region to letters and digits only.
    std::string token;
    for (size_t i = pos; i < text.size() && token.size() < 12; ++i) {
        unsigned char c = text[i];
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '*' || c == '_' || c == '"' || c == '\'' || c == ' ' || c == '\t' ||
                   c == 0xe2 || c == 0x80 || c == 0x98 || c == 0x99 || c == 0x9c || c == 0x9d) {
            continue;  // decoration between/inside the label
        } else {
            break;
        }
    }

    if (token.starts_with("assistant1")) return Choice::Assistant1;
    if (token.starts_with("assistant2")) return Choice::Assistant2;
    if (token.starts_with("equal")) return Choice::Equal;
    throw Error("ParseError", "unrecognized-label after 'Final Best Assistant'");
}

// ---------------------------------------------------------------------------
// parse_scores
// ---------------------------------------------------------------------------

namespace {

/// Numeric values of each "Final Score: <number>" marker, in order.
/// Marker text without a following number (e.g. a restated scale legend)
/// does not count.
std::vector<double> collect_final_scores(const std::string& text) {
    const std::string lower = lowercase(text);
    std::vector<double> values;
    for (size_t at : find_all(lower, kScoreMarker)) {
        // A marker without a following number is a restated scale legend or a
        // different marker ("Final Score for Assistant 1"), not a score.
        if (auto value = number_at(text, at + std::string(kScoreMarker).size()))
            values.push_back(*value);
    }
    return values;
}

}  // namespace

std::map<std::string, double> parse_scores(const std::string& text,
                                           const std::vector<DimensionSpec>& dimensions,
                                           std::vector<std::string>& diagnostics) {
    std::vector<double> values = collect_final_scores(text);
    if (values.size() < dimensions.size())
        throw Error("ParseError", "count-mismatch: found " + std::to_string(values.size()) +
                                      " 'Final Score' markers for " +
                                      std::to_string(dimensions.size()) + " dimensions");

    // The final run of markers wins when the judge restated earlier scores.
    const size_t offset = values.size() - dimensions.size();
    std::map<std::string, double> out;
    for (size_t i = 0; i < dimensions.size(); ++i) {
        const DimensionSpec& dim = dimensions[i];
        const double value = values[offset + i];
        if (!score_in_scale(dim.scale, value)) {
            std::ostringstream msg;
            msg << "out-of-range: " << dim.name << "=" << value;
            diagnostics.push_back(msg.str());
            continue;
        }
        out[dim.name] = value;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Auxiliary captures
// ---------------------------------------------------------------------------

namespace {

void capture_aux(const std::string& text, Verdict& verdict) {
    const std::string lower = lowercase(text);

    auto last_number_after = [&](const std::string& marker) -> std::optional<double> {
        std::optional<double> found;
        for (size_t at : find_all(lower, marker)) {
            if (auto v = number_at(text, at + marker.size())) found = v;
        }
        return found;
    };

    if (auto v = last_number_after("final score for assistant 1"))
        verdict.aux_scores["assistant1_final"] = *v;
    if (auto v = last_number_after("final score for assistant 2"))
        verdict.aux_scores["assistant2_final"] = *v;

    // Per-criterion "Score: <n>" markers ("Final Score" handled above).
    int criterion = 0;
    for (size_t at : find_all(lower, "score")) {
        if (at >= 6 && lower.compare(at - 6, 6, "final ") == 0) continue;
        if (at >= 1 && std::isalpha(static_cast<unsigned char>(lower[at - 1]))) continue;
        if (auto v = number_at(text, at + 5)) {
            ++criterion;
            verdict.aux_scores["criterion_" + std::to_string(criterion)] = *v;
        }
    }

    // Criterion 13 free text, captured verbatim from the last marker on.
    for (const char* marker : {"updated answer", "corrected version"}) {
        const auto hits = find_all(lower, marker);
        if (!hits.empty()) {
            size_t pos = hits.back() + std::string(marker).size();
            skip_decoration(text, pos);
            if (pos < text.size())
                verdict.aux_text["corrected_version"] = text.substr(pos);
            break;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// parse_verdict
// ---------------------------------------------------------------------------

Verdict parse_verdict(const TaskSpec& task, const std::string& sample_id,
                      const std::string& evaluator_id, const std::string& raw_text) {
    Verdict verdict;
    verdict.sample_id = sample_id;
    verdict.evaluator_id = evaluator_id;

    try {
        StripResult stripped = strip_reasoning(raw_text);
        verdict.diagnostics = stripped.diagnostics;
        capture_aux(stripped.text, verdict);

        if (task.kind == TaskKind::PairwiseChoice) {
            verdict.choice = parse_choice(stripped.text);
            verdict.parse_ok = true;
        } else {
            const auto base = task.base_dimensions();
            verdict.scores = parse_scores(stripped.text, base, verdict.diagnostics);
            verdict.parse_ok = verdict.scores.size() == base.size();
        }
    } catch (const Error& e) {
        verdict.diagnostics.push_back(e.what());
        verdict.parse_ok = false;
    } catch (const std::exception& e) {
        verdict.diagnostics.push_back(std::string("ParseError: ") + e.what());
        verdict.parse_ok = false;
    }
    return verdict;
}

std::string verdict_summary(const Verdict& verdict) {
    std::ostringstream out;
    bool first = true;
    auto sep = [&]() -> std::ostringstream& {
        if (!first) out << "; ";
        first = false;
        return out;
    };
    if (verdict.choice) sep() << "choice=" << to_string(*verdict.choice);
    for (const auto& [dim, value] : verdict.scores) sep() << dim << "=" << value;
    if (auto it = verdict.aux_scores.find("assistant1_final"); it != verdict.aux_scores.end())
        sep() << "Assistant1=" << it->second;
    if (auto it = verdict.aux_scores.find("assistant2_final"); it != verdict.aux_scores.end())
        sep() << "Assistant2=" << it->second;
    if (first) out << "no parsed verdict";
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json verdict_to_json(const Verdict& v) {
    json j{{"sample_id", v.sample_id},
           {"evaluator_id", v.evaluator_id},
           {"turn", v.turn},
           {"role", v.role},
           {"choice", v.choice ? json(to_string(*v.choice)) : json(nullptr)},
           {"scores", v.scores},
           {"aux_scores", v.aux_scores},
           {"aux_text", v.aux_text},
           {"diagnostics", v.diagnostics},
           {"parse_ok", v.parse_ok}};
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.sample_id = j.at("sample_id").get<std::string>();
    v.evaluator_id = j.at("evaluator_id").get<std::string>();
    v.turn = j.value("turn", 0);
    v.role = j.value("role", std::string{});
    if (j.contains("choice") && !j.at("choice").is_null())
        v.choice = choice_from_string(j.at("choice").get<std::string>());
    if (j.contains("scores")) v.scores = j.at("scores").get<std::map<std::string, double>>();
    if (j.contains("aux_scores"))
        v.aux_scores = j.at("aux_scores").get<std::map<std::string, double>>();
    if (j.contains("aux_text"))
        v.aux_text = j.at("aux_text").get<std::map<std::string, std::string>>();
    if (j.contains("diagnostics"))
        v.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    v.parse_ok = j.value("parse_ok", false);
    return v;
}

}  // namespace jury
