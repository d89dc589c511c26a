/// @file verdict.hpp
/// @brief Deterministic extraction of structured verdicts from free-form
///        judge text, including reasoning-model output.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/types.hpp"

namespace jury {

/// One evaluator's parsed judgment for one sample.
struct Verdict {
    std::string sample_id;
    std::string evaluator_id;
    /// Chain position for conversational / role-chain runs; 0 otherwise.
    int turn = 0;
    /// Persona template id for role-chain turns.
    std::string role;

    std::optional<Choice> choice;
    std::map<std::string, double> scores;
    /// Auxiliary captures that carry no aggregation weight: per-criterion
    /// scores, per-assistant final scores, corrected-version text.
    std::map<std::string, double> aux_scores;
    std::map<std::string, std::string> aux_text;

    std::vector<std::string> diagnostics;
    bool parse_ok = false;
};

struct StripResult {
    std::string text;
    std::vector<std::string> diagnostics;
};

/// Removes well-formed "<think>...</think>" spans. Unbalanced tags leave the
/// text unchanged and add a diagnostic.
StripResult strip_reasoning(const std::string& text);

/// Scans (case-insensitively) for the LAST "Final Best Assistant" marker,
/// tolerating markdown emphasis and straight/curly quotes, and maps the
/// label that follows to its canonical form.
/// Throws Error("ParseError") with reason "no-marker" or "unrecognized-label".
Choice parse_choice(const std::string& text);

/// Collects "Final Score:" numeric markers in order of appearance and
/// assigns them to the given dimensions in declaration order. A value
/// outside a dimension's scale is dropped for that dimension and noted in
/// `diagnostics`. Throws Error("ParseError") ("count-mismatch") when there
/// are fewer markers than dimensions.
std::map<std::string, double> parse_scores(const std::string& text,
                                           const std::vector<DimensionSpec>& dimensions,
                                           std::vector<std::string>& diagnostics);

/// Total parse entry point: never throws. Strips reasoning, dispatches on
/// the task kind, and captures auxiliary fields (per-assistant final scores,
/// numbered criterion scores, corrected-version text) where present.
/// On any failure returns parse_ok=false with a diagnostic.
Verdict parse_verdict(const TaskSpec& task, const std::string& sample_id,
                      const std::string& evaluator_id, const std::string& raw_text);

/// One-line summary fed to follow-up prompts: "choice=Equal; Assistant1=80"
/// for pairwise verdicts, "Coherence=4; Fluency=5" for rubric verdicts.
std::string verdict_summary(const Verdict& verdict);

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

}  // namespace jury
