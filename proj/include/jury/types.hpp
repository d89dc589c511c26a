/// @file types.hpp
/// @brief Domain types shared across the harness: scales, dimensions, task
///        specifications, samples, and evaluator descriptions.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/errors.hpp"

namespace jury {

// ---------------------------------------------------------------------------
// Canonical pairwise choice labels
// ---------------------------------------------------------------------------

/// Canonical labels for pairwise-choice tasks. Free-form judge output is
/// normalized to these; display strings ("Assistant 1") map 1:1.
enum class Choice { Assistant1, Assistant2, Equal };

/// Canonical identifier, e.g. "Assistant1".
std::string to_string(Choice c);
/// Display form, e.g. "Assistant 1".
std::string display_label(Choice c);
/// Accepts canonical ("Assistant1"), display ("Assistant 1"), and upstream
/// shorthand ("1", "2", "Tie"/"0") spellings. Throws Error("LabelError").
Choice choice_from_string(const std::string& text);

// ---------------------------------------------------------------------------
// Scales
// ---------------------------------------------------------------------------

struct CategoricalScale {
    std::vector<std::string> labels;
};

struct IntegerScale {
    int min = 0;
    int max = 0;
};

/// Binary is exactly {0, 1}.
struct BinaryScale {};

using Scale = std::variant<CategoricalScale, IntegerScale, BinaryScale>;

/// True when `value` is an admissible score for `scale` (integers within
/// [min,max], binary in {0,1}; categorical scales carry no numeric scores).
bool score_in_scale(const Scale& scale, double value);

/// Numeric bounds of an integer or binary scale.
std::pair<double, double> scale_bounds(const Scale& scale);

enum class Aggregation { Majority, Mean };

// ---------------------------------------------------------------------------
// DimensionSpec / TaskSpec
// ---------------------------------------------------------------------------

struct DimensionSpec {
    std::string name;
    Scale scale;
    Aggregation aggregation = Aggregation::Mean;
    /// Names of other dimensions whose aggregated values are averaged to
    /// form this one. Empty for base dimensions.
    std::vector<std::string> composite_of;

    bool is_composite() const { return !composite_of.empty(); }
};

enum class TaskKind { PairwiseChoice, BinaryJudgment, Rubric };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& text);

struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::Rubric;
    std::vector<DimensionSpec> dimensions;
    std::string template_id;
    /// Sample field names the prompt template substitutes.
    std::vector<std::string> placeholder_schema;

    /// Dimensions that carry prompt markers (everything non-composite),
    /// in declaration order.
    std::vector<DimensionSpec> base_dimensions() const;
    const DimensionSpec* find_dimension(const std::string& name) const;
};

/// Checks every TaskSpec/DimensionSpec invariant and returns the spec
/// unchanged. Throws Error("SpecError") naming the first violation.
TaskSpec validate_task_spec(TaskSpec spec);

// ---------------------------------------------------------------------------
// Sample
// ---------------------------------------------------------------------------

/// Reference to an image shipped next to a dataset; the remote backend
/// inlines the bytes at send time.
struct Attachment {
    std::string path;
    std::string media_type;

    bool operator==(const Attachment&) const = default;
};

/// Human label value: numeric score or canonical categorical label.
using LabelValue = std::variant<double, std::string>;

struct Sample {
    std::string id;
    std::map<std::string, std::string> fields;
    std::optional<Attachment> image;
    /// annotator id -> dimension name -> value
    std::map<std::string, std::map<std::string, LabelValue>> human_labels;
};

/// Throws Error("MissingFieldError") naming the first placeholder absent
/// from the sample's fields.
void check_placeholders(const TaskSpec& task, const Sample& sample);

// ---------------------------------------------------------------------------
// EvaluatorSpec
// ---------------------------------------------------------------------------

enum class BackendKind { RemoteChat, Scripted };

struct DecodingParams {
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<int64_t> seed;

    bool operator==(const DecodingParams&) const = default;
};

struct EvaluatorSpec {
    std::string id;  // display label: "A", "B", ...
    BackendKind backend = BackendKind::Scripted;
    std::string model_name;
    DecodingParams decoding;
    bool text_modality = true;
    bool image_modality = false;
};

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

nlohmann::json task_spec_to_json(const TaskSpec& spec);
TaskSpec task_spec_from_json(const nlohmann::json& j);

nlohmann::json evaluator_spec_to_json(const EvaluatorSpec& spec);
EvaluatorSpec evaluator_spec_from_json(const nlohmann::json& j);

nlohmann::json sample_to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);

nlohmann::json label_value_to_json(const LabelValue& v);
LabelValue label_value_from_json(const nlohmann::json& j);

}  // namespace jury
