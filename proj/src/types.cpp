/// @file types.cpp

#include "jury/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

namespace jury {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Choice
// ---------------------------------------------------------------------------

std::string to_string(Choice c) {
    switch (c) {
        case Choice::Assistant1: return "Assistant1";
        case Choice::Assistant2: return "Assistant2";
        case Choice::Equal: return "Equal";
    }
    return "Equal";
}

std::string display_label(Choice c) {
    switch (c) {
        case Choice::Assistant1: return "Assistant 1";
        case Choice::Assistant2: return "Assistant 2";
        case Choice::Equal: return "Equal";
    }
    return "Equal";
}

Choice choice_from_string(const std::string& text) {
    std::string t;
    t.reserve(text.size());
    for (char ch : text) {
        if (ch != ' ' && ch != '_' && ch != '-') t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (t == "assistant1" || t == "1") return Choice::Assistant1;
    if (t == "assistant2" || t == "2") return Choice::Assistant2;
    if (t == "equal" || t == "tie" || t == "0") return Choice::Equal;
    throw Error("LabelError", "unrecognized choice label: '" + text + "'");
}

// ---------------------------------------------------------------------------
// Scales
// ---------------------------------------------------------------------------

bool score_in_scale(const Scale& scale, double value) {
    if (std::holds_alternative<BinaryScale>(scale)) {
        return value == 0.0 || value == 1.0;
    }
    if (const auto* in = std::get_if<IntegerScale>(&scale)) {
        return value >= in->min && value <= in->max && value == std::floor(value);
    }
    return false;  // categorical dimensions take labels, not scores
}

std::pair<double, double> scale_bounds(const Scale& scale) {
    if (std::holds_alternative<BinaryScale>(scale)) return {0.0, 1.0};
    if (const auto* in = std::get_if<IntegerScale>(&scale)) return {double(in->min), double(in->max)};
    throw Error("ScaleError", "categorical scale has no numeric bounds");
}

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::PairwiseChoice: return "pairwise-choice";
        case TaskKind::BinaryJudgment: return "binary-judgment";
        case TaskKind::Rubric: return "rubric";
    }
    return "rubric";
}

TaskKind task_kind_from_string(const std::string& text) {
    if (text == "pairwise-choice") return TaskKind::PairwiseChoice;
    if (text == "binary-judgment") return TaskKind::BinaryJudgment;
    if (text == "rubric") return TaskKind::Rubric;
    throw spec_error("unknown task kind: '" + text + "'");
}

// ---------------------------------------------------------------------------
// TaskSpec helpers
// ---------------------------------------------------------------------------

std::vector<DimensionSpec> TaskSpec::base_dimensions() const {
    std::vector<DimensionSpec> out;
    for (const auto& d : dimensions)
        if (!d.is_composite()) out.push_back(d);
    return out;
}

const DimensionSpec* TaskSpec::find_dimension(const std::string& name) const {
    for (const auto& d : dimensions)
        if (d.name == name) return &d;
    return nullptr;
}

namespace {

void validate_dimension(const TaskSpec& spec, const DimensionSpec& dim) {
    if (dim.name.empty()) throw spec_error("dimension with empty name");

    if (const auto* cat = std::get_if<CategoricalScale>(&dim.scale)) {
        if (cat->labels.empty())
            throw spec_error("dimension '" + dim.name + "': categorical label set is empty");
        std::set<std::string> seen(cat->labels.begin(), cat->labels.end());
        if (seen.size() != cat->labels.size())
            throw spec_error("dimension '" + dim.name + "': duplicate categorical labels");
        if (dim.aggregation != Aggregation::Majority)
            throw spec_error("dimension '" + dim.name + "': categorical scales aggregate by majority");
    } else if (const auto* in = std::get_if<IntegerScale>(&dim.scale)) {
        if (in->min >= in->max)
            throw spec_error("dimension '" + dim.name + "': integer scale requires min < max (got [" +
                             std::to_string(in->min) + "," + std::to_string(in->max) + "])");
        if (dim.aggregation != Aggregation::Mean)
            throw spec_error("dimension '" + dim.name + "': integer scales aggregate by mean");
    }
    // binary admits both aggregations

    for (const auto& ref : dim.composite_of) {
        const DimensionSpec* target = spec.find_dimension(ref);
        if (!target)
            throw spec_error("dimension '" + dim.name + "': composite_of references unknown dimension '" + ref + "'");
        if (target->name == dim.name)
            throw spec_error("dimension '" + dim.name + "': composite cycle (self reference)");
    }
}

// DFS over composite_of edges; throws on a cycle.
void check_acyclic(const TaskSpec& spec) {
    enum State { Unvisited, InProgress, Done };
    std::map<std::string, State> state;
    for (const auto& d : spec.dimensions) state[d.name] = Unvisited;

    std::function<void(const DimensionSpec&)> visit = [&](const DimensionSpec& d) {
        State& s = state[d.name];
        if (s == Done) return;
        if (s == InProgress) throw spec_error("composite dimension cycle through '" + d.name + "'");
        s = InProgress;
        for (const auto& ref : d.composite_of) {
            if (const DimensionSpec* t = spec.find_dimension(ref)) visit(*t);
        }
        s = Done;
    };
    for (const auto& d : spec.dimensions) visit(d);
}

}  // namespace

TaskSpec validate_task_spec(TaskSpec spec) {
    if (spec.id.empty()) throw spec_error("task id is empty");
    if (spec.template_id.empty()) throw spec_error("task '" + spec.id + "': template_id is empty");

    std::set<std::string> names;
    for (const auto& d : spec.dimensions) {
        if (!names.insert(d.name).second)
            throw spec_error("task '" + spec.id + "': duplicate dimension name '" + d.name + "'");
    }
    for (const auto& d : spec.dimensions) validate_dimension(spec, d);
    check_acyclic(spec);

    const auto base = spec.base_dimensions();
    switch (spec.kind) {
        case TaskKind::PairwiseChoice: {
            if (base.size() != 1 || !std::holds_alternative<CategoricalScale>(base[0].scale))
                throw spec_error("pairwise-choice requires exactly one categorical dimension");
            const auto& labels = std::get<CategoricalScale>(base[0].scale).labels;
            const std::set<std::string> want{"Assistant1", "Assistant2", "Equal"};
            if (std::set<std::string>(labels.begin(), labels.end()) != want)
                throw spec_error("pairwise-choice labels must be {Assistant1, Assistant2, Equal}");
            break;
        }
        case TaskKind::BinaryJudgment:
            if (base.size() != 1 || !std::holds_alternative<BinaryScale>(base[0].scale))
                throw spec_error("binary-judgment requires exactly one binary dimension");
            break;
        case TaskKind::Rubric:
            if (base.empty())
                throw spec_error("rubric requires at least one non-composite dimension");
            break;
    }
    return spec;
}

void check_placeholders(const TaskSpec& task, const Sample& sample) {
    for (const auto& name : task.placeholder_schema) {
        if (!sample.fields.contains(name))
            throw Error("MissingFieldError", "sample '" + sample.id + "' is missing field '" + name + "'");
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json scale_to_json(const Scale& s) {
    if (const auto* cat = std::get_if<CategoricalScale>(&s))
        return {{"type", "categorical"}, {"labels", cat->labels}};
    if (const auto* in = std::get_if<IntegerScale>(&s))
        return {{"type", "integer"}, {"min", in->min}, {"max", in->max}};
    return {{"type", "binary"}};
}

Scale scale_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "categorical") return CategoricalScale{j.at("labels").get<std::vector<std::string>>()};
    if (type == "integer") return IntegerScale{j.at("min").get<int>(), j.at("max").get<int>()};
    if (type == "binary") return BinaryScale{};
    throw spec_error("unknown scale type: '" + type + "'");
}

}  // namespace

json task_spec_to_json(const TaskSpec& spec) {
    json dims = json::array();
    for (const auto& d : spec.dimensions) {
        json jd{{"name", d.name},
                {"scale", scale_to_json(d.scale)},
                {"aggregation", d.aggregation == Aggregation::Majority ? "majority" : "mean"}};
        if (d.is_composite()) jd["composite_of"] = d.composite_of;
        dims.push_back(std::move(jd));
    }
    return {{"id", spec.id},
            {"kind", to_string(spec.kind)},
            {"template_id", spec.template_id},
            {"placeholders", spec.placeholder_schema},
            {"dimensions", std::move(dims)}};
}

TaskSpec task_spec_from_json(const json& j) {
    TaskSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.kind = task_kind_from_string(j.at("kind").get<std::string>());
    spec.template_id = j.at("template_id").get<std::string>();
    if (j.contains("placeholders"))
        spec.placeholder_schema = j.at("placeholders").get<std::vector<std::string>>();
    for (const auto& jd : j.at("dimensions")) {
        DimensionSpec d;
        d.name = jd.at("name").get<std::string>();
        d.scale = scale_from_json(jd.at("scale"));
        const std::string agg = jd.at("aggregation").get<std::string>();
        if (agg == "majority") d.aggregation = Aggregation::Majority;
        else if (agg == "mean") d.aggregation = Aggregation::Mean;
        else throw spec_error("unknown aggregation: '" + agg + "'");
        if (jd.contains("composite_of"))
            d.composite_of = jd.at("composite_of").get<std::vector<std::string>>();
        spec.dimensions.push_back(std::move(d));
    }
    return spec;
}

json evaluator_spec_to_json(const EvaluatorSpec& spec) {
    json j{{"id", spec.id},
           {"backend", spec.backend == BackendKind::RemoteChat ? "remote-chat" : "scripted"},
           {"model_name", spec.model_name},
           {"decoding", {{"temperature", spec.decoding.temperature}, {"max_tokens", spec.decoding.max_tokens}}}};
    if (spec.decoding.seed) j["decoding"]["seed"] = *spec.decoding.seed;
    json mods = json::array();
    if (spec.text_modality) mods.push_back("text");
    if (spec.image_modality) mods.push_back("image");
    j["modalities"] = std::move(mods);
    return j;
}

EvaluatorSpec evaluator_spec_from_json(const json& j) {
    EvaluatorSpec spec;
    spec.id = j.at("id").get<std::string>();
    const std::string backend = j.value("backend", "scripted");
    if (backend == "remote-chat") spec.backend = BackendKind::RemoteChat;
    else if (backend == "scripted") spec.backend = BackendKind::Scripted;
    else throw config_error("unknown backend: '" + backend + "'");
    spec.model_name = j.value("model_name", std::string{});
    if (j.contains("decoding")) {
        const auto& d = j.at("decoding");
        spec.decoding.temperature = d.value("temperature", 0.0);
        spec.decoding.max_tokens = d.value("max_tokens", 1024);
        if (d.contains("seed")) spec.decoding.seed = d.at("seed").get<int64_t>();
    }
    if (spec.decoding.temperature < 0.0) throw config_error("temperature must be >= 0");
    if (spec.decoding.max_tokens <= 0) throw config_error("max_tokens must be positive");
    if (j.contains("modalities")) {
        spec.text_modality = false;
        spec.image_modality = false;
        for (const auto& m : j.at("modalities")) {
            const std::string s = m.get<std::string>();
            if (s == "text") spec.text_modality = true;
            else if (s == "image") spec.image_modality = true;
            else throw config_error("unknown modality: '" + s + "'");
        }
    }
    return spec;
}

json label_value_to_json(const LabelValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

LabelValue label_value_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw Error("SchemaError", "label value must be a number or string");
}

json sample_to_json(const Sample& sample) {
    json labels = json::object();
    for (const auto& [annot, dims] : sample.human_labels) {
        json per = json::object();
        for (const auto& [dim, value] : dims) per[dim] = label_value_to_json(value);
        labels[annot] = std::move(per);
    }
    json j{{"id", sample.id}, {"fields", sample.fields}, {"labels", std::move(labels)}};
    if (sample.image)
        j["image"] = {{"path", sample.image->path}, {"media_type", sample.image->media_type}};
    return j;
}

Sample sample_from_json(const json& j) {
    Sample s;
    s.id = j.at("id").get<std::string>();
    if (j.contains("fields"))
        s.fields = j.at("fields").get<std::map<std::string, std::string>>();
    if (j.contains("image")) {
        s.image = Attachment{j.at("image").at("path").get<std::string>(),
                             j.at("image").value("media_type", "image/jpeg")};
    }
    if (j.contains("labels")) {
        for (const auto& [annot, dims] : j.at("labels").items()) {
            for (const auto& [dim, value] : dims.items())
                s.human_labels[annot][dim] = label_value_from_json(value);
        }
    }
    return s;
}

}  // namespace jury
