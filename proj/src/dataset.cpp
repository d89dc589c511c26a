/// @file dataset.cpp
/// @brief JSON Lines dataset loaders and truth derivation.

#include "jury/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jury/aggregate.hpp"
#include "jury/errors.hpp"

namespace jury {

using nlohmann::json;

DatasetDescriptor dataset_descriptor_from_json(const json& j) {
    DatasetDescriptor desc;
    desc.format_id = j.at("format").get<std::string>();
    desc.path = j.at("path").get<std::string>();
    if (j.contains("field_mapping"))
        desc.field_mapping = j.at("field_mapping").get<std::map<std::string, std::string>>();
    if (j.contains("annotator_ids"))
        desc.annotator_ids = j.at("annotator_ids").get<std::vector<std::string>>();
    return desc;
}

json dataset_descriptor_to_json(const DatasetDescriptor& desc) {
    return json{{"format", desc.format_id},
                {"path", desc.path.string()},
                {"field_mapping", desc.field_mapping},
                {"annotator_ids", desc.annotator_ids}};
}

int derive_oid_truth(int positive_ratings, int total_raters) {
    if (total_raters <= 0 || positive_ratings < 0 || positive_ratings > total_raters)
        throw Error("RangeError", "need 0 <= positive <= total and total > 0, got " +
                                      std::to_string(positive_ratings) + "/" +
                                      std::to_string(total_raters));
    // round(p/t, 2) > 0.50  <=>  round to integer percent > 50
    return std::llround(100.0 * positive_ratings / total_raters) > 50 ? 1 : 0;
}

std::string annotator_majority(const std::vector<std::string>& labels) {
    if (labels.empty()) throw Error("EmptyBallot", "annotator_majority on empty ballot");
    std::vector<Choice> votes;
    votes.reserve(labels.size());
    for (const std::string& label : labels) votes.push_back(choice_from_string(label));
    return to_string(majority_vote(votes));
}

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

namespace {

struct RowContext {
    const std::filesystem::path& path;
    int line = 0;

    [[noreturn]] void fail(const std::string& field, const std::string& why) const {
        throw Error("SchemaError", path.string() + ":" + std::to_string(line) + ": field '" +
                                       field + "': " + why);
    }

    std::string get_string(const json& row, const std::string& field) const {
        if (!row.contains(field)) fail(field, "missing");
        if (!row.at(field).is_string()) fail(field, "expected a string");
        return row.at(field).get<std::string>();
    }

    double get_number(const json& row, const std::string& field) const {
        if (!row.contains(field)) fail(field, "missing");
        if (!row.at(field).is_number()) fail(field, "expected a number");
        return row.at(field).get<double>();
    }

    const json& get_array(const json& row, const std::string& field) const {
        if (!row.contains(field)) fail(field, "missing");
        if (!row.at(field).is_array()) fail(field, "expected an array");
        return row.at(field);
    }
};

/// Source field name after applying the descriptor's renames.
std::string mapped(const DatasetDescriptor& desc, const std::string& placeholder) {
    auto it = desc.field_mapping.find(placeholder);
    return it == desc.field_mapping.end() ? placeholder : it->second;
}

std::string annotator_name(const DatasetDescriptor& desc, size_t index) {
    if (index < desc.annotator_ids.size()) return desc.annotator_ids[index];
    return std::to_string(index + 1);
}

std::string guess_media_type(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "application/octet-stream";
}

/// Pairwise formats: text fields + a positional array of choice labels.
Sample load_pairwise_row(const DatasetDescriptor& desc, const RowContext& ctx, const json& row,
                         const std::vector<std::string>& text_fields) {
    Sample sample;
    sample.id = ctx.get_string(row, mapped(desc, "id"));
    for (const std::string& field : text_fields)
        sample.fields[field] = ctx.get_string(row, mapped(desc, field));
    const json& annotations = ctx.get_array(row, mapped(desc, "annotations"));
    for (size_t i = 0; i < annotations.size(); ++i) {
        if (!annotations[i].is_string()) ctx.fail("annotations", "expected choice strings");
        Choice choice;
        try {
            choice = choice_from_string(annotations[i].get<std::string>());
        } catch (const Error& e) {
            ctx.fail("annotations", e.what());
        }
        sample.human_labels[annotator_name(desc, i)]["choice"] = LabelValue{to_string(choice)};
    }
    return sample;
}

/// Rubric formats: text fields + positional array of {dimension: number}.
Sample load_rubric_row(const DatasetDescriptor& desc, const RowContext& ctx, const json& row,
                       const std::vector<std::string>& text_fields,
                       const std::vector<std::string>& dimensions) {
    Sample sample;
    sample.id = ctx.get_string(row, mapped(desc, "id"));
    for (const std::string& field : text_fields)
        sample.fields[field] = ctx.get_string(row, mapped(desc, field));
    const json& annotations = ctx.get_array(row, mapped(desc, "annotations"));
    for (size_t i = 0; i < annotations.size(); ++i) {
        if (!annotations[i].is_object()) ctx.fail("annotations", "expected score objects");
        for (const std::string& dim : dimensions) {
            if (!annotations[i].contains(dim)) ctx.fail("annotations", "missing score '" + dim + "'");
            if (!annotations[i].at(dim).is_number())
                ctx.fail("annotations", "score '" + dim + "' must be a number");
            sample.human_labels[annotator_name(desc, i)][dim] =
                LabelValue{annotations[i].at(dim).get<double>()};
        }
    }
    return sample;
}

Sample load_oid_row(const DatasetDescriptor& desc, const RowContext& ctx, const json& row) {
    Sample sample;
    sample.id = ctx.get_string(row, mapped(desc, "id"));
    sample.fields["caption"] = ctx.get_string(row, mapped(desc, "caption"));
    const int positive = static_cast<int>(ctx.get_number(row, mapped(desc, "positive_ratings")));
    const int total = static_cast<int>(ctx.get_number(row, mapped(desc, "total_raters")));
    int label;
    try {
        label = derive_oid_truth(positive, total);
    } catch (const Error& e) {
        ctx.fail("positive_ratings", e.what());
    }
    sample.fields["positive_ratings"] = std::to_string(positive);
    sample.fields["total_raters"] = std::to_string(total);
    sample.human_labels["ratings"]["quality"] = LabelValue{static_cast<double>(label)};
    const std::string image_field = mapped(desc, "image_path");
    if (row.contains(image_field)) {
        std::filesystem::path image = ctx.get_string(row, image_field);
        if (image.is_relative()) image = desc.path.parent_path() / image;
        sample.image = Attachment{image.string(), guess_media_type(image)};
    }
    return sample;
}

Sample load_generic_row(const DatasetDescriptor& desc, const RowContext& ctx, const json& row) {
    Sample sample;
    sample.id = ctx.get_string(row, mapped(desc, "id"));
    for (const auto& [key, value] : row.items()) {
        if (key == mapped(desc, "id") || key == "labels") continue;
        if (value.is_string()) sample.fields[key] = value.get<std::string>();
    }
    // Renames: expose the mapped source under the placeholder name too.
    for (const auto& [placeholder, source] : desc.field_mapping) {
        if (row.contains(source) && row.at(source).is_string())
            sample.fields[placeholder] = row.at(source).get<std::string>();
    }
    if (row.contains("labels")) {
        if (!row.at("labels").is_object()) ctx.fail("labels", "expected an object");
        for (const auto& [annotator, labels] : row.at("labels").items()) {
            if (!labels.is_object()) ctx.fail("labels", "expected per-annotator objects");
            for (const auto& [dim, value] : labels.items()) {
                if (value.is_number())
                    sample.human_labels[annotator][dim] = LabelValue{value.get<double>()};
                else if (value.is_string())
                    sample.human_labels[annotator][dim] = LabelValue{value.get<std::string>()};
                else
                    ctx.fail("labels", "values must be numbers or strings");
            }
        }
    }
    return sample;
}

}  // namespace

std::vector<Sample> load_dataset(const DatasetDescriptor& desc) {
    static const std::vector<std::string> kFormats = {
        "faireval", "summeval", "pandalm", "oid-caption", "topical-chat", "generic"};
    if (std::find(kFormats.begin(), kFormats.end(), desc.format_id) == kFormats.end())
        throw config_error("unknown dataset format '" + desc.format_id + "'");

    std::ifstream in(desc.path);
    if (!in) throw Error("MissingFile", "cannot open dataset: " + desc.path.string());

    std::vector<Sample> samples;
    std::string line;
    RowContext ctx{desc.path};
    while (std::getline(in, line)) {
        ++ctx.line;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw Error("SchemaError", desc.path.string() + ":" + std::to_string(ctx.line) +
                                           ": invalid JSON: " + e.what());
        }
        if (desc.format_id == "pandalm") {
            samples.push_back(load_pairwise_row(
                desc, ctx, row, {"instruction", "input", "response1", "response2"}));
        } else if (desc.format_id == "faireval") {
            samples.push_back(
                load_pairwise_row(desc, ctx, row, {"question", "answer1", "answer2"}));
        } else if (desc.format_id == "summeval") {
            samples.push_back(load_rubric_row(desc, ctx, row, {"document", "summary"},
                                              {"Coherence", "Consistency", "Fluency",
                                               "Relevance"}));
        } else if (desc.format_id == "topical-chat") {
            samples.push_back(load_rubric_row(desc, ctx, row, {"context", "response"},
                                              {"Understandable", "Natural", "MaintainsContext",
                                               "Engaging", "UsesKnowledge", "OverallQuality"}));
        } else if (desc.format_id == "oid-caption") {
            samples.push_back(load_oid_row(desc, ctx, row));
        } else {
            samples.push_back(load_generic_row(desc, ctx, row));
        }
    }
    return samples;
}

}  // namespace jury
