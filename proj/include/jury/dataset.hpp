/// @file dataset.hpp
/// @brief Benchmark ingestion from normalized JSON Lines schemas, plus
///        ground-truth derivation helpers.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/types.hpp"

namespace jury {

struct DatasetDescriptor {
    /// faireval | summeval | pandalm | oid-caption | topical-chat | generic
    std::string format_id;
    std::filesystem::path path;
    /// template placeholder -> source field name (renames applied on load)
    std::map<std::string, std::string> field_mapping;
    std::vector<std::string> annotator_ids;  ///< names for positional annotations
};

DatasetDescriptor dataset_descriptor_from_json(const nlohmann::json& j);
nlohmann::json dataset_descriptor_to_json(const DatasetDescriptor& desc);

/// Loads one sample per JSON line. Malformed rows raise
/// SchemaError("<path>:<line>: ..."); a missing file raises MissingFile.
/// oid-caption image paths are resolved relative to the dataset file.
std::vector<Sample> load_dataset(const DatasetDescriptor& desc);

/// Binary caption label: 1 (good) iff the average positive rating, rounded
/// to two decimals, exceeds 0.50. Throws RangeError.
int derive_oid_truth(int positive_ratings, int total_raters);

/// Plurality over canonical choice labels with the aggregation tie rule.
/// Throws EmptyBallot.
std::string annotator_majority(const std::vector<std::string>& labels);

}  // namespace jury
