#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "mvq/harness.hpp"
#include "mvq/orbit.hpp"
#include "mvq/quantizer.hpp"
#include "mvq/vectorizer.hpp"

namespace mvq {

// Codebook JSON:
//   {"dim": d, "centers": [[...],...], "sigmas": [...]|null,
//    "family": "laplacian"|"gaussian"|null}
// A vectorization map is the same document with sigmas and family set.
nlohmann::json codebook_to_json(const Codebook& codebook,
                                std::optional<ContrastFamily> family = std::nullopt);

struct ParsedCodebook {
    Codebook codebook;
    std::optional<ContrastFamily> family;
};
ParsedCodebook codebook_from_json(const nlohmann::json& j);

nlohmann::json map_to_json(const VectorizationMap& map);
VectorizationMap map_from_json(const nlohmann::json& j);

nlohmann::json orbit_manifest(const OrbitDatasetSpec& spec);

// Mirrors ExperimentConfig; unknown keys are rejected so config typos fail
// loudly. Missing keys keep their defaults.
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Timing and host live under "timing"; everything else in the document is
// a pure function of the config and the dataset.
nlohmann::json experiment_report_to_json(const ExperimentReport& report);
nlohmann::json ablation_to_json(const std::vector<AblationCell>& cells);
nlohmann::json sweep_to_json(const SweepReport& report);
nlohmann::json separation_to_json(const SeparationReport& report);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace mvq
