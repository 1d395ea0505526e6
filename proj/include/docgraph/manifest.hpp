#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "docgraph/experiment.hpp"
#include "docgraph/ie.hpp"
#include "docgraph/link_training.hpp"
#include "json.hpp"

namespace docgraph {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const GnnConfig& c);
ordered_json to_json(const TrainConfig& c);
ordered_json to_json(const IeConfig& c);
ordered_json to_json(const ExperimentConfig& c);

// Fields missing from `j` keep their value from `base`; present fields of the
// wrong type raise InvalidConfig.
GnnConfig gnn_config_from_json(const nlohmann::json& j, GnnConfig base = {});
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
IeConfig ie_config_from_json(const nlohmann::json& j, IeConfig base = {});
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string content_digest(std::string_view bytes);

/// Machine-readable record of one run: the resolved configuration, its
/// inputs, and a digest of every file it wrote. Replaying `command` with
/// `config` and `inputs` reproduces the outputs byte for byte.
struct Manifest {
  std::string command;
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  std::vector<std::pair<std::string, std::string>> outputs;  // relative path, digest
  std::vector<std::string> errors;                            // failures the run reported

  void add_output(const std::string& relative_path, std::string_view bytes);
  std::string to_string() const;
  static Manifest parse(std::string_view raw);
};

inline constexpr const char* kManifestFile = "manifest.json";

}  // namespace docgraph
