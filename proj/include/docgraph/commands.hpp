#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "docgraph/error.hpp"
#include "docgraph/manifest.hpp"

namespace docgraph {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitNumeric = 3,
  kExitIntegrity = 4,
};

int exit_code_for(ErrorCode code);

struct CommandResult {
  Manifest manifest;
  std::string summary;
  int exit_code = kExitOk;
};

// Each command reads its settings from `config` and its files from `inputs`,
// writes everything into `out_dir`, and finishes by writing manifest.json
// there. The (command, config, inputs) triple recorded in that manifest is
// sufficient to reproduce the outputs.
CommandResult build_graph_command(const ordered_json& config, const ordered_json& inputs,
                                  const std::filesystem::path& out_dir);
CommandResult train_link_command(const ordered_json& config, const ordered_json& inputs,
                                 const std::filesystem::path& out_dir);
CommandResult run_experiment_command(const ordered_json& config, const ordered_json& inputs,
                                     const std::filesystem::path& out_dir);
CommandResult render_svg_command(const ordered_json& config, const ordered_json& inputs,
                                 const std::filesystem::path& out_dir);
CommandResult generate_corpus_command(const ordered_json& config, const ordered_json& inputs,
                                      const std::filesystem::path& out_dir);

/// Dispatches by name. Library errors do not escape: they become the
/// result's exit code and are recorded in the manifest, which is written
/// even when the run fails.
CommandResult run_command(const std::string& command, const ordered_json& config, const ordered_json& inputs,
                          const std::filesystem::path& out_dir);

// Input descriptions as the commands expect them.
ordered_json file_entry(const std::filesystem::path& path);
ordered_json build_graph_inputs(const std::vector<std::filesystem::path>& paths, const std::string& format);
ordered_json train_link_inputs(const std::filesystem::path& graphs_dir);
ordered_json render_svg_inputs(const std::filesystem::path& doc, const std::filesystem::path& graph);

struct ReplayReport {
  CommandResult rerun;
  std::vector<std::string> mismatches;
  bool identical() const { return mismatches.empty(); }
};

/// Re-runs a recorded manifest into `out_dir` and compares every input and
/// output digest against the record.
ReplayReport replay(const Manifest& recorded, const std::filesystem::path& out_dir);

}  // namespace docgraph
