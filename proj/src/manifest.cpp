#include "docgraph/manifest.hpp"

#include <cstdio>
#include <utility>

#include "docgraph/error.hpp"

namespace docgraph {

ordered_json to_json(const GnnConfig& c) {
  ordered_json j;
  j["text_dim"] = c.text_dim;
  j["size_dim"] = c.size_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["layers"] = c.layers;
  j["hash_seed"] = c.hash_seed;
  return j;
}

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["extra_pair_count"] = c.extra_pair_count;
  j["loss_mean"] = c.loss_mean;
  j["gnn"] = to_json(c.gnn);
  return j;
}

ordered_json to_json(const IeConfig& c) {
  ordered_json j;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["joint_finetune"] = c.joint_finetune;
  j["gnn_lr"] = c.gnn_lr;
  return j;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["n_docs"] = c.n_docs;
  j["n_eval_docs"] = c.n_eval_docs;
  j["min_nodes"] = c.min_nodes;
  j["max_nodes"] = c.max_nodes;
  j["token_dim"] = c.token_dim;
  j["arms"] = c.arms;
  j["link"] = to_json(c.link);
  j["ie"] = to_json(c.ie);
  return j;
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config field ") + key + ": " + e.what());
  }
}

void require_object(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(what) + " config must be a JSON object");
}

}  // namespace

GnnConfig gnn_config_from_json(const nlohmann::json& j, GnnConfig base) {
  require_object(j, "gnn");
  GnnConfig c = std::move(base);
  read(j, "text_dim", c.text_dim);
  read(j, "size_dim", c.size_dim);
  read(j, "hidden_dim", c.hidden_dim);
  read(j, "layers", c.layers);
  read(j, "hash_seed", c.hash_seed);
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  require_object(j, "train");
  TrainConfig c = std::move(base);
  read(j, "epochs", c.epochs);
  read(j, "lr", c.lr);
  read(j, "batch_size", c.batch_size);
  read(j, "lambda", c.lambda);
  read(j, "seed", c.seed);
  read(j, "extra_pair_count", c.extra_pair_count);
  read(j, "loss_mean", c.loss_mean);
  if (j.contains("gnn")) c.gnn = gnn_config_from_json(j["gnn"], c.gnn);
  return c;
}

IeConfig ie_config_from_json(const nlohmann::json& j, IeConfig base) {
  require_object(j, "ie");
  IeConfig c = std::move(base);
  read(j, "epochs", c.epochs);
  read(j, "lr", c.lr);
  read(j, "batch_size", c.batch_size);
  read(j, "seed", c.seed);
  read(j, "joint_finetune", c.joint_finetune);
  read(j, "gnn_lr", c.gnn_lr);
  return c;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base) {
  require_object(j, "experiment");
  ExperimentConfig c = std::move(base);
  read(j, "trials", c.trials);
  read(j, "seed", c.seed);
  read(j, "n_docs", c.n_docs);
  read(j, "n_eval_docs", c.n_eval_docs);
  read(j, "min_nodes", c.min_nodes);
  read(j, "max_nodes", c.max_nodes);
  read(j, "token_dim", c.token_dim);
  read(j, "arms", c.arms);
  if (j.contains("link")) c.link = train_config_from_json(j["link"], c.link);
  if (j.contains("ie")) c.ie = ie_config_from_json(j["ie"], c.ie);
  return c;
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Manifest::add_output(const std::string& relative_path, std::string_view bytes) {
  outputs.emplace_back(relative_path, content_digest(bytes));
}

std::string Manifest::to_string() const {
  ordered_json j;
  j["tool"] = "docgraph";
  j["manifest_version"] = 1;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  ordered_json outs = ordered_json::array();
  for (const auto& [path, digest] : outputs) {
    ordered_json o;
    o["path"] = path;
    o["fnv1a64"] = digest;
    outs.push_back(std::move(o));
  }
  j["outputs"] = std::move(outs);
  j["errors"] = errors;
  return j.dump(2) + "\n";
}

Manifest Manifest::parse(std::string_view raw) {
  ordered_json j;
  try {
    j = ordered_json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (!j.contains("command") || !j.contains("config")) throw Error(ErrorCode::MissingField, "manifest command/config");
  Manifest m;
  m.config = j["config"];
  if (j.contains("inputs")) m.inputs = j["inputs"];
  try {
    m.command = j["command"].get<std::string>();
    if (j.contains("outputs")) {
      for (const auto& o : j["outputs"]) {
        m.outputs.emplace_back(o.at("path").get<std::string>(), o.at("fnv1a64").get<std::string>());
      }
    }
    if (j.contains("errors")) m.errors = j["errors"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace docgraph
