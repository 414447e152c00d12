#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "arenakit/agent.hpp"
#include "arenakit/env.hpp"
#include "arenakit/evalkit.hpp"
#include "arenakit/runner.hpp"
#include "arenakit/simsite.hpp"
#include "arenakit/taskcfg.hpp"

// Packaged sites and tasks shared by the test suites.
namespace arenakit::fixtures {

inline std::string data_path(const std::string& rel) {
  return std::string(ARENAKIT_DATA_DIR) + "/" + rel;
}

inline std::shared_ptr<const SiteCatalog> catalog() {
  static auto sites =
      std::make_shared<const SiteCatalog>(SiteCatalog::load_dir(data_path("sites")));
  return sites;
}

inline const std::vector<TaskInstance>& tasks() {
  static const auto all = load_tasks(data_path("tasks"), catalog().get());
  return all;
}

inline const TaskInstance& task(const std::string& id) {
  for (const auto& t : tasks()) {
    if (t.task_id == id) return t;
  }
  throw std::runtime_error("no fixture task " + id);
}

inline EnvConfig env_config(std::optional<std::size_t> max_obs_nodes = std::nullopt) {
  EnvConfig config;
  config.backend.sites = catalog();
  config.max_obs_nodes = max_obs_nodes;
  return config;
}

// Id of the first node with this role and name in the current observation.
inline int node_id(const Env& env, Role role, const std::string& name) {
  for (const auto& node : env.tree().visible()) {
    if (node.role == role && node.name == name) return node.id;
  }
  throw std::runtime_error("no node " + std::string(to_string(role)) + " '" + name + "'");
}

inline StubJudge& stub_judge() {
  static StubJudge judge = StubJudge::load(data_path("judges/stub_verdicts.json"));
  return judge;
}

// Runs with the packaged assets and the stub judge; the caller picks the client.
inline RunConfig run_config(ClientFactory factory, std::vector<TaskInstance> selected = tasks()) {
  RunConfig config;
  config.tasks = std::move(selected);
  config.env = env_config();
  config.assets = PromptAssets::load(data_path("prompts"));
  config.client_factory = std::move(factory);
  config.judge = {&stub_judge(), config.assets.fuzzy_judge};
  return config;
}

inline ClientFactory oracle_factory(PromptMode mode = PromptMode::kCot) {
  return [mode](const TaskInstance& task) -> std::unique_ptr<LLMClient> {
    return std::make_unique<OracleClient>(task.gold_actions.value_or(std::vector<std::string>{}),
                                          mode);
  };
}

inline ClientFactory scripted_factory(std::vector<std::string> replies) {
  return [replies](const TaskInstance&) -> std::unique_ptr<LLMClient> {
    return std::make_unique<ScriptedClient>(replies);
  };
}

}  // namespace arenakit::fixtures
