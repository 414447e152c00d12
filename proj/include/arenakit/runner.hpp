#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arenakit/agent.hpp"
#include "arenakit/env.hpp"
#include "arenakit/evalkit.hpp"
#include "arenakit/task.hpp"

namespace arenakit {

using ClientFactory = std::function<std::unique_ptr<LLMClient>(const TaskInstance&)>;

struct RunConfig {
  std::vector<TaskInstance> tasks;
  EnvConfig env;
  PromptAssets assets;
  PromptConfig prompt;
  HaltPolicy halt;
  SamplingParams sampling;
  ClientFactory client_factory;
  JudgeSetup judge;
  std::string out_dir;  // empty: nothing is written
  int parallelism = 1;
  std::optional<std::uint64_t> seed;  // shuffles execution order only
};

struct TrajectoryStep {
  std::string observation_text;
  std::string url;
  std::string raw_action;
  std::optional<std::string> parsed_action;
  std::optional<std::string> error;

  bool operator==(const TrajectoryStep&) const = default;
};

struct TrajectoryRecord {
  TaskInstance task;
  std::vector<TrajectoryStep> steps;
  std::optional<std::string> stop_answer;
  std::string halt_reason;  // stop, max_steps, repeat, invalid or error
  std::optional<std::string> error;  // what went wrong when halt_reason is error
  std::string final_url;
  RewardReport reward;
  double wall_time = 0.0;  // seconds

  bool operator==(const TrajectoryRecord&) const = default;
};

nlohmann::json to_json(const TrajectoryRecord& record);
TrajectoryRecord trajectory_from_json(const nlohmann::json& j);

struct Tally {
  int n = 0;
  int success = 0;

  // Percent, or nullopt for an empty tally.
  std::optional<double> rate() const;
  bool operator==(const Tally&) const = default;
};

struct Report {
  Tally all;
  Tally achievable;
  Tally unachievable;
  std::map<std::string, Tally> per_template;
  std::map<std::string, Tally> per_category;

  bool operator==(const Report&) const = default;
};

Report aggregate(const std::vector<TrajectoryRecord>& records);

nlohmann::json to_json(const Report& report);

enum class ReportFormat { kText, kJson };

std::string report_render(const Report& report, ReportFormat format);

struct RunResult {
  std::vector<TrajectoryRecord> records;  // in task order
  Report report;
};

// Runs every task and, when out_dir is set, writes
// {out}/trajectories/{task_id}.jsonl, {task_id}.state.json and
// {out}/report.{json,txt}. A failing task scores 0 with halt_reason
// "error"; the run itself only throws for configuration problems.
RunResult run(const RunConfig& config);

// Runs one task on a fresh env. Exposed for tests and the CLI.
TrajectoryRecord run_task(const RunConfig& config, const TaskInstance& task,
                          std::string* snapshot = nullptr);

// Re-evaluates a run directory against its persisted final states. Throws
// MissingSnapshot when a trajectory has no state file.
RunResult score_trajectories(const std::string& dir, const BackendConfig& backend,
                             const JudgeSetup& judge);

// Reads every trajectory under {dir}/trajectories, sorted by task id.
std::vector<TrajectoryRecord> load_trajectories(const std::string& dir);

// Tasks whose id or template id matches one of the glob patterns (* and ?).
// An empty pattern list selects everything.
std::vector<TaskInstance> select_tasks(const std::vector<TaskInstance>& tasks,
                                       const std::vector<std::string>& patterns);

}  // namespace arenakit
