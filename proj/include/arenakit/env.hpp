#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arenakit/action.hpp"
#include "arenakit/axtree.hpp"
#include "arenakit/backend.hpp"
#include "arenakit/task.hpp"

namespace arenakit {

struct TabSummary {
  std::size_t index = 0;
  std::string title;
  bool focused = false;

  bool operator==(const TabSummary&) const = default;
};

struct Observation {
  // Tab header block, a blank line and the rendered accessibility tree.
  std::string content;
  // content followed by a final "URL: ..." line.
  std::string text;
  std::string url;
  std::vector<TabSummary> tabs;
  // Why the action that produced this observation failed, if it did.
  std::optional<std::string> error;

  bool operator==(const Observation&) const = default;
};

struct StepResult {
  Observation observation;
  bool terminated = false;
  std::optional<std::string> stop_answer;
};

struct TraceStep {
  Observation observation;        // what the agent saw when it acted
  std::string raw_action;
  std::optional<Action> parsed;   // absent when the raw text did not parse
  std::optional<std::string> error;
  std::string url_after;
  std::string state_after;        // backend state serialization after the step
};

struct Trace {
  std::vector<TraceStep> steps;
  std::optional<std::string> stop_answer;
  std::string final_url;
  std::string initial_state;

  std::size_t size() const { return steps.size(); }
};

struct EnvConfig {
  BackendConfig backend;
  // Accessibility-tree nodes shown per observation; nullopt shows all.
  std::optional<std::size_t> max_obs_nodes;
};

// One episode at a time over a backend session. Not thread-safe; run one
// Env per worker.
class Env {
 public:
  explicit Env(EnvConfig config);

  // Opens a fresh session for the task and returns the first observation.
  // Backend errors (ConfigError, ConnectionError, ...) propagate.
  Observation reset(const TaskInstance& task);

  // Never throws for agent mistakes: failures are reported through
  // observation.error and leave the page state untouched. `raw` is recorded
  // in the trace; it defaults to the canonical action text.
  StepResult step(const Action& action, std::optional<std::string> raw = std::nullopt);

  // Records an action text that could not be parsed or extracted.
  StepResult step_invalid(std::string raw, std::string error);

  const Observation& observation() const;
  const AxTree& tree() const;
  const Trace& trace() const { return trace_; }
  std::size_t step_count() const { return trace_.steps.size(); }
  bool terminated() const { return terminated_; }

  BackendSession& session();
  const BackendSession& session() const;

 private:
  void observe(std::optional<std::string> error);
  StepResult finish_step(TraceStep step, bool stop);
  void require_session() const;

  EnvConfig config_;
  std::unique_ptr<BackendSession> session_;
  std::optional<AxTree> tree_;
  Observation observation_;
  Trace trace_;
  std::size_t offset_ = 0;
  std::string page_key_;
  bool terminated_ = false;
};

// "Tab 0 (current): Title" lines.
std::string render_tab_header(const std::vector<TabSummary>& tabs);

}  // namespace arenakit
