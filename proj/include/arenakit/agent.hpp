#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arenakit/action.hpp"
#include "arenakit/chat.hpp"
#include "arenakit/env.hpp"

namespace arenakit {

// The system-prompt sentence that tells the agent it may answer "N/A".
inline constexpr std::string_view kUaHintSentence =
    " If you believe the task is impossible to complete, provide the answer as \"N/A\" in "
    "the bracket.";

inline constexpr std::string_view kCotSummaryPhrase =
    "In summary, the next action I will perform is";

struct PromptExample {
  std::string user;
  std::string assistant;
};

struct PromptAssets {
  std::string system_cot;
  std::string system_direct;
  std::vector<PromptExample> examples_cot;
  std::vector<PromptExample> examples_direct;
  std::string fuzzy_judge;

  // Reads system_{cot,direct}.txt, examples_{cot,direct}.json and
  // fuzzy_judge.txt from a directory. Throws ConfigError.
  static PromptAssets load(const std::string& dir);
};

struct PromptConfig {
  PromptMode mode = PromptMode::kCot;
  bool ua_hint = true;
};

// The system template for the mode, without the UA-hint sentence when
// ua_hint is off.
std::string system_prompt(const PromptAssets& assets, const PromptConfig& config);

// "OBSERVATION:\n...\nURL: ...\nOBJECTIVE: ...\nPREVIOUS ACTION: ..." with an
// "ERROR: ..." line after the page content when the last action failed.
std::string observation_prompt(const Observation& observation, std::string_view intent,
                               const std::optional<std::string>& previous_action);

// System message, the mode's example turns (as system messages named
// example_user / example_assistant), then the current observation.
std::vector<ChatMessage> build_prompt(const PromptAssets& assets, const PromptConfig& config,
                                      std::string_view intent, const Observation& observation,
                                      const std::optional<std::string>& previous_action);

struct HaltPolicy {
  int max_steps = 30;
  int max_same_action = 3;  // halt once a pair repeats more than this
  int max_invalid = 3;
  int parse_retries = 0;
};

struct HistoryEntry {
  std::string observation_text;
  std::string raw_action;
  bool invalid = false;
};

// "max_steps", "invalid" or "repeat" when the episode must end.
std::optional<std::string> should_halt(const std::vector<HistoryEntry>& history,
                                       const HaltPolicy& policy = {});

struct Decision {
  std::optional<Action> action;      // absent: invalid output
  std::string raw_action;            // fenced text, or the completion when none
  std::string completion;            // last model output
  std::optional<std::string> error;  // extraction or parse failure
  int attempts = 0;
};

class Agent {
 public:
  Agent(LLMClient& client, const PromptAssets& assets, PromptConfig prompt = {},
        HaltPolicy halt = {}, SamplingParams sampling = {});

  // Builds the prompt, queries the model and extracts the action, asking
  // again up to parse_retries times on unusable output. ModelError
  // propagates.
  Decision decide(std::string_view intent, const Observation& observation,
                  const std::optional<std::string>& previous_action);

  const PromptConfig& prompt_config() const { return prompt_; }
  const HaltPolicy& halt_policy() const { return halt_; }

 private:
  LLMClient& client_;
  const PromptAssets& assets_;
  PromptConfig prompt_;
  HaltPolicy halt_;
  SamplingParams sampling_;
};

// Replays a fixed list of completions, repeating the last one when
// exhausted.
class ScriptedClient final : public LLMClient {
 public:
  explicit ScriptedClient(std::vector<std::string> replies);
  std::string complete(const std::vector<ChatMessage>& messages,
                       const SamplingParams& params) override;
  std::size_t calls() const;

 private:
  std::vector<std::string> replies_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
};

// Replays gold actions, filling {{id:role 'name'}} placeholders from the
// observation in the prompt. Emits noop once the list is exhausted.
class OracleClient final : public LLMClient {
 public:
  OracleClient(std::vector<std::string> gold_actions, PromptMode mode);
  std::string complete(const std::vector<ChatMessage>& messages,
                       const SamplingParams& params) override;

 private:
  std::vector<std::string> actions_;
  PromptMode mode_;
  std::mutex mu_;
  std::size_t next_ = 0;
};

// Replaces each {{id:role 'name'}} with the id of the first line
// "[id] role 'name'" in the observation text. Throws ParseError when no
// node matches.
std::string resolve_element_placeholders(std::string_view action,
                                         std::string_view observation_text);

// Replaces each {{id:...}} placeholder with a dummy id, for validation.
std::string strip_element_placeholders(std::string_view action);

// Wraps an action in the completion shape of the given prompt mode.
std::string format_completion(std::string_view action, PromptMode mode);

}  // namespace arenakit
