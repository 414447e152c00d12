#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arenakit/backend.hpp"
#include "arenakit/chat.hpp"
#include "arenakit/env.hpp"
#include "arenakit/task.hpp"

namespace arenakit {

// Trim, fold whitespace runs to one space, ASCII lowercase.
std::string normalize_answer(std::string_view s);

int exact_match(std::string_view prediction, std::string_view reference);
int must_include(std::string_view prediction, std::string_view reference);

enum class Verdict { kCorrect, kPartiallyCorrect, kIncorrect };

std::string_view to_string(Verdict verdict);

// The last verdict phrase in a judge reply, matching "partially correct"
// and "incorrect" before "correct" at each position. Case-insensitive.
std::optional<Verdict> parse_verdict(std::string_view reply);

// A model that grades answers. Must tolerate concurrent calls.
class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Judge backed by a chat model at temperature 0.
class ModelJudge final : public JudgeClient {
 public:
  explicit ModelJudge(LLMClient& client, SamplingParams params = {0.0, 1.0, 256})
      : client_(client), params_(params) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  LLMClient& client_;
  SamplingParams params_;
};

// Canned verdicts keyed by normalized (reference, prediction). The pair is
// read back from the "reference answer:" / "student answer:" lines of the
// judge prompt. Unknown pairs get the fallback reply.
class StubJudge final : public JudgeClient {
 public:
  explicit StubJudge(std::string fallback = "incorrect") : fallback_(std::move(fallback)) {}

  void add(std::string_view reference, std::string_view prediction, std::string reply);

  // {"default": "...", "verdicts": [{"reference", "prediction", "reply"}]}
  static StubJudge from_json(const nlohmann::json& doc);
  static StubJudge load(const std::string& path);

  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  std::map<std::pair<std::string, std::string>, std::string> replies_;
  std::string fallback_;
};

// Fills {{intent}}, {{reference answer}} and {{prediction}}.
std::string fill_judge_prompt(std::string_view judge_template, std::string_view intent,
                              std::string_view reference, std::string_view prediction);

// 1 iff the judge calls every reference "correct". Throws JudgeError when
// the judge fails or replies without a verdict. Appends each exchange to
// `transcripts` when given.
int fuzzy_match(std::string_view judge_template, std::string_view intent,
                const std::vector<std::string>& references, std::string_view prediction,
                JudgeClient& judge, std::vector<std::string>* transcripts = nullptr);

// Retrieves the value a program check asserts over. The session must still
// be on the episode's final state. Throws LocateError.
std::string locate(const Trace& trace, const BackendSession& session, const Locator& locator);

struct CheckResult {
  Check check;
  bool passed = false;
  std::string value;   // the located value, or the answer for answer checks
  std::string detail;  // why the check failed

  bool operator==(const CheckResult&) const = default;
};

struct RewardReport {
  int score = 0;
  std::vector<CheckResult> per_check;
  std::vector<std::string> judge_transcripts;

  bool operator==(const RewardReport&) const = default;
};

nlohmann::json to_json(const RewardReport& report);
RewardReport reward_report_from_json(const nlohmann::json& j);

struct JudgeSetup {
  JudgeClient* client = nullptr;  // fuzzy checks fail when absent
  std::string prompt_template;
};

// Scores a finished episode. Never throws for locator or judge failures;
// those fail their check with a detail message.
RewardReport evaluate(const TaskInstance& task, const Trace& trace,
                      const BackendSession& session, const JudgeSetup& judge);

}  // namespace arenakit
