#include "arenakit/agent.hpp"

#include <filesystem>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

std::vector<PromptExample> load_examples(const std::string& path) {
  std::vector<PromptExample> out;
  try {
    json doc = json::parse(text::read_file(path));
    for (const auto& e : doc.at("examples")) {
      out.push_back({e.at("user").get<std::string>(), e.at("assistant").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return out;
}

std::string read_asset(const std::string& path) {
  try {
    return text::read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

PromptAssets PromptAssets::load(const std::string& dir) {
  namespace fs = std::filesystem;
  auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
  PromptAssets assets;
  assets.system_cot = read_asset(at("system_cot.txt"));
  assets.system_direct = read_asset(at("system_direct.txt"));
  assets.fuzzy_judge = read_asset(at("fuzzy_judge.txt"));
  try {
    assets.examples_cot = load_examples(at("examples_cot.json"));
    assets.examples_direct = load_examples(at("examples_direct.json"));
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return assets;
}

std::string system_prompt(const PromptAssets& assets, const PromptConfig& config) {
  std::string base = config.mode == PromptMode::kCot ? assets.system_cot : assets.system_direct;
  if (config.ua_hint) return base;
  auto pos = base.find(kUaHintSentence);
  if (pos != std::string::npos) base.erase(pos, kUaHintSentence.size());
  return base;
}

std::string observation_prompt(const Observation& observation, std::string_view intent,
                               const std::optional<std::string>& previous_action) {
  std::string out = "OBSERVATION:\n" + observation.content;
  if (observation.error) out += "\nERROR: " + *observation.error;
  out += "\nURL: " + observation.url;
  out += "\nOBJECTIVE: " + std::string(intent);
  out += "\nPREVIOUS ACTION: " + previous_action.value_or("None");
  return out;
}

std::vector<ChatMessage> build_prompt(const PromptAssets& assets, const PromptConfig& config,
                                      std::string_view intent, const Observation& observation,
                                      const std::optional<std::string>& previous_action) {
  std::vector<ChatMessage> messages;
  messages.push_back({"system", system_prompt(assets, config), std::nullopt});
  const auto& examples =
      config.mode == PromptMode::kCot ? assets.examples_cot : assets.examples_direct;
  for (const auto& example : examples) {
    messages.push_back({"system", example.user, "example_user"});
    messages.push_back({"system", example.assistant, "example_assistant"});
  }
  messages.push_back({"user", observation_prompt(observation, intent, previous_action),
                      std::nullopt});
  return messages;
}

std::optional<std::string> should_halt(const std::vector<HistoryEntry>& history,
                                       const HaltPolicy& policy) {
  if (history.empty()) return std::nullopt;
  if (static_cast<int>(history.size()) >= policy.max_steps) return "max_steps";

  if (static_cast<int>(history.size()) >= policy.max_invalid) {
    bool all_invalid = true;
    for (std::size_t i = history.size() - static_cast<std::size_t>(policy.max_invalid);
         i < history.size(); ++i) {
      all_invalid = all_invalid && history[i].invalid;
    }
    if (all_invalid) return "invalid";
  }

  const HistoryEntry& last = history.back();
  int run = 0;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->raw_action != last.raw_action || it->observation_text != last.observation_text) break;
    ++run;
  }
  if (run > policy.max_same_action) return "repeat";
  return std::nullopt;
}

Agent::Agent(LLMClient& client, const PromptAssets& assets, PromptConfig prompt,
             HaltPolicy halt, SamplingParams sampling)
    : client_(client), assets_(assets), prompt_(prompt), halt_(halt), sampling_(sampling) {}

Decision Agent::decide(std::string_view intent, const Observation& observation,
                       const std::optional<std::string>& previous_action) {
  auto messages = build_prompt(assets_, prompt_, intent, observation, previous_action);
  Decision decision;
  for (int attempt = 0; attempt <= std::max(halt_.parse_retries, 0); ++attempt) {
    decision.attempts = attempt + 1;
    decision.completion = client_.complete(messages, sampling_);
    try {
      ExtractedAction extracted = extract_action(decision.completion, prompt_.mode);
      decision.action = extracted.action;
      decision.raw_action = extracted.raw;
      decision.error.reset();
      return decision;
    } catch (const ExtractionError& e) {
      decision.error = e.what();
    } catch (const ParseError& e) {
      decision.error = e.what();
    }
    auto fenced = find_fenced_action(decision.completion, prompt_.mode);
    decision.raw_action =
        fenced ? *fenced : std::string(text::trim(decision.completion));
  }
  return decision;
}

ScriptedClient::ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) replies_.push_back("");
}

std::string ScriptedClient::complete(const std::vector<ChatMessage>&, const SamplingParams&) {
  std::lock_guard lock(mu_);
  std::size_t index = std::min(next_, replies_.size() - 1);
  ++next_;
  return replies_[index];
}

std::size_t ScriptedClient::calls() const {
  std::lock_guard lock(mu_);
  return next_;
}

OracleClient::OracleClient(std::vector<std::string> gold_actions, PromptMode mode)
    : actions_(std::move(gold_actions)), mode_(mode) {}

std::string OracleClient::complete(const std::vector<ChatMessage>& messages,
                                   const SamplingParams&) {
  std::string action;
  {
    std::lock_guard lock(mu_);
    if (next_ >= actions_.size()) return format_completion("noop", mode_);
    action = actions_[next_++];
  }
  std::string observation = messages.empty() ? "" : messages.back().content;
  try {
    action = resolve_element_placeholders(action, observation);
  } catch (const ParseError& e) {
    return std::string("I cannot find the element: ") + e.what();
  }
  return format_completion(action, mode_);
}

std::string resolve_element_placeholders(std::string_view action,
                                         std::string_view observation_text) {
  constexpr std::string_view kOpen = "{{id:";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = action.find(kOpen, pos);
    if (open == std::string_view::npos) break;
    auto close = action.find("}}", open);
    if (close == std::string_view::npos) break;
    out.append(action.substr(pos, open - pos));
    std::string wanted(text::trim(action.substr(open + kOpen.size(), close - open - kOpen.size())));

    std::optional<std::string> id;
    for (const auto& raw_line : text::split(observation_text, '\n')) {
      std::string_view line = text::trim(raw_line);
      if (line.size() < 3 || line.front() != '[') continue;
      auto end = line.find("] ");
      if (end == std::string_view::npos) continue;
      std::string_view rest = line.substr(end + 2);
      if (rest.compare(0, wanted.size(), wanted) != 0) continue;
      if (rest.size() != wanted.size() && rest[wanted.size()] != ' ') continue;
      id = std::string(line.substr(1, end - 1));
      break;
    }
    if (!id) throw ParseError("no element " + wanted + " in the observation");
    out += *id;
    pos = close + 2;
  }
  out.append(action.substr(pos));
  return out;
}

std::string strip_element_placeholders(std::string_view action) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = action.find("{{id:", pos);
    if (open == std::string_view::npos) break;
    auto close = action.find("}}", open);
    if (close == std::string_view::npos) break;
    out.append(action.substr(pos, open - pos));
    out += "1";
    pos = close + 2;
  }
  out.append(action.substr(pos));
  return out;
}

std::string format_completion(std::string_view action, PromptMode mode) {
  if (mode == PromptMode::kDirect) return "```" + std::string(action) + "```";
  return "Let's think step-by-step. I will follow the plan for this task. " +
         std::string(kCotSummaryPhrase) + " ```" + std::string(action) + "```";
}

}  // namespace arenakit
