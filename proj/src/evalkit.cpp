#include "arenakit/evalkit.hpp"

#include <array>

#include "arenakit/errors.hpp"
#include "arenakit/selector.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

std::string normalize_answer(std::string_view s) {
  return text::to_lower(text::collapse_whitespace(s));
}

int exact_match(std::string_view prediction, std::string_view reference) {
  return normalize_answer(prediction) == normalize_answer(reference) ? 1 : 0;
}

int must_include(std::string_view prediction, std::string_view reference) {
  return normalize_answer(prediction).find(normalize_answer(reference)) != std::string::npos
             ? 1
             : 0;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kPartiallyCorrect: return "partially correct";
    case Verdict::kIncorrect: return "incorrect";
  }
  return "incorrect";
}

std::optional<Verdict> parse_verdict(std::string_view reply) {
  static constexpr std::array<std::pair<std::string_view, Verdict>, 3> kPhrases = {{
      {"partially correct", Verdict::kPartiallyCorrect},
      {"incorrect", Verdict::kIncorrect},
      {"correct", Verdict::kCorrect},
  }};
  std::string lower = text::to_lower(reply);
  std::optional<Verdict> last;
  std::size_t i = 0;
  while (i < lower.size()) {
    bool matched = false;
    for (const auto& [phrase, verdict] : kPhrases) {
      if (lower.compare(i, phrase.size(), phrase) == 0) {
        last = verdict;
        i += phrase.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return last;
}

std::string ModelJudge::complete(const std::vector<ChatMessage>& messages) {
  try {
    return client_.complete(messages, params_);
  } catch (const ModelError& e) {
    throw JudgeError(e.what());
  }
}

void StubJudge::add(std::string_view reference, std::string_view prediction,
                    std::string reply) {
  replies_[{normalize_answer(reference), normalize_answer(prediction)}] = std::move(reply);
}

StubJudge StubJudge::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("stub judge verdicts must be an object");
  StubJudge judge(doc.value("default", "incorrect"));
  if (doc.contains("verdicts")) {
    for (const auto& v : doc.at("verdicts")) {
      try {
        judge.add(v.at("reference").get<std::string>(), v.at("prediction").get<std::string>(),
                  v.at("reply").get<std::string>());
      } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed stub verdict: ") + e.what());
      }
    }
  }
  return judge;
}

StubJudge StubJudge::load(const std::string& path) {
  try {
    return from_json(json::parse(text::read_file(path)));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

std::string StubJudge::complete(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw JudgeError("stub judge received no messages");
  const std::string& prompt = messages.back().content;
  constexpr std::string_view kRef = "reference answer: ";
  constexpr std::string_view kRefEnd = "\n\nall the string";
  constexpr std::string_view kStudent = "student answer: ";
  constexpr std::string_view kStudentEnd = "\n\nConclude the judgement";
  auto r = prompt.find(kRef);
  auto r_end = r == std::string::npos ? r : prompt.find(kRefEnd, r);
  auto s = r_end == std::string::npos ? r_end : prompt.find(kStudent, r_end);
  auto s_end = prompt.rfind(kStudentEnd);
  if (r_end == std::string::npos || s == std::string::npos || s_end == std::string::npos ||
      s_end < s) {
    throw JudgeError("stub judge could not find the answers in the prompt");
  }
  std::string reference = prompt.substr(r + kRef.size(), r_end - r - kRef.size());
  std::string prediction =
      prompt.substr(s + kStudent.size(), s_end - s - kStudent.size());
  auto it = replies_.find({normalize_answer(reference), normalize_answer(prediction)});
  return it == replies_.end() ? fallback_ : it->second;
}

std::string fill_judge_prompt(std::string_view judge_template, std::string_view intent,
                              std::string_view reference, std::string_view prediction) {
  // One pass so placeholder-like text inside the values stays literal.
  static constexpr std::array<std::string_view, 3> kKeys = {
      "{{intent}}", "{{reference answer}}", "{{prediction}}"};
  const std::array<std::string_view, 3> values = {intent, reference, prediction};
  std::string out;
  std::size_t i = 0;
  while (i < judge_template.size()) {
    bool replaced = false;
    for (std::size_t k = 0; k < kKeys.size(); ++k) {
      if (judge_template.compare(i, kKeys[k].size(), kKeys[k]) == 0) {
        out += values[k];
        i += kKeys[k].size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(judge_template[i++]);
  }
  return out;
}

int fuzzy_match(std::string_view judge_template, std::string_view intent,
                const std::vector<std::string>& references, std::string_view prediction,
                JudgeClient& judge, std::vector<std::string>* transcripts) {
  if (references.empty()) throw JudgeError("fuzzy match needs at least one reference");
  int score = 1;
  for (const auto& reference : references) {
    std::string prompt = fill_judge_prompt(judge_template, intent, reference, prediction);
    std::string reply;
    try {
      reply = judge.complete({ChatMessage{"user", prompt, std::nullopt}});
    } catch (const JudgeError&) {
      throw;
    } catch (const Error& e) {
      throw JudgeError(std::string("judge call failed: ") + e.what());
    }
    if (transcripts) transcripts->push_back(prompt + "\n---\n" + reply);
    auto verdict = parse_verdict(reply);
    if (!verdict) throw JudgeError("judge reply has no verdict: '" + reply + "'");
    if (*verdict != Verdict::kCorrect) score = 0;
  }
  return score;
}

std::string locate(const Trace& trace, const BackendSession& session, const Locator& locator) {
  switch (locator.kind) {
    case Locator::Kind::kFinalUrl:
      return trace.final_url;
    case Locator::Kind::kProbe:
      try {
        return session.probe(locator.arg);
      } catch (const Error& e) {
        throw LocateError(e.what());
      }
    case Locator::Kind::kElementText: {
      try {
        Selector selector = Selector::parse(locator.arg);
        PageView page = session.current_page();
        DomSnapshot snapshot = parse_html(page.html, page.url);
        const DomNode* node = selector.query_first(snapshot.root);
        if (!node) throw LocateError("no element matches '" + locator.arg + "'");
        return inner_text(*node);
      } catch (const LocateError&) {
        throw;
      } catch (const Error& e) {
        throw LocateError(e.what());
      }
    }
  }
  throw LocateError("unknown locator");
}

namespace {

CheckResult run_check(const TaskInstance& task, const Check& check, const Trace& trace,
                      const BackendSession& session, const JudgeSetup& judge,
                      std::vector<std::string>& transcripts) {
  CheckResult result;
  result.check = check;
  const std::string answer = trace.stop_answer.value_or("");

  auto conjunction = [&](const std::string& value, bool exact) {
    std::vector<std::string> missed;
    for (const auto& ref : check.references) {
      int ok = exact ? exact_match(value, ref) : must_include(value, ref);
      if (!ok) missed.push_back("'" + ref + "'");
    }
    result.passed = missed.empty();
    if (!result.passed) {
      result.detail = (exact ? "does not equal " : "does not include ") + text::join(missed, ", ");
    }
  };

  switch (check.kind) {
    case Check::Kind::kAnswerExact:
      result.value = answer;
      conjunction(answer, true);
      break;
    case Check::Kind::kAnswerMustInclude:
      result.value = answer;
      conjunction(answer, false);
      break;
    case Check::Kind::kAnswerFuzzy:
      result.value = answer;
      if (!judge.client) {
        result.detail = "no judge configured";
        break;
      }
      try {
        result.passed = fuzzy_match(judge.prompt_template, task.intent, check.references,
                                    answer, *judge.client, &transcripts) == 1;
        if (!result.passed) result.detail = "judge did not rate every reference correct";
      } catch (const JudgeError& e) {
        result.detail = e.what();
      }
      break;
    case Check::Kind::kProgram:
      if (!check.locator) {
        result.detail = "program check without locator";
        break;
      }
      try {
        result.value = locate(trace, session, *check.locator);
      } catch (const LocateError& e) {
        result.detail = std::string("locator failed: ") + e.what();
        break;
      }
      conjunction(result.value, check.match == Check::Match::kExact);
      break;
  }
  return result;
}

}  // namespace

RewardReport evaluate(const TaskInstance& task, const Trace& trace,
                      const BackendSession& session, const JudgeSetup& judge) {
  RewardReport report;
  bool all = !task.eval.checks.empty();
  for (const auto& check : task.eval.checks) {
    report.per_check.push_back(
        run_check(task, check, trace, session, judge, report.judge_transcripts));
    all = all && report.per_check.back().passed;
  }
  report.score = all ? 1 : 0;
  return report;
}

json to_json(const RewardReport& report) {
  json checks = json::array();
  for (const auto& c : report.per_check) {
    checks.push_back({{"check", to_json(c.check)},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"detail", c.detail}});
  }
  return {{"score", report.score},
          {"per_check", checks},
          {"judge_transcripts", report.judge_transcripts}};
}

RewardReport reward_report_from_json(const json& j) {
  RewardReport report;
  try {
    report.score = j.at("score").get<int>();
    for (const auto& c : j.at("per_check")) {
      CheckResult r;
      r.check = check_from_json(c.at("check"), "reward_report.per_check");
      r.passed = c.at("passed").get<bool>();
      r.value = c.at("value").get<std::string>();
      r.detail = c.at("detail").get<std::string>();
      report.per_check.push_back(std::move(r));
    }
    report.judge_transcripts = j.at("judge_transcripts").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed reward report: ") + e.what());
  }
  return report;
}

}  // namespace arenakit
