#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "arenakit/env.hpp"
#include "arenakit/errors.hpp"
#include "arenakit/evalkit.hpp"
#include "arenakit/text.hpp"
#include "fixtures.hpp"
#include "verdict_contexts.hpp"

namespace arenakit {
namespace {

using fixtures::node_id;

std::string judge_prompt() {
  return text::read_file(fixtures::data_path("prompts/fuzzy_judge.txt"));
}

class FixedJudge : public JudgeClient {
 public:
  explicit FixedJudge(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override {
    prompts.push_back(messages.back().content);
    return reply_;
  }
  std::vector<std::string> prompts;

 private:
  std::string reply_;
};

class BrokenJudge : public JudgeClient {
 public:
  std::string complete(const std::vector<ChatMessage>&) override {
    throw ConnectionError("judge endpoint down");
  }
};

TEST(Normalize, TrimsFoldsAndLowercases) {
  EXPECT_EQ(normalize_answer("  Samantha \t Jones\n"), "samantha jones");
  EXPECT_EQ(normalize_answer(""), "");
}

TEST(ExactMatch, ComparesNormalizedStrings) {
  EXPECT_EQ(exact_match("Samantha Jones", "Samantha Jones"), 1);
  EXPECT_EQ(exact_match(" samantha  JONES ", "Samantha Jones"), 1);
  EXPECT_EQ(exact_match("Samantha Jones.", "Samantha Jones"), 0);
  EXPECT_EQ(exact_match("The customer is Samantha Jones", "Samantha Jones"), 0);
}

TEST(MustInclude, SubstringAfterNormalizing) {
  EXPECT_EQ(must_include("Name: Sean Miller, email SEAN@gmail.com", "sean@gmail.com"), 1);
  EXPECT_EQ(must_include("Sean   Miller", "Sean Miller"), 1);
  EXPECT_EQ(must_include("Sean Millers", "Sean Miller"), 1);
  EXPECT_EQ(must_include("S. Miller", "Sean Miller"), 0);
  EXPECT_EQ(must_include("anything", ""), 1);
}

TEST(ParseVerdict, LongestPhraseWins) {
  EXPECT_EQ(parse_verdict("correct"), Verdict::kCorrect);
  EXPECT_EQ(parse_verdict("incorrect"), Verdict::kIncorrect);
  EXPECT_EQ(parse_verdict("Partially Correct"), Verdict::kPartiallyCorrect);
  EXPECT_EQ(parse_verdict("it is incorrect, no wait, correct"), Verdict::kCorrect);
  EXPECT_EQ(parse_verdict("no verdict here"), std::nullopt);
  EXPECT_EQ(parse_verdict(""), std::nullopt);
}

TEST(ParseVerdict, EveryPhraseInEveryContext) {
  const std::vector<std::pair<std::string, Verdict>> phrases = {
      {"correct", Verdict::kCorrect},
      {"incorrect", Verdict::kIncorrect},
      {"partially correct", Verdict::kPartiallyCorrect},
      {"Correct", Verdict::kCorrect},
      {"INCORRECT", Verdict::kIncorrect}};
  for (auto context : testing_gen::kVerdictContexts) {
    for (const auto& [phrase, verdict] : phrases) {
      std::string reply = testing_gen::fill_context(context, phrase);
      EXPECT_EQ(parse_verdict(reply), verdict) << reply;
    }
  }
}

TEST(VerdictNames, Render) {
  EXPECT_EQ(to_string(Verdict::kPartiallyCorrect), "partially correct");
}

TEST(FillJudgePrompt, SubstitutesOnce) {
  std::string out = fill_judge_prompt("Q: {{intent}} R: {{reference answer}} P: {{prediction}}",
                                      "what {{prediction}}", "r", "p");
  EXPECT_EQ(out, "Q: what {{prediction}} R: r P: p");
}

TEST(FuzzyMatch, OnlyCorrectScores) {
  std::string tmpl = judge_prompt();
  FixedJudge correct("Conclusion: correct");
  FixedJudge partial("partially correct");
  FixedJudge wrong("The answer is incorrect.");
  FixedJudge silent("I cannot decide.");
  std::vector<std::string> refs = {"walking: 2h58min", "driving: 21min"};
  EXPECT_EQ(fuzzy_match(tmpl, "intent", refs, "x", correct), 1);
  EXPECT_EQ(correct.prompts.size(), 2u);
  EXPECT_NE(correct.prompts[1].find("reference answer: driving: 21min\n"), std::string::npos);
  EXPECT_EQ(fuzzy_match(tmpl, "intent", refs, "x", partial), 0);
  EXPECT_EQ(fuzzy_match(tmpl, "intent", refs, "x", wrong), 0);
  EXPECT_THROW(fuzzy_match(tmpl, "intent", refs, "x", silent), JudgeError);
  BrokenJudge broken;
  EXPECT_THROW(fuzzy_match(tmpl, "intent", refs, "x", broken), JudgeError);
  EXPECT_THROW(fuzzy_match(tmpl, "intent", {}, "x", correct), JudgeError);
}

TEST(FuzzyMatch, TranscriptsRecordEachExchange) {
  FixedJudge judge("correct");
  std::vector<std::string> transcripts;
  fuzzy_match(judge_prompt(), "q", {"a", "b"}, "p", judge, &transcripts);
  ASSERT_EQ(transcripts.size(), 2u);
  EXPECT_NE(transcripts[0].find("\n---\ncorrect"), std::string::npos);
}

TEST(StubJudge, LooksUpNormalizedPairs) {
  StubJudge judge = StubJudge::load(fixtures::data_path("judges/stub_verdicts.json"));
  std::string tmpl = judge_prompt();
  auto ask = [&](const std::string& ref, const std::string& pred) {
    return judge.complete({ChatMessage{"user", fill_judge_prompt(tmpl, "q", ref, pred),
                                       std::nullopt}});
  };
  EXPECT_EQ(parse_verdict(ask("walking: 2h58min", "Walking takes 2h58min and driving takes 21min")),
            Verdict::kCorrect);
  EXPECT_EQ(parse_verdict(ask("WALKING:  2h58min", "walking takes 2h58min and driving takes 21min")),
            Verdict::kCorrect);
  EXPECT_EQ(parse_verdict(ask("walking: 2h58min", "Walking takes about 3 hours")),
            Verdict::kPartiallyCorrect);
  EXPECT_EQ(ask("walking: 2h58min", "something else"), "incorrect");
  EXPECT_THROW(judge.complete({ChatMessage{"user", "no answers here", std::nullopt}}),
               JudgeError);
  EXPECT_THROW(judge.complete({}), JudgeError);
}

TEST(StubJudge, RejectsMalformedDocuments) {
  EXPECT_THROW(StubJudge::from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(StubJudge::from_json({{"verdicts", {{{"reference", "a"}}}}}), ConfigError);
  EXPECT_THROW(StubJudge::load(fixtures::data_path("missing.json")), ConfigError);
}

// Episodes on packaged fixture tasks.
class Episode : public ::testing::Test {
 protected:
  Env env{fixtures::env_config()};
};

TEST_F(Episode, LocateFinalUrlProbeAndElementText) {
  env.reset(fixtures::task("map_find_place.0"));
  const auto& session = env.session();
  EXPECT_EQ(locate(env.trace(), session, {Locator::Kind::kFinalUrl, ""}), "http://map.sim/");
  EXPECT_THROW(locate(env.trace(), session, {Locator::Kind::kProbe, "nope"}), LocateError);
  EXPECT_THROW(locate(env.trace(), session, {Locator::Kind::kElementText, "#does-not-exist"}),
               LocateError);
  EXPECT_THROW(locate(env.trace(), session, {Locator::Kind::kElementText, "a["}), LocateError);
  EXPECT_EQ(locate(env.trace(), session, {Locator::Kind::kElementText, "title"}),
            "OpenStreetMap");
}

TEST_F(Episode, ProgramCheckPassesOnlyAfterStateChange) {
  const TaskInstance& task = fixtures::task("forum_post_question.0");
  env.reset(task);
  JudgeSetup none;
  env.step(Action::stop(""));
  EXPECT_EQ(evaluate(task, env.trace(), env.session(), none).score, 0);

  env.reset(task);
  env.step(Action::go_to("http://forum.sim/submit/nyc"));
  env.step(Action::type(ElementRef::by_id(node_id(env, Role::kTextbox, "Title")),
                        "Car in NYC?", false));
  env.step(Action::type(ElementRef::by_id(node_id(env, Role::kTextbox, "Body")),
                        "Do I need a car in NYC?", true));
  env.step(Action::stop(""));
  RewardReport report = evaluate(task, env.trace(), env.session(), none);
  EXPECT_EQ(report.score, 1);
  ASSERT_EQ(report.per_check.size(), 2u);
  EXPECT_TRUE(report.per_check[0].passed);
  EXPECT_NE(report.per_check[0].value.find("/f/nyc"), std::string::npos);
}

TEST_F(Episode, AnswerChecksUseStopAnswer) {
  const TaskInstance& task = fixtures::task("shop_product_price.0");
  env.reset(task);
  env.step(Action::stop("It costs $279.49"));
  RewardReport report = evaluate(task, env.trace(), env.session(), {});
  EXPECT_EQ(report.score, 1);
  EXPECT_EQ(report.per_check[0].value, "It costs $279.49");

  env.reset(task);
  env.step(Action::stop("$279.50"));
  report = evaluate(task, env.trace(), env.session(), {});
  EXPECT_EQ(report.score, 0);
  EXPECT_EQ(report.per_check[0].detail, "does not include '$279.49'");
}

TEST_F(Episode, FuzzyWithoutJudgeFails) {
  const TaskInstance& task = fixtures::task("map_compare_travel.0");
  env.reset(task);
  env.step(Action::stop("Walking takes 2h58min and driving takes 21min"));
  RewardReport report = evaluate(task, env.trace(), env.session(), {});
  EXPECT_EQ(report.score, 0);
  EXPECT_EQ(report.per_check[0].detail, "no judge configured");

  FixedJudge mute("hmm");
  report = evaluate(task, env.trace(), env.session(), {&mute, judge_prompt()});
  EXPECT_EQ(report.score, 0);
  EXPECT_NE(report.per_check[0].detail.find("no verdict"), std::string::npos);
}

TEST_F(Episode, ReportJsonRoundTrip) {
  const TaskInstance& task = fixtures::task("map_compare_travel.0");
  env.reset(task);
  env.step(Action::stop("Walking takes 2h58min and driving takes 21min"));
  FixedJudge judge("correct");
  RewardReport report = evaluate(task, env.trace(), env.session(), {&judge, judge_prompt()});
  EXPECT_EQ(report.score, 1);
  EXPECT_EQ(report.judge_transcripts.size(), 2u);
  EXPECT_EQ(reward_report_from_json(to_json(report)), report);
  EXPECT_THROW(reward_report_from_json(nlohmann::json::object()), SchemaError);
}

TEST(Evaluate, NoChecksNeverScores) {
  TaskInstance task;
  Trace trace;
  Env env(fixtures::env_config());
  env.reset(fixtures::task("shop_product_price.0"));
  EXPECT_EQ(evaluate(task, trace, env.session(), {}).score, 0);
}

}  // namespace
}  // namespace arenakit
