#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "arenakit/agent.hpp"
#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"
#include "fixtures.hpp"

namespace arenakit {
namespace {

using nlohmann::json;

const PromptAssets& assets() {
  static const PromptAssets loaded = PromptAssets::load(fixtures::data_path("prompts"));
  return loaded;
}

Observation sample_observation() {
  Observation obs;
  obs.content = "Tab 0 (current): Shop\n\n[1] RootWebArea 'Shop'\n  [2] link 'Cart'\n"
                "  [3] textbox 'Search' focused: True\n  [4] link 'Cart items'";
  obs.url = "http://shop.sim/";
  obs.text = obs.content + "\nURL: " + obs.url;
  return obs;
}

TEST(PromptAssets, LoadsPackagedFiles) {
  const PromptAssets& a = assets();
  EXPECT_EQ(a.examples_cot.size(), 2u);
  EXPECT_EQ(a.examples_direct.size(), 2u);
  EXPECT_NE(a.fuzzy_judge.find("{{reference answer}}"), std::string::npos);
  EXPECT_THROW(PromptAssets::load("/no/such/dir"), ConfigError);
}

TEST(SystemPrompt, UaHintToggle) {
  for (PromptMode mode : {PromptMode::kCot, PromptMode::kDirect}) {
    const std::string& packaged =
        mode == PromptMode::kCot ? assets().system_cot : assets().system_direct;
    std::string on = system_prompt(assets(), {mode, true});
    std::string off = system_prompt(assets(), {mode, false});
    EXPECT_EQ(on, packaged);
    EXPECT_NE(on.find(kUaHintSentence), std::string::npos);
    EXPECT_EQ(off.find("N/A"), std::string::npos);
    EXPECT_EQ(off.size() + kUaHintSentence.size(), on.size());
    EXPECT_NE(off.find("provide the answer in the bracket.\n"), std::string::npos);
  }
}

TEST(SystemPrompt, ModesDiffer) {
  std::string cot = system_prompt(assets(), {PromptMode::kCot, true});
  std::string direct = system_prompt(assets(), {PromptMode::kDirect, true});
  EXPECT_NE(cot.find(kCotSummaryPhrase), std::string::npos);
  EXPECT_EQ(direct.find("step by step"), std::string::npos);
  for (const auto& e : assets().examples_direct) {
    EXPECT_EQ(e.assistant.find("Let's think step-by-step"), std::string::npos);
  }
  for (const auto& e : assets().examples_cot) {
    EXPECT_EQ(e.assistant.rfind("Let's think step-by-step.", 0), 0u);
  }
}

TEST(ObservationPrompt, Layout) {
  Observation obs = sample_observation();
  EXPECT_EQ(observation_prompt(obs, "Find X", std::nullopt),
            "OBSERVATION:\n" + obs.content +
                "\nURL: http://shop.sim/\nOBJECTIVE: Find X\nPREVIOUS ACTION: None");
  obs.error = "Unknown element id 99";
  EXPECT_EQ(observation_prompt(obs, "Find X", "click [99]"),
            "OBSERVATION:\n" + obs.content +
                "\nERROR: Unknown element id 99\nURL: http://shop.sim/\nOBJECTIVE: Find X"
                "\nPREVIOUS ACTION: click [99]");
}

TEST(BuildPrompt, MessageSequence) {
  auto messages = build_prompt(assets(), {PromptMode::kDirect, false}, "Find X",
                               sample_observation(), std::nullopt);
  ASSERT_EQ(messages.size(), 6u);
  EXPECT_EQ(messages[0].role, "system");
  EXPECT_FALSE(messages[0].name);
  EXPECT_EQ(messages[0].content, system_prompt(assets(), {PromptMode::kDirect, false}));
  EXPECT_EQ(messages[1].name, "example_user");
  EXPECT_EQ(messages[1].content, assets().examples_direct[0].user);
  EXPECT_EQ(messages[2].name, "example_assistant");
  EXPECT_EQ(messages[4].name, "example_assistant");
  EXPECT_EQ(messages[5].role, "user");
  EXPECT_EQ(to_json(messages[1]),
            (json{{"role", "system"}, {"content", messages[1].content}, {"name", "example_user"}}));
}

std::vector<HistoryEntry> entries(std::vector<std::pair<std::string, bool>> spec,
                                  const std::string& obs = "o") {
  std::vector<HistoryEntry> out;
  for (auto& [raw, invalid] : spec) out.push_back({obs, raw, invalid});
  return out;
}

TEST(ShouldHalt, Rules) {
  EXPECT_EQ(should_halt({}), std::nullopt);
  EXPECT_EQ(should_halt(entries({{"a", false}, {"b", false}})), std::nullopt);
  EXPECT_EQ(should_halt(entries({{"x", true}, {"y", true}})), std::nullopt);
  EXPECT_EQ(should_halt(entries({{"x", true}, {"y", true}, {"z", true}})), "invalid");
  EXPECT_EQ(should_halt(entries({{"x", true}, {"a", false}, {"y", true}, {"z", true}})),
            std::nullopt);
  EXPECT_EQ(should_halt(entries({{"a", false}, {"a", false}, {"a", false}})), std::nullopt);
  EXPECT_EQ(should_halt(entries({{"a", false}, {"a", false}, {"a", false}, {"a", false}})),
            "repeat");
}

TEST(ShouldHalt, RepeatNeedsSameObservation) {
  std::vector<HistoryEntry> h;
  for (int i = 0; i < 6; ++i) h.push_back({"page " + std::to_string(i), "scroll [down]", false});
  EXPECT_EQ(should_halt(h), std::nullopt);
}

TEST(ShouldHalt, MaxStepsComesFirst) {
  std::vector<HistoryEntry> h;
  for (int i = 0; i < 30; ++i) h.push_back({"o" + std::to_string(i), "noop", false});
  EXPECT_EQ(should_halt(h), "max_steps");
  h.pop_back();
  EXPECT_EQ(should_halt(h), std::nullopt);
  HaltPolicy tight;
  tight.max_steps = 5;
  h.resize(5);
  EXPECT_EQ(should_halt(h, tight), "max_steps");
}

TEST(Agent, ExtractsActionFromCompletion) {
  ScriptedClient client({"Let's think. In summary, the next action I will perform is "
                         "```click [2]```"});
  Agent agent(client, assets());
  Decision d = agent.decide("Find X", sample_observation(), std::nullopt);
  EXPECT_EQ(d.action, Action::click(ElementRef::by_id(2)));
  EXPECT_EQ(d.raw_action, "click [2]");
  EXPECT_EQ(d.attempts, 1);
  EXPECT_FALSE(d.error);
}

TEST(Agent, InvalidOutputWithoutRetries) {
  ScriptedClient client({"  I would click the cart.  "});
  Agent agent(client, assets());
  Decision d = agent.decide("Find X", sample_observation(), std::nullopt);
  EXPECT_FALSE(d.action);
  EXPECT_TRUE(d.error);
  EXPECT_EQ(d.raw_action, "I would click the cart.");
  EXPECT_EQ(client.calls(), 1u);
}

TEST(Agent, RetriesOnUnparsableOutput) {
  ScriptedClient client({"```clik [2]```", "no fence", "```click [4]```"});
  HaltPolicy halt;
  halt.parse_retries = 2;
  Agent agent(client, assets(), {PromptMode::kDirect, true}, halt);
  Decision d = agent.decide("Find X", sample_observation(), std::nullopt);
  EXPECT_EQ(d.action, Action::click(ElementRef::by_id(4)));
  EXPECT_EQ(d.attempts, 3);

  ScriptedClient stubborn({"```clik [2]```"});
  Agent again(stubborn, assets(), {PromptMode::kDirect, true}, halt);
  Decision bad = again.decide("Find X", sample_observation(), std::nullopt);
  EXPECT_FALSE(bad.action);
  EXPECT_EQ(bad.raw_action, "clik [2]");
  EXPECT_EQ(bad.attempts, 3);
}

TEST(ScriptedClient, RepeatsLastReply) {
  ScriptedClient client({"a", "b"});
  EXPECT_EQ(client.complete({}, {}), "a");
  EXPECT_EQ(client.complete({}, {}), "b");
  EXPECT_EQ(client.complete({}, {}), "b");
  EXPECT_EQ(client.calls(), 3u);
}

TEST(ElementPlaceholders, ResolveAgainstObservation) {
  std::string obs = sample_observation().text;
  EXPECT_EQ(resolve_element_placeholders("click [{{id:link 'Cart'}}]", obs), "click [2]");
  EXPECT_EQ(resolve_element_placeholders("type [{{id: textbox 'Search' }}] [x] [1]", obs),
            "type [3] [x] [1]");
  EXPECT_EQ(resolve_element_placeholders("click [{{id:link 'Cart items'}}]", obs), "click [4]");
  EXPECT_THROW(resolve_element_placeholders("click [{{id:button 'Cart'}}]", obs), ParseError);
  EXPECT_EQ(resolve_element_placeholders("stop [N/A]", obs), "stop [N/A]");
  EXPECT_EQ(strip_element_placeholders("type [{{id:textbox 'S'}}] [{{id:x}}]"), "type [1] [1]");
}

TEST(OracleClient, ReplaysGoldActions) {
  OracleClient oracle({"click [{{id:link 'Cart'}}]", "click [{{id:button 'Nope'}}]", "stop [ok]"},
                      PromptMode::kCot);
  auto messages = build_prompt(assets(), {}, "X", sample_observation(), std::nullopt);
  std::string first = oracle.complete(messages, {});
  EXPECT_EQ(extract_action(first, PromptMode::kCot).action, Action::click(ElementRef::by_id(2)));
  EXPECT_THROW(extract_action(oracle.complete(messages, {}), PromptMode::kCot), ExtractionError);
  EXPECT_EQ(extract_action(oracle.complete(messages, {}), PromptMode::kCot).action,
            Action::stop("ok"));
  EXPECT_EQ(extract_action(oracle.complete(messages, {}), PromptMode::kCot).action,
            Action::noop());
}

TEST(FormatCompletion, ModeShapes) {
  EXPECT_EQ(format_completion("noop", PromptMode::kDirect), "```noop```");
  std::string cot = format_completion("noop", PromptMode::kCot);
  EXPECT_NE(cot.find(std::string(kCotSummaryPhrase) + " ```noop```"), std::string::npos);
}

// Minimal OpenAI-style endpoint.
class FakeChatServer {
 public:
  explicit FakeChatServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      std::size_t n = calls_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      int status = n < statuses_.size() ? statuses_[n] : 200;
      res.status = status;
      if (status == 200) {
        res.set_content(json{{"choices", {{{"message", {{"content", "```noop```"}}}}}}}.dump(),
                        "application/json");
      } else {
        res.set_content("overloaded", "text/plain");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  std::atomic<std::size_t> calls_{0};
  std::string last_body_;
  std::string last_auth_;

 private:
  httplib::Server server_;
  std::thread thread_;
  std::vector<int> statuses_;
  int port_ = 0;
};

TEST(HttpChatClient, SendsRequestAndParsesReply) {
  FakeChatServer server({});
  ::setenv("ARENA_KIT_API_KEY", "sk-test", 1);
  HttpChatClient client(server.url(), "test-model");
  std::string reply =
      client.complete({{"user", "hi", std::nullopt}}, SamplingParams{0.0, 1.0, 64});
  ::unsetenv("ARENA_KIT_API_KEY");
  EXPECT_EQ(reply, "```noop```");
  json body = json::parse(server.last_body_);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  EXPECT_EQ(server.last_auth_, "Bearer sk-test");
}

TEST(HttpChatClient, RetriesThenFails) {
  FakeChatServer flaky({503, 200});
  HttpChatClient client(flaky.url(), "m", 2);
  EXPECT_EQ(client.complete({}, {}), "```noop```");
  EXPECT_EQ(flaky.calls_.load(), 2u);

  FakeChatServer down({503, 503, 503});
  HttpChatClient failing(down.url(), "m", 3);
  try {
    failing.complete({}, {});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("HTTP 503"), std::string::npos);
  }
}

}  // namespace
}  // namespace arenakit
