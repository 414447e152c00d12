#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "arenakit/errors.hpp"
#include "arenakit/runner.hpp"
#include "arenakit/text.hpp"
#include "fixtures.hpp"

namespace arenakit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class OutDir {
 public:
  OutDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("arenakit-run-" + std::to_string(rd()));
  }
  ~OutDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

std::vector<TaskInstance> only(const std::string& id) { return {fixtures::task(id)}; }

TrajectoryRecord run_one(const std::string& id, std::vector<std::string> replies,
                         HaltPolicy halt = {}) {
  RunConfig config = fixtures::run_config(fixtures::scripted_factory(std::move(replies)));
  config.halt = halt;
  return run_task(config, fixtures::task(id));
}

TEST(RunTask, StopsOnAnswer) {
  TrajectoryRecord r = run_one("shop_product_price.0", {"```stop [$279.49]```"});
  EXPECT_EQ(r.halt_reason, "stop");
  EXPECT_EQ(r.stop_answer, "$279.49");
  EXPECT_EQ(r.reward.score, 1);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.steps[0].parsed_action, "stop [$279.49]");
  EXPECT_EQ(r.final_url, "http://shop.sim/");
  EXPECT_FALSE(r.error);
}

TEST(RunTask, ProseHaltsAsInvalid) {
  TrajectoryRecord r = run_one("shop_product_price.0", {"I am not sure what to do."});
  EXPECT_EQ(r.halt_reason, "invalid");
  EXPECT_EQ(r.steps.size(), 3u);
  EXPECT_FALSE(r.steps[0].parsed_action);
  EXPECT_EQ(r.steps[0].raw_action, "I am not sure what to do.");
  EXPECT_EQ(r.reward.score, 0);
}

TEST(RunTask, RepeatedActionHalts) {
  TrajectoryRecord r = run_one("shop_product_price.0", {"```click [9999]```"});
  EXPECT_EQ(r.halt_reason, "invalid");
  TrajectoryRecord noops = run_one("shop_product_price.0", {"```noop```"});
  EXPECT_EQ(noops.halt_reason, "repeat");
  EXPECT_EQ(noops.steps.size(), 4u);
}

TEST(RunTask, MaxStepsAndRelaxedRepeat) {
  HaltPolicy relaxed;
  relaxed.max_same_action = 100;
  TrajectoryRecord r = run_one("shop_product_price.0", {"```noop```"}, relaxed);
  EXPECT_EQ(r.halt_reason, "max_steps");
  EXPECT_EQ(r.steps.size(), 30u);

  std::vector<std::string> replies(29, "```noop```");
  replies.push_back("```stop [N/A]```");
  TrajectoryRecord stopped = run_one("shop_product_price.0", replies, relaxed);
  EXPECT_EQ(stopped.halt_reason, "stop");
  EXPECT_EQ(stopped.steps.size(), 30u);
}

TEST(RunTask, FailuresBecomeErrorRecords) {
  RunConfig config = fixtures::run_config(nullptr);
  TrajectoryRecord r = run_task(config, fixtures::task("shop_product_price.0"));
  EXPECT_EQ(r.halt_reason, "error");
  EXPECT_EQ(r.error, "no model client configured");
  EXPECT_EQ(r.reward.score, 0);

  config.client_factory = [](const TaskInstance&) -> std::unique_ptr<LLMClient> {
    throw ModelError("model offline");
  };
  r = run_task(config, fixtures::task("shop_product_price.0"));
  EXPECT_EQ(r.halt_reason, "error");
  EXPECT_EQ(r.error, "model offline");
}

TEST(Run, WritesTrajectoriesStatesAndReport) {
  OutDir out;
  std::vector<TaskInstance> selected = select_tasks(fixtures::tasks(), {"shop_*", "map_find_place"});
  RunConfig config = fixtures::run_config(fixtures::oracle_factory(), selected);
  config.out_dir = out.str();
  config.parallelism = 2;
  config.seed = 7;
  RunResult result = run(config);
  ASSERT_EQ(result.records.size(), selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    EXPECT_EQ(result.records[i].task.task_id, selected[i].task_id);
    EXPECT_TRUE(fs::is_regular_file(out / ("trajectories/" + selected[i].task_id + ".jsonl")));
    EXPECT_TRUE(
        fs::is_regular_file(out / ("trajectories/" + selected[i].task_id + ".state.json")));
  }
  EXPECT_EQ(text::read_file((out / "report.json").string()),
            report_render(result.report, ReportFormat::kJson));
  EXPECT_EQ(text::read_file((out / "report.txt").string()),
            report_render(result.report, ReportFormat::kText));

  auto loaded = load_trajectories(out.str());
  ASSERT_EQ(loaded.size(), selected.size());
  for (const auto& rec : loaded) {
    auto it = std::find_if(result.records.begin(), result.records.end(),
                           [&](const auto& r) { return r.task.task_id == rec.task.task_id; });
    ASSERT_NE(it, result.records.end());
    EXPECT_EQ(rec, *it);
  }

  RunResult rescored = score_trajectories(out.str(), config.env.backend, config.judge);
  EXPECT_EQ(rescored.report, result.report);

  fs::remove(out / ("trajectories/" + selected[0].task_id + ".state.json"));
  EXPECT_THROW(score_trajectories(out.str(), config.env.backend, config.judge), MissingSnapshot);
}

TEST(Run, RejectsBadParallelism) {
  RunConfig config = fixtures::run_config(fixtures::oracle_factory(), {});
  config.parallelism = 0;
  EXPECT_THROW(run(config), ConfigError);
}

TEST(LoadTrajectories, MissingOrMalformed) {
  EXPECT_THROW(load_trajectories("/no/such/run"), ConfigError);
  OutDir out;
  fs::create_directories(out / "trajectories");
  text::write_file((out / "trajectories/x.jsonl").string(), "{\"task_id\": 1}\n");
  EXPECT_THROW(load_trajectories(out.str()), SchemaError);
}

TrajectoryRecord scored(const std::string& id, int score) {
  TrajectoryRecord r;
  r.task = fixtures::task(id);
  r.reward.score = score;
  return r;
}

TEST(Aggregate, SplitsAchievableAndUnachievable) {
  std::vector<TrajectoryRecord> records;
  for (const auto& t : fixtures::tasks()) records.push_back(scored(t.task_id, 0));
  records[0].reward.score = 1;
  Report report = aggregate(records);
  EXPECT_EQ(report.all.n, 27);
  EXPECT_EQ(report.achievable.n, 24);
  EXPECT_EQ(report.unachievable.n, 3);
  EXPECT_EQ(report.all.success, 1);
  EXPECT_EQ(report.per_template.size(), 17u);
  EXPECT_EQ(report.per_category.size(), 3u);
  EXPECT_DOUBLE_EQ(*report.all.rate() * report.all.n,
                   *report.achievable.rate() * report.achievable.n +
                       *report.unachievable.rate() * report.unachievable.n);
  EXPECT_EQ(Tally{}.rate(), std::nullopt);
}

TEST(ReportRender, TextAndJson) {
  Report report = aggregate({scored("shop_product_price.0", 1), scored("shop_product_price.1", 0)});
  std::string text = report_render(report, ReportFormat::kText);
  EXPECT_EQ(text.rfind("SR: 50.00%\n", 0), 0u);
  EXPECT_NE(text.find("SR_UA: n/a\n"), std::string::npos);
  EXPECT_NE(text.find("50–75%: 1\n"), std::string::npos);
  EXPECT_NE(text.find("  shop_product_price: 1/2\n"), std::string::npos);
  json j = json::parse(report_render(report, ReportFormat::kJson));
  EXPECT_EQ(j["all"]["sr"], 50.0);
  EXPECT_TRUE(j["unachievable"]["sr"].is_null());
  EXPECT_EQ(report_render(Report{}, ReportFormat::kText), "SR: n/a (0 tasks)\n");
}

TEST(Trajectory, JsonRoundTrip) {
  TrajectoryRecord r = run_one("shop_product_price.0", {"```click [9999]```"});
  EXPECT_EQ(trajectory_from_json(to_json(r)), r);
  EXPECT_THROW(trajectory_from_json(json::object()), SchemaError);
}

TEST(SelectTasks, GlobsOnIdsAndTemplates) {
  EXPECT_EQ(select_tasks(fixtures::tasks(), {}).size(), 27u);
  auto shop = select_tasks(fixtures::tasks(), {"shop_*"});
  for (const auto& t : shop) EXPECT_EQ(t.template_id.rfind("shop_", 0), 0u);
  EXPECT_EQ(select_tasks(fixtures::tasks(), {"shop_product_price.?"}).size(),
            select_tasks(fixtures::tasks(), {"shop_product_price"}).size());
  EXPECT_TRUE(select_tasks(fixtures::tasks(), {"nothing*"}).empty());
}

}  // namespace
}  // namespace arenakit
