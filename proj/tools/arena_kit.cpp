#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arenakit/agent.hpp"
#include "arenakit/chat.hpp"
#include "arenakit/env.hpp"
#include "arenakit/errors.hpp"
#include "arenakit/evalkit.hpp"
#include "arenakit/runner.hpp"
#include "arenakit/simsite.hpp"
#include "arenakit/taskcfg.hpp"
#include "arenakit/text.hpp"

namespace fs = std::filesystem;
using namespace arenakit;

namespace {

std::string data_path(const char* rel) { return (fs::path(ARENAKIT_DATA_DIR) / rel).string(); }

struct Options {
  std::string tasks = data_path("tasks");
  std::string sites = data_path("sites");
  std::string prompts = data_path("prompts");
  std::vector<std::string> select;
  std::string backend = "simsite";
  std::string webdriver_url = "http://127.0.0.1:4444";
  std::string mode = "cot";
  bool ua_hint = true;
  std::string agent = "llm";
  std::string model_url;
  std::string model = "gpt-4";
  std::string judge = "stub";
  std::string judge_verdicts = data_path("judges/stub_verdicts.json");
  std::string out = "runs/latest";
  int parallel = 1;
  double temperature = 1.0;
  double top_p = 0.9;
  int max_tokens = 512;
  int max_steps = 30;
  std::optional<std::size_t> max_obs_nodes;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  std::string task_id;
};

BackendConfig backend_config(const Options& o) {
  BackendConfig config;
  if (o.backend == "webdriver") {
    config.kind = BackendConfig::Kind::kWebdriver;
    config.webdriver_url = o.webdriver_url;
  }
  config.sites = std::make_shared<SiteCatalog>(SiteCatalog::load_dir(o.sites));
  return config;
}

// Owns whatever the judge setup points at.
struct JudgeHolder {
  std::unique_ptr<LLMClient> model;
  std::unique_ptr<JudgeClient> judge;
  JudgeSetup setup;
};

std::unique_ptr<JudgeHolder> make_judge(const Options& o, const PromptAssets& assets) {
  auto holder = std::make_unique<JudgeHolder>();
  if (o.judge == "stub") {
    holder->judge = std::make_unique<StubJudge>(StubJudge::load(o.judge_verdicts));
  } else {
    if (o.model_url.empty()) throw ConfigError("--judge http needs --model-url");
    holder->model = std::make_unique<HttpChatClient>(o.model_url, o.model);
    holder->judge = std::make_unique<ModelJudge>(*holder->model);
  }
  holder->setup.client = holder->judge.get();
  holder->setup.prompt_template = assets.fuzzy_judge;
  return holder;
}

void add_task_options(CLI::App* app, Options& o) {
  app->add_option("--tasks", o.tasks, "Task file or directory of *.task.json");
  app->add_option("--sites", o.sites, "Directory of *.site.json definitions");
}

void add_judge_options(CLI::App* app, Options& o) {
  app->add_option("--judge", o.judge, "Fuzzy-match judge")
      ->check(CLI::IsMember({"stub", "http"}));
  app->add_option("--judge-verdicts", o.judge_verdicts, "Canned verdicts for the stub judge");
  app->add_option("--prompts", o.prompts, "Prompt asset directory");
}

int cmd_run(const Options& o) {
  SiteCatalog catalog = SiteCatalog::load_dir(o.sites);
  std::vector<std::string> warnings;
  RunConfig config;
  config.tasks = select_tasks(load_tasks(o.tasks, &catalog, &warnings), o.select);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  config.env.backend = backend_config(o);
  config.env.max_obs_nodes = o.max_obs_nodes;
  config.assets = PromptAssets::load(o.prompts);
  config.prompt.mode = *prompt_mode_from_string(o.mode);
  config.prompt.ua_hint = o.ua_hint;
  config.halt.max_steps = o.max_steps;
  config.sampling = {o.temperature, o.top_p, o.max_tokens};
  config.out_dir = o.out;
  config.parallelism = o.parallel;
  config.seed = o.seed;

  if (o.agent == "oracle") {
    PromptMode mode = config.prompt.mode;
    config.client_factory = [mode](const TaskInstance& task) -> std::unique_ptr<LLMClient> {
      return std::make_unique<OracleClient>(task.gold_actions.value_or(std::vector<std::string>{}),
                                            mode);
    };
  } else {
    if (o.model_url.empty()) throw ConfigError("--agent llm needs --model-url");
    std::string url = o.model_url;
    std::string model = o.model;
    config.client_factory = [url, model](const TaskInstance&) -> std::unique_ptr<LLMClient> {
      return std::make_unique<HttpChatClient>(url, model);
    };
  }
  auto judge = make_judge(o, config.assets);
  config.judge = judge->setup;

  RunResult result = run(config);
  for (const auto& r : result.records) {
    std::cerr << r.task.task_id << ": score " << r.reward.score << " (" << r.halt_reason << ", "
              << r.steps.size() << " steps)";
    if (r.error) std::cerr << " " << *r.error;
    std::cerr << "\n";
  }
  std::cout << report_render(result.report,
                             o.format == "json" ? ReportFormat::kJson : ReportFormat::kText);
  return 0;
}

int cmd_score(const Options& o) {
  PromptAssets assets = PromptAssets::load(o.prompts);
  auto judge = make_judge(o, assets);
  RunResult result = score_trajectories(o.out, backend_config(o), judge->setup);
  std::cout << report_render(result.report,
                             o.format == "json" ? ReportFormat::kJson : ReportFormat::kText);
  return 0;
}

int cmd_report(const Options& o) {
  Report report = aggregate(load_trajectories(o.out));
  std::cout << report_render(report,
                             o.format == "json" ? ReportFormat::kJson : ReportFormat::kText);
  return 0;
}

int cmd_validate(const Options& o) {
  SiteCatalog catalog = SiteCatalog::load_dir(o.sites);
  std::vector<std::string> warnings;
  auto tasks = load_tasks(o.tasks, &catalog, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << tasks.size() << " tasks OK\n";
  return 0;
}

int cmd_preview(const Options& o) {
  SiteCatalog catalog = SiteCatalog::load_dir(o.sites);
  auto tasks = load_tasks(o.tasks, &catalog);
  auto it = std::find_if(tasks.begin(), tasks.end(),
                         [&](const TaskInstance& t) { return t.task_id == o.task_id; });
  if (it == tasks.end()) throw ConfigError("unknown task id '" + o.task_id + "'");
  EnvConfig config;
  config.backend = backend_config(o);
  config.max_obs_nodes = o.max_obs_nodes;
  Env env(config);
  std::cout << env.reset(*it).text << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run and score web agents on simulated sites"};
  app.require_subcommand(1);
  Options o;

  auto* run_cmd = app.add_subcommand("run", "Run an agent over tasks");
  add_task_options(run_cmd, o);
  add_judge_options(run_cmd, o);
  run_cmd->add_option("--select", o.select, "Task id or template id globs");
  run_cmd->add_option("--backend", o.backend)->check(CLI::IsMember({"simsite", "webdriver"}));
  run_cmd->add_option("--webdriver-url", o.webdriver_url);
  run_cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"cot", "direct"}));
  run_cmd->add_flag("--ua-hint,!--no-ua-hint", o.ua_hint, "Tell the agent it may answer N/A");
  run_cmd->add_option("--agent", o.agent, "llm, or oracle to replay gold actions")
      ->check(CLI::IsMember({"llm", "oracle"}));
  run_cmd->add_option("--model-url", o.model_url, "Chat-completions endpoint");
  run_cmd->add_option("--model", o.model);
  run_cmd->add_option("--out", o.out, "Output directory");
  run_cmd->add_option("--parallel", o.parallel)->check(CLI::PositiveNumber);
  run_cmd->add_option("--temperature", o.temperature);
  run_cmd->add_option("--top-p", o.top_p);
  run_cmd->add_option("--max-tokens", o.max_tokens)->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-steps", o.max_steps)->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-obs-nodes", o.max_obs_nodes);
  run_cmd->add_option("--seed", o.seed, "Shuffle the execution order");
  run_cmd->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));

  auto* score_cmd = app.add_subcommand("score", "Re-evaluate a run directory");
  score_cmd->add_option("--out", o.out, "Run directory")->required();
  score_cmd->add_option("--sites", o.sites);
  score_cmd->add_option("--model-url", o.model_url);
  score_cmd->add_option("--model", o.model);
  score_cmd->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));
  add_judge_options(score_cmd, o);

  auto* report_cmd = app.add_subcommand("report", "Summarize a run directory");
  report_cmd->add_option("--out", o.out, "Run directory")->required();
  report_cmd->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));

  auto* tasks_cmd = app.add_subcommand("tasks", "Task utilities");
  tasks_cmd->require_subcommand(1);
  auto* validate_cmd = tasks_cmd->add_subcommand("validate", "Load and check task files");
  add_task_options(validate_cmd, o);

  auto* obs_cmd = app.add_subcommand("obs", "Observation utilities");
  obs_cmd->require_subcommand(1);
  auto* preview_cmd = obs_cmd->add_subcommand("preview", "Print a task's first observation");
  add_task_options(preview_cmd, o);
  preview_cmd->add_option("task_id", o.task_id)->required();
  preview_cmd->add_option("--max-obs-nodes", o.max_obs_nodes);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (score_cmd->parsed()) return cmd_score(o);
    if (report_cmd->parsed()) return cmd_report(o);
    if (validate_cmd->parsed()) return cmd_validate(o);
    if (preview_cmd->parsed()) return cmd_preview(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
