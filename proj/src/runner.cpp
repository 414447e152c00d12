#include "arenakit/runner.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <thread>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json optional_string(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> read_optional(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<std::string>();
}

std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", value);
  return buf;
}

std::string rate_text(const Tally& t) {
  auto r = t.rate();
  return r ? percent(*r) : "n/a";
}

json tally_json(const Tally& t) {
  auto r = t.rate();
  return {{"n", t.n}, {"success", t.success}, {"sr", r ? json(*r) : json(nullptr)}};
}

fs::path trajectory_dir(const std::string& out) { return fs::path(out) / "trajectories"; }

void persist(const std::string& out, const TrajectoryRecord& record,
             const std::optional<std::string>& snapshot) {
  fs::path dir = trajectory_dir(out);
  text::write_file((dir / (record.task.task_id + ".jsonl")).string(),
                   to_json(record).dump() + "\n");
  if (snapshot) {
    text::write_file((dir / (record.task.task_id + ".state.json")).string(), *snapshot);
  }
}

void write_report(const std::string& out, const Report& report) {
  text::write_file((fs::path(out) / "report.json").string(),
                   report_render(report, ReportFormat::kJson));
  text::write_file((fs::path(out) / "report.txt").string(),
                   report_render(report, ReportFormat::kText));
}

// Runs fn(i) for i in order, on up to `workers` threads.
template <typename Fn>
void parallel_for(const std::vector<std::size_t>& order, int workers, Fn fn) {
  std::size_t threads = std::min<std::size_t>(std::max(workers, 1), order.size());
  if (threads <= 1) {
    for (std::size_t i : order) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < order.size(); k = next++) fn(order[k]);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

json to_json(const TrajectoryRecord& record) {
  json steps = json::array();
  for (const auto& s : record.steps) {
    steps.push_back({{"observation_text", s.observation_text},
                     {"url", s.url},
                     {"raw_action", s.raw_action},
                     {"parsed_action", optional_string(s.parsed_action)},
                     {"error", optional_string(s.error)}});
  }
  return {{"task_id", record.task.task_id},
          {"intent", record.task.intent},
          {"task", to_json(record.task)},
          {"steps", steps},
          {"stop_answer", optional_string(record.stop_answer)},
          {"halt_reason", record.halt_reason},
          {"error", optional_string(record.error)},
          {"final_url", record.final_url},
          {"reward_report", to_json(record.reward)},
          {"wall_time", record.wall_time}};
}

TrajectoryRecord trajectory_from_json(const json& j) {
  TrajectoryRecord record;
  try {
    record.task = task_from_json(j.at("task"), "trajectory.task");
    for (const auto& s : j.at("steps")) {
      record.steps.push_back({s.at("observation_text").get<std::string>(),
                              s.at("url").get<std::string>(),
                              s.at("raw_action").get<std::string>(),
                              read_optional(s, "parsed_action"), read_optional(s, "error")});
    }
    record.stop_answer = read_optional(j, "stop_answer");
    record.halt_reason = j.at("halt_reason").get<std::string>();
    record.error = read_optional(j, "error");
    record.final_url = j.at("final_url").get<std::string>();
    record.reward = reward_report_from_json(j.at("reward_report"));
    record.wall_time = j.at("wall_time").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed trajectory: ") + e.what());
  }
  return record;
}

std::optional<double> Tally::rate() const {
  if (n == 0) return std::nullopt;
  return 100.0 * success / n;
}

Report aggregate(const std::vector<TrajectoryRecord>& records) {
  Report report;
  for (const auto& r : records) {
    int ok = r.reward.score == 1 ? 1 : 0;
    auto add = [ok](Tally& t) {
      ++t.n;
      t.success += ok;
    };
    add(report.all);
    add(r.task.eval.unachievable ? report.unachievable : report.achievable);
    add(report.per_template[r.task.template_id]);
    add(report.per_category[std::string(to_string(r.task.category))]);
  }
  return report;
}

json to_json(const Report& report) {
  json templates = json::object();
  for (const auto& [id, t] : report.per_template) templates[id] = tally_json(t);
  json categories = json::object();
  for (const auto& [id, t] : report.per_category) categories[id] = tally_json(t);
  return {{"all", tally_json(report.all)},
          {"achievable", tally_json(report.achievable)},
          {"unachievable", tally_json(report.unachievable)},
          {"per_template", templates},
          {"per_category", categories}};
}

std::string report_render(const Report& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return to_json(report).dump(2) + "\n";
  if (report.all.n == 0) return "SR: n/a (0 tasks)\n";

  std::string out;
  out += "SR: " + rate_text(report.all) + "\n";
  out += "SR_AC: " + rate_text(report.achievable) + "\n";
  out += "SR_UA: " + rate_text(report.unachievable) + "\n";
  out += "Tasks: " + std::to_string(report.all.n) + " (" +
         std::to_string(report.achievable.n) + " achievable, " +
         std::to_string(report.unachievable.n) + " unachievable), " +
         std::to_string(report.all.success) + " succeeded\n";

  static constexpr const char* kBuckets[] = {"0–25%", "25–50%", "50–75%", "75–100%"};
  int counts[4] = {0, 0, 0, 0};
  for (const auto& [id, t] : report.per_template) {
    int bucket = std::min(3, static_cast<int>(*t.rate() / 25.0));
    ++counts[bucket];
  }
  out += "\nTemplate success histogram:\n";
  for (int b = 0; b < 4; ++b) out += std::string(kBuckets[b]) + ": " + std::to_string(counts[b]) + "\n";

  out += "\nPer category:\n";
  for (const auto& [id, t] : report.per_category) {
    out += "  " + id + ": " + rate_text(t) + " (" + std::to_string(t.success) + "/" +
           std::to_string(t.n) + ")\n";
  }
  out += "\nPer template:\n";
  for (const auto& [id, t] : report.per_template) {
    out += "  " + id + ": " + std::to_string(t.success) + "/" + std::to_string(t.n) + "\n";
  }
  return out;
}

TrajectoryRecord run_task(const RunConfig& config, const TaskInstance& task,
                          std::string* snapshot) {
  auto started = std::chrono::steady_clock::now();
  TrajectoryRecord record;
  record.task = task;
  Env env(config.env);
  bool have_session = false;

  try {
    if (!config.client_factory) throw ConfigError("no model client configured");
    std::unique_ptr<LLMClient> client = config.client_factory(task);
    Agent agent(*client, config.assets, config.prompt, config.halt, config.sampling);

    Observation observation = env.reset(task);
    have_session = true;
    std::vector<HistoryEntry> history;
    std::optional<std::string> previous;
    while (true) {
      if (auto reason = should_halt(history, config.halt)) {
        record.halt_reason = *reason;
        break;
      }
      Decision decision = agent.decide(task.intent, observation, previous);
      StepResult result = decision.action
                              ? env.step(*decision.action, decision.raw_action)
                              : env.step_invalid(decision.raw_action, *decision.error);
      bool invalid = !decision.action || result.observation.error.has_value();
      history.push_back({observation.text, decision.raw_action, invalid});
      previous = decision.raw_action;
      observation = result.observation;
      if (result.terminated) {
        record.halt_reason = "stop";
        break;
      }
    }
    record.reward = evaluate(task, env.trace(), env.session(), config.judge);
  } catch (const std::exception& e) {
    record.halt_reason = "error";
    record.error = e.what();
    record.reward = RewardReport{};
  }

  const Trace& trace = env.trace();
  for (const auto& s : trace.steps) {
    record.steps.push_back({s.observation.text, s.observation.url, s.raw_action,
                            s.parsed ? std::optional<std::string>(serialize(*s.parsed))
                                     : std::nullopt,
                            s.error});
  }
  record.stop_answer = trace.stop_answer;
  record.final_url = trace.final_url;
  if (snapshot && have_session) {
    try {
      *snapshot = env.session().snapshot();
    } catch (const Error&) {
      snapshot->clear();
    }
  }
  record.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

RunResult run(const RunConfig& config) {
  if (config.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (!config.out_dir.empty()) fs::create_directories(trajectory_dir(config.out_dir));

  std::vector<std::size_t> order(config.tasks.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.seed) {
    std::mt19937_64 rng(*config.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  RunResult result;
  result.records.resize(config.tasks.size());
  parallel_for(order, config.parallelism, [&](std::size_t i) {
    std::string snapshot;
    result.records[i] = run_task(config, config.tasks[i], &snapshot);
    if (!config.out_dir.empty()) {
      persist(config.out_dir, result.records[i],
              snapshot.empty() ? std::nullopt : std::optional<std::string>(snapshot));
    }
  });

  result.report = aggregate(result.records);
  if (!config.out_dir.empty()) write_report(config.out_dir, result.report);
  return result;
}

std::vector<TrajectoryRecord> load_trajectories(const std::string& dir) {
  fs::path tdir = trajectory_dir(dir);
  if (!fs::is_directory(tdir)) throw ConfigError("no trajectories under '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(tdir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TrajectoryRecord> records;
  for (const auto& file : files) {
    for (const auto& line : text::split(text::read_file(file.string()), '\n')) {
      if (text::trim(line).empty()) continue;
      try {
        records.push_back(trajectory_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw SchemaError(file.string() + ": " + e.what());
      }
    }
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.task.task_id < b.task.task_id;
  });
  return records;
}

RunResult score_trajectories(const std::string& dir, const BackendConfig& backend,
                             const JudgeSetup& judge) {
  RunResult result;
  result.records = load_trajectories(dir);
  for (auto& record : result.records) {
    if (record.halt_reason == "error") continue;
    fs::path state = trajectory_dir(dir) / (record.task.task_id + ".state.json");
    if (!fs::is_regular_file(state)) {
      throw MissingSnapshot("no final state for task '" + record.task.task_id + "' (" +
                            state.string() + ")");
    }
    auto session = open_session(backend, record.task.sites, record.task.start_url);
    session->restore(text::read_file(state.string()));
    Trace trace;
    trace.stop_answer = record.stop_answer;
    trace.final_url = record.final_url;
    record.reward = evaluate(record.task, trace, *session, judge);
  }
  result.report = aggregate(result.records);
  return result;
}

std::vector<TaskInstance> select_tasks(const std::vector<TaskInstance>& tasks,
                                       const std::vector<std::string>& patterns) {
  if (patterns.empty()) return tasks;
  std::vector<TaskInstance> out;
  for (const auto& task : tasks) {
    bool hit = std::any_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
      return fnmatch(p.c_str(), task.task_id.c_str(), 0) == 0 ||
             fnmatch(p.c_str(), task.template_id.c_str(), 0) == 0;
    });
    if (hit) out.push_back(task);
  }
  return out;
}

}  // namespace arenakit
