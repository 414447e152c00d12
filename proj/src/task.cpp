#include "arenakit/task.hpp"

#include <array>
#include <utility>

#include "arenakit/errors.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E from_name(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name,
            std::string_view what) {
  for (const auto& [value, label] : table) {
    if (label == name) return value;
  }
  std::string allowed;
  for (const auto& [value, label] : table) {
    allowed += (allowed.empty() ? "" : ", ") + std::string(label);
  }
  throw SchemaError("unknown " + std::string(what) + " '" + std::string(name) +
                    "' (expected one of " + allowed + ")");
}

template <typename E, std::size_t N>
std::string_view to_name(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, label] : table) {
    if (v == value) return label;
  }
  return "?";
}

constexpr std::array<std::pair<Locator::Kind, std::string_view>, 3> kLocatorKinds = {{
    {Locator::Kind::kFinalUrl, "final_url"},
    {Locator::Kind::kProbe, "probe"},
    {Locator::Kind::kElementText, "element_text"},
}};

constexpr std::array<std::pair<Check::Kind, std::string_view>, 4> kCheckKinds = {{
    {Check::Kind::kAnswerExact, "answer_exact"},
    {Check::Kind::kAnswerMustInclude, "answer_must_include"},
    {Check::Kind::kAnswerFuzzy, "answer_fuzzy"},
    {Check::Kind::kProgram, "program"},
}};

constexpr std::array<std::pair<Check::Match, std::string_view>, 2> kMatches = {{
    {Check::Match::kExact, "exact"},
    {Check::Match::kMustInclude, "must_include"},
}};

constexpr std::array<std::pair<Category, std::string_view>, 3> kCategories = {{
    {Category::kInfoSeeking, "info_seeking"},
    {Category::kSiteNavigation, "site_navigation"},
    {Category::kContentConfig, "content_config"},
}};

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected a list of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) throw SchemaError(where + ": expected a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_string()) throw SchemaError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(Locator::Kind kind) { return to_name(kLocatorKinds, kind); }
std::string_view to_string(Check::Kind kind) { return to_name(kCheckKinds, kind); }
std::string_view to_string(Check::Match match) { return to_name(kMatches, match); }
std::string_view to_string(Category category) { return to_name(kCategories, category); }

Locator::Kind locator_kind_from_string(std::string_view name) {
  return from_name(kLocatorKinds, name, "locator kind");
}
Check::Kind check_kind_from_string(std::string_view name) {
  return from_name(kCheckKinds, name, "check kind");
}
Check::Match match_from_string(std::string_view name) {
  return from_name(kMatches, name, "match");
}
Category category_from_string(std::string_view name) {
  return from_name(kCategories, name, "category");
}

json to_json(const Check& check) {
  json j{{"kind", to_string(check.kind)}, {"references", check.references}};
  if (check.locator) {
    j["locator"] = {{"kind", to_string(check.locator->kind)}, {"arg", check.locator->arg}};
  }
  if (check.kind == Check::Kind::kProgram) j["match"] = to_string(check.match);
  return j;
}

json to_json(const EvalSpec& spec) {
  json checks = json::array();
  for (const auto& c : spec.checks) checks.push_back(to_json(c));
  return {{"unachievable", spec.unachievable}, {"checks", checks}};
}

json to_json(const TaskInstance& task) {
  json j{{"task_id", task.task_id},
         {"template_id", task.template_id},
         {"intent", task.intent},
         {"sites", task.sites},
         {"start_url", task.start_url},
         {"category", to_string(task.category)},
         {"eval", to_json(task.eval)}};
  if (task.gold_actions) j["gold_actions"] = *task.gold_actions;
  return j;
}

namespace {

// Enum conversion with the offending field in the message.
template <typename F>
auto named_field(F convert, const std::string& value, const std::string& where) {
  try {
    return convert(value);
  } catch (const SchemaError& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

}  // namespace

Check check_from_json(const json& j, const std::string& where) {
  Check check;
  check.kind = named_field(check_kind_from_string, string_field(j, "kind", where), where + ".kind");
  if (j.contains("references")) {
    check.references = string_list(j.at("references"), where + ".references");
  }
  if (j.contains("locator")) {
    const json& l = j.at("locator");
    Locator locator;
    locator.kind = named_field(locator_kind_from_string, string_field(l, "kind", where + ".locator"),
                               where + ".locator.kind");
    if (l.contains("arg")) locator.arg = string_field(l, "arg", where + ".locator");
    check.locator = locator;
  }
  if (j.contains("match")) {
    check.match = named_field(match_from_string, string_field(j, "match", where), where + ".match");
  }
  return check;
}

EvalSpec eval_spec_from_json(const json& j, const std::string& where) {
  EvalSpec spec;
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  spec.unachievable = j.value("unachievable", false);
  if (j.contains("checks")) {
    const json& checks = j.at("checks");
    if (!checks.is_array()) throw SchemaError(where + ".checks: expected a list");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      spec.checks.push_back(
          check_from_json(checks[i], where + ".checks[" + std::to_string(i) + "]"));
    }
  }
  if (spec.unachievable && spec.checks.empty()) {
    spec.checks.push_back(Check{Check::Kind::kAnswerExact, {"N/A"}, std::nullopt,
                                Check::Match::kMustInclude});
  }
  validate(spec, where);
  return spec;
}

TaskInstance task_from_json(const json& j, const std::string& where) {
  TaskInstance task;
  task.task_id = string_field(j, "task_id", where);
  task.template_id = string_field(j, "template_id", where);
  task.intent = string_field(j, "intent", where);
  task.sites = string_list(field(j, "sites", where), where + ".sites");
  task.start_url = string_field(j, "start_url", where);
  task.category =
      named_field(category_from_string, string_field(j, "category", where), where + ".category");
  task.eval = eval_spec_from_json(field(j, "eval", where), where + ".eval");
  if (j.contains("gold_actions")) {
    task.gold_actions = string_list(j.at("gold_actions"), where + ".gold_actions");
  }
  return task;
}

void validate(const EvalSpec& spec, const std::string& where) {
  if (spec.checks.empty()) throw SchemaError(where + ": at least one check is required");
  if (spec.unachievable) {
    const bool ok = spec.checks.size() == 1 &&
                    spec.checks[0].kind == Check::Kind::kAnswerExact &&
                    spec.checks[0].references == std::vector<std::string>{"N/A"};
    if (!ok) {
      throw SchemaError(where + ": unachievable tasks carry exactly one answer_exact \"N/A\" check");
    }
  }
  for (std::size_t i = 0; i < spec.checks.size(); ++i) {
    const Check& c = spec.checks[i];
    std::string cw = where + ".checks[" + std::to_string(i) + "]";
    if (c.references.empty()) throw SchemaError(cw + ": at least one reference is required");
    if (c.kind == Check::Kind::kProgram) {
      if (!c.locator) throw SchemaError(cw + ": program checks need a locator");
      if (c.locator->kind != Locator::Kind::kFinalUrl && c.locator->arg.empty()) {
        throw SchemaError(cw + ": locator '" + std::string(to_string(c.locator->kind)) +
                          "' needs an argument");
      }
    } else if (c.locator) {
      throw SchemaError(cw + ": only program checks take a locator");
    }
  }
}

}  // namespace arenakit
