#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace arenakit {

struct Locator {
  enum class Kind { kFinalUrl, kProbe, kElementText };
  Kind kind = Kind::kFinalUrl;
  std::string arg;  // probe name or selector; empty for final_url

  bool operator==(const Locator&) const = default;
};

struct Check {
  enum class Kind { kAnswerExact, kAnswerMustInclude, kAnswerFuzzy, kProgram };
  enum class Match { kExact, kMustInclude };
  Kind kind = Kind::kAnswerExact;
  std::vector<std::string> references;
  std::optional<Locator> locator;  // program checks only
  Match match = Match::kMustInclude;  // how program checks compare

  bool operator==(const Check&) const = default;
};

struct EvalSpec {
  std::vector<Check> checks;
  bool unachievable = false;

  bool operator==(const EvalSpec&) const = default;
};

enum class Category { kInfoSeeking, kSiteNavigation, kContentConfig };

struct TaskInstance {
  std::string task_id;
  std::string template_id;
  std::string intent;
  std::vector<std::string> sites;  // first entry is the primary site
  std::string start_url;
  Category category = Category::kInfoSeeking;
  EvalSpec eval;
  std::optional<std::vector<std::string>> gold_actions;

  bool operator==(const TaskInstance&) const = default;
};

std::string_view to_string(Locator::Kind kind);
std::string_view to_string(Check::Kind kind);
std::string_view to_string(Check::Match match);
std::string_view to_string(Category category);

// Throw SchemaError on unknown names.
Locator::Kind locator_kind_from_string(std::string_view name);
Check::Kind check_kind_from_string(std::string_view name);
Check::Match match_from_string(std::string_view name);
Category category_from_string(std::string_view name);

nlohmann::json to_json(const Check& check);
nlohmann::json to_json(const EvalSpec& spec);
nlohmann::json to_json(const TaskInstance& task);

// Inverse of to_json; `where` prefixes SchemaError messages.
Check check_from_json(const nlohmann::json& j, const std::string& where);
EvalSpec eval_spec_from_json(const nlohmann::json& j, const std::string& where);
TaskInstance task_from_json(const nlohmann::json& j, const std::string& where);

// Throws SchemaError when the spec breaks the Check / EvalSpec invariants.
void validate(const EvalSpec& spec, const std::string& where);

}  // namespace arenakit
