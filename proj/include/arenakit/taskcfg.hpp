#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arenakit/task.hpp"

namespace arenakit {

class SiteCatalog;

inline constexpr std::string_view kTaskSchema = "arena-kit/1";

struct Instantiation {
  std::map<std::string, std::string> bindings;
  std::string start_url;  // empty: the primary site's start URL
  EvalSpec eval;
  std::optional<std::vector<std::string>> gold_actions;
};

struct IntentTemplate {
  std::string template_id;
  std::string intent_template;
  std::vector<std::string> sites;
  Category category = Category::kInfoSeeking;
  std::vector<Instantiation> instantiations;
};

// Distinct {{var}} names in order of first appearance.
std::vector<std::string> placeholders(std::string_view intent_template);

// Replaces every {{var}}. Throws UnboundVariable for placeholders without a
// binding; bindings the template never uses are reported in `warnings`.
std::string substitute(std::string_view intent_template,
                       const std::map<std::string, std::string>& bindings,
                       std::vector<std::string>* warnings = nullptr);

// Task `index` of the template, with id "<template_id>.<index>".
TaskInstance instantiate(const IntentTemplate& tmpl, std::size_t index,
                         std::vector<std::string>* warnings = nullptr);

// Parses one task document. Throws SchemaError naming the file and field.
IntentTemplate parse_intent_template(const nlohmann::json& doc, const std::string& where);

// Loads a *.task.json file or every such file in a directory, instantiates
// all templates and returns the tasks sorted by task_id. With a catalog,
// sites, start URLs, probe names, selectors and gold actions are checked
// too. Throws SchemaError or DuplicateId.
std::vector<TaskInstance> load_tasks(const std::string& path,
                                     const SiteCatalog* sites = nullptr,
                                     std::vector<std::string>* warnings = nullptr);

}  // namespace arenakit
