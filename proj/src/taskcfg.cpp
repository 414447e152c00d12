#include "arenakit/taskcfg.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "arenakit/action.hpp"
#include "arenakit/agent.hpp"
#include "arenakit/errors.hpp"
#include "arenakit/selector.hpp"
#include "arenakit/simsite.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

std::vector<Placeholder> scan(std::string_view s) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while (true) {
    auto open = s.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = s.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.push_back({open, close + 2, std::string(text::trim(s.substr(open + 2, close - open - 2)))});
    pos = close + 2;
  }
  return out;
}

void check_task(const TaskInstance& task, const SiteCatalog& catalog, const std::string& where) {
  std::vector<const SimSiteDefinition*> sites;
  for (const auto& id : task.sites) {
    if (!catalog.contains(id)) throw SchemaError(where + ".sites: unknown site '" + id + "'");
    sites.push_back(&catalog.get(id));
  }
  std::string origin;
  try {
    origin = parse_url(task.start_url).origin;
  } catch (const Error& e) {
    throw SchemaError(where + ".start_url: " + e.what());
  }
  if (std::none_of(sites.begin(), sites.end(),
                   [&](const SimSiteDefinition* s) { return s->origin == origin; })) {
    throw SchemaError(where + ".start_url: '" + task.start_url +
                      "' is not served by the task's sites");
  }
  for (const auto& check : task.eval.checks) {
    if (!check.locator) continue;
    if (check.locator->kind == Locator::Kind::kProbe) {
      bool known = std::any_of(sites.begin(), sites.end(), [&](const SimSiteDefinition* s) {
        return s->probes.count(check.locator->arg) != 0;
      });
      if (!known) throw SchemaError(where + ".eval: unknown probe '" + check.locator->arg + "'");
    } else if (check.locator->kind == Locator::Kind::kElementText) {
      try {
        Selector::parse(check.locator->arg);
      } catch (const SelectorError& e) {
        throw SchemaError(where + ".eval: bad selector: " + e.what());
      }
    }
  }
  if (task.gold_actions) {
    for (const auto& raw : *task.gold_actions) {
      try {
        parse_action(strip_element_placeholders(raw));
      } catch (const ParseError& e) {
        throw SchemaError(where + ".gold_actions: '" + raw + "': " + e.what());
      }
    }
  }
}

std::vector<std::filesystem::path> task_files(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() > 10 &&
          name.compare(name.size() - 10, 10, ".task.json") == 0) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.emplace_back(path);
  } else {
    throw SchemaError("task path '" + path + "' not found");
  }
  return files;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view intent_template) {
  std::vector<std::string> out;
  for (const auto& p : scan(intent_template)) {
    if (std::find(out.begin(), out.end(), p.name) == out.end()) out.push_back(p.name);
  }
  return out;
}

std::string substitute(std::string_view intent_template,
                       const std::map<std::string, std::string>& bindings,
                       std::vector<std::string>* warnings) {
  auto found = scan(intent_template);
  std::string out;
  std::size_t pos = 0;
  std::set<std::string> used;
  for (const auto& p : found) {
    auto it = bindings.find(p.name);
    if (it == bindings.end()) throw UnboundVariable("unbound variable '" + p.name + "'");
    out.append(intent_template.substr(pos, p.begin - pos));
    out += it->second;
    used.insert(p.name);
    pos = p.end;
  }
  out.append(intent_template.substr(pos));
  if (warnings) {
    for (const auto& [name, value] : bindings) {
      if (!used.count(name)) warnings->push_back("binding '" + name + "' has no placeholder");
    }
  }
  return out;
}

TaskInstance instantiate(const IntentTemplate& tmpl, std::size_t index,
                         std::vector<std::string>* warnings) {
  if (index >= tmpl.instantiations.size()) {
    throw SchemaError(tmpl.template_id + ": no instantiation " + std::to_string(index));
  }
  const Instantiation& inst = tmpl.instantiations[index];
  TaskInstance task;
  task.task_id = tmpl.template_id + "." + std::to_string(index);
  task.template_id = tmpl.template_id;
  std::vector<std::string> notes;
  task.intent = substitute(tmpl.intent_template, inst.bindings, &notes);
  if (warnings) {
    for (auto& note : notes) warnings->push_back(task.task_id + ": " + note);
  }
  task.sites = tmpl.sites;
  task.start_url = inst.start_url;
  task.category = tmpl.category;
  task.eval = inst.eval;
  task.gold_actions = inst.gold_actions;
  return task;
}

IntentTemplate parse_intent_template(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw SchemaError(where + ": expected a JSON object");
  auto str = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError(where + ": missing field '" + key + "'");
    if (!it->is_string()) throw SchemaError(where + "." + key + ": expected a string");
    return it->get<std::string>();
  };
  if (str("schema") != kTaskSchema) {
    throw SchemaError(where + ".schema: expected '" + std::string(kTaskSchema) + "'");
  }
  IntentTemplate tmpl;
  tmpl.template_id = str("template_id");
  if (tmpl.template_id.empty()) throw SchemaError(where + ".template_id: must not be empty");
  tmpl.intent_template = str("intent_template");
  tmpl.category = [&] {
    try {
      return category_from_string(str("category"));
    } catch (const SchemaError& e) {
      throw SchemaError(where + ".category: " + e.what());
    }
  }();
  auto sites = doc.find("sites");
  if (sites == doc.end() || !sites->is_array() || sites->empty()) {
    throw SchemaError(where + ".sites: expected a non-empty list of site ids");
  }
  for (const auto& s : *sites) {
    if (!s.is_string()) throw SchemaError(where + ".sites: expected strings");
    tmpl.sites.push_back(s.get<std::string>());
  }
  auto insts = doc.find("instantiations");
  if (insts == doc.end() || !insts->is_array() || insts->empty()) {
    throw SchemaError(where + ".instantiations: expected a non-empty list");
  }
  for (std::size_t i = 0; i < insts->size(); ++i) {
    const json& ij = (*insts)[i];
    std::string iw = where + ".instantiations[" + std::to_string(i) + "]";
    if (!ij.is_object()) throw SchemaError(iw + ": expected an object");
    Instantiation inst;
    if (ij.contains("bindings")) {
      if (!ij.at("bindings").is_object()) throw SchemaError(iw + ".bindings: expected an object");
      for (const auto& [k, v] : ij.at("bindings").items()) {
        if (!v.is_string()) throw SchemaError(iw + ".bindings." + k + ": expected a string");
        inst.bindings[k] = v.get<std::string>();
      }
    }
    inst.start_url = ij.value("start_url", "");
    if (!ij.contains("eval")) throw SchemaError(iw + ": missing field 'eval'");
    inst.eval = eval_spec_from_json(ij.at("eval"), iw + ".eval");
    if (ij.contains("gold_actions")) {
      const json& g = ij.at("gold_actions");
      if (!g.is_array()) throw SchemaError(iw + ".gold_actions: expected a list");
      std::vector<std::string> actions;
      for (const auto& a : g) {
        if (!a.is_string()) throw SchemaError(iw + ".gold_actions: expected strings");
        actions.push_back(a.get<std::string>());
      }
      inst.gold_actions = std::move(actions);
    }
    tmpl.instantiations.push_back(std::move(inst));
  }
  return tmpl;
}

std::vector<TaskInstance> load_tasks(const std::string& path, const SiteCatalog* sites,
                                     std::vector<std::string>* warnings) {
  std::vector<TaskInstance> tasks;
  std::set<std::string> template_ids;
  std::set<std::string> task_ids;
  for (const auto& file : task_files(path)) {
    std::string where = file.string();
    json doc;
    try {
      doc = json::parse(text::read_file(where));
    } catch (const json::exception& e) {
      throw SchemaError(where + ": invalid JSON: " + e.what());
    } catch (const std::runtime_error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    IntentTemplate tmpl = parse_intent_template(doc, where);
    if (!template_ids.insert(tmpl.template_id).second) {
      throw DuplicateId(where + ": duplicate template_id '" + tmpl.template_id + "'");
    }
    for (std::size_t i = 0; i < tmpl.instantiations.size(); ++i) {
      std::string iw = where + ".instantiations[" + std::to_string(i) + "]";
      TaskInstance task;
      try {
        task = instantiate(tmpl, i, warnings);
      } catch (const UnboundVariable& e) {
        throw UnboundVariable(iw + ": " + e.what());
      }
      if (sites) {
        if (task.start_url.empty() && sites->contains(task.sites.front())) {
          task.start_url = sites->get(task.sites.front()).start_url;
        }
        check_task(task, *sites, iw);
      }
      if (!task_ids.insert(task.task_id).second) {
        throw DuplicateId(iw + ": duplicate task id '" + task.task_id + "'");
      }
      tasks.push_back(std::move(task));
    }
  }
  std::sort(tasks.begin(), tasks.end(),
            [](const TaskInstance& a, const TaskInstance& b) { return a.task_id < b.task_id; });
  return tasks;
}

}  // namespace arenakit
