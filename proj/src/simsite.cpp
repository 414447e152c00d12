#include "arenakit/simsite.hpp"

#include <algorithm>
#include <filesystem>

#include "arenakit/errors.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  for (auto& part : text::split(path, '/')) {
    if (!part.empty()) out.push_back(std::move(part));
  }
  return out;
}

bool is_param(std::string_view segment) {
  return segment.size() > 2 && segment.front() == '{' && segment.back() == '}';
}

// Number of literal segments matched, or nullopt when the pattern rejects
// the path.
std::optional<int> match_pattern(std::string_view pattern, std::string_view path,
                                 json* params) {
  auto want = path_segments(pattern);
  auto have = path_segments(path);
  if (want.size() != have.size()) return std::nullopt;
  int literals = 0;
  json captured = json::object();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (is_param(want[i])) {
      captured[want[i].substr(1, want[i].size() - 2)] = url_decode(have[i]);
    } else if (want[i] == have[i]) {
      ++literals;
    } else {
      return std::nullopt;
    }
  }
  if (params) *params = std::move(captured);
  return literals;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ConfigError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

// Bodies may be written as a single string or a list of lines.
std::string template_source(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array()) {
    std::string out;
    for (const auto& line : value) {
      if (!line.is_string()) throw ConfigError(where + ": body lines must be strings");
      if (!out.empty()) out.push_back('\n');
      out += line.get<std::string>();
    }
    return out;
  }
  throw ConfigError(where + ": expected a string or a list of strings");
}

Template compile_field(std::string_view source, const std::string& where) {
  try {
    return Template::compile(source);
  } catch (const TemplateError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Effect parse_effect(const json& doc, const SiteState& state, const std::string& where) {
  Effect effect;
  if (!doc.is_object()) throw ConfigError(where + ": effect must be an object");
  if (doc.contains("navigate")) {
    effect.kind = Effect::Kind::kNavigate;
    effect.value = compile_field(require_string(doc, "navigate", where), where);
  } else if (doc.contains("set")) {
    effect.kind = Effect::Kind::kSet;
    effect.target = require_string(doc, "set", where);
    if (!state.scalars.contains(effect.target)) {
      throw ConfigError(where + ": set targets undeclared scalar '" + effect.target + "'");
    }
    effect.value = compile_field(require_string(doc, "value", where), where);
  } else if (doc.contains("append")) {
    effect.kind = Effect::Kind::kAppend;
    effect.target = require_string(doc, "append", where);
    if (!state.collections.contains(effect.target)) {
      throw ConfigError(where + ": append targets undeclared collection '" + effect.target +
                        "'");
    }
    auto record = doc.find("record");
    if (record == doc.end() || !record->is_object()) {
      throw ConfigError(where + ": append needs an object 'record'");
    }
    for (const auto& [key, value] : record->items()) {
      if (value.is_string()) compile_field(value.get<std::string>(), where + ".record." + key);
    }
    effect.record = *record;
  } else {
    throw ConfigError(where + ": effect must be one of navigate, set, append");
  }
  return effect;
}

std::string text_of_field(const DomNode& node) {
  if (node.tag == "textarea") return node.text;
  if (const auto* value = node.attr("value")) return *value;
  return {};
}

bool is_text_field(const DomNode& node) {
  if (node.tag == "textarea") return true;
  if (node.tag != "input") return false;
  const auto* type = node.attr("type");
  std::string t = type ? text::to_lower(*type) : "text";
  return t == "text" || t == "search" || t == "password" || t == "email" ||
         t == "number" || t == "tel" || t == "url" || t.empty();
}

bool is_submit_control(const DomNode& node) {
  const auto* type = node.attr("type");
  std::string t = type ? text::to_lower(*type) : "";
  if (node.tag == "button") return t.empty() || t == "submit";
  return node.tag == "input" && t == "submit";
}

using Chain = std::vector<std::pair<const DomNode*, NodePath>>;

// Root-to-node chain of the element at `path`.
Chain chain_to(const DomSnapshot& page, const NodePath& path) {
  Chain out;
  const DomNode* cur = &page.root;
  NodePath prefix;
  out.emplace_back(cur, prefix);
  for (auto index : path) {
    if (index >= cur->children.size()) {
      throw StaleTarget("element " + to_string(path) + " is no longer on the page");
    }
    cur = &cur->children[index];
    prefix.push_back(index);
    out.emplace_back(cur, prefix);
  }
  return out;
}

std::string html_document(const std::string& title, const std::string& body) {
  return "<!DOCTYPE html>\n<html><head><title>" + html_escape(title) +
         "</title></head>\n<body>\n" + body + "\n</body></html>\n";
}

}  // namespace

std::string_view to_string(Capability capability) {
  switch (capability) {
    case Capability::kElementById: return "element_by_id";
    case Capability::kElementByCoords: return "element_by_coords";
    case Capability::kProbes: return "probes";
    case Capability::kScripts: return "scripts";
  }
  return "unknown";
}

json SiteState::to_json() const {
  return json{{"scalars", scalars}, {"collections", collections}};
}

SiteState SiteState::from_json(const json& j) {
  SiteState state;
  if (!j.is_object()) throw ConfigError("site state must be an object");
  if (j.contains("scalars")) state.scalars = j.at("scalars");
  if (j.contains("collections")) state.collections = j.at("collections");
  if (!state.scalars.is_object() || !state.collections.is_object()) {
    throw ConfigError("site state scalars and collections must be objects");
  }
  for (const auto& [name, records] : state.collections.items()) {
    if (!records.is_array()) throw ConfigError("collection '" + name + "' must be a list");
  }
  return state;
}

std::string ParsedUrl::str() const {
  return origin + path + (query.empty() ? "" : "?" + query);
}

ParsedUrl parse_url(std::string_view raw, std::string_view base) {
  std::string url(text::trim(raw));
  if (auto hash = url.find('#'); hash != std::string::npos) url.resize(hash);

  bool absolute = url.find("://") != std::string::npos;
  if (!absolute && !url.empty() && url.front() != '/' && url.front() != '?') {
    // "shop.sim/cart" style: a host without a scheme.
    auto first = url.substr(0, url.find_first_of("/?"));
    if (first.find('.') != std::string::npos && first.find(' ') == std::string::npos) {
      url = "http://" + url;
      absolute = true;
    }
  }

  std::string full;
  if (absolute) {
    full = url;
  } else {
    if (base.empty()) throw NavigationError("relative url '" + url + "' without a base");
    ParsedUrl b = parse_url(base);
    if (url.empty()) return b;
    if (url.front() == '/') {
      full = b.origin + url;
    } else if (url.front() == '?') {
      full = b.origin + b.path + url;
    } else {
      full = b.origin + b.path.substr(0, b.path.rfind('/') + 1) + url;
    }
  }

  ParsedUrl out;
  auto scheme_end = full.find("://");
  auto path_start = full.find_first_of("/?", scheme_end + 3);
  out.origin = text::to_lower(full.substr(0, path_start));
  if (out.origin.size() <= scheme_end + 3) {
    throw NavigationError("url '" + full + "' has no host");
  }
  std::string rest = path_start == std::string::npos ? "" : full.substr(path_start);
  auto q = rest.find('?');
  out.path = rest.substr(0, q);
  if (q != std::string::npos) out.query = rest.substr(q + 1);
  if (out.path.empty() || out.path.front() != '/') out.path = "/" + out.path;
  return out;
}

json parse_query(std::string_view query) {
  json out = json::object();
  for (const auto& pair : text::split(query, '&')) {
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    std::string key = url_decode(pair.substr(0, eq));
    out[key] = eq == std::string::npos ? "" : url_decode(pair.substr(eq + 1));
  }
  return out;
}

SimSiteDefinition parse_site(const json& doc, const std::string& where_hint) {
  std::string where = where_hint.empty() ? "site" : where_hint;
  if (!doc.is_object()) throw ConfigError(where + ": site document must be an object");
  SimSiteDefinition site;
  site.site_id = require_string(doc, "site_id", where);
  where += " (" + site.site_id + ")";
  site.start_url = require_string(doc, "start_url", where);
  if (site.start_url.find("://") == std::string::npos) {
    throw ConfigError(where + ": start_url must be absolute");
  }
  site.origin = parse_url(site.start_url).origin;
  site.auth_user = doc.value("auth_user", "");
  if (doc.contains("state")) site.initial_state = SiteState::from_json(doc.at("state"));

  auto pages = doc.find("pages");
  if (pages == doc.end() || !pages->is_array() || pages->empty()) {
    throw ConfigError(where + ": 'pages' must be a non-empty list");
  }
  for (std::size_t i = 0; i < pages->size(); ++i) {
    const json& p = (*pages)[i];
    std::string pw = where + ".pages[" + std::to_string(i) + "]";
    if (!p.is_object()) throw ConfigError(pw + ": page must be an object");
    PageTemplate page;
    page.pattern = require_string(p, "pattern", pw);
    if (page.pattern.empty() || page.pattern.front() != '/') {
      throw ConfigError(pw + ": pattern must start with '/'");
    }
    page.title = compile_field(require_string(p, "title", pw), pw + ".title");
    if (!p.contains("body")) throw ConfigError(pw + ": missing field 'body'");
    page.body = compile_field(template_source(p.at("body"), pw + ".body"), pw + ".body");
    if (p.contains("behaviors")) {
      for (const auto& [anchor, b] : p.at("behaviors").items()) {
        std::string bw = pw + ".behaviors." + anchor;
        ElementBehavior behavior;
        behavior.trigger = require_string(b, "trigger", bw);
        if (behavior.trigger != "click" && behavior.trigger != "hover" &&
            behavior.trigger != "submit") {
          throw ConfigError(bw + ": trigger must be click, hover or submit");
        }
        if (b.contains("effects")) {
          for (const auto& e : b.at("effects")) {
            behavior.effects.push_back(parse_effect(e, site.initial_state, bw));
          }
        }
        page.behaviors.emplace(anchor, std::move(behavior));
      }
    }
    site.pages.push_back(std::move(page));
  }
  // Literal navigate targets must land on a declared page.
  for (const auto& page : site.pages) {
    for (const auto& [anchor, behavior] : page.behaviors) {
      for (const auto& effect : behavior.effects) {
        if (effect.kind != Effect::Kind::kNavigate) continue;
        std::string probe_url = effect.value.source();
        std::string flattened;
        for (std::size_t pos = 0; pos < probe_url.size();) {
          auto open = probe_url.find("{{", pos);
          if (open == std::string::npos) {
            flattened += probe_url.substr(pos);
            break;
          }
          flattened += probe_url.substr(pos, open - pos) + "x";
          auto close = probe_url.find("}}", open);
          pos = close == std::string::npos ? probe_url.size() : close + 2;
        }
        ParsedUrl target = parse_url(flattened, site.start_url);
        if (target.origin != site.origin) continue;
        bool ok = std::any_of(site.pages.begin(), site.pages.end(), [&](const PageTemplate& p) {
          return match_pattern(p.pattern, target.path, nullptr).has_value();
        });
        if (!ok) {
          throw ConfigError(where + ": behavior '" + anchor + "' navigates to '" +
                            effect.value.source() + "', which matches no page");
        }
      }
    }
  }

  bool start_ok = std::any_of(site.pages.begin(), site.pages.end(), [&](const PageTemplate& p) {
    return match_pattern(p.pattern, parse_url(site.start_url).path, nullptr).has_value();
  });
  if (!start_ok) throw ConfigError(where + ": start_url matches no page");

  if (doc.contains("probes")) {
    for (const auto& [name, source] : doc.at("probes").items()) {
      if (!source.is_string()) {
        throw ConfigError(where + ": probe '" + name + "' must be a string");
      }
      site.probes.emplace(name,
                          compile_field(source.get<std::string>(), where + ".probes." + name));
    }
  }
  return site;
}

SimSiteDefinition load_site(const std::string& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_site(doc, path);
}

void SiteCatalog::add(SimSiteDefinition site) {
  std::string id = site.site_id;
  if (sites_.count(id) != 0) throw ConfigError("duplicate site id '" + id + "'");
  sites_.emplace(id, std::make_shared<const SimSiteDefinition>(std::move(site)));
}

SiteCatalog SiteCatalog::load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("site directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 10 &&
        name.compare(name.size() - 10, 10, ".site.json") == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  SiteCatalog catalog;
  for (const auto& file : files) catalog.add(load_site(file.string()));
  return catalog;
}

const SimSiteDefinition& SiteCatalog::get(std::string_view site_id) const {
  return *share(site_id);
}

std::shared_ptr<const SimSiteDefinition> SiteCatalog::share(std::string_view site_id) const {
  auto it = sites_.find(site_id);
  if (it == sites_.end()) throw ConfigError("unknown site '" + std::string(site_id) + "'");
  return it->second;
}

bool SiteCatalog::contains(std::string_view site_id) const {
  return sites_.find(site_id) != sites_.end();
}

std::vector<std::string> SiteCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, site] : sites_) out.push_back(id);
  return out;
}

SimSiteSession::SimSiteSession(std::vector<std::shared_ptr<const SimSiteDefinition>> sites,
                               const std::string& start_url)
    : sites_(std::move(sites)) {
  if (sites_.empty()) throw ConfigError("a simsite session needs at least one site");
  for (const auto& site : sites_) model_.states.push_back(site->initial_state);
  std::string url = start_url.empty() ? sites_.front()->start_url : start_url;
  std::optional<Route> r;
  try {
    r = route(url);
  } catch (const NavigationError&) {
  }
  if (!r) throw ConfigError("start url '" + url + "' matches no page of the session's sites");
  Tab tab;
  tab.history.push_back(r->url.str());
  model_.tabs.push_back(std::move(tab));
}

void SimSiteSession::check_open() const {
  if (closed_) throw SessionClosed("session is closed");
}

std::set<Capability> SimSiteSession::capabilities() const {
  return {Capability::kElementById, Capability::kProbes};
}

std::optional<SimSiteSession::Route> SimSiteSession::route(const std::string& url) const {
  ParsedUrl parsed = parse_url(url);
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    if (sites_[s]->origin != parsed.origin) continue;
    const PageTemplate* best = nullptr;
    int best_score = -1;
    json best_params;
    for (const auto& page : sites_[s]->pages) {
      json params;
      auto score = match_pattern(page.pattern, parsed.path, &params);
      if (score && *score > best_score) {
        best = &page;
        best_score = *score;
        best_params = std::move(params);
      }
    }
    if (best) return Route{s, best, parsed, std::move(best_params)};
  }
  return std::nullopt;
}

SimSiteSession::Route SimSiteSession::route_or_throw(const std::string& url) const {
  auto r = route(url);
  if (!r) throw NavigationError("page not found: " + url);
  return *r;
}

json SimSiteSession::context(const Model& model, const Route& r, const Tab& tab) const {
  const SiteState& state = model.states[r.site];
  json ctx = state.collections;
  ctx["state"] = state.scalars;
  ctx["param"] = r.params;
  ctx["query"] = parse_query(r.url.query);
  ctx["form"] = tab.form;
  ctx["auth_user"] = sites_[r.site]->auth_user;
  ctx["url"] = r.url.str();
  ctx["path"] = r.url.path;
  return ctx;
}

std::pair<std::string, std::string> SimSiteSession::render(const Model& model,
                                                           const Tab& tab) const {
  Route r = route_or_throw(tab.history[tab.cursor]);
  json ctx = context(model, r, tab);
  std::string title = r.page->title.render(ctx, Escape::kRaw);
  return {title, html_document(title, r.page->body.render(ctx, Escape::kHtml))};
}

PageView SimSiteSession::current_page() const {
  check_open();
  const Tab& tab = model_.tabs[model_.focused];
  auto [title, html] = render(model_, tab);
  return PageView{std::move(html), tab.history[tab.cursor], std::move(title), tab.focused};
}

std::vector<TabView> SimSiteSession::tabs() const {
  check_open();
  std::vector<TabView> out;
  for (const auto& tab : model_.tabs) {
    Route r = route_or_throw(tab.history[tab.cursor]);
    out.push_back({tab.history[tab.cursor],
                   r.page->title.render(context(model_, r, tab), Escape::kRaw)});
  }
  return out;
}

std::size_t SimSiteSession::focused_tab() const {
  check_open();
  return model_.focused;
}

void SimSiteSession::perform(const Action& action, const std::optional<NodePath>& target) {
  check_open();
  Model working = model_;
  apply(working, action, target);
  model_ = std::move(working);
}

void SimSiteSession::navigate(Model& model, const std::string& url) {
  Tab& tab = model.tabs[model.focused];
  Route r = route_or_throw(parse_url(url, tab.history[tab.cursor]).str());
  tab.history.resize(tab.cursor + 1);
  tab.history.push_back(r.url.str());
  tab.cursor = tab.history.size() - 1;
  tab.form = json::object();
  tab.focused.reset();
}

void SimSiteSession::run_effects(Model& model, const ElementBehavior& behavior) {
  for (const auto& effect : behavior.effects) {
    Tab& tab = model.tabs[model.focused];
    Route r = route_or_throw(tab.history[tab.cursor]);
    json ctx = context(model, r, tab);
    SiteState& state = model.states[r.site];
    switch (effect.kind) {
      case Effect::Kind::kNavigate:
        navigate(model, effect.value.render(ctx, Escape::kUrl));
        break;
      case Effect::Kind::kSet:
        state.scalars[effect.target] = effect.value.render(ctx, Escape::kRaw);
        break;
      case Effect::Kind::kAppend: {
        json record = json::object();
        for (const auto& [key, value] : effect.record.items()) {
          if (value.is_string()) {
            record[key] = Template::compile(value.get<std::string>()).render(ctx, Escape::kRaw);
          } else {
            record[key] = value;
          }
        }
        state.collections[effect.target].push_back(std::move(record));
        break;
      }
    }
  }
}

bool SimSiteSession::run_behavior(Model& model, const std::string& trigger,
                                  const DomSnapshot& page, const NodePath& path) {
  const Tab& tab = model.tabs[model.focused];
  Route r = route_or_throw(tab.history[tab.cursor]);
  Chain chain = chain_to(page, path);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto* anchor = it->first->attr("data-anchor");
    if (!anchor) continue;
    auto b = r.page->behaviors.find(*anchor);
    if (b != r.page->behaviors.end() && b->second.trigger == trigger) {
      run_effects(model, b->second);
      return true;
    }
  }
  return false;
}

void SimSiteSession::submit_form(Model& model, const DomSnapshot& page,
                                 const NodePath& form_path) {
  Tab& tab = model.tabs[model.focused];
  const DomNode* form = find_node(page, form_path);
  if (!form) throw StaleTarget("form is no longer on the page");

  // Typed values override the fields' initial values.
  json values = json::object();
  std::vector<std::string> order;
  walk_preorder(*form, [&](const DomNode& node) {
    const auto* name = node.attr("name");
    if (!name || name->empty()) return true;
    bool field = is_text_field(node);
    if (node.tag == "input" && !field) {
      const auto* type = node.attr("type");
      std::string t = type ? text::to_lower(*type) : "";
      field = t == "hidden" || ((t == "checkbox" || t == "radio") && node.attr("checked"));
    }
    if (node.tag == "select") {
      field = true;
      std::string chosen;
      bool have = false;
      for (const auto& option : node.children) {
        if (option.tag != "option") continue;
        const auto* v = option.attr("value");
        if (!have || option.attr("selected")) {
          chosen = v ? *v : text::collapse_whitespace(option.text);
        }
        have = true;
        if (option.attr("selected")) break;
      }
      if (!values.contains(*name)) order.push_back(*name);
      values[*name] = chosen;
      return false;
    }
    if (!field) return true;
    if (!values.contains(*name)) order.push_back(*name);
    values[*name] = text_of_field(node);
    return node.tag != "textarea";
  });
  for (const auto& [name, value] : tab.form.items()) {
    if (!values.contains(name)) order.push_back(name);
    values[name] = value;
  }
  tab.form = values;

  if (const auto* anchor = form->attr("data-anchor")) {
    Route r = route_or_throw(tab.history[tab.cursor]);
    auto b = r.page->behaviors.find(*anchor);
    if (b != r.page->behaviors.end() && b->second.trigger == "submit") {
      run_effects(model, b->second);
      return;
    }
  }
  std::string query;
  for (const auto& name : order) {
    if (!query.empty()) query += "&";
    query += url_encode(name) + "=" + url_encode(json_to_text(values[name]));
  }
  const auto* action = form->attr("action");
  std::string target =
      action && !action->empty() ? *action : parse_url(tab.history[tab.cursor]).path;
  auto q = target.find('?');
  if (q != std::string::npos) target.resize(q);
  navigate(model, target + (query.empty() ? "" : "?" + query));
}

void SimSiteSession::trigger(Model& model, const std::string& trigger, const DomSnapshot& page,
                             const NodePath& path) {
  if (run_behavior(model, trigger, page, path)) return;
  Chain chain = chain_to(page, path);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const DomNode& node = *it->first;
    if (node.tag == "a") {
      if (const auto* href = node.attr("href"); href && !href->empty()) {
        navigate(model, *href);
        return;
      }
    }
  }
  bool submitter = false;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const DomNode& node = *it->first;
    if (!submitter && is_submit_control(node)) submitter = true;
    if (submitter && node.tag == "form") {
      submit_form(model, page, it->second);
      return;
    }
  }
}

void SimSiteSession::apply(Model& model, const Action& action,
                           const std::optional<NodePath>& target) {
  Tab& tab = model.tabs[model.focused];
  auto load_page = [&] {
    auto [title, html] = render(model, tab);
    return parse_html(html, tab.history[tab.cursor]);
  };
  auto element_path = [&]() -> NodePath {
    if (!action.element) throw UnsupportedAction("action has no target element");
    if (!action.element->is_id()) {
      throw UnsupportedAction("coordinate targets are not supported by this backend");
    }
    if (!target) throw StaleTarget("no element path supplied for the action");
    return *target;
  };

  switch (action.kind) {
    case ActionKind::kNoop:
    case ActionKind::kScroll:
    case ActionKind::kStop:
      return;
    case ActionKind::kClick: {
      NodePath path = element_path();
      DomSnapshot page = load_page();
      chain_to(page, path);
      tab.focused = path;
      trigger(model, "click", page, path);
      return;
    }
    case ActionKind::kHover: {
      NodePath path = element_path();
      DomSnapshot page = load_page();
      chain_to(page, path);
      run_behavior(model, "hover", page, path);
      return;
    }
    case ActionKind::kType: {
      NodePath path = element_path();
      DomSnapshot page = load_page();
      Chain chain = chain_to(page, path);
      const DomNode& node = *chain.back().first;
      if (!is_text_field(node)) throw UnsupportedAction("element does not accept text input");
      const auto* name = node.attr("name");
      tab.form[name ? *name : to_string(path)] = action.text.value_or("");
      tab.focused = path;
      if (action.press_enter.value_or(true)) {
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
          if (it->first->tag == "form") {
            submit_form(model, page, it->second);
            break;
          }
        }
      }
      return;
    }
    case ActionKind::kPress: {
      std::string combo = text::to_lower(text::trim(action.text.value_or("")));
      if (combo != "enter") {
        warnings_.push_back("press [" + action.text.value_or("") + "] has no effect");
        return;
      }
      if (!tab.focused) return;
      DomSnapshot page = load_page();
      Chain chain = chain_to(page, *tab.focused);
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        if (it->first->tag == "form") {
          submit_form(model, page, it->second);
          return;
        }
      }
      return;
    }
    case ActionKind::kGoto:
      navigate(model, action.text.value_or(""));
      return;
    case ActionKind::kGoBack:
      if (tab.cursor == 0) throw NavigationError("no previous page in this tab's history");
      --tab.cursor;
      tab.form = json::object();
      tab.focused.reset();
      return;
    case ActionKind::kGoForward:
      if (tab.cursor + 1 >= tab.history.size()) {
        throw NavigationError("no next page in this tab's history");
      }
      ++tab.cursor;
      tab.form = json::object();
      tab.focused.reset();
      return;
    case ActionKind::kNewTab: {
      Tab fresh;
      fresh.history.push_back(parse_url(sites_.front()->start_url).str());
      model.tabs.push_back(std::move(fresh));
      model.focused = model.tabs.size() - 1;
      return;
    }
    case ActionKind::kTabFocus: {
      auto index = action.index.value_or(-1);
      if (index < 0 || static_cast<std::size_t>(index) >= model.tabs.size()) {
        throw NavigationError("no tab with index " + std::to_string(index));
      }
      model.focused = static_cast<std::size_t>(index);
      return;
    }
    case ActionKind::kTabClose:
      if (model.tabs.size() <= 1) throw NavigationError("cannot close the last tab");
      model.tabs.erase(model.tabs.begin() + static_cast<std::ptrdiff_t>(model.focused));
      if (model.focused > 0) --model.focused;
      return;
  }
}

std::string SimSiteSession::probe(std::string_view name) const {
  check_open();
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    auto it = sites_[s]->probes.find(std::string(name));
    if (it == sites_[s]->probes.end()) continue;
    const SiteState& state = model_.states[s];
    json ctx = state.collections;
    ctx["state"] = state.scalars;
    ctx["auth_user"] = sites_[s]->auth_user;
    return it->second.render(ctx, Escape::kRaw);
  }
  throw UnknownProbe("unknown probe '" + std::string(name) + "'");
}

const SiteState& SimSiteSession::site_state(std::string_view site_id) const {
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    if (sites_[s]->site_id == site_id) return model_.states[s];
  }
  throw ConfigError("site '" + std::string(site_id) + "' is not part of this session");
}

std::string SimSiteSession::state_serialization() const {
  json out = json::object();
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    out[sites_[s]->site_id] = model_.states[s].to_json();
  }
  return out.dump();
}

std::string SimSiteSession::snapshot() const {
  json tabs = json::array();
  for (const auto& tab : model_.tabs) {
    tabs.push_back({{"history", tab.history},
                    {"cursor", tab.cursor},
                    {"form", tab.form},
                    {"focused", tab.focused ? json(*tab.focused) : json()}});
  }
  return json{{"sites", json::parse(state_serialization())},
              {"tabs", std::move(tabs)},
              {"focused", model_.focused}}
      .dump();
}

void SimSiteSession::restore(std::string_view image) {
  check_open();
  Model model;
  try {
    json doc = json::parse(image);
    for (const auto& site : sites_) {
      model.states.push_back(SiteState::from_json(doc.at("sites").at(site->site_id)));
    }
    for (const auto& t : doc.at("tabs")) {
      Tab tab;
      tab.history = t.at("history").get<std::vector<std::string>>();
      tab.cursor = t.at("cursor").get<std::size_t>();
      tab.form = t.at("form");
      if (!t.at("focused").is_null()) tab.focused = t.at("focused").get<NodePath>();
      if (tab.history.empty() || tab.cursor >= tab.history.size()) {
        throw ConfigError("tab history cursor out of range");
      }
      for (const auto& url : tab.history) route_or_throw(url);
      model.tabs.push_back(std::move(tab));
    }
    model.focused = doc.at("focused").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed session snapshot: ") + e.what());
  }
  if (model.tabs.empty() || model.focused >= model.tabs.size()) {
    throw ConfigError("malformed session snapshot: no focused tab");
  }
  model_ = std::move(model);
}

}  // namespace arenakit
