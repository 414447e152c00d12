#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arenakit/backend.hpp"
#include "arenakit/template.hpp"

namespace arenakit {

// Mutable data of one simulated site: named scalars and named collections
// of records.
struct SiteState {
  nlohmann::json scalars = nlohmann::json::object();
  nlohmann::json collections = nlohmann::json::object();

  nlohmann::json to_json() const;
  static SiteState from_json(const nlohmann::json& j);

  bool operator==(const SiteState& other) const {
    return scalars == other.scalars && collections == other.collections;
  }
};

struct Effect {
  enum class Kind { kNavigate, kSet, kAppend };
  Kind kind = Kind::kNavigate;
  std::string target;     // scalar name (set) or collection name (append)
  Template value;         // navigate: url template; set: value template
  nlohmann::json record;  // append: object whose string fields are templates
};

struct ElementBehavior {
  std::string trigger;  // click, hover or submit
  std::vector<Effect> effects;
};

struct PageTemplate {
  std::string pattern;  // path with {param} segments, e.g. /product/{id}
  Template title;
  Template body;
  std::map<std::string, ElementBehavior> behaviors;  // keyed by data-anchor
};

struct SimSiteDefinition {
  std::string site_id;
  std::string start_url;
  std::string origin;  // scheme://host of start_url
  std::string auth_user;
  SiteState initial_state;
  std::vector<PageTemplate> pages;
  std::map<std::string, Template> probes;
};

// Parses one site document; throws ConfigError with the field at fault.
// `where` names the document in error messages.
SimSiteDefinition parse_site(const nlohmann::json& doc, const std::string& where = {});
SimSiteDefinition load_site(const std::string& path);

class SiteCatalog {
 public:
  void add(SimSiteDefinition site);
  // Loads every *.site.json in a directory.
  static SiteCatalog load_dir(const std::string& dir);

  // Throws ConfigError for unknown ids.
  const SimSiteDefinition& get(std::string_view site_id) const;
  std::shared_ptr<const SimSiteDefinition> share(std::string_view site_id) const;
  bool contains(std::string_view site_id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<const SimSiteDefinition>, std::less<>> sites_;
};

// Splits scheme://host[/path][?query][#fragment] after resolving it against
// `base` (an absolute URL) when relative.
struct ParsedUrl {
  std::string origin;
  std::string path;   // always starts with '/'
  std::string query;  // without '?'
  std::string str() const;
};

ParsedUrl parse_url(std::string_view url, std::string_view base = {});

// Query string to an object of decoded strings; repeated keys keep the last.
nlohmann::json parse_query(std::string_view query);

class SimSiteSession final : public BackendSession {
 public:
  SimSiteSession(std::vector<std::shared_ptr<const SimSiteDefinition>> sites,
                 const std::string& start_url);

  std::set<Capability> capabilities() const override;
  PageView current_page() const override;
  std::vector<TabView> tabs() const override;
  std::size_t focused_tab() const override;
  void perform(const Action& action, const std::optional<NodePath>& target) override;
  std::string probe(std::string_view name) const override;
  std::string state_serialization() const override;
  std::string snapshot() const override;
  void restore(std::string_view image) override;
  std::vector<std::string> warnings() const override { return warnings_; }
  void close() override { closed_ = true; }
  bool closed() const override { return closed_; }

  const SiteState& site_state(std::string_view site_id) const;

 private:
  struct Tab {
    std::vector<std::string> history;
    std::size_t cursor = 0;
    nlohmann::json form = nlohmann::json::object();
    std::optional<NodePath> focused;
  };

  struct Route {
    std::size_t site = 0;
    const PageTemplate* page = nullptr;
    ParsedUrl url;
    nlohmann::json params;
  };

  struct Model {
    std::vector<SiteState> states;
    std::vector<Tab> tabs;
    std::size_t focused = 0;
  };

  void check_open() const;
  std::optional<Route> route(const std::string& url) const;
  Route route_or_throw(const std::string& url) const;
  nlohmann::json context(const Model& model, const Route& route, const Tab& tab) const;
  std::pair<std::string, std::string> render(const Model& model, const Tab& tab) const;

  void apply(Model& model, const Action& action, const std::optional<NodePath>& target);
  void trigger(Model& model, const std::string& trigger, const DomSnapshot& page,
               const NodePath& path);
  bool run_behavior(Model& model, const std::string& trigger, const DomSnapshot& page,
                    const NodePath& path);
  void submit_form(Model& model, const DomSnapshot& page, const NodePath& form_path);
  void navigate(Model& model, const std::string& url);
  void run_effects(Model& model, const ElementBehavior& behavior);

  std::vector<std::shared_ptr<const SimSiteDefinition>> sites_;
  Model model_;
  std::vector<std::string> warnings_;
  bool closed_ = false;
};

}  // namespace arenakit
