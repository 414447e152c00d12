#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "arenakit/action.hpp"
#include "arenakit/dom.hpp"

namespace arenakit {

enum class Capability { kElementById, kElementByCoords, kProbes, kScripts };

std::string_view to_string(Capability capability);

// What the focused tab currently shows.
struct PageView {
  std::string html;
  std::string url;
  std::string title;
  std::optional<NodePath> focused;
};

struct TabView {
  std::string url;
  std::string title;
};

// One live browsing session: an ordered set of tabs over one or more sites.
// Sessions are single-threaded; distinct sessions are independent.
class BackendSession {
 public:
  virtual ~BackendSession() = default;

  virtual std::set<Capability> capabilities() const = 0;

  // Throws SessionClosed once close() ran.
  virtual PageView current_page() const = 0;
  virtual std::vector<TabView> tabs() const = 0;
  virtual std::size_t focused_tab() const = 0;

  // Applies one action. Element-directed actions carry the DOM path of their
  // target in the page returned by the latest current_page(). Throws
  // UnsupportedAction, StaleTarget or NavigationError; a throwing call leaves
  // the session unchanged.
  virtual void perform(const Action& action, const std::optional<NodePath>& target) = 0;

  // Throws UnknownProbe, or UnsupportedAction without the probes capability.
  virtual std::string probe(std::string_view name) const = 0;

  // Canonical serialization of the site data alone (what state-changing
  // tasks modify).
  virtual std::string state_serialization() const = 0;

  // Full session image (site data, tabs, histories, form values) and its
  // inverse. restore() throws UnsupportedAction where sessions cannot be
  // rebuilt.
  virtual std::string snapshot() const = 0;
  virtual void restore(std::string_view image) = 0;

  // Non-fatal notes such as ignored key presses.
  virtual std::vector<std::string> warnings() const { return {}; }

  virtual void close() = 0;
  virtual bool closed() const = 0;
};

class SiteCatalog;

struct BackendConfig {
  enum class Kind { kSimsite, kWebdriver };
  Kind kind = Kind::kSimsite;
  std::shared_ptr<const SiteCatalog> sites;  // simsite
  std::string webdriver_url;                 // webdriver, e.g. http://127.0.0.1:4444
};

// Opens a fresh session with one tab at start_url (the first site's start
// URL when empty). `sites` lists the site ids the session serves; the first
// one provides the homepage for new tabs. Throws ConfigError for unknown
// sites and ConnectionError for unreachable webdriver endpoints.
std::unique_ptr<BackendSession> open_session(const BackendConfig& config,
                                             const std::vector<std::string>& sites,
                                             const std::string& start_url = {});

}  // namespace arenakit
