#include "arenakit/webdriver.hpp"

#include "arenakit/errors.hpp"
#include "arenakit/http.hpp"
#include "arenakit/text.hpp"

namespace arenakit {

using nlohmann::json;

namespace {

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f113d4ee6ee";
constexpr const char* kEnterKey = "\xEE\x80\x87";  // U+E007

[[noreturn]] void raise_wire_error(const std::string& what, const json& value) {
  std::string error = value.value("error", "unknown error");
  std::string message = value.value("message", "");
  std::string detail = what + ": " + error + (message.empty() ? "" : " (" + message + ")");
  if (error == "no such element" || error == "stale element reference" ||
      error == "element not interactable") {
    throw StaleTarget(detail);
  }
  if (error == "no such window" || error == "invalid argument") throw NavigationError(detail);
  if (error == "unknown command" || error == "unsupported operation") {
    throw UnsupportedAction(detail);
  }
  if (error == "invalid session id") throw SessionClosed(detail);
  throw Error(detail);
}

}  // namespace

WebDriverSession::WebDriverSession(std::string endpoint, const std::string& start_url,
                                   std::string homepage)
    : endpoint_(std::move(endpoint)), homepage_(std::move(homepage)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (homepage_.empty()) homepage_ = start_url;
  json created = call("POST", "/session", json{{"capabilities", json::object()}});
  if (!created.is_object() || !created.contains("sessionId")) {
    throw ConnectionError("webdriver endpoint returned no session id");
  }
  session_id_ = created.at("sessionId").get<std::string>();
  // Open a tab whose handle is known and drop the initial one, so every
  // tab can be addressed by handle afterwards.
  json opened = call("POST", session_path("/window/new"), json{{"type", "tab"}});
  std::string handle = opened.at("handle").get<std::string>();
  call("DELETE", session_path("/window"));
  call("POST", session_path("/window"), json{{"handle", handle}});
  handles_.push_back(handle);
  tab_cache_.push_back({});
  call("POST", session_path("/url"), json{{"url", start_url}});
}

WebDriverSession::~WebDriverSession() {
  try {
    close();
  } catch (...) {
  }
}

void WebDriverSession::check_open() const {
  if (closed_) throw SessionClosed("session is closed");
}

std::string WebDriverSession::session_path(const std::string& suffix) const {
  return "/session/" + session_id_ + suffix;
}

json WebDriverSession::call(const std::string& method, const std::string& path,
                            const json& body) const {
  HttpRequest request;
  request.method = method;
  request.url = endpoint_ + path;
  if (!body.is_null()) request.body = body.dump();
  else if (method == "POST") request.body = "{}";
  HttpResponse response = http_send(request);
  json doc;
  try {
    doc = response.body.empty() ? json::object() : json::parse(response.body);
  } catch (const json::exception&) {
    throw ConnectionError(method + " " + path + ": response is not JSON");
  }
  json value = doc.is_object() && doc.contains("value") ? doc.at("value") : json();
  if (response.status >= 400) {
    raise_wire_error(method + " " + path, value.is_object() ? value : json::object());
  }
  return value;
}

std::set<Capability> WebDriverSession::capabilities() const {
  return {Capability::kElementById};
}

PageView WebDriverSession::current_page() const {
  check_open();
  PageView page;
  page.html = call("GET", session_path("/source")).get<std::string>();
  page.url = call("GET", session_path("/url")).get<std::string>();
  page.title = call("GET", session_path("/title")).get<std::string>();
  tab_cache_[focused_] = {page.url, page.title};
  return page;
}

void WebDriverSession::remember_current() const {
  tab_cache_[focused_] = {call("GET", session_path("/url")).get<std::string>(),
                          call("GET", session_path("/title")).get<std::string>()};
}

std::vector<TabView> WebDriverSession::tabs() const {
  check_open();
  remember_current();
  return tab_cache_;
}

std::size_t WebDriverSession::focused_tab() const {
  check_open();
  return focused_;
}

std::string WebDriverSession::find_element(const NodePath& path) const {
  std::string source = call("GET", session_path("/source")).get<std::string>();
  DomSnapshot snapshot = parse_html(source);
  if (find_node(snapshot, path) == nullptr) {
    throw StaleTarget("element " + to_string(path) + " is no longer on the page");
  }
  json found = call("POST", session_path("/element"),
                    json{{"using", "xpath"}, {"value", xpath_for(snapshot, path)}});
  if (!found.is_object() || !found.contains(kElementKey)) {
    throw StaleTarget("webdriver returned no element reference");
  }
  return found.at(kElementKey).get<std::string>();
}

void WebDriverSession::switch_to(std::size_t index) {
  call("POST", session_path("/window"), json{{"handle", handles_.at(index)}});
  focused_ = index;
}

void WebDriverSession::perform(const Action& action, const std::optional<NodePath>& target) {
  check_open();
  auto element = [&]() -> std::string {
    if (!action.element || !action.element->is_id()) {
      throw UnsupportedAction("coordinate targets are not supported by the webdriver backend");
    }
    if (!target) throw StaleTarget("no element path supplied for the action");
    return find_element(*target);
  };

  switch (action.kind) {
    case ActionKind::kNoop:
    case ActionKind::kScroll:
    case ActionKind::kStop:
      return;
    case ActionKind::kClick:
      call("POST", session_path("/element/" + element() + "/click"), json::object());
      return;
    case ActionKind::kType: {
      std::string content = action.text.value_or("");
      if (action.press_enter.value_or(true)) content += kEnterKey;
      call("POST", session_path("/element/" + element() + "/value"), json{{"text", content}});
      return;
    }
    case ActionKind::kHover:
    case ActionKind::kPress:
      throw UnsupportedAction(std::string(to_string(action.kind)) +
                              " is not supported by the webdriver backend");
    case ActionKind::kGoto:
      call("POST", session_path("/url"), json{{"url", action.text.value_or("")}});
      return;
    case ActionKind::kGoBack:
      call("POST", session_path("/back"), json::object());
      return;
    case ActionKind::kGoForward:
      call("POST", session_path("/forward"), json::object());
      return;
    case ActionKind::kNewTab: {
      remember_current();
      json opened = call("POST", session_path("/window/new"), json{{"type", "tab"}});
      handles_.push_back(opened.at("handle").get<std::string>());
      tab_cache_.push_back({});
      switch_to(handles_.size() - 1);
      call("POST", session_path("/url"), json{{"url", homepage_}});
      return;
    }
    case ActionKind::kTabFocus: {
      auto index = action.index.value_or(-1);
      if (index < 0 || static_cast<std::size_t>(index) >= handles_.size()) {
        throw NavigationError("no tab with index " + std::to_string(index));
      }
      remember_current();
      switch_to(static_cast<std::size_t>(index));
      return;
    }
    case ActionKind::kTabClose: {
      if (handles_.size() <= 1) throw NavigationError("cannot close the last tab");
      call("DELETE", session_path("/window"));
      handles_.erase(handles_.begin() + static_cast<std::ptrdiff_t>(focused_));
      tab_cache_.erase(tab_cache_.begin() + static_cast<std::ptrdiff_t>(focused_));
      switch_to(focused_ > 0 ? focused_ - 1 : 0);
      return;
    }
  }
}

std::string WebDriverSession::probe(std::string_view name) const {
  throw UnsupportedAction("probe '" + std::string(name) +
                          "' needs the probes capability, which webdriver lacks");
}

std::string WebDriverSession::state_serialization() const {
  check_open();
  remember_current();
  json tabs = json::array();
  for (const auto& tab : tab_cache_) tabs.push_back(tab.url);
  return json{{"tabs", tabs}, {"focused", focused_}}.dump();
}

std::string WebDriverSession::snapshot() const { return state_serialization(); }

void WebDriverSession::restore(std::string_view) {
  throw UnsupportedAction("webdriver sessions cannot be restored from a snapshot");
}

void WebDriverSession::close() {
  if (closed_) return;
  closed_ = true;
  call("DELETE", session_path(""));
}

}  // namespace arenakit
