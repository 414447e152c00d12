#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "arenakit/backend.hpp"
#include "arenakit/errors.hpp"
#include "arenakit/webdriver.hpp"

namespace arenakit {
namespace {

using nlohmann::json;

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f113d4ee6ee";

// In-process stand-in for a WebDriver endpoint with two static pages.
class FakeDriver {
 public:
  FakeDriver() {
    pages_["http://fake.sim/"] = {
        "Home", "<html><head><title>Home</title></head><body>"
                "<a href='http://fake.sim/two'>Two</a><input name='q'></body></html>"};
    pages_["http://fake.sim/two"] = {
        "Two", "<html><head><title>Two</title></head><body><p>second</p></body></html>"};

    server_.Post("/session", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      log_.push_back("new session");
      Window w;
      w.history.push_back("about:blank");
      windows_["w0"] = w;
      current_ = "w0";
      reply(res, {{"sessionId", "s1"}, {"capabilities", json::object()}});
    });
    server_.Post("/session/s1/window/new", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      std::string handle = "w" + std::to_string(++next_handle_);
      windows_[handle].history.push_back("about:blank");
      reply(res, {{"handle", handle}, {"type", "tab"}});
    });
    server_.Delete("/session/s1/window", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      log_.push_back("close " + current_);
      windows_.erase(current_);
      json handles = json::array();
      for (const auto& [h, w] : windows_) handles.push_back(h);
      reply(res, handles);
    });
    server_.Post("/session/s1/window", [this](const auto& req, auto& res) {
      std::lock_guard lock(mu_);
      std::string handle = json::parse(req.body).at("handle");
      if (!windows_.count(handle)) return error(res, 404, "no such window");
      current_ = handle;
      reply(res, nullptr);
    });
    server_.Post("/session/s1/url", [this](const auto& req, auto& res) {
      std::lock_guard lock(mu_);
      std::string url = json::parse(req.body).at("url");
      if (!pages_.count(url)) return error(res, 400, "invalid argument");
      navigate(url);
      reply(res, nullptr);
    });
    server_.Get("/session/s1/url", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      reply(res, url());
    });
    server_.Get("/session/s1/title", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      reply(res, pages_.count(url()) ? pages_[url()].title : "");
    });
    server_.Get("/session/s1/source", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      reply(res, pages_.count(url()) ? pages_[url()].html : "<html></html>");
    });
    server_.Post("/session/s1/element", [this](const auto& req, auto& res) {
      std::lock_guard lock(mu_);
      json body = json::parse(req.body);
      std::string xpath = body.at("value");
      log_.push_back("find " + body.at("using").get<std::string>() + " " + xpath);
      std::string id = "e" + std::to_string(elements_.size() + 1);
      elements_[id] = xpath;
      reply(res, {{kElementKey, id}});
    });
    server_.Post(R"(/session/s1/element/([^/]+)/click)", [this](const auto& req, auto& res) {
      std::lock_guard lock(mu_);
      std::string xpath = elements_[req.matches[1]];
      log_.push_back("click " + xpath);
      if (url() == "http://fake.sim/" && xpath == "/html[1]/body[1]/a[1]") {
        navigate("http://fake.sim/two");
      }
      reply(res, nullptr);
    });
    server_.Post(R"(/session/s1/element/([^/]+)/value)", [this](const auto& req, auto& res) {
      std::lock_guard lock(mu_);
      log_.push_back("value " + elements_[req.matches[1]] + " " +
                     json::parse(req.body).at("text").dump());
      reply(res, nullptr);
    });
    server_.Post("/session/s1/back", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      Window& w = windows_[current_];
      if (w.cursor > 0) --w.cursor;
      reply(res, nullptr);
    });
    server_.Post("/session/s1/forward", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      Window& w = windows_[current_];
      if (w.cursor + 1 < w.history.size()) ++w.cursor;
      reply(res, nullptr);
    });
    server_.Delete("/session/s1", [this](const auto&, auto& res) {
      std::lock_guard lock(mu_);
      log_.push_back("end session");
      reply(res, nullptr);
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeDriver() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<std::string> log() {
    std::lock_guard lock(mu_);
    return log_;
  }

  std::size_t window_count() {
    std::lock_guard lock(mu_);
    return windows_.size();
  }

 private:
  struct Page {
    std::string title;
    std::string html;
  };
  struct Window {
    std::vector<std::string> history;
    std::size_t cursor = 0;
  };

  static void reply(httplib::Response& res, const json& value) {
    res.set_content(json{{"value", value}}.dump(), "application/json");
  }

  static void error(httplib::Response& res, int status, const std::string& code) {
    res.status = status;
    res.set_content(json{{"value", {{"error", code}, {"message", "fake"}}}}.dump(),
                    "application/json");
  }

  std::string url() {
    const Window& w = windows_[current_];
    return w.history[w.cursor];
  }

  void navigate(const std::string& target) {
    Window& w = windows_[current_];
    w.history.resize(w.cursor + 1);
    w.history.push_back(target);
    w.cursor = w.history.size() - 1;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::map<std::string, Page> pages_;
  std::map<std::string, Window> windows_;
  std::map<std::string, std::string> elements_;
  std::string current_;
  int next_handle_ = 0;
  std::vector<std::string> log_;
};

TEST(WebDriver, OpensSessionAtStartUrl) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/");
  EXPECT_EQ(session.session_id(), "s1");
  PageView page = session.current_page();
  EXPECT_EQ(page.url, "http://fake.sim/");
  EXPECT_EQ(page.title, "Home");
  EXPECT_NE(page.html.find("<a href='http://fake.sim/two'>"), std::string::npos);
  EXPECT_EQ(driver.window_count(), 1u);
  EXPECT_EQ(session.capabilities(), std::set<Capability>{Capability::kElementById});
}

TEST(WebDriver, ClickLocatesElementByXPath) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/");
  session.perform(Action::click(ElementRef::by_id(2)), NodePath{1, 0});
  EXPECT_EQ(session.current_page().url, "http://fake.sim/two");
  auto log = driver.log();
  EXPECT_NE(std::find(log.begin(), log.end(), "find xpath /html[1]/body[1]/a[1]"), log.end());
  session.perform(Action::simple(ActionKind::kGoBack), std::nullopt);
  EXPECT_EQ(session.current_page().title, "Home");
  session.perform(Action::simple(ActionKind::kGoForward), std::nullopt);
  EXPECT_EQ(session.current_page().title, "Two");
}

TEST(WebDriver, TypeSendsEnterKeyWhenRequested) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/");
  session.perform(Action::type(ElementRef::by_id(3), "abc", true), NodePath{1, 1});
  session.perform(Action::type(ElementRef::by_id(3), "xyz", false), NodePath{1, 1});
  auto log = driver.log();
  EXPECT_NE(std::find(log.begin(), log.end(),
                      "value /html[1]/body[1]/input[1] \"abc\xEE\x80\x87\""),
            log.end());
  EXPECT_NE(std::find(log.begin(), log.end(), "value /html[1]/body[1]/input[1] \"xyz\""),
            log.end());
}

TEST(WebDriver, MissingTargetsAreStale) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/");
  EXPECT_THROW(session.perform(Action::click(ElementRef::by_id(2)), NodePath{1, 9}),
               StaleTarget);
  EXPECT_THROW(session.perform(Action::click(ElementRef::by_id(2)), std::nullopt), StaleTarget);
  EXPECT_THROW(session.perform(Action::click(ElementRef::at(1, 2)), NodePath{1, 0}),
               UnsupportedAction);
}

TEST(WebDriver, WireErrorsMapToFailureKinds) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/");
  EXPECT_THROW(session.perform(Action::go_to("http://fake.sim/404"), std::nullopt),
               NavigationError);
  EXPECT_THROW(session.perform(Action::hover(ElementRef::by_id(2)), NodePath{1, 0}),
               UnsupportedAction);
  EXPECT_THROW(session.probe("anything"), UnsupportedAction);
  EXPECT_THROW(session.restore("{}"), UnsupportedAction);
}

TEST(WebDriver, TabsOpenSwitchAndClose) {
  FakeDriver driver;
  WebDriverSession session(driver.endpoint(), "http://fake.sim/two", "http://fake.sim/");
  session.perform(Action::simple(ActionKind::kNewTab), std::nullopt);
  EXPECT_EQ(session.focused_tab(), 1u);
  auto tabs = session.tabs();
  ASSERT_EQ(tabs.size(), 2u);
  EXPECT_EQ(tabs[0].url, "http://fake.sim/two");
  EXPECT_EQ(tabs[1].url, "http://fake.sim/");
  session.perform(Action::tab_focus(0), std::nullopt);
  EXPECT_EQ(session.current_page().title, "Two");
  EXPECT_THROW(session.perform(Action::tab_focus(5), std::nullopt), NavigationError);
  session.perform(Action::simple(ActionKind::kTabClose), std::nullopt);
  EXPECT_EQ(session.tabs().size(), 1u);
  EXPECT_EQ(session.current_page().url, "http://fake.sim/");
  EXPECT_THROW(session.perform(Action::simple(ActionKind::kTabClose), std::nullopt),
               NavigationError);
  EXPECT_EQ(session.state_serialization(), R"({"focused":0,"tabs":["http://fake.sim/"]})");
}

TEST(WebDriver, CloseEndsRemoteSession) {
  FakeDriver driver;
  {
    WebDriverSession session(driver.endpoint(), "http://fake.sim/");
    session.close();
    EXPECT_TRUE(session.closed());
    EXPECT_THROW(session.current_page(), SessionClosed);
  }
  auto log = driver.log();
  EXPECT_EQ(std::count(log.begin(), log.end(), "end session"), 1);
}

TEST(WebDriver, OpenSessionFactoryUsesEndpoint) {
  FakeDriver driver;
  BackendConfig config;
  config.kind = BackendConfig::Kind::kWebdriver;
  config.webdriver_url = driver.endpoint() + "/";
  auto session = open_session(config, {}, "http://fake.sim/");
  EXPECT_EQ(session->current_page().title, "Home");
  config.webdriver_url.clear();
  EXPECT_THROW(open_session(config, {}, "http://fake.sim/"), ConfigError);
}

TEST(WebDriver, UnreachableEndpointIsConnectionError) {
  // Bind an ephemeral port and release it, leaving nothing listening there.
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  socklen_t len = sizeof addr;
  ASSERT_EQ(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len), 0);
  int port = ntohs(addr.sin_port);
  ::close(fd);
  EXPECT_THROW(WebDriverSession("http://127.0.0.1:" + std::to_string(port), "http://fake.sim/"),
               ConnectionError);
}

}  // namespace
}  // namespace arenakit
