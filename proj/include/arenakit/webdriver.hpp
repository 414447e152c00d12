#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arenakit/backend.hpp"

namespace arenakit {

// W3C WebDriver client for a remote browser. Elements are located by the
// absolute positional XPath of their DOM path in the last fetched page.
class WebDriverSession final : public BackendSession {
 public:
  // Creates a browser session and loads start_url. Throws ConnectionError
  // when the endpoint does not answer.
  WebDriverSession(std::string endpoint, const std::string& start_url,
                   std::string homepage = {});
  ~WebDriverSession() override;

  WebDriverSession(const WebDriverSession&) = delete;
  WebDriverSession& operator=(const WebDriverSession&) = delete;

  std::set<Capability> capabilities() const override;
  PageView current_page() const override;
  std::vector<TabView> tabs() const override;
  std::size_t focused_tab() const override;
  void perform(const Action& action, const std::optional<NodePath>& target) override;
  std::string probe(std::string_view name) const override;
  std::string state_serialization() const override;
  std::string snapshot() const override;
  void restore(std::string_view image) override;
  void close() override;
  bool closed() const override { return closed_; }

  const std::string& session_id() const { return session_id_; }

 private:
  nlohmann::json call(const std::string& method, const std::string& path,
                      const nlohmann::json& body = nullptr) const;
  std::string session_path(const std::string& suffix) const;
  std::string find_element(const NodePath& path) const;
  void switch_to(std::size_t index);
  void remember_current() const;
  void check_open() const;

  std::string endpoint_;
  std::string homepage_;
  std::string session_id_;
  std::vector<std::string> handles_;
  mutable std::vector<TabView> tab_cache_;
  std::size_t focused_ = 0;
  bool closed_ = false;
};

}  // namespace arenakit
