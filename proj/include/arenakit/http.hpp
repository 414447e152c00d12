#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace arenakit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

struct HttpRequest {
  std::string method = "GET";  // GET, POST or DELETE
  std::string url;             // absolute, http:// or https://
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::seconds timeout{30};
};

// Blocking request. Throws ConnectionError when no response arrives; HTTP
// error statuses are returned, not thrown.
HttpResponse http_send(const HttpRequest& request);

}  // namespace arenakit
