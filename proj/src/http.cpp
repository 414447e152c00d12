#include "arenakit/http.hpp"

#include <httplib.h>

#include "arenakit/errors.hpp"

namespace arenakit {

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConnectionError("malformed url '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse http_send(const HttpRequest& request) {
  auto [origin, path] = split_url(request.url);
  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw ConnectionError("unsupported endpoint '" + request.url + "'");
  }
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);

  httplib::Headers headers;
  for (const auto& [key, value] : request.headers) headers.emplace(key, value);

  httplib::Result result;
  if (request.method == "GET") {
    result = client.Get(path, headers);
  } else if (request.method == "POST") {
    result = client.Post(path, headers, request.body, "application/json");
  } else if (request.method == "DELETE") {
    result = client.Delete(path, headers);
  } else {
    throw ConnectionError("unsupported HTTP method " + request.method);
  }
  if (!result) {
    throw ConnectionError(request.method + " " + request.url + " failed: " +
                          httplib::to_string(result.error()));
  }
  return HttpResponse{result->status, result->body};
}

}  // namespace arenakit
