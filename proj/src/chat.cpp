#include "arenakit/chat.hpp"

#include <algorithm>
#include <cstdlib>

#include "arenakit/errors.hpp"
#include "arenakit/http.hpp"

namespace arenakit {

using nlohmann::json;

json to_json(const ChatMessage& message) {
  json j{{"role", message.role}, {"content", message.content}};
  if (message.name) j["name"] = *message.name;
  return j;
}

json to_json(const std::vector<ChatMessage>& messages) {
  json out = json::array();
  for (const auto& m : messages) out.push_back(to_json(m));
  return out;
}

HttpChatClient::HttpChatClient(std::string url, std::string model, int attempts)
    : url_(std::move(url)), model_(std::move(model)), attempts_(std::max(attempts, 1)) {}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages,
                                     const SamplingParams& params) {
  HttpRequest request;
  request.method = "POST";
  request.url = url_;
  request.timeout = std::chrono::seconds(120);
  request.body = json{{"model", model_},
                      {"messages", to_json(messages)},
                      {"temperature", params.temperature},
                      {"top_p", params.top_p},
                      {"max_tokens", params.max_tokens}}
                     .dump();
  if (const char* key = std::getenv("ARENA_KIT_API_KEY"); key && *key) {
    request.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt < attempts_; ++attempt) {
    try {
      HttpResponse response = http_send(request);
      if (response.status != 200) {
        last_error = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
        continue;
      }
      json doc = json::parse(response.body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const ConnectionError& e) {
      last_error = e.what();
    } catch (const json::exception& e) {
      last_error = std::string("malformed completion: ") + e.what();
    }
  }
  throw ModelError("model request failed after " + std::to_string(attempts_) +
                   " attempts: " + last_error);
}

}  // namespace arenakit
