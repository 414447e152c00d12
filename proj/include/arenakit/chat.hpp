#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace arenakit {

struct ChatMessage {
  std::string role;  // system, user or assistant
  std::string content;
  std::optional<std::string> name;

  bool operator==(const ChatMessage&) const = default;
};

nlohmann::json to_json(const ChatMessage& message);
nlohmann::json to_json(const std::vector<ChatMessage>& messages);

struct SamplingParams {
  double temperature = 1.0;
  double top_p = 0.9;
  int max_tokens = 512;
};

// Chat-completion model. Implementations must tolerate concurrent calls.
class LLMClient {
 public:
  virtual ~LLMClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const SamplingParams& params) = 0;
};

// OpenAI-compatible chat-completions endpoint. The bearer token is read from
// ARENA_KIT_API_KEY when set. Transport failures are retried `attempts`
// times before ModelError is thrown.
class HttpChatClient final : public LLMClient {
 public:
  HttpChatClient(std::string url, std::string model, int attempts = 3);

  std::string complete(const std::vector<ChatMessage>& messages,
                       const SamplingParams& params) override;

 private:
  std::string url_;
  std::string model_;
  int attempts_;
};

}  // namespace arenakit
