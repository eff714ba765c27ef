#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bacsum/context.hpp"

namespace bacsum {

struct PromptTemplate {
  std::string version;
  std::string system;
  std::string context_header;  // "Context:"
  std::string empty_context;   // "Context: (none)"
  std::string packet_header;   // "Packet file:"
  std::string task;

  /// SHA-256 over the canonical JSON form.
  std::string hash() const;
  std::string to_json() const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// The template shipped as data/prompt_template.json, compiled in.
const PromptTemplate& default_prompt_template();
PromptTemplate parse_prompt_template(std::string_view json_text);
PromptTemplate load_prompt_template(const std::filesystem::path& path);

struct Prompt {
  std::string system_text;
  std::string context_block;
  std::string query_block;
  Mode mode = Mode::M4Full;

  std::string user_text() const { return context_block + "\n\n" + query_block; }
  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// Items of kinds not enabled by `mode` are left out; order is preserved.
/// Throws Error(Precondition) for blank packet text.
Prompt build_prompt(const ContextBundle& bundle, std::string_view packet_text, Mode mode,
                    const PromptTemplate& tmpl = default_prompt_template());

struct LlmConfig {
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};
  std::string api_key_env = "BACSUM_LLM_API_KEY";

  /// Throws Error(Configuration).
  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 0;
  std::vector<ChatMessage> messages;
  std::chrono::milliseconds timeout{0};

  std::string to_json() const;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  int status = 200;
  std::string content;
  std::string model;
  std::optional<TokenUsage> usage;
  std::string error_message;  // for non-2xx
};

/// Parses a chat-completions response body.
ChatResponse parse_chat_response(int status, std::string_view body);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Throws Error(Transport) when no HTTP response was obtained.
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Replies with the first 20 whitespace-separated words of the user message.
class EchoStubClient final : public ChatClient {
 public:
  static constexpr std::size_t kWords = 20;
  ChatResponse send(const ChatRequest& request) override;
};

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(const LlmConfig& config);
  ChatResponse send(const ChatRequest& request) override;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_env_;
};

struct Summary {
  std::string text;
  std::string model_id;
  std::optional<TokenUsage> usage;
  Mode mode = Mode::M4Full;
  std::int64_t created_at = 0;  // unix seconds
  int attempts = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// One chat request with bounded retries (exponential backoff) on transport
/// failures and 5xx responses. Errors: LlmUnavailable once retries are spent,
/// RequestRejected for 4xx, EmptyResponse for a blank completion.
Summary summarize(const Prompt& prompt, const LlmConfig& config, ChatClient& client,
                  const Sleeper& sleep = {});

}  // namespace bacsum
