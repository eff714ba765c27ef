#include "bacsum/summarizer.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "bacsum/error.hpp"
#include "bacsum/hash.hpp"
#include "http_url.hpp"

namespace bacsum {
namespace detail {
extern const char kDefaultPromptTemplate[];
}

namespace {

using nlohmann::json;

std::string rtrim_newlines(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

bool kind_enabled(ContextKind kind, Mode mode) {
  const SourceSet s = sources_for(mode);
  switch (kind) {
    case ContextKind::Service: return s.service;
    case ContextKind::Retrieved: return s.retrieved;
    case ContextKind::Device: return s.device;
  }
  return false;
}

}  // namespace

std::string PromptTemplate::to_json() const {
  json doc = {{"version", version},       {"system", system},
              {"context_header", context_header}, {"empty_context", empty_context},
              {"packet_header", packet_header},   {"task", task}};
  return doc.dump();  // keys sorted, compact
}

std::string PromptTemplate::hash() const { return sha256_hex(to_json()); }

PromptTemplate parse_prompt_template(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, fmt::format("prompt template is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorKind::Validation, "prompt template must be a JSON object");
  auto field = [&](const char* name) {
    auto it = doc.find(name);
    if (it == doc.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
      throw Error(ErrorKind::Validation,
                  fmt::format("prompt template field '{}' must be a non-empty string", name));
    }
    return it->get<std::string>();
  };
  PromptTemplate t;
  t.version = field("version");
  t.system = field("system");
  t.context_header = field("context_header");
  t.empty_context = field("empty_context");
  t.packet_header = field("packet_header");
  t.task = field("task");
  return t;
}

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate t = parse_prompt_template(detail::kDefaultPromptTemplate);
  return t;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open prompt template '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_prompt_template(buffer.str());
}

Prompt build_prompt(const ContextBundle& bundle, std::string_view packet_text, Mode mode,
                    const PromptTemplate& tmpl) {
  if (normalize_whitespace(packet_text).empty()) {
    throw Error(ErrorKind::Precondition, "packet text must not be empty");
  }
  Prompt prompt;
  prompt.mode = mode;
  prompt.system_text = tmpl.system;

  std::string context;
  std::size_t n = 0;
  for (const ContextItem& item : bundle.items) {
    if (!kind_enabled(item.kind, mode)) continue;
    fmt::format_to(std::back_inserter(context), "\n[{}] {}: {}", ++n, to_string(item.kind),
                   item.text);
  }
  prompt.context_block = n == 0 ? tmpl.empty_context : tmpl.context_header + context;
  prompt.query_block =
      fmt::format("{}\n{}\n\n{}", tmpl.packet_header, rtrim_newlines(packet_text), tmpl.task);
  return prompt;
}

void LlmConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorKind::Configuration,
                fmt::format("llm.temperature must be in [0, 2], got {}", temperature));
  }
  if (retries < 0) {
    throw Error(ErrorKind::Configuration, fmt::format("llm.retries must be >= 0, got {}", retries));
  }
  if (max_tokens <= 0) {
    throw Error(ErrorKind::Configuration,
                fmt::format("llm.max_tokens must be positive, got {}", max_tokens));
  }
  if (timeout.count() <= 0) throw Error(ErrorKind::Configuration, "llm.timeout must be positive");
  if (backoff.count() < 0) throw Error(ErrorKind::Configuration, "llm.backoff must be >= 0");
}

std::string ChatRequest::to_json() const {
  json messages_json = json::array();
  for (const auto& m : messages) messages_json.push_back({{"role", m.role}, {"content", m.content}});
  json doc = {{"model", model},
              {"temperature", temperature},
              {"max_tokens", max_tokens},
              {"messages", std::move(messages_json)}};
  return doc.dump();
}

ChatResponse parse_chat_response(int status, std::string_view body) {
  ChatResponse response;
  response.status = status;
  json doc = json::parse(body, nullptr, false);
  if (status < 200 || status >= 300) {
    response.error_message = std::string(body);
    if (!doc.is_discarded() && doc.is_object()) {
      if (auto err = doc.find("error"); err != doc.end()) {
        if (err->is_string()) {
          response.error_message = err->get<std::string>();
        } else if (err->is_object() && err->contains("message") && (*err)["message"].is_string()) {
          response.error_message = (*err)["message"].get<std::string>();
        }
      }
    }
    return response;
  }
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::Transport, "chat endpoint returned a non-JSON body");
  }
  try {
    if (auto model = doc.find("model"); model != doc.end() && model->is_string()) {
      response.model = model->get<std::string>();
    }
    const json& choices = doc.at("choices");
    if (choices.is_array() && !choices.empty()) {
      const json& content = choices.at(0).at("message").at("content");
      if (content.is_string()) response.content = content.get<std::string>();
    }
    if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
      TokenUsage u;
      u.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
      u.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
      response.usage = u;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Transport, fmt::format("malformed chat response: {}", e.what()));
  }
  return response;
}

ChatResponse EchoStubClient::send(const ChatRequest& request) {
  std::string_view user;
  for (const auto& m : request.messages) {
    if (m.role == "user") user = m.content;
  }
  std::istringstream words{std::string(user)};
  std::string word;
  std::string out;
  for (std::size_t n = 0; n < kWords && words >> word; ++n) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  ChatResponse response;
  response.content = out;
  response.model = "echo-stub";
  return response;
}

HttpChatClient::HttpChatClient(const LlmConfig& config) : api_key_env_(config.api_key_env) {
  if (config.endpoint.empty()) throw Error(ErrorKind::Configuration, "llm.endpoint is empty");
  std::tie(base_, path_) = split_url(config.endpoint);
}

ChatResponse HttpChatClient::send(const ChatRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);
  httplib::Headers headers;
  if (!api_key_env_.empty()) {
    if (const char* key = std::getenv(api_key_env_.c_str()); key && *key) {
      headers.emplace("Authorization", fmt::format("Bearer {}", key));
    }
  }
  auto res = client.Post(path_, headers, request.to_json(), "application/json");
  if (!res) {
    throw Error(ErrorKind::Transport,
                fmt::format("chat endpoint {}{}: {}", base_, path_, httplib::to_string(res.error())));
  }
  return parse_chat_response(res->status, res->body);
}

Summary summarize(const Prompt& prompt, const LlmConfig& config, ChatClient& client,
                  const Sleeper& sleep) {
  config.validate();
  ChatRequest request;
  request.model = config.model;
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.timeout = config.timeout;
  request.messages = {{"system", prompt.system_text}, {"user", prompt.user_text()}};

  std::string last_error;
  auto delay = config.backoff;
  for (int attempt = 1; attempt <= config.retries + 1; ++attempt) {
    if (attempt > 1) {
      if (sleep) {
        sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
      delay *= 2;
    }
    ChatResponse response;
    try {
      response = client.send(request);
    } catch (const Error& e) {
      if (!is_retryable(e.kind())) throw;
      last_error = e.what();
      continue;
    }
    if (response.status >= 500) {
      last_error = fmt::format("HTTP {}: {}", response.status, response.error_message);
      continue;
    }
    if (response.status >= 400) {
      throw Error(ErrorKind::RequestRejected,
                  fmt::format("chat endpoint rejected the request (HTTP {}): {}", response.status,
                              response.error_message));
    }
    if (response.status < 200 || response.status >= 300) {
      last_error = fmt::format("unexpected HTTP status {}", response.status);
      continue;
    }
    if (normalize_whitespace(response.content).empty()) {
      throw Error(ErrorKind::EmptyResponse, "chat endpoint returned an empty completion");
    }
    Summary summary;
    summary.text = std::move(response.content);
    summary.model_id = response.model.empty() ? config.model : response.model;
    summary.usage = response.usage;
    summary.mode = prompt.mode;
    summary.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
    summary.attempts = attempt;
    return summary;
  }
  throw Error(ErrorKind::LlmUnavailable,
              fmt::format("chat endpoint unavailable after {} attempts: {}", config.retries + 1,
                          last_error));
}

}  // namespace bacsum
