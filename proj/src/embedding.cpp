#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "bacsum/error.hpp"
#include "bacsum/retrieval.hpp"
#include "http_url.hpp"

namespace bacsum {
namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

HashedBowProvider::HashedBowProvider(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::Configuration, "embedding dimension must be positive");
}

std::string HashedBowProvider::id() const { return fmt::format("hashed-bow-fnv1a/{}", dim_); }

std::size_t HashedBowProvider::bucket_of(std::string_view token) const {
  return static_cast<std::size_t>(fnv1a(token) % dim_);
}

Vector HashedBowProvider::embed_one(std::string_view text) const {
  Vector v(dim_, 0.0f);
  bool any = false;
  std::string token;
  auto emit = [&] {
    if (token.empty()) return;
    v[bucket_of(token)] += 1.0f;
    any = true;
    token.clear();
  };
  for (char c : text) {
    if (is_token_char(c)) {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      emit();
    }
  }
  emit();
  if (!any) v[bucket_of(normalize_whitespace(text))] = 1.0f;
  return v;
}

std::vector<Vector> HashedBowProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorKind::Configuration, "embedding endpoint is empty");
  if (config_.dim == 0) throw Error(ErrorKind::Configuration, "embedding dimension must be positive");
  if (config_.retries < 0) throw Error(ErrorKind::Configuration, "embedding retries must be >= 0");
  split_url(config_.endpoint);  // validates
}

std::string HttpEmbeddingProvider::id() const {
  return fmt::format("http:{}/{}", config_.model, config_.dim);
}

std::vector<Vector> HttpEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  const auto [base, path] = split_url(config_.endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", fmt::format("Bearer {}", key));
    }
  }
  const std::string body = json{{"input", texts}, {"model", config_.model}}.dump();

  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorKind::EmbedTransport,
                  fmt::format("embedding endpoint returned HTTP {}: {}", res->status, res->body));
    }
    json doc;
    try {
      doc = json::parse(res->body);
      const json& data = doc.at("data");
      if (!data.is_array() || data.size() != texts.size()) {
        throw Error(ErrorKind::EmbedTransport,
                    fmt::format("embedding response has {} vectors for {} inputs",
                                data.is_array() ? data.size() : 0, texts.size()));
      }
      std::vector<Vector> out;
      out.reserve(texts.size());
      for (const auto& item : data) out.push_back(item.at("embedding").get<Vector>());
      return out;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::EmbedTransport,
                  fmt::format("malformed embedding response: {}", e.what()));
    }
  }
  throw Error(ErrorKind::EmbedTransport,
              fmt::format("embedding endpoint unreachable after {} attempts: {}",
                          config_.retries + 1, last_error));
}

Vector embed(EmbeddingProvider& provider, std::string_view text) {
  const std::string normalized = normalize_whitespace(text);
  if (normalized.empty()) {
    throw Error(ErrorKind::Precondition, "cannot embed empty text");
  }
  auto batch = provider.embed_batch({normalized});
  if (batch.size() != 1) {
    throw Error(ErrorKind::EmbedTransport,
                fmt::format("provider returned {} vectors for 1 input", batch.size()));
  }
  Vector v = std::move(batch.front());
  if (v.size() != provider.dim()) {
    throw Error(ErrorKind::Configuration,
                fmt::format("provider '{}' returned dimension {}, expected {}", provider.id(),
                            v.size(), provider.dim()));
  }
  for (float x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::EmbedTransport,
                  fmt::format("provider '{}' returned a non-finite component", provider.id()));
    }
  }
  return v;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::Configuration,
                fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::UndefinedSimilarity, "cosine similarity of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace bacsum
