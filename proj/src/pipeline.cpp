#include "bacsum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "bacsum/error.hpp"
#include "bacsum/hash.hpp"
#include "bacsum/registry.hpp"
#include "bacsum/render.hpp"
#include "bacsum/service_kb.hpp"

namespace bacsum {
namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(std::string_view field, std::string_view what) {
  throw Error(ErrorKind::Configuration, fmt::format("config {}: {}", field, what));
}

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(fmt::format("{}{}", where, key), "unknown key");
    }
  }
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  const json* v = member(obj, key);
  if (!v->is_string()) config_error(fmt::format("{}{}", where, key), "expected string");
  return v->get<std::string>();
}

template <typename T>
T get_unsigned(const json& obj, const char* key, std::string_view where, T max) {
  const json* v = member(obj, key);
  if (!v->is_number_unsigned() || v->get<std::uint64_t>() > static_cast<std::uint64_t>(max)) {
    config_error(fmt::format("{}{}", where, key), fmt::format("expected integer in [0, {}]", max));
  }
  return static_cast<T>(v->get<std::uint64_t>());
}

int get_int(const json& obj, const char* key, std::string_view where) {
  const json* v = member(obj, key);
  if (!v->is_number_integer()) config_error(fmt::format("{}{}", where, key), "expected integer");
  return v->get<int>();
}

double get_number(const json& obj, const char* key, std::string_view where) {
  const json* v = member(obj, key);
  if (!v->is_number()) config_error(fmt::format("{}{}", where, key), "expected number");
  return v->get<double>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

json opt_path(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string make_run_id() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint32_t> dist;
  const auto now = std::chrono::system_clock::now().time_since_epoch().count();
  return sha256_hex(fmt::format("{}-{}-{}", now, dist(rd), dist(rd))).substr(0, 16);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::size_t PipelineConfig::effective_budget() const {
  return budget ? *budget : context_window * 7 / 10;
}

std::string PipelineConfig::canonical_json() const {
  json doc = {
      {"bacnet_port", bacnet_port},
      {"registry_path", opt_path(registry_path)},
      {"service_kb_path", opt_path(service_kb_path)},
      {"index_path", opt_path(index_path)},
      {"prompt_template_path", opt_path(prompt_template_path)},
      {"chunking",
       {{"max_chunk_chars", chunking.max_chunk_chars}, {"overlap_chars", chunking.overlap_chars}}},
      {"embedding",
       {{"provider", embedding.provider},
        {"dim", embedding.dim},
        {"endpoint", embedding.http.endpoint},
        {"model", embedding.http.model},
        {"api_key_env", embedding.http.api_key_env},
        {"timeout_ms", embedding.http.timeout.count()},
        {"retries", embedding.http.retries},
        {"backoff_ms", embedding.http.backoff.count()}}},
      {"retrieval", {{"k", retrieval_k}}},
      {"llm",
       {{"endpoint", llm.endpoint},
        {"model", llm.model},
        {"temperature", llm.temperature},
        {"max_tokens", llm.max_tokens},
        {"timeout_ms", llm.timeout.count()},
        {"retries", llm.retries},
        {"backoff_ms", llm.backoff.count()},
        {"api_key_env", llm.api_key_env}}},
      {"mode", to_string(mode)},
      {"context_window", context_window},
      {"budget", effective_budget()},
      {"audit_path", opt_path(audit_path)},
  };
  return doc.dump();
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical_json()); }

PipelineConfig parse_pipeline_config(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Configuration, fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) config_error("", "expected a JSON object");
  check_keys(doc, "",
             {"bacnet_port", "registry_path", "service_kb_path", "index_path",
              "prompt_template_path", "chunking", "embedding", "retrieval", "llm", "mode",
              "context_window", "budget", "audit_path"});

  PipelineConfig c;
  if (member(doc, "bacnet_port")) {
    c.bacnet_port = get_unsigned<std::uint16_t>(doc, "bacnet_port", "", 65535);
  }
  for (auto [key, slot] : {std::pair{"registry_path", &c.registry_path},
                           std::pair{"service_kb_path", &c.service_kb_path},
                           std::pair{"index_path", &c.index_path},
                           std::pair{"prompt_template_path", &c.prompt_template_path},
                           std::pair{"audit_path", &c.audit_path}}) {
    if (member(doc, key)) *slot = resolve(base_dir, get_string(doc, key, ""));
  }
  if (const json* ch = member(doc, "chunking")) {
    if (!ch->is_object()) config_error("chunking", "expected object");
    check_keys(*ch, "chunking.", {"max_chunk_chars", "overlap_chars"});
    if (member(*ch, "max_chunk_chars")) {
      c.chunking.max_chunk_chars =
          get_unsigned<std::size_t>(*ch, "max_chunk_chars", "chunking.", 1u << 24);
    }
    if (member(*ch, "overlap_chars")) {
      c.chunking.overlap_chars = get_unsigned<std::size_t>(*ch, "overlap_chars", "chunking.", 1u << 24);
    }
    if (c.chunking.max_chunk_chars <= c.chunking.overlap_chars) {
      config_error("chunking", "max_chunk_chars must exceed overlap_chars");
    }
  }
  if (const json* em = member(doc, "embedding")) {
    if (!em->is_object()) config_error("embedding", "expected object");
    check_keys(*em, "embedding.",
               {"provider", "dim", "endpoint", "model", "api_key_env", "timeout_ms", "retries",
                "backoff_ms"});
    if (member(*em, "provider")) c.embedding.provider = get_string(*em, "provider", "embedding.");
    if (c.embedding.provider != "hashed-bow" && c.embedding.provider != "http") {
      config_error("embedding.provider", "expected \"hashed-bow\" or \"http\"");
    }
    if (member(*em, "dim")) c.embedding.dim = get_unsigned<std::size_t>(*em, "dim", "embedding.", 65536);
    if (c.embedding.dim == 0) config_error("embedding.dim", "must be positive");
    if (member(*em, "endpoint")) c.embedding.http.endpoint = get_string(*em, "endpoint", "embedding.");
    if (member(*em, "model")) c.embedding.http.model = get_string(*em, "model", "embedding.");
    if (member(*em, "api_key_env")) {
      c.embedding.http.api_key_env = get_string(*em, "api_key_env", "embedding.");
    }
    if (member(*em, "timeout_ms")) {
      c.embedding.http.timeout = std::chrono::milliseconds(get_int(*em, "timeout_ms", "embedding."));
    }
    if (member(*em, "retries")) c.embedding.http.retries = get_int(*em, "retries", "embedding.");
    if (member(*em, "backoff_ms")) {
      c.embedding.http.backoff = std::chrono::milliseconds(get_int(*em, "backoff_ms", "embedding."));
    }
    if (c.embedding.http.retries < 0) config_error("embedding.retries", "must be >= 0");
  }
  c.embedding.http.dim = c.embedding.dim;
  if (const json* re = member(doc, "retrieval")) {
    if (!re->is_object()) config_error("retrieval", "expected object");
    check_keys(*re, "retrieval.", {"k"});
    if (member(*re, "k")) c.retrieval_k = get_unsigned<std::size_t>(*re, "k", "retrieval.", 1000);
    if (c.retrieval_k == 0) config_error("retrieval.k", "must be >= 1");
  }
  if (const json* l = member(doc, "llm")) {
    if (!l->is_object()) config_error("llm", "expected object");
    check_keys(*l, "llm.",
               {"endpoint", "model", "temperature", "max_tokens", "timeout_ms", "retries",
                "backoff_ms", "api_key_env"});
    if (member(*l, "endpoint")) c.llm.endpoint = get_string(*l, "endpoint", "llm.");
    if (member(*l, "model")) c.llm.model = get_string(*l, "model", "llm.");
    if (member(*l, "temperature")) c.llm.temperature = get_number(*l, "temperature", "llm.");
    if (member(*l, "max_tokens")) c.llm.max_tokens = get_int(*l, "max_tokens", "llm.");
    if (member(*l, "timeout_ms")) {
      c.llm.timeout = std::chrono::milliseconds(get_int(*l, "timeout_ms", "llm."));
    }
    if (member(*l, "retries")) c.llm.retries = get_int(*l, "retries", "llm.");
    if (member(*l, "backoff_ms")) {
      c.llm.backoff = std::chrono::milliseconds(get_int(*l, "backoff_ms", "llm."));
    }
    if (member(*l, "api_key_env")) c.llm.api_key_env = get_string(*l, "api_key_env", "llm.");
  }
  c.llm.validate();
  if (member(doc, "mode")) {
    const auto mode = parse_mode(get_string(doc, "mode", ""));
    if (!mode) config_error("mode", "expected one of m1, m2, m3, m4");
    c.mode = *mode;
  }
  if (member(doc, "context_window")) {
    c.context_window = get_unsigned<std::size_t>(doc, "context_window", "", 1u << 30);
  }
  if (member(doc, "budget")) c.budget = get_unsigned<std::size_t>(doc, "budget", "", 1u << 30);
  if (c.effective_budget() == 0) config_error("budget", "must be positive");
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Configuration, fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_pipeline_config(buffer.str(), fs::absolute(path).parent_path());
}

void validate_for_explain(const PipelineConfig& config, bool need_llm) {
  const SourceSet s = sources_for(config.mode);
  if (s.retrieved && !config.index_path) {
    config_error("index_path", fmt::format("required for mode {}", to_string(config.mode)));
  }
  if (s.service && !config.service_kb_path) {
    config_error("service_kb_path", fmt::format("required for mode {}", to_string(config.mode)));
  }
  if (config.effective_budget() == 0) config_error("budget", "must be positive");
  if (need_llm) {
    if (config.llm.endpoint.empty()) config_error("llm.endpoint", "required unless --stub-llm");
    if (config.llm.model.empty()) config_error("llm.model", "required unless --stub-llm");
  }
  config.llm.validate();
  if (s.retrieved && config.embedding.provider == "http") {
    if (config.embedding.http.endpoint.empty()) config_error("embedding.endpoint", "required");
  }
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& config) {
  if (config.provider == "hashed-bow") return std::make_unique<HashedBowProvider>(config.dim);
  if (config.provider == "http") {
    HttpEmbeddingConfig http = config.http;
    http.dim = config.dim;
    return std::make_unique<HttpEmbeddingProvider>(std::move(http));
  }
  config_error("embedding.provider", fmt::format("unknown provider '{}'", config.provider));
}

// ---------------------------------------------------------------------------
// Stages

DecodeResult decode_capture(std::span<const std::uint8_t> capture_bytes, std::uint16_t port) {
  DecodeResult result;
  Capture capture = read_capture(capture_bytes);
  result.stats = capture.stats;
  const auto frames = filter_bacnet(capture.frames, port);
  result.non_bacnet = capture.frames.size() - frames.size();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    PacketStatus status;
    status.frame = i + 1;
    try {
      result.packets.push_back(decode_packet(frames[i]));
    } catch (const Error& e) {
      status.ok = false;
      status.error_kind = std::string(to_string(e.kind()));
      status.message = e.what();
    }
    result.statuses.push_back(std::move(status));
  }
  return result;
}

KbBuildResult build_knowledge_index(const fs::path& corpus_dir, const ChunkingConfig& chunking,
                                    EmbeddingProvider& provider, std::int64_t build_timestamp) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) {
    throw Error(ErrorKind::NoCorpus,
                fmt::format("corpus directory '{}' does not exist", corpus_dir.string()));
  }
  std::vector<fs::path> documents;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".md" || ext == ".markdown" || ext == ".txt") documents.push_back(entry.path());
  }
  if (documents.empty()) {
    throw Error(ErrorKind::NoCorpus,
                fmt::format("no .md or .txt documents in '{}'", corpus_dir.string()));
  }
  std::sort(documents.begin(), documents.end());

  KbBuildResult result;
  result.index = VectorIndex(provider.dim(), IndexMetadata{provider.id(), build_timestamp});
  result.documents = documents.size();
  constexpr std::size_t kBatch = 32;
  for (const fs::path& doc : documents) {
    const std::string name = doc.filename().string();
    const auto chunks = chunk_document(read_text(doc), name, chunking);
    for (std::size_t start = 0; start < chunks.size(); start += kBatch) {
      const std::size_t end = std::min(start + kBatch, chunks.size());
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) texts.push_back(normalize_whitespace(chunks[i].text));
      std::vector<Vector> vectors;
      try {
        vectors = provider.embed_batch(texts);
        if (vectors.size() != texts.size()) {
          throw Error(ErrorKind::EmbedTransport,
                      fmt::format("provider returned {} vectors for {} chunks", vectors.size(),
                                  texts.size()));
        }
      } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("document '{}', chunks {}-{}: {}", name, start + 1, end,
                                          e.what()));
      }
      for (std::size_t i = start; i < end; ++i) {
        try {
          result.index.add(chunks[i], std::move(vectors[i - start]));
        } catch (const Error& e) {
          throw Error(e.kind(), fmt::format("document '{}', chunk {}: {}", name, i + 1, e.what()));
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Explain

ExplainResult run_explain(const fs::path& pcap_path, const PipelineConfig& config,
                          ChatClient* client_override) {
  ExplainResult result;
  ojson audit;
  audit["schema_version"] = kAuditSchemaVersion;
  audit["run_id"] = make_run_id();
  audit["status"] = "running";
  audit["mode"] = to_string(config.mode);
  audit["input"] = {{"path", pcap_path.string()}, {"sha256", nullptr}};
  audit["config_hash"] = config.hash();
  audit["prompt_template_hash"] = nullptr;
  audit["packets"] = ojson::array();
  audit["bundle"] = nullptr;
  audit["summary"] = nullptr;
  audit["timings_ms"] = ojson::object();

  std::string stage;
  auto time_stage = [&](const char* name, auto&& fn) {
    stage = name;
    const auto start = std::chrono::steady_clock::now();
    fn();
    audit["timings_ms"][name] = elapsed_ms(start);
  };

  try {
    std::unique_ptr<EmbeddingProvider> provider;
    std::unique_ptr<ChatClient> own_client;
    ChatClient* client = client_override;
    PromptTemplate tmpl = default_prompt_template();
    Registry registry;
    ServiceKB kb;
    VectorIndex index;
    const SourceSet sources = sources_for(config.mode);

    time_stage("config", [&] {
      validate_for_explain(config, client == nullptr);
      if (config.prompt_template_path) tmpl = load_prompt_template(*config.prompt_template_path);
      audit["prompt_template_hash"] = tmpl.hash();
      if (!client) {
        own_client = std::make_unique<HttpChatClient>(config.llm);
        client = own_client.get();
      }
    });

    time_stage("load", [&] {
      if (config.registry_path) registry = load_registry(*config.registry_path);
      if (sources.service) kb = load_service_kb(*config.service_kb_path);
      if (sources.retrieved) {
        index = load_index(*config.index_path);
        provider = make_embedding_provider(config.embedding);
        if (index.dim() != provider->dim()) {
          throw Error(ErrorKind::Configuration,
                      fmt::format("index dimension {} does not match embedding dimension {}",
                                  index.dim(), provider->dim()));
        }
        if (index.metadata().embedder_id != provider->id()) {
          throw Error(ErrorKind::Configuration,
                      fmt::format("index was built with embedder '{}', config uses '{}'",
                                  index.metadata().embedder_id, provider->id()));
        }
      }
    });

    DecodeResult decoded;
    time_stage("decode", [&] {
      const Bytes bytes = read_file_bytes(pcap_path);
      audit["input"]["sha256"] = to_hex(sha256(bytes));
      decoded = decode_capture(bytes, config.bacnet_port);
      for (const PacketStatus& s : decoded.statuses) {
        ojson row = {{"frame", s.frame}, {"status", s.ok ? "ok" : "error"}};
        if (!s.ok) {
          row["error_kind"] = s.error_kind;
          row["message"] = s.message;
        }
        audit["packets"].push_back(std::move(row));
      }
      audit["capture"] = {{"records", decoded.stats.records},
                          {"skipped", decoded.stats.skipped()},
                          {"non_bacnet", decoded.non_bacnet}};
    });

    std::vector<DecodedPacket> packets;
    time_stage("annotate", [&] {
      packets.reserve(decoded.packets.size());
      for (const auto& p : decoded.packets) packets.push_back(annotate(p, registry));
    });

    std::vector<ContextItem> items;
    time_stage("context", [&] {
      RetrievalSetup setup{sources.retrieved ? &index : nullptr, provider.get(), config.retrieval_k};
      items = gather_context(packets, sources.service ? &kb : nullptr, setup, sources);
    });

    ContextBundle bundle;
    time_stage("budget", [&] {
      bundle = enforce_budget(dedupe(items), config.effective_budget());
      result.bundle_json = bundle_to_json(bundle);
      audit["bundle"] = ojson::parse(result.bundle_json);
      audit["bundle"]["deduplicated"] = items.size() - (bundle.items.size() + bundle.dropped);
    });

    Prompt prompt;
    time_stage("prompt", [&] {
      prompt = build_prompt(bundle, render_packet_text(packets), config.mode, tmpl);
      audit["prompt_sha256"] = sha256_hex(prompt.system_text + "\n" + prompt.user_text());
    });

    time_stage("summarize", [&] {
      const Summary summary = summarize(prompt, config.llm, *client);
      result.summary_text = summary.text;
      ojson s = {{"text", summary.text},
                 {"model_id", summary.model_id},
                 {"mode", to_string(summary.mode)},
                 {"created_at", summary.created_at},
                 {"attempts", summary.attempts},
                 {"usage", nullptr}};
      if (summary.usage) {
        s["usage"] = {{"prompt_tokens", summary.usage->prompt_tokens},
                      {"completion_tokens", summary.usage->completion_tokens}};
      }
      audit["summary"] = std::move(s);
    });
    result.ok = true;
    audit["status"] = "ok";
  } catch (const Error& e) {
    result.error = e;
    result.failed_stage = stage;
    audit["status"] = "failed";
    audit["failed_stage"] = stage;
    audit["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  }
  result.audit_json = audit.dump(2);
  return result;
}

}  // namespace bacsum
