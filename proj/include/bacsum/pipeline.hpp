#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bacsum/bacnet.hpp"
#include "bacsum/capture.hpp"
#include "bacsum/context.hpp"
#include "bacsum/error.hpp"
#include "bacsum/retrieval.hpp"
#include "bacsum/summarizer.hpp"

namespace bacsum {

struct EmbeddingConfig {
  std::string provider = "hashed-bow";  // or "http"
  std::size_t dim = 384;
  HttpEmbeddingConfig http;
};

struct PipelineConfig {
  std::uint16_t bacnet_port = kDefaultBacnetPort;
  std::optional<std::filesystem::path> registry_path;
  std::optional<std::filesystem::path> service_kb_path;
  std::optional<std::filesystem::path> index_path;
  std::optional<std::filesystem::path> prompt_template_path;
  ChunkingConfig chunking;
  EmbeddingConfig embedding;
  std::size_t retrieval_k = 3;
  LlmConfig llm;
  Mode mode = Mode::M4Full;
  std::size_t context_window = 32768;
  std::optional<std::size_t> budget;  // default: 70% of context_window
  std::optional<std::filesystem::path> audit_path;

  std::size_t effective_budget() const;
  /// Canonical JSON (sorted keys, compact) of every field.
  std::string canonical_json() const;
  std::string hash() const;
};

/// Relative paths resolve against `base_dir`. Throws Error(Configuration).
PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Mode requirements: m2/m4 need an index, m3/m4 a service KB. With
/// `need_llm`, the chat endpoint and model must be set too.
void validate_for_explain(const PipelineConfig& config, bool need_llm);

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& config);

struct PacketStatus {
  std::size_t frame = 0;  // 1-based among BACnet frames
  bool ok = true;
  std::string error_kind;
  std::string message;
};

struct DecodeResult {
  std::vector<DecodedPacket> packets;
  std::vector<PacketStatus> statuses;
  CaptureStats stats;
  std::size_t non_bacnet = 0;
};

/// read_capture -> filter_bacnet -> decode_packet. Capture-level errors
/// throw; per-packet decode errors are recorded and the packet skipped.
DecodeResult decode_capture(std::span<const std::uint8_t> capture_bytes, std::uint16_t port);

struct KbBuildResult {
  VectorIndex index;
  std::size_t documents = 0;
};

/// Chunks and embeds every *.md / *.markdown / *.txt file in `corpus_dir`
/// (sorted by file name). Throws Error(NoCorpus) when there is none.
KbBuildResult build_knowledge_index(const std::filesystem::path& corpus_dir,
                                    const ChunkingConfig& chunking, EmbeddingProvider& provider,
                                    std::int64_t build_timestamp);

struct ExplainResult {
  bool ok = false;
  std::string summary_text;
  std::string bundle_json;
  std::string audit_json;
  std::optional<Error> error;
  std::string failed_stage;
};

/// The full explain pipeline. Never throws for stage failures; the result
/// carries the error and a partial audit record.
ExplainResult run_explain(const std::filesystem::path& pcap_path, const PipelineConfig& config,
                          ChatClient* client_override);

inline constexpr int kAuditSchemaVersion = 1;

}  // namespace bacsum
