#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bacsum/bacnet.hpp"
#include "bacsum/retrieval.hpp"
#include "bacsum/service_kb.hpp"

namespace bacsum {

enum class Mode { M1NoContext, M2RagOnly, M3ServiceOnly, M4Full };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);  // "m1".."m4"

/// Context sources enabled by a mode.
struct SourceSet {
  bool service = false;
  bool retrieved = false;
  bool device = false;
};
SourceSet sources_for(Mode mode);

enum class ContextKind { Service, Retrieved, Device };
std::string_view to_string(ContextKind kind);

struct ContextItem {
  ContextKind kind = ContextKind::Service;
  std::string text;
  std::size_t packet_index = 0;  // position in the packet file
  std::string source_id;         // service name, chunk id or device key

  friend bool operator==(const ContextItem&, const ContextItem&) = default;
};

struct ContextBundle {
  std::vector<ContextItem> items;
  std::size_t token_estimate = 0;
  std::size_t dropped = 0;

  friend bool operator==(const ContextBundle&, const ContextBundle&) = default;
};

struct RetrievalSetup {
  const VectorIndex* index = nullptr;
  EmbeddingProvider* provider = nullptr;
  std::size_t k = 3;
};

/// Per packet, in order: the service entry (if any), the keyword-reranked
/// chunk (if the index is non-empty), then one item per device annotation.
/// Null `kb` or `retrieval.index` disables that source. Errors from
/// embedding are rethrown with the packet index in the message.
std::vector<ContextItem> gather_context(std::span<const DecodedPacket> packets,
                                        const ServiceKB* kb, const RetrievalSetup& retrieval,
                                        SourceSet sources);

std::string device_context_text(const DeviceAnnotation& annotation);

/// Keeps the first item of each whitespace-normalized text, in order.
std::vector<ContextItem> dedupe(std::span<const ContextItem> items);

/// ceil(chars / 4).
std::size_t estimate_tokens(std::string_view text);

/// Walks items in priority order (service, retrieved, device; packet order
/// within a kind) and keeps each one that still fits. Throws
/// Error(Precondition) for budget 0.
ContextBundle enforce_budget(std::span<const ContextItem> items, std::size_t budget);

/// Stable priority order used by enforce_budget.
std::vector<ContextItem> priority_sorted(std::span<const ContextItem> items);

std::string bundle_to_json(const ContextBundle& bundle, int indent = -1);

}  // namespace bacsum
