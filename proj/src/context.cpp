#include "bacsum/context.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "bacsum/error.hpp"
#include "bacsum/render.hpp"

namespace bacsum {
namespace {

int priority_of(ContextKind kind) {
  switch (kind) {
    case ContextKind::Service: return 0;
    case ContextKind::Retrieved: return 1;
    case ContextKind::Device: return 2;
  }
  return 3;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::M1NoContext: return "m1";
    case Mode::M2RagOnly: return "m2";
    case Mode::M3ServiceOnly: return "m3";
    case Mode::M4Full: return "m4";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "m1") return Mode::M1NoContext;
  if (text == "m2") return Mode::M2RagOnly;
  if (text == "m3") return Mode::M3ServiceOnly;
  if (text == "m4") return Mode::M4Full;
  return std::nullopt;
}

SourceSet sources_for(Mode mode) {
  switch (mode) {
    case Mode::M1NoContext: return {};
    case Mode::M2RagOnly: return {false, true, false};
    case Mode::M3ServiceOnly: return {true, false, false};
    case Mode::M4Full: return {true, true, true};
  }
  return {};
}

std::string_view to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::Service: return "service";
    case ContextKind::Retrieved: return "retrieved";
    case ContextKind::Device: return "device";
  }
  return "?";
}

std::string device_context_text(const DeviceAnnotation& annotation) {
  const DeviceRecord& r = annotation.record;
  std::string text = fmt::format("{} {} is \"{}\" (type {})", annotation.key.type_name(),
                                 annotation.key.instance, r.name, r.device_type);
  if (r.ip) text += fmt::format(", IP {}", r.ip->to_string());
  text += '.';
  if (r.notes && !r.notes->empty()) text += ' ' + *r.notes;
  return text;
}

std::vector<ContextItem> gather_context(std::span<const DecodedPacket> packets,
                                        const ServiceKB* kb, const RetrievalSetup& retrieval,
                                        SourceSet sources) {
  const bool use_index = sources.retrieved && retrieval.index && !retrieval.index->empty();
  if (use_index && !retrieval.provider) {
    throw Error(ErrorKind::Configuration, "retrieval requires an embedding provider");
  }
  if (use_index && retrieval.provider->dim() != retrieval.index->dim()) {
    throw Error(ErrorKind::Configuration,
                fmt::format("embedding provider dimension {} does not match index dimension {}",
                            retrieval.provider->dim(), retrieval.index->dim()));
  }

  std::vector<ContextItem> items;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const DecodedPacket& packet = packets[i];
    if (sources.service && kb) {
      if (const ServiceEntry* entry = lookup_service(*kb, packet)) {
        items.push_back({ContextKind::Service,
                         service_context_text(*entry, packet.apdu->pdu_type), i,
                         entry->service_name});
      }
    }
    if (use_index) {
      const std::string query = render_apdu_lines(packet, false);
      if (!normalize_whitespace(query).empty()) {
        try {
          const Vector v = embed(*retrieval.provider, query);
          const auto candidates = index_search(*retrieval.index, v, retrieval.k);
          if (!candidates.empty()) {
            const RetrievalResult best = keyword_rerank(query, candidates);
            items.push_back({ContextKind::Retrieved, best.chunk.text, i, best.chunk.id_hex()});
          }
        } catch (const Error& e) {
          throw Error(e.kind(), fmt::format("frame {}: {}", i + 1, e.what()));
        }
      }
    }
    if (sources.device) {
      for (const DeviceAnnotation& a : packet.annotations) {
        items.push_back({ContextKind::Device, device_context_text(a), i,
                         fmt::format("{}:{}", a.key.type_name(), a.key.instance)});
      }
    }
  }
  return items;
}

std::vector<ContextItem> dedupe(std::span<const ContextItem> items) {
  std::vector<ContextItem> out;
  std::unordered_set<std::string> seen;
  for (const ContextItem& item : items) {
    if (seen.insert(normalize_whitespace(item.text)).second) out.push_back(item);
  }
  return out;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::vector<ContextItem> priority_sorted(std::span<const ContextItem> items) {
  std::vector<ContextItem> out(items.begin(), items.end());
  std::stable_sort(out.begin(), out.end(), [](const ContextItem& a, const ContextItem& b) {
    const int pa = priority_of(a.kind);
    const int pb = priority_of(b.kind);
    return pa != pb ? pa < pb : a.packet_index < b.packet_index;
  });
  return out;
}

ContextBundle enforce_budget(std::span<const ContextItem> items, std::size_t budget) {
  if (budget == 0) throw Error(ErrorKind::Precondition, "context budget must be positive");
  ContextBundle bundle;
  for (ContextItem& item : priority_sorted(items)) {
    const std::size_t cost = estimate_tokens(item.text);
    if (bundle.token_estimate + cost <= budget) {
      bundle.token_estimate += cost;
      bundle.items.push_back(std::move(item));
    } else {
      ++bundle.dropped;
    }
  }
  return bundle;
}

std::string bundle_to_json(const ContextBundle& bundle, int indent) {
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const ContextItem& item : bundle.items) {
    items.push_back({{"kind", to_string(item.kind)},
                     {"packet_index", item.packet_index},
                     {"source_id", item.source_id},
                     {"text", item.text}});
  }
  nlohmann::ordered_json doc = {{"items", std::move(items)},
                                {"token_estimate", bundle.token_estimate},
                                {"dropped", bundle.dropped}};
  return doc.dump(indent);
}

}  // namespace bacsum
