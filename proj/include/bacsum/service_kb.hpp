#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bacsum/bacnet.hpp"

namespace bacsum {

struct ServiceEntry {
  std::string service_name;
  std::uint8_t service_code = 0;
  ServiceClass pdu_class = ServiceClass::Confirmed;
  std::string summary;

  friend bool operator==(const ServiceEntry&, const ServiceEntry&) = default;
};

inline constexpr std::size_t kMaxSummarySentences = 5;

/// Case-folds and strips hyphens/underscores: "who-Is" -> "whois".
std::string normalize_service_name(std::string_view name);

/// Service knowledge base, indexed by normalized name and by (class, code).
class ServiceKB {
 public:
  ServiceKB() = default;

  /// Throws Error(DuplicateEntry) or Error(Validation).
  static ServiceKB from_entries(std::vector<ServiceEntry> entries);

  const ServiceEntry* find(ServiceClass cls, std::uint8_t code) const noexcept;
  const ServiceEntry* find(std::string_view name) const noexcept;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<ServiceEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<ServiceEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::map<std::pair<ServiceClass, std::uint8_t>, std::size_t> by_code_;
};

/// JSON array of {"service_name", "service_code", "pdu_class", "summary"}.
ServiceKB parse_service_kb(std::string_view json_text);
ServiceKB load_service_kb(const std::filesystem::path& path);

/// Resolves the packet's service by (class, code), falling back to the
/// service name. Misses (never errors) for packets without a service choice.
const ServiceEntry* lookup_service(const ServiceKB& kb, const DecodedPacket& packet) noexcept;

/// Context text for a resolved service. Error PDUs get a trailing note that
/// the packet reports a failure of that service.
std::string service_context_text(const ServiceEntry& entry, PduType pdu_type);

}  // namespace bacsum
