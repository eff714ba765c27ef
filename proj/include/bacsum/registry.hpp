#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bacsum/bacnet.hpp"
#include "bacsum/device_record.hpp"

namespace bacsum {

/// Site device database keyed by (object type, instance). Immutable after
/// construction.
class Registry {
 public:
  Registry() = default;

  /// Throws Error(DuplicateRecord) when two records share a key.
  static Registry from_records(std::vector<DeviceRecord> records, std::string source_path = {});

  const DeviceRecord* find(const ObjectRef& key) const noexcept;
  const DeviceRecord* find_by_ip(const Ipv4Address& ip) const noexcept;

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::string& source_path() const noexcept { return source_path_; }
  const std::map<ObjectRef, DeviceRecord>& records() const noexcept { return records_; }

 private:
  std::map<ObjectRef, DeviceRecord> records_;
  std::string source_path_;
};

/// Parses the JSON registry format: an array of objects with "object_type"
/// (name or code), "instance", "name", "device_type", optional "ip", "notes".
Registry parse_registry(std::string_view json_text, std::string source_path = {});
Registry load_registry(const std::filesystem::path& path);

/// Attaches a DeviceRecord for every APDU object reference found in the
/// registry, and a source-device record when the frame's source IP matches.
/// Existing annotations are recomputed, never accumulated.
DecodedPacket annotate(const DecodedPacket& packet, const Registry& registry);

}  // namespace bacsum
