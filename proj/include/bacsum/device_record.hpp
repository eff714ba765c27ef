#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "bacsum/capture.hpp"

namespace bacsum {

inline constexpr std::uint32_t kMaxObjectType = 1023;
inline constexpr std::uint32_t kMaxInstance = 4194302;  // 4194303 is the wildcard

/// BACnet object identifier: 10-bit type, 22-bit instance.
struct ObjectRef {
  std::uint16_t object_type = 0;
  std::uint32_t instance = 0;

  /// Table name, or "unknown (N)".
  std::string type_name() const;

  friend auto operator<=>(const ObjectRef&, const ObjectRef&) = default;
};

ObjectRef decode_object_identifier(std::uint32_t encoded) noexcept;

/// Throws Error(Precondition) when either field is out of range.
std::uint32_t encode_object_identifier(const ObjectRef& ref);

struct DeviceRecord {
  ObjectRef key;
  std::string name;
  std::string device_type;
  std::optional<Ipv4Address> ip;
  std::optional<std::string> notes;

  friend bool operator==(const DeviceRecord&, const DeviceRecord&) = default;
};

}  // namespace bacsum
