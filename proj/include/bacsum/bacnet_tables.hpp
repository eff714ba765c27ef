#pragma once

// BACnet enumeration tables (ASHRAE 135 object types, properties, services,
// error classes/codes, reject and abort reasons). Lookups return an empty
// view for codes the table does not know.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace bacsum::tables {

struct NamedCode {
  std::uint32_t code;
  std::string_view name;
};

std::string_view object_type_name(std::uint32_t code) noexcept;
std::optional<std::uint16_t> object_type_code(std::string_view name) noexcept;

std::string_view property_name(std::uint32_t code) noexcept;
std::string_view confirmed_service_name(std::uint32_t code) noexcept;
std::string_view unconfirmed_service_name(std::uint32_t code) noexcept;
std::string_view error_class_name(std::uint32_t code) noexcept;
std::string_view error_code_name(std::uint32_t code) noexcept;
std::string_view reject_reason_name(std::uint32_t code) noexcept;
std::string_view abort_reason_name(std::uint32_t code) noexcept;
std::string_view bvlc_function_name(std::uint32_t code) noexcept;
std::string_view network_message_name(std::uint32_t code) noexcept;

std::span<const NamedCode> confirmed_services() noexcept;
std::span<const NamedCode> unconfirmed_services() noexcept;

/// "name (code)", or "unknown (code)" when name is empty.
std::string format_named(std::string_view name, std::uint32_t code);

}  // namespace bacsum::tables
