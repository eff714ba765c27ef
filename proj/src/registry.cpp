#include "bacsum/registry.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "bacsum/bacnet_tables.hpp"
#include "bacsum/error.hpp"

namespace bacsum {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(std::size_t index, std::string_view field, std::string_view what) {
  throw Error(ErrorKind::Validation, fmt::format("[{}].{}: {}", index, field, what));
}

const json& required(const json& item, std::size_t index, const char* field) {
  auto it = item.find(field);
  if (it == item.end()) invalid(index, field, "missing required field");
  return *it;
}

std::string required_string(const json& item, std::size_t index, const char* field) {
  const json& v = required(item, index, field);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    invalid(index, field, "expected non-empty string");
  }
  return v.get<std::string>();
}

DeviceRecord parse_record(const json& item, std::size_t index) {
  if (!item.is_object()) {
    throw Error(ErrorKind::Validation, fmt::format("[{}]: expected object", index));
  }
  DeviceRecord record;

  const json& type = required(item, index, "object_type");
  if (type.is_string()) {
    const auto code = tables::object_type_code(type.get<std::string>());
    if (!code) invalid(index, "object_type", fmt::format("unknown object type '{}'", type.get<std::string>()));
    record.key.object_type = *code;
  } else if (type.is_number_unsigned() && type.get<std::uint64_t>() <= kMaxObjectType) {
    record.key.object_type = static_cast<std::uint16_t>(type.get<std::uint64_t>());
  } else {
    invalid(index, "object_type", "expected object type name or code in [0, 1023]");
  }

  const json& instance = required(item, index, "instance");
  if (!instance.is_number_unsigned() || instance.get<std::uint64_t>() > kMaxInstance) {
    invalid(index, "instance", fmt::format("expected integer in [0, {}]", kMaxInstance));
  }
  record.key.instance = static_cast<std::uint32_t>(instance.get<std::uint64_t>());

  record.name = required_string(item, index, "name");
  record.device_type = required_string(item, index, "device_type");

  if (auto it = item.find("ip"); it != item.end() && !it->is_null()) {
    if (!it->is_string()) invalid(index, "ip", "expected dotted IPv4 string");
    try {
      record.ip = Ipv4Address::parse(it->get<std::string>());
    } catch (const Error& e) {
      invalid(index, "ip", e.what());
    }
  }
  if (auto it = item.find("notes"); it != item.end() && !it->is_null()) {
    if (!it->is_string()) invalid(index, "notes", "expected string");
    record.notes = it->get<std::string>();
  }
  return record;
}

}  // namespace

Registry Registry::from_records(std::vector<DeviceRecord> records, std::string source_path) {
  Registry registry;
  registry.source_path_ = std::move(source_path);
  for (auto& record : records) {
    const ObjectRef key = record.key;
    auto [it, inserted] = registry.records_.try_emplace(key, std::move(record));
    if (!inserted) {
      throw Error(ErrorKind::DuplicateRecord,
                  fmt::format("duplicate device record ({}, {}): '{}' and '{}'", key.type_name(),
                              key.instance, it->second.name, record.name));
    }
  }
  return registry;
}

const DeviceRecord* Registry::find(const ObjectRef& key) const noexcept {
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

const DeviceRecord* Registry::find_by_ip(const Ipv4Address& ip) const noexcept {
  for (const auto& [key, record] : records_) {
    if (record.ip && *record.ip == ip) return &record;
  }
  return nullptr;
}

Registry parse_registry(std::string_view json_text, std::string source_path) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, fmt::format("registry is not valid JSON: {}", e.what()));
  }
  if (!doc.is_array()) throw Error(ErrorKind::Validation, "registry must be a JSON array");

  std::vector<DeviceRecord> records;
  std::map<ObjectRef, std::size_t> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    DeviceRecord record = parse_record(doc[i], i);
    if (auto [it, inserted] = seen.emplace(record.key, i); !inserted) {
      throw Error(ErrorKind::DuplicateRecord,
                  fmt::format("duplicate device record ({}, {}): entries [{}] '{}' and [{}] '{}'",
                              record.key.type_name(), record.key.instance, it->second,
                              records[it->second].name, i, record.name));
    }
    records.push_back(std::move(record));
  }
  return Registry::from_records(std::move(records), std::move(source_path));
}

Registry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open registry '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_registry(buffer.str(), path.string());
}

DecodedPacket annotate(const DecodedPacket& packet, const Registry& registry) {
  DecodedPacket out = packet;
  out.annotations.clear();
  out.source_device.reset();
  if (out.apdu) {
    for (const ObjectRef& ref : out.apdu->object_refs()) {
      if (out.annotation_for(ref)) continue;
      if (const DeviceRecord* record = registry.find(ref)) {
        out.annotations.push_back(DeviceAnnotation{ref, *record});
      }
    }
  }
  if (const DeviceRecord* record = registry.find_by_ip(out.frame.src_ip)) {
    out.source_device = *record;
  }
  return out;
}

}  // namespace bacsum
