#include "bacsum/render.hpp"

#include <cctype>

#include <fmt/format.h>

#include "bacsum/bacnet_tables.hpp"

namespace bacsum {
namespace {

constexpr std::string_view kIndent = "    ";

std::string hex(ByteSpan data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) fmt::format_to(std::back_inserter(out), "{:02x}", b);
  return out;
}

std::string property_display(std::uint32_t property) {
  return tables::format_named(tables::property_name(property), property);
}

std::string value_line(const PropertyValueElement& pv) {
  std::string name;
  if (pv.property) {
    name = std::string(tables::property_name(*pv.property));
    if (name.empty()) name = fmt::format("property-{}", *pv.property);
  }
  if (std::holds_alternative<NullValue>(pv.value)) {
    return fmt::format("{}: NULL", name.empty() ? "value" : name);
  }
  return fmt::format("{} ({}): {}", name.empty() ? "Value" : title_case(name),
                     primitive_type_name(pv.value), format_primitive(pv.value));
}

struct LineVisitor {
  const DecodedPacket& packet;
  bool with_annotations;
  std::string& out;

  void line(const std::string& text) const {
    out += kIndent;
    out += text;
    out += '\n';
  }

  void operator()(const ObjectIdElement& e) const {
    std::string text = fmt::format("ObjectIdentifier: {}, {}", e.ref.type_name(), e.ref.instance);
    if (with_annotations) {
      if (const auto* a = packet.annotation_for(e.ref)) {
        text += fmt::format(", Name :{}, Type :{}", a->record.name, a->record.device_type);
      }
    }
    line(text);
  }
  void operator()(const PropertyIdElement& e) const {
    line("Property Identifier: " + property_display(e.property));
  }
  void operator()(const PropertyValueElement& e) const { line(value_line(e)); }
  void operator()(const PriorityElement& e) const {
    line(fmt::format("Priority: (Unsigned) {}", e.priority));
  }
  void operator()(const ArrayIndexElement& e) const {
    line(fmt::format("Property Array Index: (Unsigned) {}", e.index));
  }
  void operator()(const FieldElement& e) const {
    line(fmt::format("{}: {}", e.label, format_primitive(e.value)));
  }
  void operator()(const ErrorElement& e) const {
    line("Error Class: " + tables::format_named(tables::error_class_name(e.error_class),
                                                e.error_class));
    line("Error Code: " +
         tables::format_named(tables::error_code_name(e.error_code), e.error_code));
  }
  void operator()(const ReasonElement& e) const {
    if (e.reject) {
      line("Reject Reason: " +
           tables::format_named(tables::reject_reason_name(e.reason), e.reason));
    } else {
      line("Abort Reason: " + tables::format_named(tables::abort_reason_name(e.reason), e.reason));
    }
  }
  void operator()(const RawTagElement& e) const {
    line(fmt::format("{} Tag [{}]: {}", e.context ? "Context" : "Application", e.tag,
                     e.data.empty() ? std::string("(empty)") : "0x" + hex(e.data)));
  }
};

}  // namespace

std::string title_case(std::string_view hyphenated) {
  std::string out;
  bool start = true;
  for (char c : hyphenated) {
    if (c == '-' || c == '_') {
      out += ' ';
      start = true;
      continue;
    }
    out += start ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
    start = false;
  }
  return out;
}

std::string_view primitive_type_name(const PrimitiveValue& value) {
  struct Visitor {
    std::string_view operator()(NullValue) const { return "null"; }
    std::string_view operator()(bool) const { return "boolean"; }
    std::string_view operator()(UnsignedValue) const { return "unsigned"; }
    std::string_view operator()(SignedValue) const { return "signed"; }
    std::string_view operator()(float) const { return "real"; }
    std::string_view operator()(EnumeratedValue) const { return "enumerated"; }
    std::string_view operator()(const ObjectRef&) const { return "object-identifier"; }
    std::string_view operator()(const std::string&) const { return "character-string"; }
    std::string_view operator()(const OpaqueValue& v) const {
      switch (v.app_tag) {
        case 5: return "double";
        case 6: return "octet-string";
        case 7: return "character-string";
        case 8: return "bit-string";
        case 10: return "date";
        case 11: return "time";
        default: return "application-tag";
      }
    }
  };
  return std::visit(Visitor{}, value);
}

std::string format_primitive(const PrimitiveValue& value) {
  struct Visitor {
    std::string operator()(NullValue) const { return "NULL"; }
    std::string operator()(bool v) const { return v ? "TRUE" : "FALSE"; }
    std::string operator()(UnsignedValue v) const { return fmt::format("{}", v.value); }
    std::string operator()(SignedValue v) const { return fmt::format("{}", v.value); }
    std::string operator()(float v) const { return fmt::format("{}", v); }
    std::string operator()(EnumeratedValue v) const { return fmt::format("{}", v.value); }
    std::string operator()(const ObjectRef& v) const {
      return fmt::format("{}, {}", v.type_name(), v.instance);
    }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(const OpaqueValue& v) const { return "0x" + hex(v.data); }
  };
  return std::visit(Visitor{}, value);
}

std::string render_apdu_lines(const DecodedPacket& packet, bool with_annotations) {
  std::string out;
  LineVisitor visitor{packet, with_annotations, out};
  if (!packet.apdu) {
    if (packet.npdu.network_message) {
      visitor.line("Network Message: " +
                   tables::format_named(tables::network_message_name(*packet.npdu.network_message),
                                        *packet.npdu.network_message));
    }
    return out;
  }
  const ApduInfo& apdu = *packet.apdu;
  if (apdu.service_choice) visitor.line("Service Choice: " + apdu.service_choice->display());
  for (const auto& element : apdu.elements) std::visit(visitor, element);
  if (apdu.segmented) visitor.line("Segmented: message not reassembled");
  if (apdu.has_undecoded_suffix()) visitor.line("Undecoded: " + hex(apdu.undecoded_suffix()));
  return out;
}

std::string render_packet_text(std::span<const DecodedPacket> packets,
                               const RenderOptions& options) {
  std::string out = "Packet:\n";
  std::size_t number = 1;
  for (const auto& packet : packets) {
    fmt::format_to(std::back_inserter(out), "Frame {}\n", number++);
    if (options.include_link_header) {
      const auto& f = packet.frame;
      fmt::format_to(std::back_inserter(out), "  src :{}:{} oui {}\n", f.src_ip.to_string(),
                     f.src_port, f.src_mac.oui_string());
      fmt::format_to(std::back_inserter(out), "  dst :{}:{} oui {}\n", f.dst_ip.to_string(),
                     f.dst_port, f.dst_mac.oui_string());
    }
    if (packet.source_device) {
      fmt::format_to(std::back_inserter(out), "  source_device :Name :{}, Type :{}\n",
                     packet.source_device->name, packet.source_device->device_type);
    }
    if (packet.apdu) {
      fmt::format_to(std::back_inserter(out), "  apdu_type :{}\n", to_string(packet.apdu->pdu_type));
      out += "  apdu :\n";
    } else {
      out += "  npdu :\n";
    }
    out += render_apdu_lines(packet, true);
  }
  return out;
}

}  // namespace bacsum
