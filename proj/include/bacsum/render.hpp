#pragma once

#include <span>
#include <string>

#include "bacsum/bacnet.hpp"

namespace bacsum {

struct RenderOptions {
  /// Adds per-frame link lines (IP:port, OUI). Off by default.
  bool include_link_header = false;
};

/// Formatted packet text: "Packet:" header, then one "Frame N" block per
/// packet. LF line endings, deterministic for equal input.
std::string render_packet_text(std::span<const DecodedPacket> packets,
                               const RenderOptions& options = {});

/// The indented APDU lines of one packet (service choice, objects,
/// properties, values, errors). Used as the retrieval query text.
std::string render_apdu_lines(const DecodedPacket& packet, bool with_annotations = true);

/// "Present Value" from "present-value".
std::string title_case(std::string_view hyphenated);

std::string format_primitive(const PrimitiveValue& value);
std::string_view primitive_type_name(const PrimitiveValue& value);

}  // namespace bacsum
