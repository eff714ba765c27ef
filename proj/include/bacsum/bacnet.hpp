#pragma once

// BACnet/IP decoding: BVLC (Annex J) -> NPDU -> APDU.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bacsum/capture.hpp"
#include "bacsum/device_record.hpp"

namespace bacsum {

enum class PduType : std::uint8_t {
  ConfirmedRequest = 0,
  UnconfirmedRequest = 1,
  SimpleAck = 2,
  ComplexAck = 3,
  SegmentAck = 4,
  Error = 5,
  Reject = 6,
  Abort = 7,
};

/// "Confirmed-REQ", "Unconfirmed-REQ", "Simple-ACK", ...
std::string_view to_string(PduType type) noexcept;

enum class ServiceClass { Confirmed, Unconfirmed };

/// Service class addressed by a PDU type; nullopt for Segment-ACK, Reject, Abort.
std::optional<ServiceClass> service_class_of(PduType type) noexcept;

struct ServiceChoice {
  std::uint8_t code = 0;
  std::string name;  // empty when the code is not in the table

  std::string display() const;  // "writeProperty (15)" or "unknown (N)"

  friend bool operator==(const ServiceChoice&, const ServiceChoice&) = default;
};

// Primitive application values.
struct NullValue {
  friend bool operator==(NullValue, NullValue) = default;
};
struct UnsignedValue {
  std::uint64_t value = 0;
  friend bool operator==(UnsignedValue, UnsignedValue) = default;
};
struct SignedValue {
  std::int64_t value = 0;
  friend bool operator==(SignedValue, SignedValue) = default;
};
struct EnumeratedValue {
  std::uint32_t value = 0;
  friend bool operator==(EnumeratedValue, EnumeratedValue) = default;
};
/// Tags without a structured decoding (double, octet/bit string, date, time).
struct OpaqueValue {
  std::uint8_t app_tag = 0;
  Bytes data;
  friend bool operator==(const OpaqueValue&, const OpaqueValue&) = default;
};

using PrimitiveValue = std::variant<NullValue, bool, UnsignedValue, SignedValue, float,
                                    EnumeratedValue, ObjectRef, std::string, OpaqueValue>;

// Decoded APDU elements, in encoding order.
struct ObjectIdElement {
  ObjectRef ref;
  friend bool operator==(const ObjectIdElement&, const ObjectIdElement&) = default;
};
struct PropertyIdElement {
  std::uint32_t property = 0;
  friend bool operator==(const PropertyIdElement&, const PropertyIdElement&) = default;
};
struct PropertyValueElement {
  std::optional<std::uint32_t> property;  // property the value belongs to, if known
  PrimitiveValue value;
  friend bool operator==(const PropertyValueElement&, const PropertyValueElement&) = default;
};
struct PriorityElement {
  std::uint32_t priority = 0;
  friend bool operator==(const PriorityElement&, const PriorityElement&) = default;
};
struct ArrayIndexElement {
  std::uint32_t index = 0;
  friend bool operator==(const ArrayIndexElement&, const ArrayIndexElement&) = default;
};
/// A named service parameter, e.g. "Lifetime".
struct FieldElement {
  std::string label;
  PrimitiveValue value;
  friend bool operator==(const FieldElement&, const FieldElement&) = default;
};
struct ErrorElement {
  std::uint32_t error_class = 0;
  std::uint32_t error_code = 0;
  friend bool operator==(const ErrorElement&, const ErrorElement&) = default;
};
struct ReasonElement {
  bool reject = true;  // false: abort
  std::uint32_t reason = 0;
  friend bool operator==(const ReasonElement&, const ReasonElement&) = default;
};
/// A tag the service schema does not describe.
struct RawTagElement {
  bool context = true;
  std::uint32_t tag = 0;
  Bytes data;
  friend bool operator==(const RawTagElement&, const RawTagElement&) = default;
};

using ApduElement =
    std::variant<ObjectIdElement, PropertyIdElement, PropertyValueElement, PriorityElement,
                 ArrayIndexElement, FieldElement, ErrorElement, ReasonElement, RawTagElement>;

struct BvlcInfo {
  std::uint8_t function = 0;
  std::uint16_t length = 0;
  std::optional<std::array<std::uint8_t, 6>> forwarded_from;  // Forwarded-NPDU origin

  friend bool operator==(const BvlcInfo&, const BvlcInfo&) = default;
};

struct NpduInfo {
  std::uint8_t version = 1;
  std::uint8_t control = 0;
  std::optional<std::uint16_t> dnet;
  Bytes dadr;
  std::optional<std::uint16_t> snet;
  Bytes sadr;
  std::optional<std::uint8_t> hop_count;
  bool expects_reply = false;
  std::uint8_t priority = 0;
  std::optional<std::uint8_t> network_message;  // set for network-layer messages (no APDU)
  std::optional<std::uint16_t> vendor_id;

  friend bool operator==(const NpduInfo&, const NpduInfo&) = default;
};

struct ApduInfo {
  PduType pdu_type = PduType::ConfirmedRequest;
  std::optional<ServiceChoice> service_choice;
  std::optional<std::uint8_t> invoke_id;
  bool segmented = false;  // segmented messages are not reassembled; body left undecoded
  std::vector<ApduElement> elements;
  Bytes raw;
  std::size_t decoded_length = 0;  // elements cover raw[0, decoded_length)

  bool has_undecoded_suffix() const noexcept { return decoded_length < raw.size(); }
  ByteSpan undecoded_suffix() const noexcept {
    return ByteSpan(raw).subspan(std::min(decoded_length, raw.size()));
  }
  std::vector<ObjectRef> object_refs() const;

  friend bool operator==(const ApduInfo&, const ApduInfo&) = default;
};

struct DeviceAnnotation {
  ObjectRef key;
  DeviceRecord record;

  friend bool operator==(const DeviceAnnotation&, const DeviceAnnotation&) = default;
};

struct DecodedPacket {
  RawFrame frame;
  BvlcInfo bvlc;
  NpduInfo npdu;
  std::optional<ApduInfo> apdu;  // absent for network-layer messages
  std::vector<DeviceAnnotation> annotations;
  std::optional<DeviceRecord> source_device;

  const DeviceAnnotation* annotation_for(const ObjectRef& ref) const noexcept;
};

/// Decodes BVLC, NPDU and APDU from a BACnet/IP frame payload.
/// Errors: MalformedBvlc, UnsupportedBvlcFunction, MalformedNpdu,
/// UnsupportedVersion, MalformedApdu.
DecodedPacket decode_packet(const RawFrame& frame);

/// Decodes an APDU on its own (no BVLC/NPDU framing).
ApduInfo decode_apdu(ByteSpan apdu);

}  // namespace bacsum
