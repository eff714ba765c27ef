#include "bacsum/bacnet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <span>

#include <fmt/format.h>

#include "bacsum/bacnet_tables.hpp"
#include "bacsum/error.hpp"

namespace bacsum {

std::string ObjectRef::type_name() const {
  const auto name = tables::object_type_name(object_type);
  if (name.empty()) return fmt::format("unknown ({})", object_type);
  return std::string(name);
}

ObjectRef decode_object_identifier(std::uint32_t encoded) noexcept {
  return ObjectRef{static_cast<std::uint16_t>(encoded >> 22), encoded & 0x3FFFFF};
}

std::uint32_t encode_object_identifier(const ObjectRef& ref) {
  if (ref.object_type > kMaxObjectType || ref.instance > 0x3FFFFF) {
    throw Error(ErrorKind::Precondition,
                fmt::format("object identifier out of range ({}, {})", ref.object_type,
                            ref.instance));
  }
  return (std::uint32_t{ref.object_type} << 22) | ref.instance;
}

std::string_view to_string(PduType type) noexcept {
  switch (type) {
    case PduType::ConfirmedRequest: return "Confirmed-REQ";
    case PduType::UnconfirmedRequest: return "Unconfirmed-REQ";
    case PduType::SimpleAck: return "Simple-ACK";
    case PduType::ComplexAck: return "Complex-ACK";
    case PduType::SegmentAck: return "Segment-ACK";
    case PduType::Error: return "Error";
    case PduType::Reject: return "Reject";
    case PduType::Abort: return "Abort";
  }
  return "unknown";
}

std::optional<ServiceClass> service_class_of(PduType type) noexcept {
  switch (type) {
    case PduType::ConfirmedRequest:
    case PduType::SimpleAck:
    case PduType::ComplexAck:
    case PduType::Error:
      return ServiceClass::Confirmed;
    case PduType::UnconfirmedRequest:
      return ServiceClass::Unconfirmed;
    default:
      return std::nullopt;
  }
}

std::string ServiceChoice::display() const { return tables::format_named(name, code); }

std::vector<ObjectRef> ApduInfo::object_refs() const {
  std::vector<ObjectRef> refs;
  for (const auto& element : elements) {
    if (const auto* id = std::get_if<ObjectIdElement>(&element)) {
      refs.push_back(id->ref);
    } else if (const auto* pv = std::get_if<PropertyValueElement>(&element)) {
      if (const auto* ref = std::get_if<ObjectRef>(&pv->value)) refs.push_back(*ref);
    } else if (const auto* field = std::get_if<FieldElement>(&element)) {
      if (const auto* ref = std::get_if<ObjectRef>(&field->value)) refs.push_back(*ref);
    }
  }
  return refs;
}

const DeviceAnnotation* DecodedPacket::annotation_for(const ObjectRef& ref) const noexcept {
  auto it = std::find_if(annotations.begin(), annotations.end(),
                         [&](const DeviceAnnotation& a) { return a.key == ref; });
  return it == annotations.end() ? nullptr : &*it;
}

namespace {

// ---------------------------------------------------------------------------
// Service parameter schemas. Context tag number -> meaning.

enum class Field : std::uint8_t {
  ObjectId,
  PropertyId,
  ArrayIndex,
  Value,
  Priority,
  Unsigned,
  Signed,
  Enumerated,
  Boolean,
  CharString,
  Real,
  List,
  ErrorPair,
};

struct FieldSpec {
  std::uint8_t tag;
  Field field;
  std::string_view label;
  std::span<const FieldSpec> nested;
};

struct Schema {
  std::span<const FieldSpec> context;
  std::span<const std::string_view> app_labels;  // labels for top-level application tags, by position
};

constexpr FieldSpec kReadProperty[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::PropertyId, "", {}},
    {2, Field::ArrayIndex, "", {}},
    {3, Field::Value, "", {}},
};

constexpr FieldSpec kWriteProperty[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::PropertyId, "", {}},
    {2, Field::ArrayIndex, "", {}},
    {3, Field::Value, "", {}},
    {4, Field::Priority, "", {}},
};

constexpr FieldSpec kPropertyValue[] = {
    {0, Field::PropertyId, "", {}},
    {1, Field::ArrayIndex, "", {}},
    {2, Field::Value, "", {}},
    {3, Field::Priority, "", {}},
};

constexpr FieldSpec kWritePropertyMultiple[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::List, "", kPropertyValue},
};

constexpr FieldSpec kPropertyReference[] = {
    {0, Field::PropertyId, "", {}},
    {1, Field::ArrayIndex, "", {}},
};

constexpr FieldSpec kReadPropertyMultiple[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::List, "", kPropertyReference},
};

constexpr FieldSpec kReadAccessResultElement[] = {
    {2, Field::PropertyId, "", {}},
    {3, Field::ArrayIndex, "", {}},
    {4, Field::Value, "", {}},
    {5, Field::ErrorPair, "", {}},
};

constexpr FieldSpec kReadPropertyMultipleAck[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::List, "", kReadAccessResultElement},
};

constexpr FieldSpec kSubscribeCov[] = {
    {0, Field::Unsigned, "Subscriber Process Identifier", {}},
    {1, Field::ObjectId, "", {}},
    {2, Field::Boolean, "Issue Confirmed Notifications", {}},
    {3, Field::Unsigned, "Lifetime", {}},
};

constexpr FieldSpec kSubscribeCovProperty[] = {
    {0, Field::Unsigned, "Subscriber Process Identifier", {}},
    {1, Field::ObjectId, "", {}},
    {2, Field::Boolean, "Issue Confirmed Notifications", {}},
    {3, Field::Unsigned, "Lifetime", {}},
    {4, Field::List, "", kPropertyReference},
    {5, Field::Real, "COV Increment", {}},
};

constexpr FieldSpec kCovNotification[] = {
    {0, Field::Unsigned, "Subscriber Process Identifier", {}},
    {1, Field::ObjectId, "", {}},
    {2, Field::ObjectId, "", {}},
    {3, Field::Unsigned, "Time Remaining", {}},
    {4, Field::List, "", kPropertyValue},
};

constexpr FieldSpec kWhoIs[] = {
    {0, Field::Unsigned, "Device Instance Low Limit", {}},
    {1, Field::Unsigned, "Device Instance High Limit", {}},
};

constexpr FieldSpec kWhoHas[] = {
    {0, Field::Unsigned, "Device Instance Low Limit", {}},
    {1, Field::Unsigned, "Device Instance High Limit", {}},
    {2, Field::ObjectId, "", {}},
    {3, Field::CharString, "Object Name", {}},
};

constexpr FieldSpec kReinitializeDevice[] = {
    {0, Field::Enumerated, "Reinitialized State Of Device", {}},
    {1, Field::CharString, "Password", {}},
};

constexpr FieldSpec kDeviceCommunicationControl[] = {
    {0, Field::Unsigned, "Time Duration", {}},
    {1, Field::Enumerated, "Enable Disable", {}},
    {2, Field::CharString, "Password", {}},
};

constexpr FieldSpec kReadRange[] = {
    {0, Field::ObjectId, "", {}},
    {1, Field::PropertyId, "", {}},
    {2, Field::ArrayIndex, "", {}},
};

constexpr std::string_view kIAmLabels[] = {"Device Identifier", "Max APDU Length Accepted",
                                           "Segmentation Supported", "Vendor ID"};
constexpr std::string_view kIHaveLabels[] = {"Device Identifier", "Object Identifier",
                                             "Object Name"};

enum class BodyKind { ConfirmedRequest, UnconfirmedRequest, ComplexAck };

Schema schema_for(BodyKind kind, std::uint8_t service) {
  switch (kind) {
    case BodyKind::ConfirmedRequest:
      switch (service) {
        case 1: return {kCovNotification, {}};
        case 5: return {kSubscribeCov, {}};
        case 12: return {kReadProperty, {}};
        case 14: return {kReadPropertyMultiple, {}};
        case 15: return {kWriteProperty, {}};
        case 16: return {kWritePropertyMultiple, {}};
        case 17: return {kDeviceCommunicationControl, {}};
        case 20: return {kReinitializeDevice, {}};
        case 26: return {kReadRange, {}};
        case 28: return {kSubscribeCovProperty, {}};
        default: return {};
      }
    case BodyKind::UnconfirmedRequest:
      switch (service) {
        case 0: return {{}, kIAmLabels};
        case 1: return {{}, kIHaveLabels};
        case 2: return {kCovNotification, {}};
        case 7: return {kWhoHas, {}};
        case 8: return {kWhoIs, {}};
        default: return {};
      }
    case BodyKind::ComplexAck:
      switch (service) {
        case 12: return {kReadProperty, {}};
        case 14: return {kReadPropertyMultipleAck, {}};
        default: return {};
      }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Tag level.

struct Stop {};  // body decoding cannot continue

enum class TagForm { Primitive, Opening, Closing };

struct Tag {
  bool context = false;
  std::uint32_t number = 0;
  TagForm form = TagForm::Primitive;
  std::uint32_t lvt = 0;  // raw L/V/T bits (the value for application booleans)
  std::size_t data_begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - data_begin; }
};

constexpr std::uint32_t kAppNull = 0;
constexpr std::uint32_t kAppBoolean = 1;
constexpr std::uint32_t kAppUnsigned = 2;
constexpr std::uint32_t kAppSigned = 3;
constexpr std::uint32_t kAppReal = 4;
constexpr std::uint32_t kAppCharString = 7;
constexpr std::uint32_t kAppEnumerated = 9;
constexpr std::uint32_t kAppObjectId = 12;

constexpr int kMaxNesting = 32;

class TagReader {
 public:
  explicit TagReader(ByteSpan body) : body_(body) {}

  bool at_end() const noexcept { return pos_ >= body_.size(); }
  std::size_t pos() const noexcept { return pos_; }
  ByteSpan body() const noexcept { return body_; }

  Tag peek() const { return parse(pos_); }

  Tag next() {
    Tag tag = parse(pos_);
    pos_ = tag.end;
    return tag;
  }

 private:
  Tag parse(std::size_t p) const {
    auto need = [&](std::size_t n) {
      if (body_.size() < p || body_.size() - p < n) throw Stop{};
    };
    need(1);
    const std::uint8_t first = body_[p++];
    Tag tag;
    tag.number = first >> 4;
    tag.context = (first & 0x08) != 0;
    tag.lvt = first & 0x07;
    if (tag.number == 15) {
      need(1);
      tag.number = body_[p++];
    }
    if (tag.context && tag.lvt == 6) {
      tag.form = TagForm::Opening;
      tag.data_begin = tag.end = p;
      return tag;
    }
    if (tag.context && tag.lvt == 7) {
      tag.form = TagForm::Closing;
      tag.data_begin = tag.end = p;
      return tag;
    }
    if (!tag.context && tag.number == kAppBoolean) {
      if (tag.lvt > 1) throw Stop{};
      tag.data_begin = tag.end = p;
      return tag;
    }
    if (!tag.context && tag.lvt > 5) throw Stop{};
    std::uint64_t length = tag.lvt;
    if (tag.lvt == 5) {
      need(1);
      const std::uint8_t ext = body_[p++];
      if (ext < 254) {
        length = ext;
      } else if (ext == 254) {
        need(2);
        length = (std::uint64_t{body_[p]} << 8) | body_[p + 1];
        p += 2;
      } else {
        need(4);
        length = (std::uint64_t{body_[p]} << 24) | (std::uint64_t{body_[p + 1]} << 16) |
                 (std::uint64_t{body_[p + 2]} << 8) | body_[p + 3];
        p += 4;
      }
    }
    need(static_cast<std::size_t>(length));
    tag.data_begin = p;
    tag.end = p + static_cast<std::size_t>(length);
    return tag;
  }

  ByteSpan body_;
  std::size_t pos_ = 0;
};

std::uint64_t read_unsigned(ByteSpan data) {
  if (data.empty() || data.size() > 8) throw Stop{};
  std::uint64_t v = 0;
  for (auto b : data) v = (v << 8) | b;
  return v;
}

std::uint32_t read_unsigned32(ByteSpan data) {
  if (data.size() > 4) throw Stop{};
  return static_cast<std::uint32_t>(read_unsigned(data));
}

std::int64_t read_signed(ByteSpan data) {
  if (data.empty() || data.size() > 8) throw Stop{};
  std::uint64_t v = (data[0] & 0x80) ? ~std::uint64_t{0} : 0;
  for (auto b : data) v = (v << 8) | b;
  return static_cast<std::int64_t>(v);
}

float read_real(ByteSpan data) {
  if (data.size() != 4) throw Stop{};
  const std::uint32_t bits = (std::uint32_t{data[0]} << 24) | (std::uint32_t{data[1]} << 16) |
                             (std::uint32_t{data[2]} << 8) | data[3];
  return std::bit_cast<float>(bits);
}

ObjectRef read_object_id(ByteSpan data) {
  if (data.size() != 4) throw Stop{};
  return decode_object_identifier(static_cast<std::uint32_t>(read_unsigned(data)));
}

PrimitiveValue read_char_string(ByteSpan data) {
  if (data.empty()) throw Stop{};
  if (data[0] != 0) return OpaqueValue{kAppCharString, Bytes(data.begin(), data.end())};
  return std::string(reinterpret_cast<const char*>(data.data()) + 1, data.size() - 1);
}

PrimitiveValue decode_application(const Tag& tag, ByteSpan body) {
  const ByteSpan data = body.subspan(tag.data_begin, tag.length());
  switch (tag.number) {
    case kAppNull:
      if (!data.empty()) throw Stop{};
      return NullValue{};
    case kAppBoolean: return tag.lvt != 0;
    case kAppUnsigned: return UnsignedValue{read_unsigned(data)};
    case kAppSigned: return SignedValue{read_signed(data)};
    case kAppReal: return read_real(data);
    case kAppCharString: return read_char_string(data);
    case kAppEnumerated: return EnumeratedValue{read_unsigned32(data)};
    case kAppObjectId: return read_object_id(data);
    default:
      return OpaqueValue{static_cast<std::uint8_t>(tag.number), Bytes(data.begin(), data.end())};
  }
}

class BodyDecoder {
 public:
  BodyDecoder(ByteSpan body, std::vector<ApduElement>& out) : reader_(body), out_(out) {}

  std::size_t committed() const noexcept { return committed_; }

  void run(const Schema& schema) {
    try {
      sequence(schema, std::nullopt, 0);
    } catch (const Stop&) {
      // Leave the suffix from committed_ undecoded.
    }
  }

  void run_error() {
    try {
      if (reader_.at_end()) return;
      const Tag first = reader_.peek();
      if (first.context && first.form == TagForm::Opening && first.number == 0) {
        reader_.next();
        error_pair();
        expect_closing(0);
      } else {
        error_pair();
      }
      commit();
      sequence(Schema{}, std::nullopt, 0);
    } catch (const Stop&) {
    }
  }

 private:
  void commit() { committed_ = reader_.pos(); }

  void emit(ApduElement element) {
    out_.push_back(std::move(element));
    commit();
  }

  void expect_closing(std::uint32_t number) {
    const Tag tag = reader_.next();
    if (!tag.context || tag.form != TagForm::Closing || tag.number != number) throw Stop{};
  }

  std::uint32_t app_enumerated() {
    const Tag tag = reader_.next();
    if (tag.context || tag.number != kAppEnumerated) throw Stop{};
    return read_unsigned32(reader_.body().subspan(tag.data_begin, tag.length()));
  }

  void error_pair() {
    const std::uint32_t error_class = app_enumerated();
    const std::uint32_t error_code = app_enumerated();
    out_.push_back(ErrorElement{error_class, error_code});
  }

  static const FieldSpec* find(const Schema& schema, std::uint32_t tag) {
    for (const auto& spec : schema.context) {
      if (spec.tag == tag) return &spec;
    }
    return nullptr;
  }

  void sequence(const Schema& schema, std::optional<std::uint32_t> closing, int depth) {
    if (depth > kMaxNesting) throw Stop{};
    std::size_t app_position = 0;
    while (true) {
      if (reader_.at_end()) {
        if (closing) throw Stop{};
        return;
      }
      const Tag tag = reader_.next();
      if (tag.form == TagForm::Closing) {
        if (!closing || tag.number != *closing) throw Stop{};
        commit();
        return;
      }
      if (tag.form == TagForm::Opening) {
        const FieldSpec* spec = find(schema, tag.number);
        if (spec && spec->field == Field::Value) {
          values(tag.number, depth + 1);
        } else if (spec && spec->field == Field::List) {
          sequence(Schema{spec->nested, {}}, tag.number, depth + 1);
        } else if (spec && spec->field == Field::ErrorPair) {
          error_pair();
          expect_closing(tag.number);
        } else {
          sequence(Schema{}, tag.number, depth + 1);
        }
        commit();
        continue;
      }
      const ByteSpan data = reader_.body().subspan(tag.data_begin, tag.length());
      if (!tag.context) {
        PrimitiveValue value = decode_application(tag, reader_.body());
        const std::string_view label =
            app_position < schema.app_labels.size() ? schema.app_labels[app_position] : "";
        ++app_position;
        if (const auto* ref = std::get_if<ObjectRef>(&value)) {
          emit(ObjectIdElement{*ref});
        } else {
          emit(FieldElement{label.empty() ? std::string("Value") : std::string(label),
                            std::move(value)});
        }
        continue;
      }
      const FieldSpec* spec = find(schema, tag.number);
      if (!spec) {
        emit(RawTagElement{true, tag.number, Bytes(data.begin(), data.end())});
        continue;
      }
      const std::string label(spec->label);
      switch (spec->field) {
        case Field::ObjectId: emit(ObjectIdElement{read_object_id(data)}); break;
        case Field::PropertyId:
          current_property_ = read_unsigned32(data);
          emit(PropertyIdElement{*current_property_});
          break;
        case Field::ArrayIndex: emit(ArrayIndexElement{read_unsigned32(data)}); break;
        case Field::Priority: emit(PriorityElement{read_unsigned32(data)}); break;
        case Field::Unsigned: emit(FieldElement{label, UnsignedValue{read_unsigned(data)}}); break;
        case Field::Signed: emit(FieldElement{label, SignedValue{read_signed(data)}}); break;
        case Field::Enumerated:
          emit(FieldElement{label, EnumeratedValue{read_unsigned32(data)}});
          break;
        case Field::Boolean:
          if (data.size() != 1) throw Stop{};
          emit(FieldElement{label, data[0] != 0});
          break;
        case Field::CharString: emit(FieldElement{label, read_char_string(data)}); break;
        case Field::Real: emit(FieldElement{label, read_real(data)}); break;
        case Field::Value:
        case Field::List:
        case Field::ErrorPair:
          throw Stop{};  // constructed fields must be bracketed by opening/closing tags
      }
    }
  }

  // Application-tagged values between an opening and closing tag.
  void values(std::uint32_t closing, int depth) {
    if (depth > kMaxNesting) throw Stop{};
    while (true) {
      const Tag tag = reader_.next();
      if (tag.form == TagForm::Closing) {
        if (tag.number != closing) throw Stop{};
        commit();
        return;
      }
      if (tag.form == TagForm::Opening) {
        values(tag.number, depth + 1);
        continue;
      }
      if (tag.context) {
        const ByteSpan data = reader_.body().subspan(tag.data_begin, tag.length());
        emit(RawTagElement{true, tag.number, Bytes(data.begin(), data.end())});
        continue;
      }
      emit(PropertyValueElement{current_property_, decode_application(tag, reader_.body())});
    }
  }

  TagReader reader_;
  std::vector<ApduElement>& out_;
  std::size_t committed_ = 0;
  std::optional<std::uint32_t> current_property_;
};

// ---------------------------------------------------------------------------

class Cursor {
 public:
  Cursor(ByteSpan data, ErrorKind kind, std::string_view layer)
      : data_(data), kind_(kind), layer_(layer) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  Bytes take(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  ByteSpan rest() const { return data_.subspan(pos_); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(kind_, fmt::format("{} truncated at offset {}", layer_, pos_));
    }
  }

  ByteSpan data_;
  std::size_t pos_ = 0;
  ErrorKind kind_;
  std::string_view layer_;
};

ServiceChoice make_service_choice(ServiceClass cls, std::uint8_t code) {
  const auto name = cls == ServiceClass::Confirmed ? tables::confirmed_service_name(code)
                                                   : tables::unconfirmed_service_name(code);
  return ServiceChoice{code, std::string(name)};
}

}  // namespace

ApduInfo decode_apdu(ByteSpan apdu) {
  if (apdu.empty()) throw Error(ErrorKind::MalformedApdu, "empty APDU");
  ApduInfo info;
  info.raw.assign(apdu.begin(), apdu.end());
  const std::uint8_t first = apdu[0];
  const std::uint8_t type = first >> 4;
  if (type > 7) {
    throw Error(ErrorKind::MalformedApdu, fmt::format("invalid APDU type {}", type));
  }
  info.pdu_type = static_cast<PduType>(type);

  auto header = [&](std::size_t n) {
    if (apdu.size() < n) {
      throw Error(ErrorKind::MalformedApdu,
                  fmt::format("{} APDU shorter than its {}-octet header", to_string(info.pdu_type),
                              n));
    }
  };

  std::size_t body_offset = 0;
  std::optional<BodyKind> body_kind;
  switch (info.pdu_type) {
    case PduType::ConfirmedRequest: {
      info.segmented = (first & 0x08) != 0;
      const std::size_t n = info.segmented ? 6 : 4;
      header(n);
      info.invoke_id = apdu[2];
      info.service_choice = make_service_choice(ServiceClass::Confirmed, apdu[n - 1]);
      body_offset = n;
      body_kind = BodyKind::ConfirmedRequest;
      break;
    }
    case PduType::UnconfirmedRequest:
      header(2);
      info.service_choice = make_service_choice(ServiceClass::Unconfirmed, apdu[1]);
      body_offset = 2;
      body_kind = BodyKind::UnconfirmedRequest;
      break;
    case PduType::SimpleAck:
      header(3);
      info.invoke_id = apdu[1];
      info.service_choice = make_service_choice(ServiceClass::Confirmed, apdu[2]);
      body_offset = 3;
      break;
    case PduType::ComplexAck: {
      info.segmented = (first & 0x08) != 0;
      const std::size_t n = info.segmented ? 5 : 3;
      header(n);
      info.invoke_id = apdu[1];
      info.service_choice = make_service_choice(ServiceClass::Confirmed, apdu[n - 1]);
      body_offset = n;
      body_kind = BodyKind::ComplexAck;
      break;
    }
    case PduType::SegmentAck:
      header(4);
      info.invoke_id = apdu[1];
      body_offset = 4;
      break;
    case PduType::Error:
      header(3);
      info.invoke_id = apdu[1];
      info.service_choice = make_service_choice(ServiceClass::Confirmed, apdu[2]);
      body_offset = 3;
      break;
    case PduType::Reject:
    case PduType::Abort:
      header(3);
      info.invoke_id = apdu[1];
      info.elements.push_back(ReasonElement{info.pdu_type == PduType::Reject, apdu[2]});
      body_offset = 3;
      break;
  }

  info.decoded_length = body_offset;
  if (info.segmented || body_offset >= apdu.size()) return info;

  const ByteSpan body = apdu.subspan(body_offset);
  BodyDecoder decoder(body, info.elements);
  if (info.pdu_type == PduType::Error) {
    decoder.run_error();
  } else if (body_kind) {
    decoder.run(schema_for(*body_kind, info.service_choice->code));
  } else {
    decoder.run(Schema{});
  }
  info.decoded_length = body_offset + decoder.committed();
  return info;
}

DecodedPacket decode_packet(const RawFrame& frame) {
  DecodedPacket packet;
  packet.frame = frame;
  const ByteSpan payload(frame.payload);

  Cursor bvlc(payload, ErrorKind::MalformedBvlc, "BVLC header");
  if (bvlc.u8() != 0x81) throw Error(ErrorKind::MalformedBvlc, "BVLC type is not 0x81");
  packet.bvlc.function = bvlc.u8();
  packet.bvlc.length = bvlc.u16();
  if (packet.bvlc.length != payload.size()) {
    throw Error(ErrorKind::MalformedBvlc,
                fmt::format("BVLC length {} does not match payload length {}", packet.bvlc.length,
                            payload.size()));
  }
  switch (packet.bvlc.function) {
    case 0x04: {
      const Bytes origin = bvlc.take(6);
      std::array<std::uint8_t, 6> addr{};
      std::copy(origin.begin(), origin.end(), addr.begin());
      packet.bvlc.forwarded_from = addr;
      break;
    }
    case 0x09:
    case 0x0A:
    case 0x0B:
      break;
    default: {
      const auto name = tables::bvlc_function_name(packet.bvlc.function);
      if (name.empty()) {
        throw Error(ErrorKind::MalformedBvlc,
                    fmt::format("unknown BVLC function 0x{:02X}", packet.bvlc.function));
      }
      throw Error(ErrorKind::UnsupportedBvlcFunction,
                  fmt::format("BVLC function {} carries no NPDU", name));
    }
  }

  Cursor npdu(bvlc.rest(), ErrorKind::MalformedNpdu, "NPDU");
  auto& n = packet.npdu;
  n.version = npdu.u8();
  if (n.version != 1) {
    throw Error(ErrorKind::UnsupportedVersion,
                fmt::format("unsupported NPDU version {}", n.version));
  }
  n.control = npdu.u8();
  n.expects_reply = (n.control & 0x04) != 0;
  n.priority = n.control & 0x03;
  if (n.control & 0x20) {
    n.dnet = npdu.u16();
    n.dadr = npdu.take(npdu.u8());
  }
  if (n.control & 0x08) {
    n.snet = npdu.u16();
    n.sadr = npdu.take(npdu.u8());
  }
  if (n.dnet) n.hop_count = npdu.u8();
  if (n.control & 0x80) {
    n.network_message = npdu.u8();
    if (*n.network_message >= 0x80) n.vendor_id = npdu.u16();
    return packet;
  }

  packet.apdu = decode_apdu(npdu.rest());
  return packet;
}

}  // namespace bacsum
