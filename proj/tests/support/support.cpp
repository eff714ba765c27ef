#include "support.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "bacsum/error.hpp"

namespace bacsum::test {

using nlohmann::json;
namespace fs = std::filesystem;

Bytes from_hex(std::string_view hex) {
  Bytes out;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  int hi = -1;
  for (char c : hex) {
    const int v = nibble(c);
    if (v < 0) continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  return out;
}

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    path_ = fs::temp_directory_path() / fmt::format("bacsum-test-{:08x}", rd());
    if (fs::create_directory(path_)) return;
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

void put32(Bytes& b, std::uint32_t v, bool big_endian) {
  for (int i = 0; i < 4; ++i) {
    const int shift = big_endian ? 24 - 8 * i : 8 * i;
    b.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void put16_order(Bytes& b, std::uint16_t v, bool big_endian) {
  if (big_endian) {
    put16(b, v);
  } else {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
  }
}

}  // namespace

Bytes ethernet_frame(const UdpSpec& spec) {
  Bytes f = {0x00, 0x60, 0x35, 0x01, 0x02, 0x03, 0x00, 0x1a, 0x2b, 0x3c, 0x4d, 0x5e};
  put16(f, spec.ethertype);
  const auto udp_len = static_cast<std::uint16_t>(8 + spec.payload.size());
  const auto total = static_cast<std::uint16_t>(20 + udp_len);
  f.insert(f.end(), {0x45, 0x00});
  put16(f, total);
  f.insert(f.end(), {0x00, 0x01, 0x00, 0x00, 0x40, spec.ip_protocol, 0x00, 0x00});
  f.insert(f.end(), {192, 168, 10, 20, 192, 168, 10, 50});
  put16(f, spec.src_port);
  put16(f, spec.dst_port);
  put16(f, udp_len);
  put16(f, 0);
  f.insert(f.end(), spec.payload.begin(), spec.payload.end());
  return f;
}

Bytes make_pcap(const std::vector<Bytes>& frames, const PcapOptions& options) {
  const bool be = options.big_endian;
  Bytes b;
  put32(b, options.nanosecond ? 0xA1B23C4D : 0xA1B2C3D4, be);
  put16_order(b, 2, be);
  put16_order(b, 4, be);
  put32(b, 0, be);
  put32(b, 0, be);
  put32(b, 65535, be);
  put32(b, options.link_type, be);
  std::uint32_t ts = 1700000000;
  for (const Bytes& frame : frames) {
    put32(b, ts++, be);
    put32(b, options.nanosecond ? 250000000 : 250000, be);
    put32(b, static_cast<std::uint32_t>(frame.size()), be);
    put32(b, static_cast<std::uint32_t>(frame.size()), be);
    b.insert(b.end(), frame.begin(), frame.end());
  }
  return b;
}

RawFrame bacnet_frame(Bytes payload) {
  RawFrame f;
  f.src_port = kDefaultBacnetPort;
  f.dst_port = kDefaultBacnetPort;
  f.payload = std::move(payload);
  return f;
}

// ---------------------------------------------------------------------------

namespace {

GoldenValue golden_value(const json& v) {
  std::string kind = v.at("kind").get<std::string>();
  if (kind == "objectid") {
    return {kind, json::array({v.at("type"), v.at("instance")})};
  }
  if (kind == "unsigned" || kind == "signed") kind = "integer";
  return {kind, v.contains("value") ? v.at("value") : json(nullptr)};
}

std::optional<int> opt_int(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<int>();
}

GoldenValue from_primitive(const PrimitiveValue& value) {
  struct Visitor {
    GoldenValue operator()(NullValue) const { return {"null", nullptr}; }
    GoldenValue operator()(bool v) const { return {"boolean", v}; }
    GoldenValue operator()(UnsignedValue v) const { return {"integer", v.value}; }
    GoldenValue operator()(SignedValue v) const { return {"integer", v.value}; }
    GoldenValue operator()(float v) const { return {"real", static_cast<double>(v)}; }
    GoldenValue operator()(EnumeratedValue v) const { return {"enumerated", v.value}; }
    GoldenValue operator()(const ObjectRef& v) const {
      return {"objectid", json::array({v.object_type, v.instance})};
    }
    GoldenValue operator()(const std::string& v) const { return {"charstring", v}; }
    GoldenValue operator()(const OpaqueValue& v) const {
      std::string hex;
      for (auto b : v.data) hex += fmt::format("{:02x}", b);
      return {"opaque", hex};
    }
  };
  return std::visit(Visitor{}, value);
}

}  // namespace

std::vector<GoldenFrame> load_reference(const fs::path& path) {
  const json doc = json::parse(read_text(path));
  std::vector<GoldenFrame> frames;
  for (const json& f : doc) {
    GoldenFrame g;
    g.pdu_type = f.at("pdu_type").get<std::string>();
    g.service_choice = opt_int(f.at("service_choice"));
    g.invoke_id = opt_int(f.at("invoke_id"));
    for (const json& r : f.at("object_refs")) g.object_refs.emplace_back(r.at(0), r.at(1));
    for (const json& p : f.at("property_ids")) g.property_ids.push_back(p.get<int>());
    for (const json& v : f.at("values")) g.values.push_back(golden_value(v));
    const json& n = f.at("npdu");
    g.npdu_version = n.at("version");
    g.npdu_control = n.at("control");
    g.dnet = opt_int(n.at("dnet"));
    g.snet = opt_int(n.at("snet"));
    g.hop_count = opt_int(n.at("hop_count"));
    g.expects_reply = n.at("expects_reply");
    frames.push_back(std::move(g));
  }
  return frames;
}

GoldenFrame flatten(const DecodedPacket& packet) {
  GoldenFrame g;
  g.npdu_version = packet.npdu.version;
  g.npdu_control = packet.npdu.control;
  if (packet.npdu.dnet) g.dnet = *packet.npdu.dnet;
  if (packet.npdu.snet) g.snet = *packet.npdu.snet;
  if (packet.npdu.hop_count) g.hop_count = *packet.npdu.hop_count;
  g.expects_reply = packet.npdu.expects_reply;
  if (!packet.apdu) return g;
  const ApduInfo& a = *packet.apdu;
  g.pdu_type = std::string(to_string(a.pdu_type));
  if (a.service_choice) g.service_choice = a.service_choice->code;
  if (a.invoke_id) g.invoke_id = *a.invoke_id;
  for (const ApduElement& e : a.elements) {
    if (const auto* id = std::get_if<ObjectIdElement>(&e)) {
      g.object_refs.emplace_back(id->ref.object_type, id->ref.instance);
    } else if (const auto* p = std::get_if<PropertyIdElement>(&e)) {
      g.property_ids.push_back(static_cast<int>(p->property));
    } else if (const auto* pv = std::get_if<PropertyValueElement>(&e)) {
      g.values.push_back(from_primitive(pv->value));
    } else if (const auto* f = std::get_if<FieldElement>(&e)) {
      g.values.push_back(from_primitive(f->value));
    } else if (const auto* pr = std::get_if<PriorityElement>(&e)) {
      g.values.push_back({"integer", pr->priority});
    } else if (const auto* ai = std::get_if<ArrayIndexElement>(&e)) {
      g.values.push_back({"integer", ai->index});
    } else if (const auto* err = std::get_if<ErrorElement>(&e)) {
      g.values.push_back({"enumerated", err->error_class});
      g.values.push_back({"enumerated", err->error_code});
    } else if (const auto* r = std::get_if<ReasonElement>(&e)) {
      g.values.push_back({"reason", r->reason});
    } else if (const auto* raw = std::get_if<RawTagElement>(&e)) {
      g.values.push_back({"raw", raw->tag});
    }
  }
  return g;
}

std::string describe(const GoldenFrame& f) {
  json values = json::array();
  for (const auto& v : f.values) values.push_back({v.kind, v.value});
  json refs = json::array();
  for (const auto& [t, i] : f.object_refs) refs.push_back({t, i});
  return json{{"pdu_type", f.pdu_type},
              {"service_choice", f.service_choice ? json(*f.service_choice) : json(nullptr)},
              {"invoke_id", f.invoke_id ? json(*f.invoke_id) : json(nullptr)},
              {"object_refs", refs},
              {"property_ids", f.property_ids},
              {"values", values},
              {"npdu", {f.npdu_version, f.npdu_control, f.dnet.value_or(-1), f.snet.value_or(-1),
                        f.hop_count.value_or(-1), f.expects_reply}}}
      .dump();
}

std::vector<DecodedPacket> decode_fixture(const std::string& name) {
  const Capture capture = read_capture_file(fixture(name));
  std::vector<DecodedPacket> packets;
  for (const RawFrame& frame : filter_bacnet(capture.frames)) packets.push_back(decode_packet(frame));
  return packets;
}

ChatResponse ScriptedClient::send(const ChatRequest& request) {
  ++calls;
  last_request = request;
  if (calls <= failures) throw Error(ErrorKind::Transport, "scripted transport failure");
  ChatResponse r;
  r.status = status;
  if (status >= 400) {
    r.error_message = reply;
  } else {
    r.content = reply;
    r.model = "scripted";
  }
  return r;
}

}  // namespace bacsum::test
