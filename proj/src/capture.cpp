#include "bacsum/capture.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "bacsum/error.hpp"

namespace bacsum {
namespace {

constexpr std::uint32_t kMagicMicros = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNanos = 0xA1B23C4D;
constexpr std::uint32_t kLinkTypeEthernet = 1;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;

constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
constexpr std::uint8_t kIpProtoUdp = 17;

std::uint16_t be16(ByteSpan b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t be32(ByteSpan b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

std::uint32_t le32(ByteSpan b, std::size_t at) {
  return (std::uint32_t{b[at + 3]} << 24) | (std::uint32_t{b[at + 2]} << 16) |
         (std::uint32_t{b[at + 1]} << 8) | std::uint32_t{b[at]};
}

enum class Outcome { Ok, NonIpv4, NonUdp, Fragment, Malformed };

// Fills the link/network/transport fields of `frame` from one record body.
Outcome parse_ethernet(ByteSpan data, RawFrame& frame) {
  if (data.size() < 14) return Outcome::Malformed;
  std::copy_n(data.begin(), 6, frame.dst_mac.octets.begin());
  std::copy_n(data.begin() + 6, 6, frame.src_mac.octets.begin());
  std::size_t offset = 12;
  std::uint16_t ether_type = be16(data, offset);
  offset += 2;
  if (ether_type == kEtherTypeVlan) {
    if (data.size() < offset + 4) return Outcome::Malformed;
    ether_type = be16(data, offset + 2);
    offset += 4;
  }
  if (ether_type != kEtherTypeIpv4) return Outcome::NonIpv4;

  ByteSpan ip = data.subspan(offset);
  if (ip.size() < 20 || (ip[0] >> 4) != 4) return Outcome::Malformed;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
  const std::size_t total_length = be16(ip, 2);
  if (ihl < 20 || ip.size() < ihl || total_length < ihl) return Outcome::Malformed;
  if (ip[9] != kIpProtoUdp) return Outcome::NonUdp;
  const std::uint16_t frag = be16(ip, 6);
  if ((frag & 0x1FFF) != 0 || (frag & 0x2000) != 0) return Outcome::Fragment;
  frame.src_ip.value = be32(ip, 12);
  frame.dst_ip.value = be32(ip, 16);

  // Ethernet padding may follow the IP datagram; trust the IP length.
  ByteSpan udp = ip.subspan(ihl, std::min(ip.size(), total_length) - ihl);
  if (udp.size() < 8) return Outcome::Malformed;
  frame.src_port = be16(udp, 0);
  frame.dst_port = be16(udp, 2);
  const std::size_t udp_length = be16(udp, 4);
  if (udp_length < 8) return Outcome::Malformed;
  const std::size_t payload_length = std::min(udp.size(), udp_length) - 8;
  frame.payload.assign(udp.begin() + 8, udp.begin() + 8 + static_cast<std::ptrdiff_t>(payload_length));
  return Outcome::Ok;
}

}  // namespace

std::string MacAddress::to_string() const {
  return fmt::format("{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", octets[0], octets[1], octets[2],
                     octets[3], octets[4], octets[5]);
}

std::string MacAddress::oui_string() const {
  return fmt::format("{:02x}:{:02x}:{:02x}", octets[0], octets[1], octets[2]);
}

std::string Ipv4Address::to_string() const {
  return fmt::format("{}.{}.{}.{}", (value >> 24) & 0xFF, (value >> 16) & 0xFF, (value >> 8) & 0xFF,
                     value & 0xFF);
}

Ipv4Address Ipv4Address::parse(const std::string& dotted) {
  std::uint32_t out = 0;
  int parts = 0;
  std::size_t pos = 0;
  while (pos <= dotted.size() && parts < 4) {
    std::size_t end = dotted.find('.', pos);
    if (end == std::string::npos) end = dotted.size();
    const std::string part = dotted.substr(pos, end - pos);
    if (part.empty() || part.size() > 3 ||
        part.find_first_not_of("0123456789") != std::string::npos) {
      break;
    }
    const int octet = std::stoi(part);
    if (octet > 255) break;
    out = (out << 8) | static_cast<std::uint32_t>(octet);
    ++parts;
    pos = end + 1;
    if (end == dotted.size()) break;
  }
  if (parts != 4 || pos != dotted.size() + 1) {
    throw Error(ErrorKind::Validation, fmt::format("invalid IPv4 address '{}'", dotted));
  }
  return Ipv4Address{out};
}

Capture read_capture(ByteSpan bytes) {
  if (bytes.size() < 4) {
    throw Error(ErrorKind::UnsupportedFormat, "not a pcap file: shorter than the magic number");
  }
  const std::uint32_t magic_le = le32(bytes, 0);
  const std::uint32_t magic_be = be32(bytes, 0);
  bool little_endian = false;
  bool nanos = false;
  if (magic_le == kMagicMicros || magic_le == kMagicNanos) {
    little_endian = true;
    nanos = magic_le == kMagicNanos;
  } else if (magic_be == kMagicMicros || magic_be == kMagicNanos) {
    nanos = magic_be == kMagicNanos;
  } else {
    throw Error(ErrorKind::UnsupportedFormat,
                fmt::format("not a classic pcap file (magic 0x{:08X})", magic_be));
  }
  auto u32 = [&](std::size_t at) { return little_endian ? le32(bytes, at) : be32(bytes, at); };

  if (bytes.size() < kGlobalHeaderSize) {
    throw Error(ErrorKind::TruncatedCapture, "truncated pcap global header");
  }
  const std::uint32_t link_type = u32(20) & 0x0FFFFFFF;
  if (link_type != kLinkTypeEthernet) {
    throw Error(ErrorKind::UnsupportedFormat,
                fmt::format("unsupported link type {} (only Ethernet is supported)", link_type));
  }

  Capture capture;
  std::size_t offset = kGlobalHeaderSize;
  std::size_t record = 0;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kRecordHeaderSize) {
      throw Error(ErrorKind::TruncatedCapture,
                  fmt::format("truncated header in record {}", record));
    }
    const std::uint32_t ts_sec = u32(offset);
    const std::uint32_t ts_frac = u32(offset + 4);
    const std::size_t incl_len = u32(offset + 8);
    offset += kRecordHeaderSize;
    if (bytes.size() - offset < incl_len) {
      throw Error(ErrorKind::TruncatedCapture, fmt::format("truncated data in record {}", record));
    }

    RawFrame frame;
    frame.index = record;
    frame.timestamp = {static_cast<std::int64_t>(ts_sec), nanos ? ts_frac / 1000 : ts_frac};
    switch (parse_ethernet(bytes.subspan(offset, incl_len), frame)) {
      case Outcome::Ok: capture.frames.push_back(std::move(frame)); break;
      case Outcome::NonIpv4: ++capture.stats.non_ipv4; break;
      case Outcome::NonUdp: ++capture.stats.non_udp; break;
      case Outcome::Fragment: ++capture.stats.fragments; break;
      case Outcome::Malformed: ++capture.stats.malformed; break;
    }
    offset += incl_len;
    ++record;
  }
  capture.stats.records = record;
  return capture;
}

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, fmt::format("cannot read '{}'", path.string()));
  return out;
}

Capture read_capture_file(const std::filesystem::path& path) {
  return read_capture(read_file_bytes(path));
}

std::vector<RawFrame> filter_bacnet(std::span<const RawFrame> frames, std::uint16_t port) {
  std::vector<RawFrame> out;
  for (const auto& frame : frames) {
    if ((frame.src_port == port || frame.dst_port == port) && !frame.payload.empty() &&
        frame.payload[0] == 0x81) {
      out.push_back(frame);
    }
  }
  return out;
}

}  // namespace bacsum
