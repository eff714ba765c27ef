#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bacsum {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

inline constexpr std::uint16_t kDefaultBacnetPort = 47808;

struct MacAddress {
  std::array<std::uint8_t, 6> octets{};

  /// Organizationally Unique Identifier: the first three octets.
  std::array<std::uint8_t, 3> oui() const noexcept { return {octets[0], octets[1], octets[2]}; }
  std::string to_string() const;
  std::string oui_string() const;

  friend bool operator==(const MacAddress&, const MacAddress&) = default;
};

struct Ipv4Address {
  std::uint32_t value = 0;  // host order

  std::string to_string() const;
  static Ipv4Address parse(const std::string& dotted);  // throws Error(Validation)

  friend auto operator<=>(const Ipv4Address&, const Ipv4Address&) = default;
};

struct Timestamp {
  std::int64_t seconds = 0;
  std::uint32_t micros = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// One Ethernet/IPv4/UDP record from a capture.
struct RawFrame {
  std::size_t index = 0;  // record ordinal in the capture
  Timestamp timestamp;
  MacAddress src_mac;
  MacAddress dst_mac;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Bytes payload;

  std::array<std::uint8_t, 3> src_oui() const noexcept { return src_mac.oui(); }
  std::array<std::uint8_t, 3> dst_oui() const noexcept { return dst_mac.oui(); }

  friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

struct CaptureStats {
  std::size_t records = 0;
  std::size_t non_ipv4 = 0;
  std::size_t non_udp = 0;
  std::size_t fragments = 0;
  std::size_t malformed = 0;

  std::size_t skipped() const noexcept { return non_ipv4 + non_udp + fragments + malformed; }
};

struct Capture {
  std::vector<RawFrame> frames;
  CaptureStats stats;
};

/// Parses a classic pcap file (either byte order, micro- or nanosecond
/// resolution, Ethernet link type). Throws Error(UnsupportedFormat) on a bad
/// magic or link type and Error(TruncatedCapture) on a short record.
Capture read_capture(ByteSpan capture_bytes);
Capture read_capture_file(const std::filesystem::path& path);

/// Keeps frames on the BACnet/IP port whose payload starts with BVLC type 0x81.
std::vector<RawFrame> filter_bacnet(std::span<const RawFrame> frames,
                                    std::uint16_t port = kDefaultBacnetPort);

Bytes read_file_bytes(const std::filesystem::path& path);  // throws Error(Io)

}  // namespace bacsum
