#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bacsum/bacnet.hpp"
#include "bacsum/capture.hpp"
#include "bacsum/context.hpp"
#include "bacsum/summarizer.hpp"

namespace bacsum::test {

inline std::filesystem::path fixture_dir() { return BACSUM_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return BACSUM_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return fixture_dir() / name; }

Bytes from_hex(std::string_view hex);

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic captures

struct UdpSpec {
  std::uint16_t src_port = 47808;
  std::uint16_t dst_port = 47808;
  Bytes payload;
  std::uint8_t ip_protocol = 17;  // 17 = UDP
  std::uint16_t ethertype = 0x0800;
};

/// Ethernet II + IPv4 + UDP frame bytes.
Bytes ethernet_frame(const UdpSpec& spec);

struct PcapOptions {
  bool big_endian = false;
  bool nanosecond = false;
  std::uint32_t link_type = 1;
};

Bytes make_pcap(const std::vector<Bytes>& frames, const PcapOptions& options = {});

/// RawFrame on the BACnet/IP port carrying `payload`.
RawFrame bacnet_frame(Bytes payload);

// ---------------------------------------------------------------------------
// Golden comparison against the reference dissector's JSON

struct GoldenValue {
  std::string kind;  // integer kinds are folded into "integer"
  nlohmann::json value;
  friend bool operator==(const GoldenValue&, const GoldenValue&) = default;
};

struct GoldenFrame {
  std::string pdu_type;
  std::optional<int> service_choice;
  std::optional<int> invoke_id;
  std::vector<std::pair<int, int>> object_refs;
  std::vector<int> property_ids;
  std::vector<GoldenValue> values;
  int npdu_version = 0;
  int npdu_control = 0;
  std::optional<int> dnet;
  std::optional<int> snet;
  std::optional<int> hop_count;
  bool expects_reply = false;

  friend bool operator==(const GoldenFrame&, const GoldenFrame&) = default;
};

std::vector<GoldenFrame> load_reference(const std::filesystem::path& path);
GoldenFrame flatten(const DecodedPacket& packet);
std::string describe(const GoldenFrame& frame);

/// Decodes every BACnet frame of a fixture capture, throwing on any error.
std::vector<DecodedPacket> decode_fixture(const std::string& name);

// ---------------------------------------------------------------------------
// Chat clients for tests

/// Counts calls; fails the first `failures` with Error(Transport), then
/// returns `reply` (status `status`).
class ScriptedClient final : public ChatClient {
 public:
  int failures = 0;
  int status = 200;
  std::string reply = "ok";
  int calls = 0;
  ChatRequest last_request;

  ChatResponse send(const ChatRequest& request) override;
};

}  // namespace bacsum::test
