#include <doctest.h>

#include "bacsum/capture.hpp"
#include "bacsum/error.hpp"
#include "support.hpp"

using namespace bacsum;
using namespace bacsum::test;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected bacsum::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("read_capture: zero records gives an empty list") {
  const Capture c = read_capture(make_pcap({}));
  CHECK(c.frames.empty());
  CHECK(c.stats.records == 0);
}

TEST_CASE("read_capture: two UDP datagrams in order") {
  const Bytes a = ethernet_frame({.payload = {0x81, 0x0a, 0x00, 0x04}});
  const Bytes b = ethernet_frame({.src_port = 50000, .payload = {0x01, 0x02}});
  for (const PcapOptions opt : {PcapOptions{}, PcapOptions{.big_endian = true},
                                PcapOptions{.nanosecond = true},
                                PcapOptions{.big_endian = true, .nanosecond = true}}) {
    const Capture c = read_capture(make_pcap({a, b}, opt));
    REQUIRE(c.frames.size() == 2);
    CHECK(c.frames[0].index == 0);
    CHECK(c.frames[1].index == 1);
    CHECK(c.frames[0].payload == Bytes{0x81, 0x0a, 0x00, 0x04});
    CHECK(c.frames[1].src_port == 50000);
    CHECK(c.frames[0].dst_port == 47808);
    CHECK(c.frames[0].src_ip.to_string() == "192.168.10.20");
    CHECK(c.frames[0].dst_ip.to_string() == "192.168.10.50");
    CHECK(c.frames[0].src_mac.oui_string() == "00:1a:2b");
    CHECK(c.frames[0].timestamp.seconds == 1700000000);
    CHECK(c.frames[0].timestamp.micros == 250000);
  }
}

TEST_CASE("read_capture: the two-frame fixture") {
  const Capture c = read_capture_file(fixture("write_denied.pcap"));
  CHECK(c.frames.size() == 2);
  CHECK(filter_bacnet(c.frames).size() == 2);
}

TEST_CASE("read_capture: bad magic is unsupported-format") {
  CHECK(kind_of([] { read_capture(from_hex("DEADBEEF 00000000 00000000")); }) ==
        ErrorKind::UnsupportedFormat);
  CHECK(kind_of([] { read_capture(from_hex("0a0d")); }) == ErrorKind::UnsupportedFormat);
}

TEST_CASE("read_capture: non-Ethernet link type is unsupported-format") {
  CHECK(kind_of([] { read_capture(make_pcap({}, {.link_type = 113})); }) ==
        ErrorKind::UnsupportedFormat);
}

TEST_CASE("read_capture: truncation names the record") {
  Bytes bytes = make_pcap({ethernet_frame({.payload = {1, 2, 3}}),
                           ethernet_frame({.payload = {4, 5, 6}})});
  bytes.resize(bytes.size() - 2);
  try {
    read_capture(bytes);
    FAIL("expected truncated-capture");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncatedCapture);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  Bytes header_cut = make_pcap({ethernet_frame({.payload = {1}})});
  header_cut.resize(24 + 10);
  CHECK(kind_of([&] { read_capture(header_cut); }) == ErrorKind::TruncatedCapture);
}

TEST_CASE("read_capture: non-IPv4 and non-UDP records are counted, not returned") {
  const Capture c = read_capture(make_pcap({ethernet_frame({.payload = {1}}),
                                            ethernet_frame({.payload = {1}, .ip_protocol = 6}),
                                            ethernet_frame({.payload = {1}, .ethertype = 0x86DD})}));
  CHECK(c.frames.size() == 1);
  CHECK(c.stats.records == 3);
  CHECK(c.stats.non_udp == 1);
  CHECK(c.stats.non_ipv4 == 1);
  CHECK(c.stats.skipped() == 2);
}

TEST_CASE("filter_bacnet: port and BVLC type") {
  RawFrame bacnet = bacnet_frame({0x81, 0x0a, 0x00, 0x04});
  RawFrame dns = bacnet;
  dns.src_port = dns.dst_port = 53;
  RawFrame other_type = bacnet_frame({0x82, 0x0a});
  RawFrame empty = bacnet_frame({});

  const std::vector<RawFrame> frames = {bacnet, dns, other_type, empty};
  const auto kept = filter_bacnet(frames);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == bacnet);
  CHECK(filter_bacnet(std::vector<RawFrame>{}).empty());

  SUBCASE("idempotent") { CHECK(filter_bacnet(kept) == kept); }
  SUBCASE("custom port") {
    RawFrame alt = bacnet_frame({0x81, 0x0a, 0x00, 0x04});
    alt.dst_port = 47809;
    alt.src_port = 40000;
    const std::vector<RawFrame> in = {alt, bacnet};
    const auto on_alt = filter_bacnet(in, 47809);
    REQUIRE(on_alt.size() == 1);
    CHECK(on_alt[0].dst_port == 47809);
  }
}

TEST_CASE("Ipv4Address parse and print") {
  CHECK(Ipv4Address::parse("10.0.0.1").to_string() == "10.0.0.1");
  CHECK(kind_of([] { Ipv4Address::parse("10.0.0"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { Ipv4Address::parse("10.0.0.256"); }) == ErrorKind::Validation);
}
