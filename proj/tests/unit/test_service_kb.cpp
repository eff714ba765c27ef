#include <doctest.h>

#include "bacsum/bacnet_tables.hpp"
#include "bacsum/error.hpp"
#include "bacsum/service_kb.hpp"
#include "support.hpp"

using namespace bacsum;
using namespace bacsum::test;

namespace {

ErrorKind kb_error(std::string_view json) {
  try {
    parse_service_kb(json);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

DecodedPacket packet_of(PduType type, std::optional<std::uint8_t> code, std::string name = {}) {
  DecodedPacket p;
  p.apdu.emplace();
  p.apdu->pdu_type = type;
  if (code) p.apdu->service_choice = ServiceChoice{*code, std::move(name)};
  return p;
}

}  // namespace

TEST_CASE("shipped service KB") {
  const ServiceKB kb = load_service_kb(data_dir() / "service_kb.json");
  CHECK(kb.size() >= 40);

  SUBCASE("covers every service in the codec tables") {
    for (const auto& s : tables::confirmed_services()) {
      CAPTURE(s.name);
      const ServiceEntry* e = kb.find(ServiceClass::Confirmed, static_cast<std::uint8_t>(s.code));
      REQUIRE(e);
      CHECK(normalize_service_name(e->service_name) == normalize_service_name(s.name));
    }
    for (const auto& s : tables::unconfirmed_services()) {
      CAPTURE(s.name);
      CHECK(kb.find(ServiceClass::Unconfirmed, static_cast<std::uint8_t>(s.code)));
    }
  }
  SUBCASE("write-multiple packet resolves to writePropertyMultiple") {
    const auto packets = decode_fixture("write_multiple.pcap");
    const ServiceEntry* e = lookup_service(kb, packets[0]);
    REQUIRE(e);
    CHECK(e->service_name == "writePropertyMultiple");
    CHECK(e->service_code == 16);
  }
  SUBCASE("write-denied error frame resolves to writeProperty") {
    const auto packets = decode_fixture("write_denied.pcap");
    const ServiceEntry* e = lookup_service(kb, packets[1]);
    REQUIRE(e);
    CHECK(e->service_name == "writeProperty");
    const std::string text = service_context_text(*e, PduType::Error);
    CHECK(text.rfind("writeProperty (confirmed service 15): ", 0) == 0);
    CHECK(text.find("Error response") != std::string::npos);
    CHECK(service_context_text(*e, PduType::ConfirmedRequest).find("Error response") ==
          std::string::npos);
  }
  SUBCASE("misses") {
    CHECK(!lookup_service(kb, packet_of(PduType::SegmentAck, std::nullopt)));
    CHECK(!lookup_service(kb, packet_of(PduType::Reject, 15)));
    CHECK(!lookup_service(kb, packet_of(PduType::ConfirmedRequest, 200)));
    CHECK(!lookup_service(kb, DecodedPacket{}));
  }
  SUBCASE("unknown code falls back to the name") {
    const ServiceEntry* e = lookup_service(kb, packet_of(PduType::UnconfirmedRequest, 250, "who-is"));
    REQUIRE(e);
    CHECK(e->service_code == 8);
  }
}

TEST_CASE("parse_service_kb") {
  SUBCASE("empty array") { CHECK(parse_service_kb("[]").empty()); }
  SUBCASE("duplicate name") {
    CHECK(kb_error(R"([
      {"service_name": "writeProperty", "service_code": 15, "pdu_class": "confirmed", "summary": "a."},
      {"service_name": "writeProperty", "service_code": 99, "pdu_class": "confirmed", "summary": "b."}
    ])") == ErrorKind::DuplicateEntry);
  }
  SUBCASE("duplicate code pair") {
    CHECK(kb_error(R"([
      {"service_name": "a", "service_code": 15, "pdu_class": "confirmed", "summary": "a."},
      {"service_name": "b", "service_code": 15, "pdu_class": "confirmed", "summary": "b."}
    ])") == ErrorKind::DuplicateEntry);
    CHECK(parse_service_kb(R"([
      {"service_name": "a", "service_code": 15, "pdu_class": "confirmed", "summary": "a."},
      {"service_name": "b", "service_code": 15, "pdu_class": "unconfirmed", "summary": "b."}
    ])").size() == 2);
  }
  SUBCASE("validation") {
    CHECK(kb_error(R"([{"service_name": "a", "service_code": 1, "pdu_class": "confirmed", "summary": "  "}])") ==
          ErrorKind::Validation);
    CHECK(kb_error(R"([{"service_name": "a", "service_code": 1, "pdu_class": "confirmed",
                        "summary": "One. Two. Three. Four. Five. Six."}])") == ErrorKind::Validation);
    CHECK(kb_error(R"([{"service_name": "a", "service_code": 1, "pdu_class": "other", "summary": "x."}])") ==
          ErrorKind::Validation);
    CHECK(kb_error(R"([{"service_name": "a", "service_code": 300, "pdu_class": "confirmed", "summary": "x."}])") ==
          ErrorKind::Validation);
    CHECK(kb_error("{}") == ErrorKind::Validation);
  }
}

TEST_CASE("normalize_service_name") {
  CHECK(normalize_service_name("who-Is") == "whois");
  CHECK(normalize_service_name("write_property") == "writeproperty");
}
