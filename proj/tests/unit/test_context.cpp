#include <doctest.h>

#include <random>
#include <set>

#include "bacsum/context.hpp"
#include "bacsum/error.hpp"
#include "bacsum/registry.hpp"
#include "support.hpp"

using namespace bacsum;
using namespace bacsum::test;

namespace {

ContextItem item(ContextKind kind, std::string text, std::size_t packet = 0) {
  return {kind, std::move(text), packet, {}};
}

std::vector<std::string> texts(std::span<const ContextItem> items) {
  std::vector<std::string> out;
  for (const auto& i : items) out.push_back(i.text);
  return out;
}

VectorIndex corpus_index(HashedBowProvider& provider) {
  VectorIndex index(provider.dim(), {provider.id(), 0});
  const std::string doc =
      "# Writes\nA write property request changes one property value of an object.\n\n"
      "# Errors\nAn error response reports that a confirmed request failed.\n\n"
      "# Discovery\nWho-Is and I-Am let devices find each other on the network.\n";
  for (auto& c : chunk_document(doc, "notes.md")) {
    const Vector v = embed(provider, c.text);
    index.add(std::move(c), v);
  }
  return index;
}

}  // namespace

TEST_CASE("modes") {
  CHECK(parse_mode("m3") == Mode::M3ServiceOnly);
  CHECK(!parse_mode("m5"));
  CHECK(to_string(Mode::M2RagOnly) == "m2");
  const SourceSet m1 = sources_for(Mode::M1NoContext);
  CHECK(!(m1.service || m1.retrieved || m1.device));
  const SourceSet m2 = sources_for(Mode::M2RagOnly);
  CHECK((m2.retrieved && !m2.service && !m2.device));
  const SourceSet m3 = sources_for(Mode::M3ServiceOnly);
  CHECK((m3.service && !m3.retrieved && !m3.device));
  const SourceSet m4 = sources_for(Mode::M4Full);
  CHECK((m4.service && m4.retrieved && m4.device));
}

TEST_CASE("gather_context") {
  const ServiceKB kb = load_service_kb(data_dir() / "service_kb.json");
  const Registry registry = load_registry(fixture("registry.json"));
  HashedBowProvider provider(64);
  const VectorIndex index = corpus_index(provider);
  const RetrievalSetup setup{&index, &provider, 3};

  auto packets = decode_fixture("write_denied.pcap");
  for (auto& p : packets) p = annotate(p, registry);

  SUBCASE("two packets, service and retrieved items per packet, in packet order") {
    const auto items = gather_context(packets, &kb, setup, sources_for(Mode::M4Full));
    std::size_t service = 0, retrieved = 0;
    std::size_t last_packet = 0;
    for (const auto& i : items) {
      service += i.kind == ContextKind::Service;
      retrieved += i.kind == ContextKind::Retrieved;
      CHECK(i.packet_index >= last_packet);
      last_packet = i.packet_index;
    }
    CHECK(items.size() >= 4);
    CHECK(service == 2);
    CHECK(retrieved == 2);
    CHECK(items[0].kind == ContextKind::Service);
    CHECK(items[0].source_id == "writeProperty");
    CHECK(items.back().packet_index == 1);
  }
  SUBCASE("device items come from annotations") {
    const auto items = gather_context(packets, &kb, setup, sources_for(Mode::M4Full));
    const auto device = std::find_if(items.begin(), items.end(),
                                     [](const auto& i) { return i.kind == ContextKind::Device; });
    REQUIRE(device != items.end());
    CHECK(device->source_id == "device:126");
    CHECK(device->text.find("Main Plant Controller") != std::string::npos);
  }
  SUBCASE("service miss and empty index give nothing") {
    DecodedPacket unknown;
    unknown.apdu.emplace();
    unknown.apdu->pdu_type = PduType::ConfirmedRequest;
    unknown.apdu->service_choice = ServiceChoice{200, ""};
    const VectorIndex empty(64, {});
    const std::vector<DecodedPacket> one = {unknown};
    CHECK(gather_context(one, &kb, {&empty, &provider, 3}, sources_for(Mode::M4Full)).empty());
  }
  SUBCASE("the same service twice collapses after dedupe") {
    const std::vector<DecodedPacket> twice = {packets[0], packets[0]};
    const auto items = gather_context(twice, &kb, {}, sources_for(Mode::M3ServiceOnly));
    CHECK(items.size() == 2);
    CHECK(dedupe(items).size() == 1);
  }
  SUBCASE("mode m1 gathers nothing") {
    CHECK(gather_context(packets, &kb, setup, sources_for(Mode::M1NoContext)).empty());
  }
  SUBCASE("provider and index dimensions must agree") {
    HashedBowProvider other(32);
    CHECK_THROWS_AS(gather_context(packets, &kb, {&index, &other, 3}, sources_for(Mode::M2RagOnly)),
                    Error);
  }
}

TEST_CASE("dedupe") {
  const ContextItem a = item(ContextKind::Service, "A");
  const ContextItem b = item(ContextKind::Retrieved, "B");
  CHECK(texts(dedupe(std::vector{a, b, a})) == std::vector<std::string>{"A", "B"});
  CHECK(dedupe({}).empty());

  std::vector<ContextItem> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(item(ContextKind::Retrieved, "t" + std::to_string(i % 4)));
  const auto d = dedupe(ten);
  CHECK(texts(d) == std::vector<std::string>{"t0", "t1", "t2", "t3"});
  CHECK(texts(dedupe(d)) == texts(d));
  CHECK(dedupe(std::vector{item(ContextKind::Service, "a  b"), item(ContextKind::Device, " a b ")})
            .size() == 1);
}

TEST_CASE("enforce_budget") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);

  const std::vector<ContextItem> items = {
      item(ContextKind::Retrieved, std::string(40, 'r'), 0),  // 10 tokens
      item(ContextKind::Device, std::string(8, 'd'), 0),      // 2
      item(ContextKind::Service, std::string(20, 's'), 1),    // 5
      item(ContextKind::Service, std::string(20, 't'), 0),    // 5
  };
  SUBCASE("all fit") {
    const ContextBundle b = enforce_budget(items, 100);
    CHECK(b.items.size() == 4);
    CHECK(b.dropped == 0);
    CHECK(b.token_estimate == 22);
    CHECK(b.items[0].text[0] == 't');
    CHECK(b.items[1].text[0] == 's');
    CHECK(b.items[2].kind == ContextKind::Retrieved);
    CHECK(b.items[3].kind == ContextKind::Device);
  }
  SUBCASE("services kept before retrieved") {
    const ContextBundle b = enforce_budget(items, 12);
    CHECK(b.token_estimate <= 12);
    CHECK(b.items.size() == 3);
    CHECK(b.items[0].kind == ContextKind::Service);
    CHECK(b.items[1].kind == ContextKind::Service);
    CHECK(b.items[2].kind == ContextKind::Device);
    CHECK(b.dropped == 1);
  }
  SUBCASE("budget 1 drops everything") {
    const ContextBundle b = enforce_budget(items, 1);
    CHECK(b.items.empty());
    CHECK(b.dropped == 4);
    CHECK(b.token_estimate == 0);
  }
  SUBCASE("budget 0 is a precondition error") { CHECK_THROWS_AS(enforce_budget(items, 0), Error); }
}

TEST_CASE("context properties over random lists") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ContextItem> items;
    const int n = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int i = 0; i < n; ++i) {
      const auto kind = static_cast<ContextKind>(std::uniform_int_distribution<int>(0, 2)(rng));
      const int len = std::uniform_int_distribution<int>(1, 60)(rng);
      const char c = static_cast<char>('a' + std::uniform_int_distribution<int>(0, 5)(rng));
      items.push_back(item(kind, std::string(static_cast<std::size_t>(len % 7 + 1) * 4, c),
                           static_cast<std::size_t>(i / 3)));
    }
    const auto d = dedupe(items);
    REQUIRE(texts(dedupe(d)) == texts(d));
    std::set<std::string> distinct;
    for (const auto& i : items) distinct.insert(i.text);
    REQUIRE(d.size() == distinct.size());

    const std::size_t budget = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    const ContextBundle b = enforce_budget(d, budget);
    REQUIRE(b.token_estimate <= budget);
    REQUIRE(b.items.size() + b.dropped == d.size());
    std::size_t sum = 0;
    for (const auto& i : b.items) sum += estimate_tokens(i.text);
    REQUIRE(sum == b.token_estimate);
  }
}

TEST_CASE("bundle_to_json keeps field order") {
  ContextBundle b;
  b.items.push_back({ContextKind::Service, "x", 0, "whoIs"});
  b.token_estimate = 1;
  CHECK(bundle_to_json(b) ==
        R"({"items":[{"kind":"service","packet_index":0,"source_id":"whoIs","text":"x"}],"token_estimate":1,"dropped":0})");
}
