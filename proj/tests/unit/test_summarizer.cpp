#include <doctest.h>

#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bacsum/error.hpp"
#include "bacsum/summarizer.hpp"
#include "support.hpp"

using namespace bacsum;
using namespace bacsum::test;

namespace {

const std::string kPacketText = "Packet:\nFrame 1\n  apdu_type :Confirmed-REQ\n";

ContextBundle three_items() {
  ContextBundle b;
  b.items = {{ContextKind::Service, "service text one", 0, "a"},
             {ContextKind::Retrieved, "retrieved text two", 0, "b"},
             {ContextKind::Device, "device text three", 0, "c"}};
  return b;
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected bacsum::Error");
  return ErrorKind::Io;
}

std::vector<std::chrono::milliseconds> sleeps;
void record_sleep(std::chrono::milliseconds d) { sleeps.push_back(d); }

}  // namespace

TEST_CASE("prompt template") {
  const PromptTemplate& t = default_prompt_template();
  CHECK(t.empty_context == "Context: (none)");
  CHECK(t.context_header == "Context:");
  CHECK(t.hash().size() == 64);
  CHECK(parse_prompt_template(t.to_json()) == t);
  CHECK(load_prompt_template(data_dir() / "prompt_template.json") == t);
  CHECK(parse_prompt_template(t.to_json()).hash() == t.hash());
  PromptTemplate changed = t;
  changed.task += " ";
  CHECK(changed.hash() != t.hash());
  CHECK_THROWS_AS(parse_prompt_template(R"({"version": "1"})"), Error);
}

TEST_CASE("build_prompt") {
  SUBCASE("m1 has no context") {
    const Prompt p = build_prompt(three_items(), kPacketText, Mode::M1NoContext);
    CHECK(p.context_block == "Context: (none)");
    CHECK(p.user_text().find("service text one") == std::string::npos);
    CHECK(p.user_text().find("Frame 1") != std::string::npos);
  }
  SUBCASE("m4 keeps every item verbatim and in order") {
    const Prompt p = build_prompt(three_items(), kPacketText, Mode::M4Full);
    const std::string u = p.user_text();
    const auto a = u.find("service text one");
    const auto b = u.find("retrieved text two");
    const auto c = u.find("device text three");
    REQUIRE(a != std::string::npos);
    REQUIRE(b != std::string::npos);
    REQUIRE(c != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(p.context_block ==
          "Context:\n[1] service: service text one\n[2] retrieved: retrieved text two\n[3] device: "
          "device text three");
  }
  SUBCASE("m3 filters out non-service items") {
    const Prompt p = build_prompt(three_items(), kPacketText, Mode::M3ServiceOnly);
    CHECK(p.context_block == "Context:\n[1] service: service text one");
  }
  SUBCASE("deterministic") {
    CHECK(build_prompt(three_items(), kPacketText, Mode::M4Full) ==
          build_prompt(three_items(), kPacketText, Mode::M4Full));
  }
  SUBCASE("blank packet text") {
    CHECK(kind_of([] { build_prompt({}, " \n", Mode::M4Full); }) == ErrorKind::Precondition);
  }
}

TEST_CASE("summarize") {
  const Prompt prompt = build_prompt(three_items(), kPacketText, Mode::M4Full);
  LlmConfig config;
  config.model = "m";
  sleeps.clear();

  SUBCASE("echo stub returns the first 20 words") {
    EchoStubClient stub;
    const Summary s = summarize(prompt, config, stub, record_sleep);
    std::istringstream words(prompt.user_text());
    std::string w, expected;
    for (int i = 0; i < 20 && words >> w; ++i) expected += (i ? " " : "") + w;
    CHECK(s.text == expected);
    CHECK(s.model_id == "echo-stub");
    CHECK(s.attempts == 1);
    CHECK(s.mode == Mode::M4Full);
    CHECK(summarize(prompt, config, stub, record_sleep).text == s.text);
  }
  SUBCASE("retries=2 gives 3 attempts then llm-unavailable") {
    ScriptedClient client;
    client.failures = 100;
    config.retries = 2;
    CHECK(kind_of([&] { summarize(prompt, config, client, record_sleep); }) ==
          ErrorKind::LlmUnavailable);
    CHECK(client.calls == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[1] == 2 * sleeps[0]);
  }
  SUBCASE("recovers after transient failures") {
    ScriptedClient client;
    client.failures = 2;
    const Summary s = summarize(prompt, config, client, record_sleep);
    CHECK(s.attempts == 3);
    CHECK(s.text == "ok");
    CHECK(client.last_request.messages.size() == 2);
    CHECK(client.last_request.messages[1].content == prompt.user_text());
  }
  SUBCASE("5xx is retried") {
    ScriptedClient client;
    client.status = 503;
    CHECK(kind_of([&] { summarize(prompt, config, client, record_sleep); }) ==
          ErrorKind::LlmUnavailable);
    CHECK(client.calls == 3);
  }
  SUBCASE("4xx is rejected with the endpoint message") {
    ScriptedClient client;
    client.status = 400;
    client.reply = "context too long";
    try {
      summarize(prompt, config, client, record_sleep);
      FAIL("expected request-rejected");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RequestRejected);
      CHECK(std::string(e.what()).find("context too long") != std::string::npos);
    }
    CHECK(client.calls == 1);
  }
  SUBCASE("blank completion") {
    ScriptedClient client;
    client.reply = "  \n";
    CHECK(kind_of([&] { summarize(prompt, config, client, record_sleep); }) ==
          ErrorKind::EmptyResponse);
  }
  SUBCASE("invalid config") {
    EchoStubClient stub;
    config.temperature = 3;
    CHECK(kind_of([&] { summarize(prompt, config, stub, record_sleep); }) ==
          ErrorKind::Configuration);
  }
}

TEST_CASE("parse_chat_response") {
  const ChatResponse ok = parse_chat_response(
      200, R"({"model": "x", "choices": [{"message": {"content": "hi"}}],
               "usage": {"prompt_tokens": 5, "completion_tokens": 1}})");
  CHECK(ok.content == "hi");
  CHECK(ok.model == "x");
  CHECK(ok.usage->prompt_tokens == 5);
  CHECK(parse_chat_response(400, R"({"error": {"message": "bad"}})").error_message == "bad");
  CHECK(kind_of([] { parse_chat_response(200, "<html>"); }) == ErrorKind::Transport);
}

TEST_CASE("HttpChatClient against a local endpoint") {
  httplib::Server server;
  nlohmann::json seen;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"model": "local", "choices": [{"message": {"content": "summary"}}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model = "test-model";
  HttpChatClient client(config);
  const Summary s = summarize(build_prompt({}, kPacketText, Mode::M1NoContext), config, client);
  CHECK(s.text == "summary");
  CHECK(s.model_id == "local");
  CHECK(seen.at("model") == "test-model");
  CHECK(seen.at("temperature") == 0.0);
  CHECK(seen.at("messages").size() == 2);

  server.stop();
  thread.join();
  CHECK(kind_of([] { HttpChatClient(LlmConfig{}); }) == ErrorKind::Configuration);
}
