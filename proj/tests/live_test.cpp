#include <iscore/ws_server.hpp>

#include <gtest/gtest.h>

using namespace iscore;
using namespace iscore::live;

namespace {

const char* kScore = R"({"horizon": 6,
  "vars": [{"name": "k", "lo": 0, "hi": 3}],
  "objects": [{"id": "A", "duration": {"fixed": 2}}, {"id": "B", "duration": {"fixed": 1}}],
  "points": [{"id": "p", "binds": {"start-of": "A"}, "window": [0, 3]}],
  "branches": [{"at": "A", "arms": [{"condition": "k = 2", "successor": "B"}]}],
  "roots": ["A"]})";

std::shared_ptr<score::Session> session(std::int64_t tu_ms = 5) {
  score::RuntimeConfig cfg;
  cfg.tu_ms = tu_ms;
  auto cs = std::make_shared<const score::CompiledScore>(score::compile(score::parse_score(kScore)));
  return std::make_shared<score::Session>(cs, cfg);
}

struct TestClient {
  asio::io_context io;
  ws::stream<tcp::socket> stream{io};

  explicit TestClient(unsigned short port) {
    tcp::resolver resolver(io);
    asio::connect(stream.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    stream.handshake("127.0.0.1", "/");
    stream.text(true);
  }
  void send(const Json& j) { stream.write(asio::buffer(j.dump())); }
  std::optional<Json> read() {
    beast::flat_buffer buf;
    beast::error_code ec;
    stream.read(buf, ec);
    if (ec) return std::nullopt;
    return Json::parse(beast::buffers_to_string(buf.data()));
  }
  Json read_ack() {
    while (auto j = read())
      if (j->contains("ack")) return j->at("ack");
    return nullptr;
  }
};

}  // namespace

TEST(Live, ParseEndpoint) {
  EXPECT_EQ(parse_endpoint("0.0.0.0:9002").host, "0.0.0.0");
  EXPECT_EQ(parse_endpoint("0.0.0.0:9002").port, 9002);
  EXPECT_EQ(parse_endpoint(":9003").host, "127.0.0.1");
  EXPECT_EQ(parse_endpoint("9004").port, 9004);
  EXPECT_THROW(parse_endpoint("localhost:http"), Error);
  EXPECT_THROW(parse_endpoint("1:70000"), Error);
}

TEST(Live, CommandHandling) {
  auto s = session();
  std::atomic<int> transport{0};
  auto msg = [&](const char* text) { return handle_command(*s, text, transport).at("ack").at("message").get<std::string>(); };
  EXPECT_EQ(msg(R"({"trigger": "p"})"), "queued");
  EXPECT_EQ(msg(R"({"trigger": "zz"})"), "unknown event: zz");
  EXPECT_EQ(msg(R"({"trigger": "k"})"), "unknown event: k");
  EXPECT_EQ(msg(R"({"set": {"var": "k", "value": 2}})"), "queued");
  EXPECT_EQ(msg(R"({"set": {"var": "k", "value": 7}})").rfind("value out of range", 0), 0u);
  EXPECT_EQ(msg(R"({"set": {"var": "q", "value": 1}})").rfind("unknown event", 0), 0u);
  EXPECT_EQ(msg(R"({"set": {"var": "k"}})"), "malformed command");
  EXPECT_EQ(msg(R"({"transport": "start"})"), "playing");
  EXPECT_EQ(transport, 1);
  EXPECT_EQ(msg(R"({"transport": "pause"})"), "paused");
  EXPECT_EQ(transport, 0);
  EXPECT_EQ(msg(R"({"transport": "rewind"})"), "unknown transport command: rewind");
  EXPECT_EQ(msg("not json"), "malformed command");
  EXPECT_EQ(msg(R"({"trigger": "p", "set": {}})"), "malformed command");
}

TEST(Live, BusyPortRejected) {
  Server a(session(), {"127.0.0.1", 0});
  try {
    Server b(session(), {"127.0.0.1", a.port()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "address in use");
  }
}

TEST(Live, StartsPausedAndStreamsUnits) {
  auto s = session();
  Server server(s, {"127.0.0.1", 0});
  std::thread engine([&] { server.run(); });

  TestClient c(server.port());
  auto hello = c.read();
  ASSERT_TRUE(hello);
  EXPECT_EQ(hello->at("tu"), -1);
  EXPECT_EQ(hello->at("objects").size(), 2u);

  // paused: nothing advances until the transport starts
  std::this_thread::sleep_for(std::chrono::milliseconds(40));
  EXPECT_EQ(s->unit(), 0);
  EXPECT_FALSE(server.playing());

  c.send({{"trigger", "p"}});
  EXPECT_EQ(c.read_ack().at("message"), "queued");
  c.send({{"set", {{"var", "k"}, {"value", 2}}}});
  EXPECT_EQ(c.read_ack().at("message"), "queued");
  c.send({{"transport", "start"}});

  std::vector<Json> units;
  while (auto j = c.read())
    if (!j->contains("ack")) units.push_back(*j);
  engine.join();

  ASSERT_EQ(units.size(), 6u);
  for (std::size_t i = 0; i < units.size(); ++i) {
    EXPECT_EQ(units[i].at("tu"), static_cast<int>(i));
    for (const char* key : {"objects", "pendingPoints", "messages"}) EXPECT_TRUE(units[i].contains(key)) << key;
  }
  // triggered at 0, effect at 1; the branch took k = 2 at unit 0 only, so B never starts
  EXPECT_EQ(units[0].at("pendingPoints"), Json::array({"p"}));
  EXPECT_EQ(units[1].at("messages"), Json::parse(R"([{"kind": "start", "object": "A"}])"));
  EXPECT_EQ(units[1].at("objects")[0].at("state"), "active");
  EXPECT_EQ(units[1].at("objects")[0].at("remaining"), 2);
  EXPECT_EQ(units[3].at("objects")[0].at("state"), "done");
  EXPECT_EQ(s->state(), score::Session::State::Completed);
}

TEST(Live, AutostartAndStop) {
  auto s = session(1000);
  Server server(s, {"127.0.0.1", 0}, true);
  std::thread engine([&] { server.run(); });
  while (s->unit() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  server.stop();
  engine.join();
  EXPECT_EQ(s->unit(), 1);
}
