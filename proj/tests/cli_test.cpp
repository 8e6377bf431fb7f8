#include <iscore/iscore.hpp>
#include <iscore/ws_server.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>

using namespace iscore;
namespace fs = std::filesystem;
using score::Json;

namespace {

struct Result {
  int code{-1};
  std::string out, err;
};

fs::path scratch() {
  auto dir = fs::temp_directory_path() / ("iscore_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

Result cli(const std::string& args) {
  auto out = scratch() / "stdout", err = scratch() / "stderr";
  std::string cmd = std::string(ISCORE_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string score_path(const char* name) { return std::string(ISCORE_SOURCE_DIR) + "/scores/" + name; }

}  // namespace

TEST(Cli, HelpVersionAndUsage) {
  EXPECT_EQ(cli("--help").code, 0);
  auto v = cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string("iscore ") + kVersion + "\n");
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  auto empty = write_file("empty.json", R"({"horizon": 1})");
  auto bad = cli("validate " + empty.string() + " --strictness 3");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("--strictness"), std::string::npos);
  EXPECT_EQ(cli("run " + empty.string() + " --tu-ms 0").code, 2);
}

TEST(Cli, Validate) {
  auto empty = write_file("empty.json", R"({"horizon": 1})");
  auto ok = cli("validate " + empty.string());
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "");
  auto broken = write_file("broken.json", R"({"horizon": 4,
    "objects": [{"id": "A", "duration": {"fixed": 3}}, {"id": "B", "duration": {"fixed": 1}}],
    "relations": [{"kind": "Precedence", "from": "A", "to": "B", "delay": [2, 2]}],
    "roots": ["A"]})");
  auto r = cli("validate " + broken.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "B: B start window empty [start-window]\n");
  EXPECT_EQ(cli("validate " + write_file("junk.json", "{").string()).code, 1);
  EXPECT_EQ(cli("validate " + (scratch() / "missing.json").string()).code, 2);
}

TEST(Cli, CompileDump) {
  auto r = cli("compile " + score_path("gain_demo.json") + " --dump -");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("entry = "), std::string::npos);
  auto file = scratch() / "dump.txt";
  EXPECT_EQ(cli("compile " + score_path("gain_demo.json") + " --dump " + file.string()).code, 0);
  EXPECT_EQ(read_file(file), r.out);
}

TEST(Cli, VerifyExitCodesAndEvidence) {
  auto ok = cli("verify " + score_path("gain_demo.json") + " " + score_path("gain_property.json") + " " + score_path("gain_env.json") +
                " --horizon 32");
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(Json::parse(ok.out).at("result"), "VERIFIED");

  auto cx = scratch() / "cx.json";
  fs::remove(cx);
  auto bad = cli("verify " + score_path("gain_demo_mutant.json") + " " + score_path("gain_property.json") + " " +
                 score_path("gain_env.json") + " --evidence " + cx.string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(Json::parse(bad.out).at("result"), "REFUTED");
  ASSERT_TRUE(fs::exists(cx));
  auto mutant = score::parse_score(read_file(score_path("gain_demo_mutant.json")));
  auto cs = std::make_shared<const score::CompiledScore>(score::compile(mutant));
  auto ev = verify::evidence_from_json(mutant, Json::parse(read_file(cx)));
  EXPECT_TRUE(verify::replay(ev, *cs));
  EXPECT_TRUE(verify::replay_runtime(ev, cs));

  auto tiny = cli("verify " + score_path("gain_demo.json") + " " + score_path("gain_property.json") + " " + score_path("gain_env.json") +
                  " --budget 10");
  EXPECT_EQ(tiny.code, 2);
  EXPECT_NE(tiny.err.find("budget exhausted"), std::string::npos);
  auto deep = cli("verify " + score_path("gain_demo.json") + " " + score_path("gain_property.json") + " --horizon 20");
  EXPECT_EQ(deep.code, 2);  // property looks further than the horizon
}

TEST(Cli, RunIsDeterministicAndPeriodInvariant) {
  auto base = "run " + score_path("gain_demo.json") + " --events " + score_path("gain_events.txt") + " --no-timing";
  auto a = cli(base + " --tu-ms 1 --seed 5");
  auto b = cli(base + " --tu-ms 1 --seed 5");
  auto c = cli(base + " --tu-ms 7 --seed 5");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 32);

  auto out = scratch() / "trace.jsonl";
  EXPECT_EQ(cli("run " + score_path("gain_demo.json") + " --tu-ms 1 --max-units 5 --out " + out.string()).code, 0);
  auto text = read_file(out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_TRUE(Json::parse(text.substr(0, text.find('\n'))).contains("computeMs"));

  auto bad_events = write_file("bad.txt", "3 ev_nothing\n");
  EXPECT_EQ(cli("run " + score_path("gain_demo.json") + " --events " + bad_events.string()).code, 2);
  EXPECT_EQ(cli("run " + score_path("gain_demo.json") + " --max-units 99").code, 2);
}

TEST(Cli, UnfiredPointsOption) {
  auto base = "run " + score_path("gain_demo.json") + " --tu-ms 1 --no-timing";
  auto forced = cli(base);
  auto dropped = cli(base + " --unfired-points drop");
  EXPECT_EQ(forced.code, 0);
  EXPECT_EQ(dropped.code, 0);
  EXPECT_NE(forced.out.find("\"e_A\""), std::string::npos);
  EXPECT_EQ(dropped.out.find("\"e_A\""), std::string::npos);
  EXPECT_EQ(cli(base + " --unfired-points explode").code, 2);
}

TEST(Cli, ServeOnBusyPort) {
  auto cs = std::make_shared<const score::CompiledScore>(score::compile(score::parse_score(R"({"horizon": 1})")));
  live::Server holder(std::make_shared<score::Session>(cs, score::RuntimeConfig{}), {"127.0.0.1", 0});
  auto r = cli("run " + score_path("gain_demo.json") + " --serve 127.0.0.1:" + std::to_string(holder.port()));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("address in use"), std::string::npos);
}

TEST(Cli, ServeAutostartRunsToCompletion) {
  auto out = scratch() / "served.jsonl";
  auto r = cli("run " + score_path("gain_demo.json") + " --serve 127.0.0.1:0 --autostart --tu-ms 1 --no-timing --events " +
               score_path("gain_events.txt") + " --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.err;
  auto headless = cli("run " + score_path("gain_demo.json") + " --tu-ms 1 --no-timing --events " + score_path("gain_events.txt"));
  EXPECT_EQ(read_file(out), headless.out);
}

TEST(Cli, Bench) {
  auto out = scratch() / "bench.json";
  EXPECT_EQ(cli("bench --objects 30 --out " + out.string()).code, 0);
  auto j = Json::parse(read_file(out));
  for (const char* k : {"meanMs", "medianMs", "maxMs", "totalS", "units", "objects"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j.at("objects"), 30);
  EXPECT_EQ(cli("bench --objects 0").code, 2);
}
