#include <iscore/iscore.hpp>
#include <iscore/ws_server.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace iscore;
using score::Json;

namespace {

constexpr int kOk = 0, kFindings = 1, kUsage = 2;

// Input problems that are the tool user's fault rather than the score's.
struct UsageError : Error {
  using Error::Error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(slurp(path));
  } catch (const Json::exception& e) {
    throw UsageError(path + ": invalid JSON: " + e.what());
  }
}

// Output to a file, or stdout for "" and "-".
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw UsageError("cannot write " + path);
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

struct Loaded {
  score::Score score;
  std::vector<score::Diagnostic> diagnostics;
};

Loaded load_score(const std::string& path) {
  Loaded l;
  l.score = score::parse_score(slurp(path));
  l.diagnostics = score::validate(l.score);
  return l;
}

int report(const std::vector<score::Diagnostic>& ds) {
  for (const auto& d : ds) std::cout << d.subject << ": " << d.message << " [" << d.kind << "]\n";
  return ds.empty() ? kOk : kFindings;
}

std::map<std::string, score::UnfiredPoint> unfired_names{{"force", score::UnfiredPoint::Force},
                                                          {"drop", score::UnfiredPoint::Drop}};

struct RunArgs {
  std::string score, events, out, serve;
  score::CompileOptions compile;
  std::int64_t tu_ms{50};
  std::optional<std::int64_t> max_units;
  std::optional<std::uint64_t> seed;
  bool autostart{false}, no_timing{false};
};

int cmd_run(const RunArgs& a) {
  auto l = load_score(a.score);
  if (!l.diagnostics.empty()) return report(l.diagnostics);
  std::vector<score::TimedInput> events;
  if (!a.events.empty()) {
    std::istringstream in(slurp(a.events));
    try {
      events = score::parse_events(l.score, in);
    } catch (const Error& e) {
      throw UsageError(a.events + ": " + e.what());
    }
  }
  score::RuntimeConfig cfg;
  cfg.tu_ms = a.tu_ms;
  cfg.max_units = a.max_units;
  if (a.seed) {
    cfg.policy.mode = ntcc::ChoicePolicy::Mode::SeededRandom;
    cfg.policy.seed = *a.seed;
  }
  cfg.log = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
  auto cs = std::make_shared<const score::CompiledScore>(score::compile(l.score, a.compile));
  Sink sink(a.out);
  bool failed = false;
  auto emit = [&](const score::UnitRecord& r) {
    sink.out() << to_json(r, !a.no_timing).dump() << "\n" << std::flush;
    failed = failed || r.failure;
  };

  if (a.serve.empty()) {
    try {
      (void)score::Session(cs, cfg);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    score::run_script(cs, events, cfg, true, emit);
    return failed ? kFindings : kOk;
  }
  std::shared_ptr<score::Session> session;
  std::unique_ptr<live::Server> owned;
  try {
    session = std::make_shared<score::Session>(cs, cfg);
    owned = std::make_unique<live::Server>(session, live::parse_endpoint(a.serve), a.autostart);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto& server = *owned;
  // scripted events are queued when their unit comes up, as in a headless run
  server.on_unit = [&](const score::UnitRecord& r) {
    emit(r);
    for (const auto& in : score::inputs_at(events, r.tu + 1)) session->push(in);
  };
  for (const auto& in : score::inputs_at(events, 0)) session->push(in);
  std::cerr << "serving on " << a.serve << " (port " << server.port() << ")" << (a.autostart ? "" : ", paused") << "\n";
  server.run();
  return failed ? kFindings : kOk;
}

struct VerifyArgs {
  std::string score, property, env, evidence;
  score::CompileOptions compile;
  std::optional<std::int64_t> horizon;
  std::uint64_t budget{1'000'000};
};

int cmd_verify(const VerifyArgs& a) {
  auto l = load_score(a.score);
  if (!l.diagnostics.empty()) return report(l.diagnostics);
  verify::Property prop;
  verify::EnvSpec env;
  try {
    prop = verify::property_from_json(read_json(a.property));
    if (!a.env.empty()) env = verify::env_from_json(l.score, read_json(a.env));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto cs = score::compile(l.score, a.compile);
  verify::Verdict v;
  try {
    v = verify::check(cs, prop, env, a.horizon.value_or(l.score.horizon), {a.budget, true});
  } catch (const verify::BudgetExhausted& e) {
    std::cerr << "error: budget exhausted after " << e.stats.states << " states\n";
    return kUsage;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto j = to_json(v);
  if (v.evidence && !a.evidence.empty()) {
    Sink file(a.evidence);
    file.out() << to_json(*v.evidence).dump(2) << "\n";
    j.erase("evidence");
    j["evidencePath"] = a.evidence;
  }
  std::cout << j.dump() << "\n";
  return v.verified() ? kOk : kFindings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive score compiler, runtime and bounded model checker"};
  app.set_version_flag("--version", std::string("iscore ") + kVersion);
  app.require_subcommand(1);

  std::string score_path, dump_path;
  score::CompileOptions compile_opts;
  auto unfired = [](CLI::App* c, score::CompileOptions& o) {
    c->add_option("--unfired-points", o.unfired, "Start and delay points never triggered: force (default) or drop")
        ->transform(CLI::CheckedTransformer(unfired_names))
        ->option_text("force|drop");
  };
  auto* validate = app.add_subcommand("validate", "Check a score and print diagnostics");
  validate->add_option("score", score_path, "Score document")->required();

  auto* compile = app.add_subcommand("compile", "Compile a score to ntcc definitions");
  compile->add_option("score", score_path, "Score document")->required();
  compile->add_option("--dump", dump_path, "Write the process dump here ('-' for stdout)");
  unfired(compile, compile_opts);

  RunArgs run;
  auto* runc = app.add_subcommand("run", "Execute a score, writing one JSON line per time unit");
  runc->add_option("score", run.score, "Score document")->required();
  runc->add_option("--tu-ms", run.tu_ms, "Time unit period in milliseconds")->check(CLI::Range(1, 60000));
  runc->add_option("--events", run.events, "Event script: lines 'tu event' or 'tu var=value'");
  runc->add_option("--out", run.out, "Trace output (default stdout)");
  runc->add_option("--serve", run.serve, "Serve the live WebSocket endpoint at host:port");
  runc->add_option("--max-units", run.max_units, "Stop after this many units")->check(CLI::NonNegativeNumber);
  runc->add_option("--seed", run.seed, "Resolve choices with a seeded random policy");
  runc->add_flag("--autostart", run.autostart, "With --serve, start playing without waiting for a client");
  runc->add_flag("--no-timing", run.no_timing, "Omit computeMs from trace lines");
  unfired(runc, run.compile);

  VerifyArgs ver;
  auto* verc = app.add_subcommand("verify", "Check a bounded temporal property over all runs");
  verc->add_option("score", ver.score, "Score document")->required();
  verc->add_option("property", ver.property, "Property document")->required();
  verc->add_option("env", ver.env, "Environment document (default: no inputs)");
  verc->add_option("--horizon", ver.horizon, "Units to explore (default: score horizon)")->check(CLI::PositiveNumber);
  verc->add_option("--budget", ver.budget, "Maximum unit executions")->check(CLI::PositiveNumber);
  verc->add_option("--evidence", ver.evidence, "Write counterexample or witness here");
  unfired(verc, ver.compile);

  int objects = 500;
  std::uint64_t seed = 1;
  std::string bench_out;
  auto* benchc = app.add_subcommand("bench", "Run the synthetic benchmark score");
  benchc->add_option("--objects", objects, "Number of temporal objects")->check(CLI::PositiveNumber);
  benchc->add_option("--seed", seed, "Score generator seed");
  benchc->add_option("--out", bench_out, "Report output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return report(load_score(score_path).diagnostics);
    if (*compile) {
      auto l = load_score(score_path);
      if (!l.diagnostics.empty()) return report(l.diagnostics);
      auto cs = score::compile(l.score, compile_opts);
      if (!dump_path.empty()) {
        Sink sink(dump_path);
        sink.out() << score::dump(cs);
      }
      return kOk;
    }
    if (*runc) return cmd_run(run);
    if (*verc) return cmd_verify(ver);
    if (*benchc) {
      auto r = score::bench(objects, seed);
      Sink sink(bench_out);
      sink.out() << to_json(r).dump(2) << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    // anything wrong with the score document itself is a finding
    std::cerr << "error: " << e.what() << "\n";
    return kFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
