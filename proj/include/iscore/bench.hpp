#pragma once

// Synthetic chain-with-branches scores and the per-unit compute benchmark.

#include <iscore/runtime.hpp>

#include <numeric>
#include <random>

namespace iscore::score {

/// n objects spread over up to ten parallel lanes. Each lane is a chain of
/// precedences; every seventh object ends in a branch on `k` instead.
inline Score synthetic_score(int n, std::uint64_t seed = 1) {
  if (n < 1) throw Error("bench needs at least one object");
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Score s;
  s.vars.push_back({"k", 0, 3});
  const int lanes = std::min(n, 10);
  std::vector<std::int64_t> lane_len(lanes, 0);
  for (int i = 0; i < n; ++i) {
    TemporalObject o;
    o.id = "o" + std::to_string(i);
    int d = uniform(1, 4);
    o.duration = i % 5 == 4 ? Duration::range(d, d + 2) : Duration::fixed(d);
    o.params.push_back({0, "gain", uniform(0, 127)});
    if (d > 1) o.params.push_back({d - 1, "pan", uniform(-64, 63)});
    s.objects.push_back(std::move(o));
    int lane = i % lanes;
    lane_len[lane] += d + 2;
    if (i < lanes) {
      s.roots.push_back(s.objects.back().id);
      continue;
    }
    auto prev = "o" + std::to_string(i - lanes);
    auto cur = s.objects.back().id;
    if ((i - lanes) % 7 == 3)
      s.branches.push_back({prev, {{parse_constraint("k < 2"), cur}}, cur});
    else
      s.relations.emplace_back(Precedence{prev, cur, 1, 2});
  }
  s.horizon = *std::max_element(lane_len.begin(), lane_len.end()) + 4;
  return s;
}

struct BenchReport {
  int objects{0};
  std::int64_t units{0};
  double mean_ms{0}, median_ms{0}, max_ms{0};
  double total_s{0};
  std::size_t messages{0};
  std::string trace_digest;  // messages only, for determinism checks
};

inline Json to_json(const BenchReport& r) {
  return {{"objects", r.objects}, {"units", r.units},        {"meanMs", r.mean_ms},   {"medianMs", r.median_ms},
          {"maxMs", r.max_ms},    {"totalS", r.total_s},      {"messages", r.messages}, {"traceDigest", r.trace_digest}};
}

/// Runs the synthetic score to its horizon with the clock disabled.
inline BenchReport bench(int n, std::uint64_t seed = 1, RuntimeConfig cfg = {}) {
  auto t0 = std::chrono::steady_clock::now();
  auto cs = std::make_shared<const CompiledScore>(compile(synthetic_score(n, seed)));
  cfg.tu_ms = std::max<std::int64_t>(cfg.tu_ms, 1);
  cfg.overrun = RuntimeConfig::Overrun::Log;
  auto trace = run_script(cs, {}, cfg, false);
  BenchReport r;
  r.objects = n;
  r.units = static_cast<std::int64_t>(trace.size());
  std::vector<double> ms;
  for (const auto& u : trace) {
    ms.push_back(u.compute_ms);
    r.messages += u.messages.size();
  }
  if (!ms.empty()) {
    r.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    r.max_ms = *std::max_element(ms.begin(), ms.end());
    std::sort(ms.begin(), ms.end());
    r.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]) / 2;
  }
  r.total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto lines = message_lines(trace);
  r.trace_digest = std::to_string(std::hash<std::string>{}(lines));
  return r;
}

}  // namespace iscore::score
