#pragma once

// Randomized checks of the ntcc step laws over small generated processes.
// Each check returns an empty string on success, or a description of the
// first counterexample.

#include "gen.hpp"

#include <iscore/interpreter.hpp>

namespace iscore::testing {

inline const std::vector<VarDecl> kLawVars{{"x0", 0, 3}, {"x1", 0, 3}, {"x2", 0, 3}};
constexpr int kLawUnits = 4;

struct ProcGen {
  Gen& g;
  bool sums{true};
  bool stars{false};

  Constraint guard() { return g.coin(0.3) ? g.atom(kLawVars) : g.constraint(kLawVars, 1); }

  // Tells are kept to single assignments or bounds so that random runs are
  // mostly consistent.
  Constraint fact() {
    auto v = LinExpr::var(kLawVars[g.uniform(0, 2)].name);
    int k = g.uniform(0, 3);
    switch (g.uniform(0, 2)) {
      case 0: return eq(v, k);
      case 1: return le(v, k);
      default: return le(LinExpr(k), v);
    }
  }

  ntcc::Process operator()(int depth) {
    using ntcc::Process;
    int r = g.uniform(0, depth <= 0 ? 1 : 9);
    switch (r) {
      case 0: return Process::tell(fact());
      case 1: return g.coin(0.2) ? Process::skip() : Process::tell(fact());
      case 2:
      case 3: return Process::par((*this)(depth - 1), (*this)(depth - 1));
      case 4: return Process::next((*this)(depth - 1));
      case 5: return Process::unless(guard(), (*this)(depth - 1));
      case 6:
        if (sums) {
          std::vector<std::pair<Constraint, Process>> arms;
          int n = g.uniform(1, 2);
          for (int i = 0; i < n; ++i) arms.emplace_back(guard(), (*this)(depth - 1));
          return Process::sum(std::move(arms));
        }
        return Process::next((*this)(depth - 1));
      case 7:
        if (stars) return Process::star((*this)(depth - 1));
        return Process::par(Process::tell(fact()), (*this)(depth - 1));
      case 8: return g.coin(0.3) ? Process::bang((*this)(depth - 2)) : Process::tell(fact());
      default: return Process::par(Process::tell(fact()), (*this)(depth - 1));
    }
  }
};

inline std::vector<Constraint> law_inputs(Gen& g, int n) {
  std::vector<Constraint> in;
  for (int i = 0; i < n; ++i) {
    if (g.coin(0.4))
      in.push_back(Constraint::truth());
    else
      in.push_back(eq(LinExpr::var(kLawVars[g.uniform(0, 2)].name), g.uniform(0, 3)));
  }
  return in;
}

// Observable content of a store: its solution set over the declared box.
inline std::vector<Assignment> observe(const Store& s) { return s.sat() ? s.solutions() : std::vector<Assignment>{}; }

inline bool same_outputs(const std::vector<ntcc::StepResult>& a, const std::vector<ntcc::StepResult>& b, std::size_t from_a = 0,
                         std::size_t from_b = 0) {
  if (a.size() - from_a != b.size() - from_b) return false;
  for (std::size_t i = 0; i + from_a < a.size(); ++i)
    if (observe(a[i + from_a].output) != observe(b[i + from_b].output)) return false;
  return true;
}

inline std::string law_replication(int cases, std::uint64_t seed = 101) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, false, false};
  for (int c = 0; c < cases; ++c) {
    auto b = pg(3);
    auto in = law_inputs(g, kLawUnits);
    auto folded = run(Process::bang(b), {}, in, kLawVars, {});
    auto unfolded = run(Process::par(b, Process::next(Process::bang(b))), {}, in, kLawVars, {});
    if (!same_outputs(folded, unfolded)) return "!P differs from P || next !P for P = " + b.str();
  }
  return {};
}

inline std::string law_next(int cases, std::uint64_t seed = 202) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, true, false};
  for (int c = 0; c < cases; ++c) {
    auto p = pg(3);
    auto in = law_inputs(g, kLawUnits + 1);
    auto delayed = run(Process::next(p), {}, in, kLawVars, {});
    auto direct = run(p, {}, std::vector<Constraint>(in.begin() + 1, in.end()), kLawVars, {});
    // unit 0 holds only the input
    if (observe(delayed[0].output) != observe(run(Process::skip(), {}, {in[0]}, kLawVars, {})[0].output))
      return "next P told something in its first unit, P = " + p.str();
    if (!same_outputs(delayed, direct, 1, 0)) return "next P is not P shifted by one unit, P = " + p.str();
  }
  return {};
}

inline std::string law_unless(int cases, std::uint64_t seed = 303) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, true, false};
  int fired = 0, deferred = 0;
  for (int c = 0; c < cases; ++c) {
    auto guard = pg.guard();
    auto body = Process::tell(eq(LinExpr::var("x2"), 3));  // observable marker
    auto context = Process::par(Process::tell(pg.fact()), Process::tell(pg.fact()));
    auto in = law_inputs(g, 1);
    auto r = step(Process::par(context, Process::unless(guard, body)), {}, in[0], kLawVars, {});
    auto follow = step(r.residual, {}, Constraint::truth(), kLawVars, {});
    auto body_alone = step(body, {}, Constraint::truth(), kLawVars, {});
    auto nothing = step(Process::skip(), {}, Constraint::truth(), kLawVars, {});
    if (r.output.entails(guard)) {
      ++fired;
      if (observe(follow.output) != observe(nothing.output)) return "unless ran its body although " + guard.str() + " held";
    } else {
      ++deferred;
      if (observe(follow.output) != observe(body_alone.output)) return "unless did not run its body, guard " + guard.str();
    }
  }
  if (fired < 20 || deferred < 20) return "too few cases on one side: " + std::to_string(fired) + "/" + std::to_string(deferred);
  return {};
}

inline std::string law_blocked_sum(int cases, std::uint64_t seed = 404) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, true, false};
  const std::vector<VarDecl> vars{{"x0", 0, 3}, {"x1", 0, 3}, {"x2", 0, 3}, {"s", 0, 3}};
  int blocked = 0, taken = 0;
  for (int c = 0; c < cases; ++c) {
    std::vector<std::pair<Constraint, Process>> arms;
    int n = g.uniform(1, 3);
    for (int i = 0; i < n; ++i)
      arms.emplace_back(pg.guard(), Process::par(Process::tell(eq(LinExpr::var("s"), i + 1)), Process::next(pg(2))));
    auto context = pg(2);
    auto in = law_inputs(g, 1);
    auto r = step(Process::par(context, Process::sum(arms)), {}, in[0], vars, {});
    if (!r.output.sat()) continue;
    int chosen = 0;
    for (int i = 0; i < n; ++i)
      if (r.output.entails(eq(LinExpr::var("s"), i + 1))) chosen = i + 1;
    if (chosen) {
      ++taken;
      if (!r.output.entails(arms[chosen - 1].first)) return "sum took an arm whose guard does not hold: " + arms[chosen - 1].first.str();
    } else {
      ++blocked;
      // the residual behaves exactly like the context's own residual
      auto alone = step(context, {}, in[0], vars, {});
      auto a = step(r.residual, {}, Constraint::truth(), vars, {});
      auto b = step(alone.residual, {}, Constraint::truth(), vars, {});
      if (observe(a.output) != observe(b.output)) return "blocked sum left a trace in the next unit, context " + context.str();
    }
  }
  if (blocked < 20 || taken < 20) return "too few cases on one side: " + std::to_string(blocked) + "/" + std::to_string(taken);
  return {};
}

inline std::string law_star(int cases, std::uint64_t seed = 505) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, false, false};  // no other choice points besides the star
  for (int c = 0; c < cases; ++c) {
    auto p = pg(2);
    auto in = law_inputs(g, kLawUnits + 3);
    ChoicePolicy det;
    if (!same_outputs(run(Process::star(p), {}, in, kLawVars, det), run(p, {}, in, kLawVars, det)))
      return "deterministic star does not start now, P = " + p.str();

    int n = g.uniform(0, 3);
    ChoicePolicy scripted;
    scripted.mode = ChoicePolicy::Mode::Scripted;
    scripted.star_bound = 3;
    scripted.script = {{n}};
    if (!same_outputs(run(Process::star(p), {}, in, kLawVars, scripted), run(Process::next(p, n), {}, in, kLawVars, det)))
      return "scripted star delay " + std::to_string(n) + " differs from next^n, P = " + p.str();

    ChoicePolicy seeded;
    seeded.mode = ChoicePolicy::Mode::SeededRandom;
    seeded.seed = static_cast<std::uint64_t>(c);
    seeded.star_bound = 3;
    auto random = run(Process::star(Process::tell(eq(LinExpr::var("x0"), 2))), {}, in, kLawVars, seeded);
    if (random[0].fired.size() != 1u) return "seeded star did not record its delay";
    auto delay = random[0].fired[0].value;
    if (delay < 0 || delay > 3) return "seeded star delay out of bound: " + std::to_string(delay);
  }
  return {};
}

inline std::string law_deterministic_bytes(int cases, std::uint64_t seed = 606) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, true, true};
  for (int c = 0; c < cases; ++c) {
    auto p = pg(4);
    auto in = law_inputs(g, kLawUnits);
    ChoicePolicy det;
    det.star_bound = 2;
    auto a = run(p, {}, in, kLawVars, det);
    auto b = run(p, {}, in, kLawVars, det);
    for (std::size_t t = 0; t < a.size(); ++t)
      if (a[t].output.dump() != b[t].output.dump() || a[t].residual.str() != b[t].residual.str() || a[t].fired != b[t].fired)
        return "two deterministic runs differ at unit " + std::to_string(t) + ", P = " + p.str();
  }
  return {};
}

inline std::string law_within_unit_monotonicity(int cases, std::uint64_t seed = 707) {
  using namespace ntcc;
  Gen g(seed);
  ProcGen pg{g, true, true};
  auto universe = std::make_shared<const Universe>(kLawVars);
  for (int c = 0; c < cases; ++c) {
    auto p = pg(4);
    std::vector<Store> seen;
    ReduceOptions opts;
    opts.on_tell = [&](const Store& s) { seen.push_back(s); };
    FirstChooser ch;
    step(p, {}, law_inputs(g, 1)[0], universe, ch, opts);
    for (std::size_t i = 1; i < seen.size(); ++i)
      for (const auto& k : seen[i - 1].told())
        if (!seen[i].entails(k)) return "store lost " + k.str() + " within a unit, P = " + p.str();
  }
  return {};
}

}  // namespace iscore::testing
