#include <iscore/interpreter.hpp>

#include <gtest/gtest.h>

using namespace iscore;
using namespace iscore::ntcc;

namespace {

Constraint is(const std::string& v, std::int64_t val) { return eq(LinExpr::var(v), val); }

std::vector<VarDecl> bools(std::initializer_list<const char*> names) {
  std::vector<VarDecl> out;
  for (auto n : names) out.push_back({n, 0, 1});
  return out;
}

StepResult one(const Process& p, const Constraint& input, const std::vector<VarDecl>& env, const DefTable& defs = {}) {
  return step(p, defs, input, env, ChoicePolicy{});
}

}  // namespace

TEST(Reduce, TellEnablesGuard) {
  auto p = Process::par(Process::tell(is("a", 1)), Process::when(is("a", 1), Process::tell(is("b", 1))));
  auto r = one(p, Constraint::truth(), bools({"a", "b"}));
  EXPECT_TRUE(r.output.entails(is("a", 1) && is("b", 1)));
  EXPECT_EQ(r.residual.kind(), Process::Kind::Skip);
}

TEST(Reduce, GuardTellAfterSumIsStillSeen) {
  // the sum is scanned before the tell in the first pass
  auto p = Process::par(Process::when(is("a", 1), Process::tell(is("b", 1))), Process::tell(is("a", 1)));
  auto r = one(p, Constraint::truth(), bools({"a", "b"}));
  EXPECT_TRUE(r.output.entails(is("b", 1)));
}

TEST(Reduce, BlockedSumLeavesStoreUnchanged) {
  auto p = Process::when(is("e", 1), Process::tell(is("f", 1)));
  Store s(bools({"e", "f"}));
  FirstChooser ch;
  std::vector<Fired> fired;
  auto q = reduce_to_quiescence(p, {}, s, ch, fired);
  EXPECT_TRUE(q.same(p));
  EXPECT_TRUE(s.told().empty());
  EXPECT_TRUE(fired.empty());
}

TEST(Reduce, BangReplicates) {
  auto p = Process::bang(Process::tell(is("t", 1)));
  auto r = one(p, Constraint::truth(), bools({"t"}));
  EXPECT_TRUE(r.output.entails(is("t", 1)));
  EXPECT_EQ(r.residual.str(), p.str());
}

TEST(Future, Definition) {
  auto tx = Process::tell(is("x", 1));
  EXPECT_EQ(future(Process::next(tx)).str(), tx.str());
  EXPECT_EQ(future(Process::when(is("e", 1), tx)).kind(), Process::Kind::Skip);
  auto unl = Process::unless(is("e", 1), Process::tell(is("f", 1)));
  auto f = future(unl);
  EXPECT_EQ(f.str(), "tell(f + -1 = 0)");
  auto r = one(f, Constraint::truth(), bools({"e", "f"}));
  EXPECT_TRUE(r.output.entails(is("f", 1)));
  EXPECT_THROW(future(tx), Error);
  EXPECT_THROW(future(Process::bang(tx)), Error);
}

TEST(Step, SkipProducesOnlyDomainFacts) {
  auto r = one(Process::skip(), Constraint::truth(), bools({"x"}));
  EXPECT_TRUE(r.output.told().size() == 1);  // the input `true`
  EXPECT_FALSE(r.output.entails(is("x", 1)));
  EXPECT_TRUE(r.output.entails(le(LinExpr::var("x"), 1)));
  EXPECT_EQ(r.residual.kind(), Process::Kind::Skip);
}

TEST(Step, UnlessFiresOnInput) {
  auto p = Process::unless(is("e", 1), Process::tell(is("f", 1)));
  auto r = one(p, is("e", 1), bools({"e", "f"}));
  EXPECT_EQ(r.residual.kind(), Process::Kind::Skip);
  EXPECT_FALSE(r.output.entails(is("f", 1)));
  ASSERT_EQ(r.fired.size(), 1u);
  EXPECT_EQ(r.fired[0].kind, Fired::Kind::UnlessFired);
}

TEST(Step, DeterministicIsReproducible) {
  auto p = Process::par(Process::sum({{is("a", 1), Process::tell(is("b", 1))}, {Constraint::truth(), Process::tell(is("b", 0))}}),
                        Process::star(Process::tell(is("a", 1))));
  ChoicePolicy pol;
  pol.star_bound = 3;
  auto env = bools({"a", "b"});
  auto r1 = step(p, {}, Constraint::truth(), env, pol);
  auto r2 = step(p, {}, Constraint::truth(), env, pol);
  EXPECT_EQ(r1.output.dump(), r2.output.dump());
  EXPECT_EQ(r1.residual.str(), r2.residual.str());
  EXPECT_EQ(r1.fired, r2.fired);
}

TEST(Run, BangEveryUnit) {
  auto rs = run(Process::bang(Process::tell(is("t", 1))), {}, std::vector<Constraint>(3), bools({"t"}), {});
  ASSERT_EQ(rs.size(), 3u);
  for (const auto& r : rs) EXPECT_TRUE(r.output.entails(is("t", 1)));
}

TEST(Run, NextNext) {
  auto rs = run(Process::next(Process::tell(is("x", 1)), 2), {}, std::vector<Constraint>(3), bools({"x"}), {});
  EXPECT_FALSE(rs[0].output.entails(is("x", 1)));
  EXPECT_FALSE(rs[1].output.entails(is("x", 1)));
  EXPECT_TRUE(rs[2].output.entails(is("x", 1)));
}

TEST(Run, StarDeterministicDelayZero) {
  ChoicePolicy pol;
  pol.star_bound = 4;
  auto rs = run(Process::star(Process::tell(is("x", 1))), {}, std::vector<Constraint>(5), bools({"x"}), pol);
  EXPECT_TRUE(rs[0].output.entails(is("x", 1)));
  for (int t = 1; t < 5; ++t) EXPECT_FALSE(rs[t].output.entails(is("x", 1)));
}

TEST(Run, StarScriptedDelay) {
  ChoicePolicy pol;
  pol.star_bound = 4;
  pol.mode = ChoicePolicy::Mode::Scripted;
  pol.script = {{3}};
  auto rs = run(Process::star(Process::tell(is("x", 1))), {}, std::vector<Constraint>(5), bools({"x"}), pol);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(rs[t].output.entails(is("x", 1)), t == 3);
}

TEST(Run, SeededRandomStaysWithinBound) {
  ChoicePolicy pol;
  pol.star_bound = 2;
  pol.mode = ChoicePolicy::Mode::SeededRandom;
  pol.seed = 99;
  auto rs = run(Process::star(Process::tell(is("x", 1))), {}, std::vector<Constraint>(4), bools({"x"}), pol);
  int hits = 0;
  for (int t = 0; t < 3; ++t) hits += rs[t].output.entails(is("x", 1));
  EXPECT_EQ(hits, 1);
}

TEST(Run, ParametricCounter) {
  // Count(n) = tell(c = n) || when n > 0 do next Count(n - 1)
  DefTable defs;
  defs["Count"] = {{"n"},
                   Process::par(Process::tell(eq(LinExpr::var("c"), LinExpr::var("n"))),
                                Process::when(gt(LinExpr::var("n"), 0),
                                              Process::next(Process::call("Count", {LinExpr::var("n") - 1}))))};
  auto rs = run(Process::call("Count", {3}), defs, std::vector<Constraint>(5), {{"c", 0, 9}}, {});
  EXPECT_EQ(rs[0].output.value("c"), 3);
  EXPECT_EQ(rs[3].output.value("c"), 0);
  EXPECT_EQ(rs[4].output.value("c"), std::nullopt);
}

TEST(Run, LocalVariablesAreHiddenAndFresh) {
  // local x in (tell(x = 1) || when x = 1 do tell(y = 1) || next tell(x = 0))
  auto body = Process::par_all({Process::tell(is("x", 1)), Process::when(is("x", 1), Process::tell(is("y", 1))),
                                Process::next(Process::tell(is("x", 0)))});
  auto p = Process::local({"x", 0, 1}, body);
  auto rs = run(p, {}, std::vector<Constraint>(2), bools({"y"}), {});
  EXPECT_TRUE(rs[0].output.entails(is("y", 1)));
  EXPECT_TRUE(rs[0].output.has_var("x#0"));
  EXPECT_FALSE(rs[0].output.has_var("x"));
  EXPECT_EQ(rs[0].residual.kind(), Process::Kind::Local);
  // the hidden variable is redeclared next unit and the tell lands on it
  EXPECT_TRUE(rs[1].output.sat());
  EXPECT_TRUE(rs[1].output.has_var("x#0"));
  EXPECT_EQ(rs[1].output.value("x#0"), 0);
}

TEST(Definitions, UnguardedRecursionRejected) {
  DefTable defs;
  defs["P"] = {{}, Process::par(Process::tell(is("a", 1)), Process::call("P"))};
  defs["Q"] = {{}, Process::par(Process::tell(is("a", 1)), Process::next(Process::call("Q")))};
  auto problems = check_definitions(defs);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("P"), std::string::npos);
  EXPECT_THROW(run(Process::call("P"), defs, {Constraint::truth()}, bools({"a"}), {}), Error);

  // bypassing the static check, the reduction budget catches divergence
  Store s(bools({"a"}));
  FirstChooser ch;
  std::vector<Fired> fired;
  ReduceOptions opts;
  opts.budget = 5000;
  try {
    reduce_to_quiescence(Process::call("P"), defs, s, ch, fired, opts);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "divergent time unit");
  }
}

TEST(Definitions, MissingTargetAndArity) {
  DefTable defs;
  defs["A"] = {{"n"}, Process::next(Process::call("B"))};
  auto problems = check_definitions(defs, Process::call("A"));
  ASSERT_EQ(problems.size(), 2u);
}

TEST(Print, CanonicalSyntax) {
  auto p = Process::par_all({Process::tell(is("a", 1)),
                             Process::sum({{is("a", 1), Process::next(Process::call("P", {2}))},
                                           {is("b", 1), Process::skip()}}),
                             Process::unless(is("c", 1), Process::bang(Process::tell(is("d", 0)))),
                             Process::local({"z", 0, 3}, Process::star(Process::tell(is("z", 2))))});
  EXPECT_EQ(p.str(),
            "tell(a + -1 = 0) || (when a + -1 = 0 do (next P(2)) + when b + -1 = 0 do skip) || "
            "(unless c + -1 = 0 next (!tell(d = 0))) || (local z:[0,3] in (*tell(z + -2 = 0)))");
}

TEST(Invariants, WithinUnitMonotonicity) {
  auto p = Process::par_all({Process::tell(is("a", 1)), Process::when(is("a", 1), Process::tell(is("b", 1))),
                             Process::when(is("b", 1), Process::tell(le(LinExpr::var("c"), 2)))});
  std::vector<Store> seen;
  ReduceOptions opts;
  opts.on_tell = [&](const Store& s) { seen.push_back(s); };
  Store s({{"a", 0, 1}, {"b", 0, 1}, {"c", 0, 5}});
  FirstChooser ch;
  std::vector<Fired> fired;
  reduce_to_quiescence(p, {}, s, ch, fired, opts);
  ASSERT_EQ(seen.size(), 3u);
  for (std::size_t i = 1; i < seen.size(); ++i)
    for (const auto& c : seen[i - 1].told()) EXPECT_TRUE(seen[i].entails(c));
}
