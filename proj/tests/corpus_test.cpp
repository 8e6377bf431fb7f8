#include "corpus.hpp"

#include <gtest/gtest.h>

using namespace iscore;
using namespace iscore::score;

TEST(Corpus, CompiledRunsMatchTheOracle) {
  auto corpus = iscore::testing::load_corpus(iscore::testing::corpus_dir());
  ASSERT_GE(corpus.size(), 20u);
  for (const auto& c : corpus) {
    ASSERT_TRUE(validate(c.score).empty()) << c.name;
    ASSERT_FALSE(c.scripts.empty()) << c.name;
    auto cs = compile(c.score);
    for (const auto& [file, ev] : c.scripts) {
      auto expected = message_lines(oracle_simulate(c.score, ev));
      EXPECT_EQ(message_lines(run_script(cs, ev)), expected) << file;
      if (std::getenv("ISCORE_SHOW_CORPUS")) std::cout << "== " << file << "\n" << expected;
    }
  }
}

TEST(Corpus, DroppedPointsMatchTheOracle) {
  CompileOptions drop{UnfiredPoint::Drop};
  int changed = 0;
  for (const auto& c : iscore::testing::load_corpus(iscore::testing::corpus_dir())) {
    auto forced = compile(c.score);
    auto cs = compile(c.score, drop);
    for (const auto& [file, ev] : c.scripts) {
      auto expected = message_lines(oracle_simulate(c.score, ev, {}, drop));
      EXPECT_EQ(message_lines(run_script(cs, ev)), expected) << file;
      changed += expected != message_lines(run_script(forced, ev));
    }
  }
  EXPECT_GT(changed, 3);
}

TEST(Corpus, DroppedStartPointNeverStarts) {
  auto c = iscore::testing::load_corpus(iscore::testing::corpus_dir());
  auto it = std::find_if(c.begin(), c.end(), [](const auto& e) { return e.name == "start_point"; });
  ASSERT_NE(it, c.end());
  auto t = run_script(compile(it->score, {UnfiredPoint::Drop}), {});
  for (const auto& u : t) EXPECT_TRUE(u.messages.empty()) << u.tu;
}
