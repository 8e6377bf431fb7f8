#pragma once

// Loads the score corpus under tests/corpus: NAME.json with event scripts
// NAME.0.events, NAME.1.events, ...

#include <iscore/oracle.hpp>
#include <iscore/runtime.hpp>

#include <filesystem>
#include <fstream>

namespace iscore::testing {

struct CorpusEntry {
  std::string name;
  score::Score score;
  std::vector<std::pair<std::string, std::vector<score::TimedInput>>> scripts;
};

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (const auto& f : files) {
    CorpusEntry c;
    c.name = f.stem().string();
    c.score = score::parse_score(read_text(f));
    for (int i = 0;; ++i) {
      auto ev = dir / (c.name + "." + std::to_string(i) + ".events");
      if (!fs::exists(ev)) break;
      std::istringstream in(read_text(ev));
      c.scripts.emplace_back(ev.filename().string(), score::parse_events(c.score, in));
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::filesystem::path corpus_dir() { return std::filesystem::path(ISCORE_SOURCE_DIR) / "tests" / "corpus"; }

}  // namespace iscore::testing
