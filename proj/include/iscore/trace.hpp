#pragma once

// Environment inputs and per-unit trace records shared by the runtime, the
// oracle and the verifier.

#include <iscore/score.hpp>

#include <istream>
#include <sstream>

namespace iscore::score {

/// An environment input: an interaction-point event (`ev_p`, value 1) or a
/// score-variable assignment.
struct Input {
  std::string var;
  std::int64_t value{1};

  Constraint constraint() const { return eq(LinExpr::var(var), value); }
  std::string str() const { return names::reserved(var) ? var : var + "=" + std::to_string(value); }

  friend bool operator==(const Input&, const Input&) = default;
  friend auto operator<=>(const Input&, const Input&) = default;
};

struct TimedInput {
  std::int64_t tu{0};
  Input input;

  friend bool operator==(const TimedInput&, const TimedInput&) = default;
};

/// Parses "ev_p", "p" (a point id), or "var=value" against a score.
inline Input parse_input(const Score& s, std::string_view text) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  text = trim(text);
  auto eqpos = text.find('=');
  if (eqpos == std::string_view::npos) {
    std::string id(text);
    for (const auto& p : s.points)
      if (id == p.id || id == names::event(p.id)) return {names::event(p.id), 1};
    throw Error("unknown event: " + id);
  }
  std::string var(trim(text.substr(0, eqpos)));
  std::string val(trim(text.substr(eqpos + 1)));
  auto alphabet = event_alphabet(s);
  if (std::find(alphabet.begin(), alphabet.end(), var) == alphabet.end() || names::reserved(var))
    throw Error("unknown event variable: " + var);
  std::int64_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoll(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
  } catch (const std::exception&) {
    throw Error("bad value for " + var + ": " + val);
  }
  for (const auto& d : s.vars)
    if (d.name == var && (v < d.lo || v > d.hi)) throw Error("value out of range for " + var + ": " + val);
  return {var, v};
}

/// Events file: one "tu event" per line; blank lines and '#' comments ignored.
inline std::vector<TimedInput> parse_events(const Score& s, std::istream& in) {
  std::vector<TimedInput> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::int64_t tu = 0;
    std::string ev;
    if (!(ls >> tu)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error("events line " + std::to_string(lineno) + ": expected \"tu event\"");
    }
    std::string rest;
    std::getline(ls, rest);
    if (tu < 0) throw Error("events line " + std::to_string(lineno) + ": negative unit");
    try {
      out.push_back({tu, parse_input(s, rest)});
    } catch (const Error& e) {
      throw Error("events line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tu < b.tu; });
  return out;
}

inline std::vector<Input> inputs_at(const std::vector<TimedInput>& events, std::int64_t tu) {
  std::vector<Input> out;
  for (const auto& e : events)
    if (e.tu == tu) out.push_back(e.input);
  return out;
}

inline Constraint conjunction(const std::vector<Input>& inputs) {
  std::vector<Constraint> cs;
  for (const auto& i : inputs) cs.push_back(i.constraint());
  return conj_all(cs);
}

struct UnitRecord {
  std::int64_t tu{0};
  std::vector<Input> inputs;
  std::vector<std::string> signals;  // entailed control signals, environment order
  std::vector<ControlMessage> messages;
  bool failure{false};
  double compute_ms{0};
};

using Trace = std::vector<UnitRecord>;

inline Json to_json(const UnitRecord& r, bool with_time = true) {
  Json j{{"tu", r.tu}};
  j["inputs"] = Json::array();
  for (const auto& i : r.inputs) j["inputs"].push_back(i.str());
  j["signals"] = r.signals;
  j["messages"] = Json::array();
  for (const auto& m : r.messages) j["messages"].push_back(to_json(m));
  if (r.failure) j["failure"] = true;
  if (with_time) j["computeMs"] = r.compute_ms;
  return j;
}

/// JSON lines; `with_time = false` gives the form used for comparisons.
inline std::string trace_lines(const Trace& t, bool with_time = true) {
  std::string out;
  for (const auto& r : t) out += to_json(r, with_time).dump() + "\n";
  return out;
}

/// Messages and failure flags only, cut after the first failing unit.
inline std::string message_lines(const Trace& t) {
  std::string out;
  for (const auto& r : t) {
    Json j{{"tu", r.tu}, {"messages", Json::array()}};
    for (const auto& m : r.messages) j["messages"].push_back(to_json(m));
    if (r.failure) j["failure"] = true;
    out += j.dump() + "\n";
    if (r.failure) break;
  }
  return out;
}

}  // namespace iscore::score
