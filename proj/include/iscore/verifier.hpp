#pragma once

// Bounded explicit-state model checking of compiled scores.
//
// Runs are sequences of output stores, one per time unit, up to the horizon.
// A unit whose store is inconsistent ends the run; like any inconsistent
// store it entails every atom.
//
// Formulas are evaluated on finite runs: `next` is strong (false at the last
// unit), and bounded operators look at most k units ahead, truncated at the
// end of the run.

#include <iscore/runtime.hpp>

#include <chrono>
#include <functional>
#include <unordered_set>

namespace iscore::verify {

using score::CompiledScore;
using score::Input;
using score::Json;

class Formula {
public:
  enum class Op { True, False, Atom, Not, And, Or, Implies, Next, Always, Eventually, Until };

  static Formula truth() { return make(Op::True); }
  static Formula falsity() { return make(Op::False); }
  static Formula atom(Constraint c) {
    auto f = make(Op::Atom);
    f.n_->atom = std::move(c);
    return finish(std::move(f));
  }
  static Formula negation(Formula a) { return make(Op::Not, {std::move(a)}); }
  static Formula both(Formula a, Formula b) { return make(Op::And, {std::move(a), std::move(b)}); }
  static Formula either(Formula a, Formula b) { return make(Op::Or, {std::move(a), std::move(b)}); }
  static Formula implies(Formula a, Formula b) { return make(Op::Implies, {std::move(a), std::move(b)}); }
  static Formula next(Formula a, int times = 1) {
    for (int i = 0; i < times; ++i) a = make(Op::Next, {std::move(a)});
    return a;
  }
  static Formula always(int k, Formula a) { return make(Op::Always, {std::move(a)}, k); }
  static Formula eventually(int k, Formula a) { return make(Op::Eventually, {std::move(a)}, k); }
  static Formula until(int k, Formula a, Formula b) { return make(Op::Until, {std::move(a), std::move(b)}, k); }

  Op op() const { return n_->op; }
  int k() const { return n_->k; }
  const Constraint& constraint() const { return n_->atom; }
  const Formula& arg(std::size_t i = 0) const { return n_->args.at(i); }
  const std::string& str() const { return n_->text; }
  bool is_true() const { return op() == Op::True; }
  bool is_false() const { return op() == Op::False; }

  /// Largest bound used by a bounded operator (0 if none).
  int max_bound() const {
    int m = n_->k;
    for (const auto& a : n_->args) m = std::max(m, a.max_bound());
    return m;
  }
  void atoms(std::vector<Constraint>& out) const {
    if (op() == Op::Atom) out.push_back(constraint());
    for (const auto& a : n_->args) a.atoms(out);
  }

private:
  struct Node {
    Op op{Op::True};
    int k{0};
    Constraint atom;
    std::vector<Formula> args;
    std::string text;
  };
  explicit Formula(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  static Formula make(Op op, std::vector<Formula> args = {}, int k = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->k = k;
    n->args = std::move(args);
    return finish(Formula(std::move(n)));
  }
  static Formula finish(Formula f) {
    auto& n = *f.n_;
    auto join = [&](const char* name) {
      std::string s = name;
      if (n.k) s += "[" + std::to_string(n.k) + "]";
      s += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + n.args[i].str();
      return s + ")";
    };
    switch (n.op) {
      case Op::True: n.text = "true"; break;
      case Op::False: n.text = "false"; break;
      case Op::Atom: n.text = "{" + n.atom.str() + "}"; break;
      case Op::Not: n.text = join("not"); break;
      case Op::And: n.text = join("and"); break;
      case Op::Or: n.text = join("or"); break;
      case Op::Implies: n.text = join("implies"); break;
      case Op::Next: n.text = join("next"); break;
      case Op::Always: n.text = join("always"); break;
      case Op::Eventually: n.text = join("eventually"); break;
      case Op::Until: n.text = join("until"); break;
    }
    return f;
  }

  std::shared_ptr<Node> n_;
};

namespace detail {

inline Formula f_not(const Formula& a) {
  if (a.is_true()) return Formula::falsity();
  if (a.is_false()) return Formula::truth();
  if (a.op() == Formula::Op::Not) return a.arg();
  return Formula::negation(a);
}
inline Formula f_and(const Formula& a, const Formula& b) {
  if (a.is_false() || b.is_false()) return Formula::falsity();
  if (a.is_true()) return b;
  if (b.is_true()) return a;
  if (a.str() == b.str()) return a;
  return Formula::both(a, b);
}
inline Formula f_or(const Formula& a, const Formula& b) {
  if (a.is_true() || b.is_true()) return Formula::truth();
  if (a.is_false()) return b;
  if (b.is_false()) return a;
  if (a.str() == b.str()) return a;
  return Formula::either(a, b);
}

}  // namespace detail

/// Rewrites the obligation `f` at the current unit into the obligation for
/// the next unit, given this unit's output. On the last unit the result is
/// always true or false.
inline Formula progress(const Formula& f, const Store& out, bool last) {
  using Op = Formula::Op;
  using namespace detail;
  switch (f.op()) {
    case Op::True:
    case Op::False: return f;
    case Op::Atom: return out.entails(f.constraint()) ? Formula::truth() : Formula::falsity();
    case Op::Not: return f_not(progress(f.arg(), out, last));
    case Op::And: {
      auto a = progress(f.arg(0), out, last);
      if (a.is_false()) return a;
      return f_and(a, progress(f.arg(1), out, last));
    }
    case Op::Or: {
      auto a = progress(f.arg(0), out, last);
      if (a.is_true()) return a;
      return f_or(a, progress(f.arg(1), out, last));
    }
    case Op::Implies: {
      auto a = progress(f.arg(0), out, last);
      if (a.is_false()) return Formula::truth();
      return f_or(f_not(a), progress(f.arg(1), out, last));
    }
    case Op::Next: return last ? Formula::falsity() : f.arg();
    case Op::Always: {
      if (f.k() <= 0) return Formula::truth();
      auto now = progress(f.arg(), out, last);
      if (now.is_false() || last || f.k() == 1) return now;
      return f_and(now, Formula::always(f.k() - 1, f.arg()));
    }
    case Op::Eventually: {
      if (f.k() <= 0) return Formula::falsity();
      auto now = progress(f.arg(), out, last);
      if (now.is_true() || last || f.k() == 1) return now;
      return f_or(now, Formula::eventually(f.k() - 1, f.arg()));
    }
    case Op::Until: {
      if (f.k() <= 0) return Formula::falsity();
      auto goal = progress(f.arg(1), out, last);
      if (goal.is_true()) return goal;
      auto hold = progress(f.arg(0), out, last);
      if (last || f.k() == 1) return f_or(goal, Formula::falsity());
      return f_or(goal, f_and(hold, Formula::until(f.k() - 1, f.arg(0), f.arg(1))));
    }
  }
  return f;
}

/// Direct evaluation on a finished run (used to cross-check progression).
inline bool holds(const Formula& f, const std::vector<Store>& run, std::size_t i = 0) {
  using Op = Formula::Op;
  const auto n = run.size();
  auto window = [&](int k) { return std::min<std::size_t>(n, i + static_cast<std::size_t>(std::max(k, 0))); };
  switch (f.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Atom: return i < n && run[i].entails(f.constraint());
    case Op::Not: return !holds(f.arg(), run, i);
    case Op::And: return holds(f.arg(0), run, i) && holds(f.arg(1), run, i);
    case Op::Or: return holds(f.arg(0), run, i) || holds(f.arg(1), run, i);
    case Op::Implies: return !holds(f.arg(0), run, i) || holds(f.arg(1), run, i);
    case Op::Next: return i + 1 < n && holds(f.arg(), run, i + 1);
    case Op::Always:
      for (auto j = i; j < window(f.k()); ++j)
        if (!holds(f.arg(), run, j)) return false;
      return true;
    case Op::Eventually:
      for (auto j = i; j < window(f.k()); ++j)
        if (holds(f.arg(), run, j)) return true;
      return false;
    case Op::Until:
      for (auto j = i; j < window(f.k()); ++j) {
        if (holds(f.arg(1), run, j)) return true;
        if (!holds(f.arg(0), run, j)) return false;
      }
      return false;
  }
  return false;
}

struct Property {
  enum class Mode { ForAll, Exists };
  Mode mode{Mode::ForAll};
  Formula formula{Formula::truth()};
};

inline Formula formula_from_json(const Json& j) {
  auto fail = [&](const std::string& why) -> Formula { throw Error("property: " + why + " in " + j.dump()); };
  if (!j.is_object() || !j.contains("op")) return fail("expected {\"op\": ...}");
  auto op = j.at("op").get<std::string>();
  auto allowed = [&](std::initializer_list<const char*> keys) { score::detail::only_keys(j, keys, "property." + op); };
  auto k = [&]() {
    if (!j.contains("k") || !j.at("k").is_number_integer() || j.at("k").get<int>() < 0) fail("missing bound k");
    return j.at("k").get<int>();
  };
  auto arg = [&]() { return j.contains("arg") ? formula_from_json(j.at("arg")) : fail("missing arg"); };
  auto args = [&]() {
    if (!j.contains("args") || !j.at("args").is_array() || j.at("args").size() < 2) fail("need at least two args");
    std::vector<Formula> out;
    for (const auto& a : j.at("args")) out.push_back(formula_from_json(a));
    return out;
  };
  if (op == "atom") {
    allowed({"op", "c"});
    return Formula::atom(parse_constraint(j.at("c").get<std::string>()));
  }
  if (op == "not") {
    allowed({"op", "arg"});
    return Formula::negation(arg());
  }
  if (op == "and" || op == "or") {
    allowed({"op", "args"});
    auto as = args();
    Formula f = as[0];
    for (std::size_t i = 1; i < as.size(); ++i) f = op == "and" ? Formula::both(f, as[i]) : Formula::either(f, as[i]);
    return f;
  }
  if (op == "implies" || op == "until") {
    allowed({"op", "args", "k"});
    auto as = args();
    if (as.size() != 2) fail(op + " takes two args");
    return op == "implies" ? Formula::implies(as[0], as[1]) : Formula::until(k(), as[0], as[1]);
  }
  if (op == "next") {
    allowed({"op", "arg", "n"});
    int n = j.value("n", 1);
    if (n < 1) fail("next count must be positive");
    return Formula::next(arg(), n);
  }
  if (op == "always" || op == "eventually") {
    allowed({"op", "arg", "k"});
    return op == "always" ? Formula::always(k(), arg()) : Formula::eventually(k(), arg());
  }
  return fail("unknown operator " + op);
}

inline Property property_from_json(const Json& j) {
  score::detail::only_keys(j, {"mode", "formula"}, "property");
  Property p;
  auto mode = score::detail::req<std::string>(j, "mode", "property");
  if (mode == "for-all-runs")
    p.mode = Property::Mode::ForAll;
  else if (mode == "exists-run")
    p.mode = Property::Mode::Exists;
  else
    throw Error("property: mode must be for-all-runs or exists-run");
  p.formula = formula_from_json(j.at("formula"));
  return p;
}

struct EnvSpec {
  std::vector<std::string> free_events;  // ev_ variables
  std::vector<score::TimedInput> scripted;
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> var_ranges;
};

inline EnvSpec env_from_json(const score::Score& s, const Json& j) {
  score::detail::only_keys(j, {"free-events", "scripted", "var-ranges"}, "env");
  EnvSpec env;
  for (const auto& e : j.value("free-events", Json::array())) {
    auto in = score::parse_input(s, e.get<std::string>());
    if (!score::names::reserved(in.var)) throw Error("env: free events must be interaction-point events");
    if (std::find(env.free_events.begin(), env.free_events.end(), in.var) == env.free_events.end())
      env.free_events.push_back(in.var);
  }
  for (const auto& e : j.value("scripted", Json::array())) {
    score::detail::only_keys(e, {"tu", "event"}, "env.scripted[]");
    env.scripted.push_back({score::detail::req<std::int64_t>(e, "tu", "env.scripted[]"),
                            score::parse_input(s, score::detail::req<std::string>(e, "event", "env.scripted[]"))});
  }
  auto ranges = j.value("var-ranges", Json::object());
  for (auto it = ranges.begin(); it != ranges.end(); ++it) {
    const auto& var = it.key();
    std::vector<std::int64_t> vs;
    for (const auto& v : it.value()) vs.push_back(score::parse_input(s, var + "=" + std::to_string(v.get<std::int64_t>())).value);
    if (vs.empty()) throw Error("env: empty range for " + var);
    env.var_ranges.emplace_back(var, std::move(vs));
  }
  return env;
}

/// One unit of a run: what the environment supplied, how internal choices
/// were resolved, and what the unit produced.
struct EvidenceUnit {
  std::int64_t tu{0};
  std::vector<Input> inputs;
  std::vector<int> choices;
  std::vector<std::string> signals;
  std::vector<score::ControlMessage> messages;
  bool failure{false};

  friend bool operator==(const EvidenceUnit& a, const EvidenceUnit& b) {
    return a.tu == b.tu && a.inputs == b.inputs && a.choices == b.choices && a.signals == b.signals &&
           a.messages == b.messages && a.failure == b.failure;
  }
};
using Evidence = std::vector<EvidenceUnit>;

inline Json to_json(const Evidence& ev) {
  Json out = Json::array();
  for (const auto& u : ev) {
    Json j{{"tu", u.tu}, {"inputs", Json::array()}, {"choices", u.choices}, {"signals", u.signals}, {"messages", Json::array()}};
    for (const auto& i : u.inputs) j["inputs"].push_back(i.str());
    for (const auto& m : u.messages) j["messages"].push_back(score::to_json(m));
    if (u.failure) j["failure"] = true;
    out.push_back(std::move(j));
  }
  return out;
}

inline Evidence evidence_from_json(const score::Score& s, const Json& j) {
  Evidence ev;
  for (const auto& u : j) {
    EvidenceUnit e;
    e.tu = u.at("tu").get<std::int64_t>();
    for (const auto& i : u.at("inputs")) e.inputs.push_back(score::parse_input(s, i.get<std::string>()));
    e.choices = u.at("choices").get<std::vector<int>>();
    e.signals = u.at("signals").get<std::vector<std::string>>();
    for (const auto& m : u.at("messages")) e.messages.push_back(score::message_from_json(m, "evidence"));
    e.failure = u.value("failure", false);
    ev.push_back(std::move(e));
  }
  return ev;
}

struct Stats {
  std::uint64_t states{0};    // unit executions
  std::uint64_t branches{0};  // input/choice alternatives taken
  std::uint64_t memo_hits{0};
  double elapsed_ms{0};
};

struct Verdict {
  enum class Result { Verified, Refuted };
  Result result{Result::Verified};
  std::optional<Evidence> evidence;
  Stats stats;
  std::string note;

  bool verified() const { return result == Result::Verified; }
};

inline Json to_json(const Verdict& v) {
  Json j{{"result", v.verified() ? "VERIFIED" : "REFUTED"},
         {"stats",
          {{"states", v.stats.states}, {"branches", v.stats.branches}, {"memoHits", v.stats.memo_hits}, {"elapsedMs", v.stats.elapsed_ms}}}};
  if (!v.note.empty()) j["note"] = v.note;
  if (v.evidence) j["evidence"] = to_json(*v.evidence);
  return j;
}

class BudgetExhausted : public Error {
public:
  BudgetExhausted(Stats s) : Error("budget exhausted"), stats(s) {}
  Stats stats;
};

struct CheckOptions {
  std::uint64_t budget{1'000'000};
  bool memo{true};
};

using score::signals_of;

namespace detail {

/// Replays recorded positions, then picks 0, recording every choice point.
class Odometer final : public ntcc::Chooser {
public:
  explicit Odometer(std::vector<int> prefix) : prefix_(std::move(prefix)) {}
  int pick(int alternatives) override {
    int p = pos_ < prefix_.size() ? prefix_[pos_] : 0;
    ++pos_;
    taken_.push_back(p);
    alts_.push_back(alternatives);
    return p;
  }
  /// The next choice vector in odometer order, or nullopt when exhausted.
  std::optional<std::vector<int>> advance() const {
    for (auto i = taken_.size(); i-- > 0;)
      if (taken_[i] + 1 < alts_[i]) {
        std::vector<int> next(taken_.begin(), taken_.begin() + static_cast<std::ptrdiff_t>(i));
        next.push_back(taken_[i] + 1);
        return next;
      }
    return std::nullopt;
  }

private:
  std::vector<int> prefix_;
  std::size_t pos_{0};
  std::vector<int> taken_, alts_;
};

class Explorer {
public:
  using Leaf = std::function<bool(const Evidence&)>;  // return true to stop

  Explorer(const CompiledScore& cs, const EnvSpec& env, std::int64_t horizon, CheckOptions opts)
      : cs_(cs), env_(env), horizon_(horizon), opts_(opts), universe_(std::make_shared<const Universe>(cs.env)) {}

  const Stats& stats() const { return stats_; }

  /// Searches for a run on which the obligation becomes `target`.
  bool search(const Formula& f, bool target) {
    target_ = target;
    return dfs(0, cs_.entry, f);
  }

  /// Every complete run (up to the horizon or the first failure).
  void all_runs(const Leaf& leaf) {
    leaf_ = &leaf;
    dfs(0, cs_.entry, std::nullopt);
    leaf_ = nullptr;
  }

  Evidence path;

private:
  std::vector<std::vector<Input>> input_options(std::int64_t t) const {
    auto fixed = score::inputs_at(env_.scripted, t);
    std::vector<std::vector<Input>> out;
    const auto nf = env_.free_events.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nf); ++mask) {
      std::vector<std::size_t> odo(env_.var_ranges.size(), 0);
      bool more = true;
      while (more) {
        auto ins = fixed;
        for (std::size_t i = 0; i < nf; ++i)
          if (mask & (std::uint64_t{1} << i)) ins.push_back({env_.free_events[i], 1});
        for (std::size_t v = 0; v < odo.size(); ++v) ins.push_back({env_.var_ranges[v].first, env_.var_ranges[v].second[odo[v]]});
        std::sort(ins.begin(), ins.end());
        ins.erase(std::unique(ins.begin(), ins.end()), ins.end());
        out.push_back(std::move(ins));
        more = false;
        for (auto v = odo.size(); v-- > 0;) {
          if (++odo[v] < env_.var_ranges[v].second.size()) {
            more = true;
            break;
          }
          odo[v] = 0;
        }
      }
    }
    return out;
  }

  bool dfs(std::int64_t t, const ntcc::Process& p, const std::optional<Formula>& ob) {
    std::string key;
    if (opts_.memo && ob) {
      key = std::to_string(t) + "|" + p.str() + "|" + ob->str();
      if (memo_.count(key)) {
        ++stats_.memo_hits;
        return false;
      }
    }
    for (const auto& ins : input_options(t)) {
      auto input = score::conjunction(ins);
      std::optional<std::vector<int>> script = std::vector<int>{};
      while (script) {
        if (++stats_.states > opts_.budget) throw BudgetExhausted(stats_);
        ++stats_.branches;
        Odometer odo(*script);
        auto r = ntcc::step(p, cs_.defs, input, universe_, odo, {});
        script = odo.advance();

        EvidenceUnit u;
        u.tu = t;
        u.inputs = ins;
        u.choices = r.choices();
        u.signals = signals_of(cs_, r.output);
        u.messages = score::messages_of(cs_, r.output);
        u.failure = !r.output.sat();
        const bool last = u.failure || t + 1 >= horizon_;
        path.push_back(std::move(u));

        bool found = false;
        if (ob) {
          auto next = progress(*ob, r.output, last);
          if (next.is_true() || next.is_false())
            found = next.is_true() == target_;
          else if (!last)
            found = dfs(t + 1, r.residual, next);
        } else if (last) {
          found = (*leaf_)(path);
        } else {
          found = dfs(t + 1, r.residual, ob);
        }
        if (found) return true;
        path.pop_back();
      }
    }
    if (!key.empty()) memo_.insert(std::move(key));
    return false;
  }

  const CompiledScore& cs_;
  const EnvSpec& env_;
  std::int64_t horizon_;
  CheckOptions opts_;
  std::shared_ptr<const Universe> universe_;
  Stats stats_;
  bool target_{false};
  const Leaf* leaf_{nullptr};
  std::unordered_set<std::string> memo_;
};

inline void check_formula(const CompiledScore& cs, const Formula& f, std::int64_t horizon) {
  if (f.max_bound() > horizon) throw Error("property bound exceeds the horizon");
  std::vector<Constraint> atoms;
  f.atoms(atoms);
  Store probe(cs.env);
  for (const auto& a : atoms) (void)probe.entails(a);  // throws on unknown variables
}

inline void check_env(const CompiledScore& cs, const EnvSpec& env, std::int64_t horizon) {
  auto in_alphabet = [&](const std::string& v) {
    return std::find(cs.alphabet.begin(), cs.alphabet.end(), v) != cs.alphabet.end();
  };
  for (const auto& e : env.free_events)
    if (!in_alphabet(e)) throw Error("env: " + e + " is not in the event alphabet");
  for (const auto& e : env.scripted) {
    if (!in_alphabet(e.input.var)) throw Error("env: " + e.input.var + " is not in the event alphabet");
    if (e.tu < 0 || e.tu >= horizon) throw Error("env: scripted event outside the horizon");
  }
  for (const auto& [var, vals] : env.var_ranges)
    if (!in_alphabet(var)) throw Error("env: " + var + " is not in the event alphabet");
}

}  // namespace detail

/// Decides `p` over every run of `cs` allowed by `env`, up to `horizon` units.
inline Verdict check(const CompiledScore& cs, const Property& p, const EnvSpec& env, std::int64_t horizon,
                     CheckOptions opts = {}) {
  if (horizon < 1) throw Error("horizon must be at least 1");
  detail::check_formula(cs, p.formula, horizon);
  detail::check_env(cs, env, horizon);
  auto t0 = std::chrono::steady_clock::now();
  detail::Explorer ex(cs, env, horizon, opts);
  bool exists = p.mode == Property::Mode::Exists;
  Verdict v;
  try {
    bool found = ex.search(p.formula, exists);
    if (found) v.evidence = ex.path;
    v.result = found == exists ? Verdict::Result::Verified : Verdict::Result::Refuted;
    if (exists && !found) v.note = "no witness within horizon";
  } catch (BudgetExhausted& e) {
    e.stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    throw;
  }
  v.stats = ex.stats();
  v.stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

inline Verdict reachable(const CompiledScore& cs, const Constraint& target, const EnvSpec& env, std::int64_t horizon,
                         CheckOptions opts = {}) {
  return check(cs, {Property::Mode::Exists, Formula::eventually(static_cast<int>(horizon), Formula::atom(target))}, env, horizon,
               opts);
}

/// Every run the checker considers, in exploration order (no memoization).
inline std::vector<Evidence> enumerate_runs(const CompiledScore& cs, const EnvSpec& env, std::int64_t horizon,
                                            std::uint64_t budget = 1'000'000) {
  detail::check_env(cs, env, horizon);
  CheckOptions opts{budget, false};
  detail::Explorer ex(cs, env, horizon, opts);
  std::vector<Evidence> out;
  ex.all_runs([&](const Evidence& e) {
    out.push_back(e);
    return false;
  });
  return out;
}

/// Re-executes the evidence's inputs and choices through ntcc steps and
/// compares the signals, messages and failure flags unit by unit.
inline bool replay(const Evidence& ev, const CompiledScore& cs) {
  auto universe = std::make_shared<const Universe>(cs.env);
  auto p = cs.entry;
  try {
    for (std::size_t t = 0; t < ev.size(); ++t) {
      const auto& u = ev[t];
      if (u.tu != static_cast<std::int64_t>(t)) return false;
      ntcc::ScriptedChooser ch(u.choices);
      auto r = ntcc::step(p, cs.defs, score::conjunction(u.inputs), universe, ch, {});
      if (!ch.exhausted()) return false;
      if (signals_of(cs, r.output) != u.signals || score::messages_of(cs, r.output) != u.messages ||
          r.output.sat() == u.failure)
        return false;
      p = r.residual;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

/// Replays the evidence through a runtime session with scripted inputs and
/// choices; true when every unit's signals, messages and failure flag match.
inline bool replay_runtime(const Evidence& ev, std::shared_ptr<const CompiledScore> cs) {
  score::RuntimeConfig cfg;
  cfg.policy.mode = ntcc::ChoicePolicy::Mode::Scripted;
  for (const auto& u : ev) cfg.policy.script.push_back(u.choices);
  cfg.max_units = static_cast<std::int64_t>(ev.size());
  if (*cfg.max_units > cs->score.horizon) return false;
  try {
    score::Session s(cs, cfg);
    s.start();
    for (const auto& u : ev) {
      for (const auto& in : u.inputs) s.push(in);
      auto rec = s.tick();
      if (rec.messages != u.messages || rec.signals != u.signals || rec.failure != u.failure) return false;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace iscore::verify
