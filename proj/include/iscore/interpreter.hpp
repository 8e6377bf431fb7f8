#pragma once

// Discrete-time ntcc interpreter.
//
// A time unit starts from a fresh store holding the declarations, tells the
// environment input and reduces the process until no internal rule applies.
// The quiescent process is then mapped by the future function to the process
// of the next time unit.

#include <iscore/process.hpp>
#include <iscore/store.hpp>

#include <random>

namespace iscore::ntcc {

/// Resolves the nondeterministic choices of a time unit.
class Chooser {
public:
  virtual ~Chooser() = default;
  /// Returns a position in [0, alternatives).
  virtual int pick(int alternatives) = 0;
};

class FirstChooser final : public Chooser {
public:
  int pick(int) override { return 0; }
};

class RandomChooser final : public Chooser {
public:
  explicit RandomChooser(std::uint64_t seed) : rng_(seed) {}
  int pick(int alternatives) override {
    return std::uniform_int_distribution<int>(0, alternatives - 1)(rng_);
  }

private:
  std::mt19937_64 rng_;
};

/// Replays recorded choice positions; any divergence is an error.
class ScriptedChooser final : public Chooser {
public:
  explicit ScriptedChooser(std::vector<int> script) : script_(std::move(script)) {}
  int pick(int alternatives) override {
    if (next_ >= script_.size()) throw Error("replay mismatch: more choices than recorded");
    int p = script_[next_++];
    if (p < 0 || p >= alternatives) throw Error("replay mismatch: recorded choice out of range");
    return p;
  }
  bool exhausted() const { return next_ == script_.size(); }

private:
  std::vector<int> script_;
  std::size_t next_{0};
};

struct ChoicePolicy {
  enum class Mode { Deterministic, SeededRandom, EnumerateAll, Scripted };
  Mode mode{Mode::Deterministic};
  std::uint64_t seed{0};
  int star_bound{0};
  /// Scripted mode: choice positions per time unit.
  std::vector<std::vector<int>> script;
};

struct Fired {
  enum class Kind { SumBranch, StarDelay, UnlessFired };
  Kind kind;
  int value{0};         // branch index, delay, or 0 for unless
  int position{0};      // position among the alternatives offered
  int alternatives{1};

  friend bool operator==(const Fired&, const Fired&) = default;
};

struct StepResult {
  Store output;
  Process residual;
  std::vector<Fired> fired;

  /// Choice positions in the order they were made; enough to replay the step.
  std::vector<int> choices() const {
    std::vector<int> out;
    for (const auto& f : fired)
      if (f.kind != Fired::Kind::UnlessFired && f.alternatives > 1) out.push_back(f.position);
    return out;
  }
};

struct ReduceOptions {
  int star_bound{0};
  std::uint64_t budget{1'000'000};
  /// Observer invoked after every tell (used to check monotonicity).
  std::function<void(const Store&)> on_tell;
};

namespace detail {

class Reducer {
public:
  Reducer(const DefTable& defs, Store& store, Chooser& chooser, const ReduceOptions& opts, std::vector<Fired>& fired)
      : defs_(defs), store_(store), chooser_(chooser), opts_(opts), fired_(fired) {}

  Process run(Process p) {
    while (true) {
      auto v = store_.version();
      p = pass(p, 0);
      if (store_.version() == v) return p;
    }
  }

private:
  void charge(int depth) {
    if (++steps_ > opts_.budget || depth > 20000) throw Error("divergent time unit");
  }

  Process pass(const Process& p, int depth) {
    using K = Process::Kind;
    switch (p.kind()) {
      case K::Skip:
      case K::Next: return p;
      case K::Tell:
        charge(depth);
        store_.tell(p.constraint());
        if (opts_.on_tell) opts_.on_tell(store_);
        return Process::skip();
      case K::Sum: {
        std::vector<int> ready;
        for (std::size_t i = 0; i < p.guards().size(); ++i)
          if (store_.entails(p.guards()[i])) ready.push_back(static_cast<int>(i));
        if (ready.empty()) return p;
        charge(depth);
        int pos = ready.size() == 1 ? 0 : chooser_.pick(static_cast<int>(ready.size()));
        fired_.push_back({Fired::Kind::SumBranch, ready[pos], pos, static_cast<int>(ready.size())});
        return pass(p.bodies()[ready[pos]], depth + 1);
      }
      case K::Par: {
        Process a = pass(p.left(), depth + 1);
        Process b = pass(p.right(), depth + 1);
        if (a.same(p.left()) && b.same(p.right())) return p;
        return Process::par(std::move(a), std::move(b));
      }
      case K::Local: {
        if (p.opened()) {
          Process b = pass(p.body(), depth + 1);
          if (b.same(p.body())) return p;
          if (b.kind() == K::Skip) return b;
          return Process::local(p.decl(), std::move(b), true);
        }
        charge(depth);
        VarDecl fresh = p.decl();
        auto base = fresh.name.substr(0, fresh.name.find('#'));
        do {
          fresh.name = base + "#" + std::to_string(fresh_++);
        } while (store_.has_var(fresh.name));
        store_.declare(fresh);
        Process body = pass(substitute(p.body(), Subst{{p.decl().name, fresh.name}}), depth + 1);
        if (body.kind() == K::Skip) return body;
        return Process::local(std::move(fresh), std::move(body), true);
      }
      case K::Unless:
        if (!store_.entails(p.constraint())) return p;
        charge(depth);
        fired_.push_back({Fired::Kind::UnlessFired, 0, 0, 1});
        return Process::skip();
      case K::Star: {
        charge(depth);
        int alts = opts_.star_bound + 1;
        int n = alts == 1 ? 0 : chooser_.pick(alts);
        fired_.push_back({Fired::Kind::StarDelay, n, n, alts});
        if (n == 0) return pass(p.body(), depth + 1);
        return Process::next(p.body(), n);
      }
      case K::Bang:
        charge(depth);
        return Process::par(pass(p.body(), depth + 1), Process::next(p));
      case K::Call: {
        charge(depth);
        auto it = defs_.find(p.name());
        if (it == defs_.end()) throw Error("call to undefined process " + p.name());
        const auto& def = it->second;
        if (def.params.size() != p.args().size()) throw Error("arity mismatch calling " + p.name());
        Subst s;
        for (std::size_t i = 0; i < def.params.size(); ++i) {
          if (!p.args()[i].is_constant()) throw Error("non-constant argument calling " + p.name());
          s.emplace(def.params[i], p.args()[i].constant());
        }
        return pass(substitute(def.body, s), depth + 1);
      }
    }
    return p;
  }

  const DefTable& defs_;
  Store& store_;
  Chooser& chooser_;
  const ReduceOptions& opts_;
  std::vector<Fired>& fired_;
  std::uint64_t steps_{0};
  int fresh_{0};
};

}  // namespace detail

/// Applies internal reductions until quiescence; `store` is updated in place.
inline Process reduce_to_quiescence(const Process& p, const DefTable& defs, Store& store, Chooser& chooser,
                                    std::vector<Fired>& fired, const ReduceOptions& opts = {}) {
  detail::Reducer r(defs, store, chooser, opts, fired);
  return r.run(p);
}

/// The future function: carries a quiescent process over the time-unit boundary.
inline Process future(const Process& p) {
  using K = Process::Kind;
  switch (p.kind()) {
    case K::Skip: return p;
    case K::Par: return Process::par(future(p.left()), future(p.right()));
    case K::Local: {
      if (!p.opened()) break;
      Process b = future(p.body());
      if (b.kind() == K::Skip) return b;
      return Process::local(p.decl(), std::move(b), false);
    }
    case K::Next: return p.body();
    case K::Unless: return p.body();
    case K::Sum: return Process::skip();
    default: break;
  }
  throw Error("future: process not quiescent: " + p.str());
}

inline StepResult step(const Process& p, const DefTable& defs, const Constraint& input,
                       const std::shared_ptr<const Universe>& env, Chooser& chooser, const ReduceOptions& opts = {}) {
  StepResult r{Store(env), Process::skip(), {}};
  r.output.tell(input);
  Process q = reduce_to_quiescence(p, defs, r.output, chooser, r.fired, opts);
  r.residual = future(q);
  return r;
}

inline std::unique_ptr<Chooser> make_chooser(const ChoicePolicy& policy, std::size_t unit = 0) {
  switch (policy.mode) {
    case ChoicePolicy::Mode::Deterministic: return std::make_unique<FirstChooser>();
    case ChoicePolicy::Mode::SeededRandom: return std::make_unique<RandomChooser>(policy.seed);
    case ChoicePolicy::Mode::Scripted:
      return std::make_unique<ScriptedChooser>(unit < policy.script.size() ? policy.script[unit]
                                                                            : std::vector<int>{});
    case ChoicePolicy::Mode::EnumerateAll: break;
  }
  throw Error("enumerate-all choices are driven by the verifier");
}

inline StepResult step(const Process& p, const DefTable& defs, const Constraint& input,
                       const std::vector<VarDecl>& env, const ChoicePolicy& policy) {
  auto chooser = make_chooser(policy);
  ReduceOptions opts;
  opts.star_bound = policy.star_bound;
  return step(p, defs, input, std::make_shared<const Universe>(env), *chooser, opts);
}

/// Folds `step` over the inputs. The random stream of a seeded policy runs
/// across the whole sequence.
inline std::vector<StepResult> run(const Process& p, const DefTable& defs, const std::vector<Constraint>& inputs,
                                   const std::vector<VarDecl>& env, const ChoicePolicy& policy) {
  if (auto problems = check_definitions(defs, p); !problems.empty()) throw Error(problems.front());
  auto universe = std::make_shared<const Universe>(env);
  ReduceOptions opts;
  opts.star_bound = policy.star_bound;
  std::unique_ptr<Chooser> shared;
  if (policy.mode != ChoicePolicy::Mode::Scripted) shared = make_chooser(policy);
  std::vector<StepResult> out;
  out.reserve(inputs.size());
  Process cur = p;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    std::unique_ptr<Chooser> per_unit;
    if (!shared) per_unit = make_chooser(policy, t);
    out.push_back(step(cur, defs, inputs[t], universe, shared ? *shared : *per_unit, opts));
    cur = out.back().residual;
  }
  return out;
}

}  // namespace iscore::ntcc
