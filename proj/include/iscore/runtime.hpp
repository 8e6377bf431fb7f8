#pragma once

// Real-time execution of a compiled score: one ntcc step per time unit,
// environment events queued from any thread, control messages and per-unit
// snapshots published to observers.

#include <iscore/compiler.hpp>
#include <iscore/trace.hpp>

#include <chrono>
#include <mutex>
#include <thread>

namespace iscore::score {

struct RuntimeConfig {
  enum class Overrun { Log, Abort };
  std::int64_t tu_ms{50};
  ntcc::ChoicePolicy policy;
  std::optional<std::int64_t> max_units;  // defaults to the horizon
  Overrun overrun{Overrun::Log};
  bool abort_on_failure{false};
  std::function<void(const std::string&)> log;
};

struct ObjectView {
  Id id;
  std::string state;  // waiting | active | done
  std::optional<std::int64_t> remaining;
};

/// State after a unit, as published to observers.
struct Snapshot {
  std::int64_t tu{-1};
  std::vector<ObjectView> objects;
  std::vector<Id> pending_points;
  std::vector<ControlMessage> messages;
  bool failure{false};
};

inline Json to_json(const Snapshot& s) {
  Json j{{"tu", s.tu}, {"objects", Json::array()}, {"pendingPoints", s.pending_points}, {"messages", Json::array()}};
  for (const auto& o : s.objects)
    j["objects"].push_back({{"id", o.id}, {"state", o.state}, {"remaining", o.remaining ? Json(*o.remaining) : Json(nullptr)}});
  for (const auto& m : s.messages) j["messages"].push_back(to_json(m));
  if (s.failure) j["failure"] = true;
  return j;
}

struct Ack {
  bool ok{true};
  std::string message;
};

/// Control messages of a unit, in message-map order (objects in score order;
/// start, params, stop). An inconsistent store emits nothing.
inline std::vector<ControlMessage> messages_of(const CompiledScore& cs, const Store& out) {
  std::vector<ControlMessage> msgs;
  if (!out.sat()) return msgs;
  for (const auto& rule : cs.msgmap)
    if (out.value(rule.signal) == 1) msgs.push_back(rule.message);
  return msgs;
}

/// Control signals fixed to 1 in a unit's output, in environment order.
/// Duration symbols are values rather than signals and are left out.
inline std::vector<std::string> signals_of(const CompiledScore& cs, const Store& out) {
  std::vector<std::string> sig;
  if (!out.sat()) return sig;
  for (const auto& d : cs.env)
    if (names::reserved(d.name) && d.name.rfind("dur_", 0) != 0 && out.value(d.name) == 1) sig.push_back(d.name);
  return sig;
}

class Session {
public:
  enum class State { Ready, Running, Completed };

  Session(std::shared_ptr<const CompiledScore> cs, RuntimeConfig cfg)
      : cs_(std::move(cs)), cfg_(std::move(cfg)), universe_(std::make_shared<const Universe>(cs_->env)),
        residual_(cs_->entry), started_at_(cs_->score.objects.size(), -1), ended_(cs_->score.objects.size(), false) {
    if (cfg_.tu_ms < 1) throw Error("tu period must be at least 1 ms");
    max_units_ = cfg_.max_units.value_or(cs_->score.horizon);
    if (max_units_ < 0 || max_units_ > cs_->score.horizon) throw Error("max units must lie in [0, horizon]");
    if (cfg_.policy.mode == ntcc::ChoicePolicy::Mode::SeededRandom) chooser_ = ntcc::make_chooser(cfg_.policy);
    opts_.star_bound = cfg_.policy.star_bound;
  }

  const CompiledScore& compiled() const { return *cs_; }
  const RuntimeConfig& config() const { return cfg_; }

  State state() const {
    std::lock_guard lk(mu_);
    return state_;
  }
  bool ready() const { return state() == State::Ready; }
  std::int64_t max_units() const { return max_units_; }

  void start() {
    std::lock_guard lk(mu_);
    if (state_ != State::Ready) throw Error("already running");
    state_ = max_units_ == 0 ? State::Completed : State::Running;
  }

  /// Queues an environment event for the next unit. Safe from any thread.
  Ack inject(std::string_view text) {
    Input in;
    try {
      in = parse_input(cs_->score, text);
    } catch (const Error& e) {
      return {false, e.what()};
    }
    std::lock_guard lk(mu_);
    if (state_ == State::Completed) return {false, "completed"};
    if (names::reserved(in.var)) {
      auto id = in.var.substr(names::event("").size());
      if (!open_next_locked().count(id)) return {true, "ignored: window closed"};
    }
    queue_.push_back(std::move(in));
    return {true, "queued"};
  }

  /// Queues an input without the window check (scripted runs and replay).
  void push(Input in) {
    std::lock_guard lk(mu_);
    queue_.push_back(std::move(in));
  }

  UnitRecord tick() {
    std::unique_lock lk(mu_);
    if (state_ == State::Ready) throw Error("not running");
    if (state_ == State::Completed) throw Error("completed");
    UnitRecord rec;
    rec.tu = tu_;
    rec.inputs = std::move(queue_);
    queue_.clear();
    std::sort(rec.inputs.begin(), rec.inputs.end());
    rec.inputs.erase(std::unique(rec.inputs.begin(), rec.inputs.end()), rec.inputs.end());
    Process cur = residual_;
    lk.unlock();

    auto t0 = std::chrono::steady_clock::now();
    std::unique_ptr<ntcc::Chooser> unit_chooser;
    if (!chooser_) unit_chooser = ntcc::make_chooser(cfg_.policy, static_cast<std::size_t>(rec.tu));
    auto r = ntcc::step(cur, cs_->defs, conjunction(rec.inputs), universe_, chooser_ ? *chooser_ : *unit_chooser, opts_);
    rec.messages = messages_of(*cs_, r.output);
    rec.signals = signals_of(*cs_, r.output);
    rec.failure = !r.output.sat();
    auto snap = std::make_shared<Snapshot>(make_snapshot(rec, r.output));
    rec.compute_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    lk.lock();
    residual_ = r.residual;
    choices_.push_back(r.choices());
    trace_.push_back(rec);
    snapshot_ = std::move(snap);
    open_next_.reset();
    ++tu_;
    if (tu_ >= max_units_) state_ = State::Completed;
    lk.unlock();

    if (rec.failure) {
      note("constraint failure at unit " + std::to_string(rec.tu));
      if (cfg_.abort_on_failure) abort_session("constraint failure at unit " + std::to_string(rec.tu));
    }
    if (rec.compute_ms > static_cast<double>(cfg_.tu_ms)) {
      note("unit " + std::to_string(rec.tu) + " overran its period");
      if (cfg_.overrun == RuntimeConfig::Overrun::Abort) abort_session("unit " + std::to_string(rec.tu) + " overran its period");
    }
    return rec;
  }

  Trace trace() const {
    std::lock_guard lk(mu_);
    return trace_;
  }
  /// Choice positions per unit, enough to replay the run.
  std::vector<std::vector<int>> choices() const {
    std::lock_guard lk(mu_);
    return choices_;
  }
  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lk(mu_);
    if (!snapshot_) return std::make_shared<const Snapshot>(initial_snapshot());
    return snapshot_;
  }
  std::int64_t unit() const {
    std::lock_guard lk(mu_);
    return tu_;
  }

private:
  void note(const std::string& msg) const {
    if (cfg_.log) cfg_.log(msg);
  }

  void abort_session(const std::string& why) {
    std::lock_guard lk(mu_);
    state_ = State::Completed;
    throw Error("aborted: " + why);
  }

  Snapshot initial_snapshot() const {
    Snapshot s;
    for (const auto& o : cs_->score.objects) s.objects.push_back({o.id, "waiting", std::nullopt});
    return s;
  }

  Snapshot make_snapshot(const UnitRecord& rec, const Store& out) {
    Snapshot s;
    s.tu = rec.tu;
    s.messages = rec.messages;
    s.failure = rec.failure;
    const auto& sc = cs_->score;
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
      const auto& id = sc.objects[i].id;
      ObjectView v{id, "waiting", std::nullopt};
      if (!rec.failure) {
        if (out.value(names::start(id)) == 1) started_at_[i] = rec.tu;
        if (out.value(names::running(id)) == 1) {
          v.state = "active";
          if (auto d = out.value(names::dur(id)); d && started_at_[i] >= 0) v.remaining = started_at_[i] + *d - rec.tu;
        } else if (ended_[i]) {
          v.state = "done";
        }
        if (out.value(names::end(id)) == 1) ended_[i] = true;
      }
      s.objects.push_back(std::move(v));
    }
    if (!rec.failure)
      for (const auto& p : sc.points)
        if (out.value(names::open(p.id)) == 1) s.pending_points.push_back(p.id);
    return s;
  }

  // Points whose window is open in the next unit: a dry run of the residual.
  const std::set<Id>& open_next_locked() {
    if (!open_next_) {
      std::set<Id> open;
      ntcc::FirstChooser first;
      try {
        auto r = ntcc::step(residual_, cs_->defs, Constraint::truth(), universe_, first, opts_);
        for (const auto& p : cs_->score.points)
          if (r.output.value(names::open(p.id)) == 1) open.insert(p.id);
      } catch (const Error&) {
      }
      open_next_ = std::move(open);
    }
    return *open_next_;
  }

  std::shared_ptr<const CompiledScore> cs_;
  RuntimeConfig cfg_;
  std::shared_ptr<const Universe> universe_;
  ntcc::ReduceOptions opts_;
  std::unique_ptr<ntcc::Chooser> chooser_;
  std::int64_t max_units_{0};

  mutable std::mutex mu_;
  State state_{State::Ready};
  std::int64_t tu_{0};
  Process residual_;
  std::vector<Input> queue_;
  Trace trace_;
  std::vector<std::vector<int>> choices_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::optional<std::set<Id>> open_next_;
  std::vector<std::int64_t> started_at_;
  std::vector<bool> ended_;
};

/// Runs a session over scripted inputs to completion. With `realtime` each
/// unit starts one period after the previous one.
inline Trace run_script(std::shared_ptr<const CompiledScore> cs, const std::vector<TimedInput>& events, RuntimeConfig cfg,
                        bool realtime = false, const std::function<void(const UnitRecord&)>& on_unit = {}) {
  Session s(std::move(cs), cfg);
  s.start();
  auto next = std::chrono::steady_clock::now();
  while (s.state() == Session::State::Running) {
    for (const auto& in : inputs_at(events, s.unit())) s.push(in);
    auto rec = s.tick();
    if (on_unit) on_unit(rec);
    if (realtime) {
      next += std::chrono::milliseconds(cfg.tu_ms);
      std::this_thread::sleep_until(next);
    }
  }
  return s.trace();
}

inline Trace run_script(const CompiledScore& cs, const std::vector<TimedInput>& events, RuntimeConfig cfg = {}) {
  return run_script(std::make_shared<const CompiledScore>(cs), events, std::move(cfg));
}

}  // namespace iscore::score
