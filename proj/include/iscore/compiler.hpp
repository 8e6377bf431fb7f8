#pragma once

// Translation of a validated score into ntcc definitions and an entry process.
//
// Timing conventions (units are time units, TUs):
//   - an object started in unit s with duration d runs in units s..s+d-1 and
//     tells its end signal in unit s+d-1;
//   - Precedence(A->B, delay) tells B's go signal `delay` units after A's end unit;
//   - an interaction point triggered in unit t takes effect in unit t+1; a
//     point that is never triggered takes effect one unit after its latest slot
//     (CompileOptions::unfired selects the alternative);
//   - branch successors start one unit after the branching object's end.

#include <iscore/interpreter.hpp>
#include <iscore/score.hpp>

namespace iscore::score {

using ntcc::DefTable;
using ntcc::Process;

/// A signal that, when entailed by a unit's output, emits a control message.
struct MessageRule {
  std::string signal;
  ControlMessage message;
};

struct CompiledScore {
  Score score;
  CompileOptions options;
  DefTable defs;
  Process entry;
  std::vector<VarDecl> env;
  std::vector<MessageRule> msgmap;
  std::vector<Id> alphabet;
  DurationBounds bounds;
};

namespace detail {

inline Constraint is1(const std::string& v) { return eq(LinExpr::var(v), 1); }

class Compiler {
public:
  Compiler(const Score& s, CompileOptions opts) : s_(s), opts_(opts), bounds_(duration_bounds(s)) {}

  CompiledScore run() {
    CompiledScore cs;
    cs.score = s_;
    cs.options = opts_;
    cs.bounds = bounds_;
    cs.alphabet = event_alphabet(s_);
    build_env(cs);
    for (std::size_t i = 0; i < s_.objects.size(); ++i) object_defs(i);
    for (std::size_t i = 0; i < s_.points.size(); ++i) point_defs(s_.points[i]);

    // Globals come first so that later guards are scanned against them.
    std::vector<Process> entry;
    for (const auto& g : s_.globals) entry.push_back(Process::bang(Process::tell(g)));
    for (const auto& r : s_.relations)
      if (const auto* d = std::get_if<DurationRel>(&r); d && (flexible(d->a) || flexible(d->b)))
        entry.push_back(Process::bang(Process::tell(Constraint::atom(
            LinExpr::var(names::dur(d->a)) - LinExpr::var(names::dur(d->b)) - LinExpr(d->offset), d->rel))));
    for (const auto& r : s_.roots) entry.push_back(trigger(r));
    for (const auto& o : s_.objects) entry.push_back(Process::call("Wait_" + o.id));
    for (const auto& p : s_.points)
      if (p.binds == InteractionPoint::Binds::StartOf)
        entry.push_back(Process::bang(Process::when(is1(names::req(p.object)), chain(p, 0))));
    for (const auto& r : s_.relations)
      if (const auto* ss = std::get_if<SimultaneousStart>(&r))
        entry.push_back(Process::bang(Process::tell(eq(LinExpr::var(names::go(ss->a)), LinExpr::var(names::go(ss->b))))));
    cs.entry = Process::par_all(entry);
    cs.defs = std::move(defs_);
    if (auto problems = ntcc::check_definitions(cs.defs, cs.entry); !problems.empty())
      throw Error("compiler produced ill-formed definitions: " + problems.front());
    return cs;
  }

private:
  static LinExpr w() { return LinExpr::var("w"); }
  static LinExpr d() { return LinExpr::var("d"); }

  bool flexible(const Id& id) const { return s_.object(id)->duration.flexible; }

  void build_env(CompiledScore& cs) {
    cs.env = s_.vars;
    for (std::size_t i = 0; i < s_.objects.size(); ++i) {
      const auto& o = s_.objects[i];
      for (const auto& n : {names::go(o.id), names::start(o.id), names::running(o.id), names::end(o.id)})
        cs.env.push_back({n, 0, 1});
      if (s_.point_on(InteractionPoint::Binds::StartOf, o.id)) cs.env.push_back({names::req(o.id), 0, 1});
      for (std::size_t k = 0; k < o.params.size(); ++k) cs.env.push_back({names::param(o.id, k), 0, 1});
      cs.env.push_back({names::dur(o.id), bounds_.lo[i], bounds_.hi[i]});

      cs.msgmap.push_back({names::start(o.id), o.start_msg.value_or(ControlMessage{ControlMessage::Kind::Start, o.id, {}, 0})});
      for (std::size_t k = 0; k < o.params.size(); ++k)
        cs.msgmap.push_back({names::param(o.id, k),
                             ControlMessage{ControlMessage::Kind::Param, o.id, o.params[k].target, o.params[k].value}});
      cs.msgmap.push_back({names::end(o.id), o.end_msg.value_or(ControlMessage{ControlMessage::Kind::Stop, o.id, {}, 0})});
    }
    for (const auto& p : s_.points) {
      cs.env.push_back({names::event(p.id), 0, 1});
      cs.env.push_back({names::open(p.id), 0, 1});
    }
  }

  /// Starting B: its go signal, or a request to B's start point.
  Process trigger(const Id& b) const {
    if (s_.point_on(InteractionPoint::Binds::StartOf, b)) return Process::tell(is1(names::req(b)));
    return Process::tell(is1(names::go(b)));
  }

  Process chain(const InteractionPoint& p, std::int64_t from) const {
    return Process::call("Chain_" + p.id, {LinExpr(from)});
  }

  Process params_at(const TemporalObject& o) const {
    std::vector<Process> ps;
    for (std::size_t k = 0; k < o.params.size(); ++k)
      ps.push_back(Process::when(eq(w(), o.params[k].offset), Process::tell(is1(names::param(o.id, k)))));
    return Process::par_all(ps);
  }

  void object_defs(std::size_t i) {
    const auto& o = s_.objects[i];
    const auto go = is1(names::go(o.id));
    defs_["Wait_" + o.id] = {{}, Process::par(Process::when(go, Process::call("Start_" + o.id)),
                                              Process::unless(go, Process::call("Wait_" + o.id)))};

    Process begin = Process::tell(is1(names::start(o.id)));
    if (const auto* p = s_.point_on(InteractionPoint::Binds::DurationOf, o.id)) {
      defs_["Start_" + o.id] = {{}, Process::par_all({begin, Process::call("Run_" + o.id, {LinExpr(0)}), chain(*p, 0)})};
      auto end = is1(names::end(o.id));
      defs_["Run_" + o.id] = {
          {"w"},
          Process::par_all({Process::tell(is1(names::running(o.id))), Process::tell(ge(LinExpr::var(names::dur(o.id)), w() + 1)),
                            params_at(o), Process::when(end, Process::tell(eq(LinExpr::var(names::dur(o.id)), w() + 1))),
                            Process::unless(end, Process::call("Run_" + o.id, {w() + 1}))})};
    } else {
      Process run;
      if (bounds_.lo[i] == bounds_.hi[i]) {
        run = Process::call("Run_" + o.id, {LinExpr(0), LinExpr(bounds_.lo[i])});
      } else {
        // unresolved flexible duration: the lowest option is the runtime default
        std::vector<std::pair<Constraint, Process>> opts;
        for (auto v = bounds_.lo[i]; v <= bounds_.hi[i]; ++v)
          opts.emplace_back(Constraint::truth(), Process::call("Run_" + o.id, {LinExpr(0), LinExpr(v)}));
        run = Process::sum(std::move(opts));
      }
      defs_["Start_" + o.id] = {{}, Process::par(begin, run)};
      defs_["Run_" + o.id] = {
          {"w", "d"},
          Process::par_all({Process::tell(is1(names::running(o.id))), Process::tell(eq(LinExpr::var(names::dur(o.id)), d())),
                            params_at(o),
                            Process::sum({{lt(w(), d() - 1), Process::next(Process::call("Run_" + o.id, {w() + 1, d()}))},
                                          {ge(w(), d() - 1), Process::call("End_" + o.id)}})})};
    }

    std::vector<Process> end{Process::tell(is1(names::end(o.id))), Process::next(Process::call("Wait_" + o.id))};
    for (std::size_t r = 0; r < s_.relations.size(); ++r) {
      const auto* pr = std::get_if<Precedence>(&s_.relations[r]);
      if (!pr || pr->from != o.id) continue;
      if (const auto* p = s_.point_on_relation(r)) {
        end.push_back(chain(*p, 0));
      } else if (pr->delay_min == pr->delay_max) {
        end.push_back(Process::next(trigger(pr->to), static_cast<int>(pr->delay_min)));
      } else {
        std::vector<std::pair<Constraint, Process>> opts;
        for (auto dl = pr->delay_min; dl <= pr->delay_max; ++dl)
          opts.emplace_back(Constraint::truth(), Process::next(trigger(pr->to), static_cast<int>(dl)));
        end.push_back(Process::sum(std::move(opts)));
      }
    }
    if (const auto* b = s_.branch_at(o.id)) end.push_back(branch(*b));
    defs_["End_" + o.id] = {{}, Process::par_all(end)};
  }

  // The hidden flag records that an arm fired, which cancels the default.
  Process branch(const ConditionalBranch& b) const {
    if (b.arms.empty()) return Process::next(trigger(*b.fallback));
    const std::string flag = "br#" + b.at;  // '#' keeps it apart from score variables
    const auto taken = is1(flag);
    std::vector<std::pair<Constraint, Process>> arms;
    for (const auto& a : b.arms)
      arms.emplace_back(a.condition, Process::par(Process::tell(taken), Process::next(trigger(a.successor))));
    Process body = Process::sum(std::move(arms));
    if (b.fallback) body = Process::par(body, Process::unless(taken, trigger(*b.fallback)));
    return Process::local({flag, 0, 1}, body);
  }

  void point_defs(const InteractionPoint& p) {
    Process effect;
    switch (p.binds) {
      case InteractionPoint::Binds::StartOf: effect = Process::tell(is1(names::go(p.object))); break;
      case InteractionPoint::Binds::DurationOf: effect = Process::call("End_" + p.object); break;
      case InteractionPoint::Binds::DelayOf: effect = trigger(std::get<Precedence>(s_.relations[p.relation]).to); break;
    }
    const auto ev = is1(names::event(p.id));
    auto lapse = opts_.unfired == UnfiredPoint::Drop && p.binds != InteractionPoint::Binds::DurationOf ? Process::skip() : effect;
    auto again = Process::call("Chain_" + p.id, {w() + 1});
    defs_["Chain_" + p.id] = {{"w"},
                              Process::sum({{lt(w(), p.earliest), Process::next(again)},
                                            {ge(w(), p.earliest), Process::call("Watch_" + p.id, {w()})}})};
    defs_["Watch_" + p.id] = {
        {"w"},
        Process::par_all({Process::tell(is1(names::open(p.id))), Process::when(ev, Process::next(effect)),
                          Process::unless(ev, Process::sum({{lt(w(), p.latest), again}, {ge(w(), p.latest), lapse}}))})};
  }

  const Score& s_;
  CompileOptions opts_;
  DurationBounds bounds_;
  DefTable defs_;
};

}  // namespace detail

/// Compiles a validated score. Throws "validate first" when validation fails.
inline CompiledScore compile(const Score& s, CompileOptions opts = {}) {
  if (!validate(s).empty()) throw Error("validate first");
  return detail::Compiler(s, opts).run();
}

inline std::string dump(const CompiledScore& cs) {
  std::string out = "entry = " + cs.entry.str() + "\n";
  out += ntcc::dump_definitions(cs.defs);
  out += "env:\n";
  for (const auto& v : cs.env) out += "  " + v.name + " in [" + std::to_string(v.lo) + "," + std::to_string(v.hi) + "]\n";
  out += "messages:\n";
  for (const auto& m : cs.msgmap) out += "  " + m.signal + " -> " + to_json(m.message).dump() + "\n";
  return out;
}

}  // namespace iscore::score
