#pragma once

// Direct simulation of score semantics, without ntcc. Used as ground truth
// for the compiler: both must produce the same messages unit by unit.

#include <iscore/trace.hpp>

namespace iscore::score {

namespace detail {

/// Brute-force model set over the variables mentioned by `facts`.
class Models {
public:
  Models(const std::vector<VarDecl>& universe, const std::vector<Constraint>& facts, const std::vector<Constraint>& queries) {
    std::set<std::string> used;
    for (const auto& f : facts)
      for (const auto& v : f.vars()) used.insert(v);
    for (const auto& q : queries)
      for (const auto& v : q.vars()) used.insert(v);
    for (const auto& d : universe)
      if (used.count(d.name)) vars_.push_back(d);
    std::uint64_t size = 1;
    for (const auto& d : vars_) {
      size *= static_cast<std::uint64_t>(d.hi - d.lo + 1);
      if (size > 4'000'000) throw Error("oracle: model enumeration too large");
    }
    std::map<std::string, std::int64_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == vars_.size()) {
        auto look = [&](const std::string& v) { return cur.at(v); };
        for (const auto& f : facts)
          if (!evaluate(f, look)) return;
        std::vector<bool> row;
        for (const auto& q : queries) row.push_back(evaluate(q, look));
        rows_.push_back(std::move(row));
        return;
      }
      for (auto v = vars_[i].lo; v <= vars_[i].hi; ++v) {
        cur[vars_[i].name] = v;
        rec(i + 1);
      }
    };
    rec(0);
  }

  bool consistent() const { return !rows_.empty(); }
  bool entailed(std::size_t query) const {
    for (const auto& r : rows_)
      if (!r[query]) return false;
    return true;
  }

private:
  std::vector<VarDecl> vars_;
  std::vector<std::vector<bool>> rows_;
};

}  // namespace detail

/// Simulates `units` time units (default: the horizon). Flexible values not
/// bound to a point take their minimum; a unit whose facts contradict the
/// globals is marked as a failure, has no messages, and ends the trace.
inline Trace oracle_simulate(const Score& s, const std::vector<TimedInput>& events, std::optional<std::int64_t> units = {},
                             CompileOptions opts = {}) {
  if (!validate(s).empty()) throw Error("validate first");
  const auto n = s.objects.size();
  const auto bounds = duration_bounds(s);
  const auto horizon = units.value_or(s.horizon);

  std::vector<VarDecl> universe = s.vars;
  for (std::size_t i = 0; i < n; ++i) universe.push_back({names::dur(s.objects[i].id), bounds.lo[i], bounds.hi[i]});
  std::vector<Constraint> invariant = s.globals;
  for (const auto& r : s.relations)
    if (const auto* d = std::get_if<DurationRel>(&r);
        d && (s.object(d->a)->duration.flexible || s.object(d->b)->duration.flexible))
      invariant.push_back(Constraint::atom(LinExpr::var(names::dur(d->a)) - LinExpr::var(names::dur(d->b)) - LinExpr(d->offset), d->rel));

  // simultaneous-start classes
  std::vector<std::size_t> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) { return cls[i] == i ? i : cls[i] = find(cls[i]); };
  for (const auto& r : s.relations)
    if (const auto* ss = std::get_if<SimultaneousStart>(&r)) cls[find(*s.object_index(ss->a))] = find(*s.object_index(ss->b));

  struct Activation {
    bool on{false};
    std::int64_t start{0};
    std::int64_t dur{0};  // 0 while a point decides it
  };
  struct Window {
    std::size_t point;
    std::int64_t opened;
  };
  std::vector<Activation> act(n);
  std::map<std::int64_t, std::set<std::size_t>> go, req, end_at;
  std::vector<Window> windows;
  auto idx = [&](const Id& id) { return *s.object_index(id); };
  auto has_start_point = [&](std::size_t o) { return s.point_on(InteractionPoint::Binds::StartOf, s.objects[o].id) != nullptr; };
  auto trigger = [&](std::size_t o, std::int64_t at) { (has_start_point(o) ? req : go)[at].insert(o); };
  auto point_index = [&](const InteractionPoint* p) { return static_cast<std::size_t>(p - s.points.data()); };

  for (const auto& r : s.roots) trigger(idx(r), 0);

  Trace trace;
  for (std::int64_t t = 0; t < horizon; ++t) {
    UnitRecord rec;
    rec.tu = t;
    rec.inputs = inputs_at(events, t);
    std::set<std::string> fired_events;
    for (const auto& in : rec.inputs)
      if (names::reserved(in.var)) fired_events.insert(in.var);

    for (auto o : req[t]) windows.push_back({point_index(s.point_on(InteractionPoint::Binds::StartOf, s.objects[o].id)), t});

    std::set<std::size_t> gos;
    for (auto o : go[t]) gos.insert(find(o));
    std::vector<bool> started(n, false), ending(n, false);
    for (std::size_t o = 0; o < n; ++o) {
      if (!gos.count(find(o)) || act[o].on) continue;
      started[o] = true;
      act[o] = {true, t, 0};
      const auto& obj = s.objects[o];
      if (const auto* p = s.point_on(InteractionPoint::Binds::DurationOf, obj.id))
        windows.push_back({point_index(p), t});
      else
        act[o].dur = bounds.lo[o];
    }

    std::vector<Constraint> facts = invariant;
    for (const auto& in : rec.inputs)
      if (!names::reserved(in.var)) facts.push_back(in.constraint());
    for (std::size_t o = 0; o < n; ++o) {
      if (!act[o].on) continue;
      auto w = t - act[o].start;
      auto dur = LinExpr::var(names::dur(s.objects[o].id));
      if (act[o].dur > 0) {
        facts.push_back(eq(dur, act[o].dur));
        ending[o] = w == act[o].dur - 1;
      } else {
        facts.push_back(ge(dur, w + 1));
        ending[o] = end_at[t].count(o) > 0;
        if (ending[o]) facts.push_back(eq(dur, w + 1));
      }
    }

    std::vector<Constraint> queries;
    for (std::size_t o = 0; o < n; ++o)
      if (ending[o])
        if (const auto* b = s.branch_at(s.objects[o].id))
          for (const auto& a : b->arms) queries.push_back(a.condition);
    detail::Models models(universe, facts, queries);
    if (!models.consistent()) {
      rec.failure = true;
      trace.push_back(std::move(rec));
      break;
    }

    std::size_t q = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (!ending[o]) continue;
      const auto& obj = s.objects[o];
      for (std::size_t r = 0; r < s.relations.size(); ++r) {
        const auto* pr = std::get_if<Precedence>(&s.relations[r]);
        if (!pr || pr->from != obj.id) continue;
        if (const auto* p = s.point_on_relation(r))
          windows.push_back({point_index(p), t});
        else
          trigger(idx(pr->to), t + pr->delay_min);
      }
      if (const auto* b = s.branch_at(obj.id)) {
        std::optional<Id> next;
        for (const auto& a : b->arms) {
          if (!next && models.entailed(q)) next = a.successor;
          ++q;
        }
        if (!next) next = b->fallback;
        if (next) trigger(idx(*next), t + 1);
      }
    }

    // open windows, including those enabled in this unit
    std::vector<Window> still;
    for (const auto& win : windows) {
      const auto& p = s.points[win.point];
      auto w = t - win.opened;
      if (w < p.earliest) {
        still.push_back(win);
        continue;
      }
      bool fired = fired_events.count(names::event(p.id)) > 0;
      if (!fired && w < p.latest) {
        still.push_back(win);
        continue;
      }
      if (!fired && opts.unfired == UnfiredPoint::Drop && p.binds != InteractionPoint::Binds::DurationOf) continue;
      switch (p.binds) {
        case InteractionPoint::Binds::StartOf: go[t + 1].insert(idx(p.object)); break;
        case InteractionPoint::Binds::DurationOf: end_at[t + 1].insert(idx(p.object)); break;
        case InteractionPoint::Binds::DelayOf: trigger(idx(std::get<Precedence>(s.relations[p.relation]).to), t + 1); break;
      }
    }
    windows = std::move(still);

    for (std::size_t o = 0; o < n; ++o) {
      const auto& obj = s.objects[o];
      if (started[o])
        rec.messages.push_back(obj.start_msg.value_or(ControlMessage{ControlMessage::Kind::Start, obj.id, {}, 0}));
      if (act[o].on) {
        auto w = t - act[o].start;
        for (const auto& p : obj.params)
          if (p.offset == w) rec.messages.push_back({ControlMessage::Kind::Param, obj.id, p.target, p.value});
      }
      if (ending[o]) {
        rec.messages.push_back(obj.end_msg.value_or(ControlMessage{ControlMessage::Kind::Stop, obj.id, {}, 0}));
        act[o].on = false;
      }
    }
    go.erase(t);
    req.erase(t);
    end_at.erase(t);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace iscore::score
