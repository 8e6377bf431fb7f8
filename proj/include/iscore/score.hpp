#pragma once

// Interactive score model: temporal objects, temporal relations, interaction
// points, conditional branches and global constraints, plus the JSON score
// document and static validation.

#include <iscore/store.hpp>

#include <nlohmann/json.hpp>

#include <limits>
#include <optional>

namespace iscore::score {

using Id = std::string;
using Json = nlohmann::json;

struct Duration {
  bool flexible{false};
  std::int64_t dmin{1};
  std::int64_t dmax{1};

  static Duration fixed(std::int64_t d) { return {false, d, d}; }
  static Duration range(std::int64_t lo, std::int64_t hi) { return {true, lo, hi}; }
};

struct ParamPoint {
  std::int64_t offset{0};
  std::string target;
  std::int64_t value{0};
};

struct ControlMessage {
  enum class Kind { Start, Stop, Param };
  Kind kind{Kind::Start};
  Id object;
  std::string target;  // param only
  std::int64_t value{0};

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

struct TemporalObject {
  Id id;
  Duration duration;
  std::vector<ParamPoint> params;
  std::optional<ControlMessage> start_msg, end_msg;
};

struct Precedence {
  Id from, to;
  std::int64_t delay_min{1}, delay_max{1};
};
struct SimultaneousStart {
  Id a, b;
};
/// dur(a) REL dur(b) + offset
struct DurationRel {
  Id a;
  Rel rel{Rel::Eq};
  Id b;
  std::int64_t offset{0};
};
using TemporalRelation = std::variant<Precedence, SimultaneousStart, DurationRel>;

struct InteractionPoint {
  enum class Binds { StartOf, DurationOf, DelayOf };
  Id id;
  Binds binds{Binds::StartOf};
  Id object;                 // StartOf, DurationOf
  std::size_t relation{0};   // DelayOf: index into Score::relations
  std::int64_t earliest{0}, latest{0};
};

struct Arm {
  Constraint condition;
  Id successor;
};

struct ConditionalBranch {
  Id at;
  std::vector<Arm> arms;
  std::optional<Id> fallback;  // "default" in the document
};

struct Score {
  std::vector<VarDecl> vars;
  std::vector<TemporalObject> objects;
  std::vector<TemporalRelation> relations;
  std::vector<InteractionPoint> points;
  std::vector<ConditionalBranch> branches;
  std::vector<Constraint> globals;
  std::vector<Id> roots;
  std::int64_t horizon{1};

  const TemporalObject* object(const Id& id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  std::optional<std::size_t> object_index(const Id& id) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].id == id) return i;
    return std::nullopt;
  }
  const InteractionPoint* point_on(InteractionPoint::Binds kind, const Id& object) const {
    for (const auto& p : points)
      if (p.binds == kind && p.object == object) return &p;
    return nullptr;
  }
  const InteractionPoint* point_on_relation(std::size_t rel) const {
    for (const auto& p : points)
      if (p.binds == InteractionPoint::Binds::DelayOf && p.relation == rel) return &p;
    return nullptr;
  }
  const ConditionalBranch* branch_at(const Id& object) const {
    for (const auto& b : branches)
      if (b.at == object) return &b;
    return nullptr;
  }
};

/// Names of the per-unit signal and symbol variables derived from a score.
namespace names {
inline std::string go(const Id& o) { return "go_" + o; }
inline std::string req(const Id& o) { return "req_" + o; }
inline std::string start(const Id& o) { return "start_" + o; }
inline std::string running(const Id& o) { return "running_" + o; }
inline std::string end(const Id& o) { return "end_" + o; }
inline std::string dur(const Id& o) { return "dur_" + o; }
inline std::string param(const Id& o, std::size_t i) { return "par_" + o + "_" + std::to_string(i); }
inline std::string event(const Id& p) { return "ev_" + p; }
inline std::string open(const Id& p) { return "open_" + p; }

inline bool reserved(const std::string& v) {
  for (const char* pre : {"go_", "req_", "start_", "running_", "end_", "dur_", "par_", "ev_", "open_"})
    if (v.rfind(pre, 0) == 0) return true;
  return false;
}
}  // namespace names

// ---------------------------------------------------------------------------
// JSON document

namespace detail {

inline void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(where + ": unknown key \"" + k + "\"");
  }
}

template <typename T>
T req(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(where + "." + key + ": " + e.what());
  }
}

inline std::pair<std::int64_t, std::int64_t> pair_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw Error(where + ": expected [lo, hi]");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

inline Rel parse_rel(const std::string& s, bool& flipped, const std::string& where) {
  flipped = false;
  if (s == "=") return Rel::Eq;
  if (s == "!=") return Rel::Ne;
  if (s == "<") return Rel::Lt;
  if (s == "<=") return Rel::Le;
  throw Error(where + ": relation must be one of =, !=, <, <=");
}

inline const char* kind_str(ControlMessage::Kind k) {
  switch (k) {
    case ControlMessage::Kind::Start: return "start";
    case ControlMessage::Kind::Stop: return "stop";
    case ControlMessage::Kind::Param: return "param";
  }
  return "?";
}

}  // namespace detail

inline Json to_json(const ControlMessage& m) {
  Json j{{"kind", detail::kind_str(m.kind)}, {"object", m.object}};
  if (m.kind == ControlMessage::Kind::Param) {
    j["target"] = m.target;
    j["value"] = m.value;
  }
  return j;
}

inline ControlMessage message_from_json(const Json& j, const std::string& where) {
  detail::only_keys(j, {"kind", "object", "target", "value"}, where);
  ControlMessage m;
  auto kind = detail::req<std::string>(j, "kind", where);
  if (kind == "start")
    m.kind = ControlMessage::Kind::Start;
  else if (kind == "stop")
    m.kind = ControlMessage::Kind::Stop;
  else if (kind == "param")
    m.kind = ControlMessage::Kind::Param;
  else
    throw Error(where + ": unknown message kind " + kind);
  m.object = detail::req<std::string>(j, "object", where);
  bool is_param = m.kind == ControlMessage::Kind::Param;
  if (is_param != j.contains("target") || is_param != j.contains("value"))
    throw Error(where + ": target/value are required exactly for param messages");
  if (is_param) {
    m.target = detail::req<std::string>(j, "target", where);
    m.value = detail::req<std::int64_t>(j, "value", where);
  }
  return m;
}

inline Score score_from_json(const Json& j) {
  detail::only_keys(j, {"vars", "objects", "relations", "points", "branches", "globals", "roots", "horizon"}, "score");
  Score s;
  s.horizon = detail::req<std::int64_t>(j, "horizon", "score");
  for (const auto& v : j.value("vars", Json::array())) {
    detail::only_keys(v, {"name", "lo", "hi"}, "vars[]");
    s.vars.push_back({detail::req<std::string>(v, "name", "vars[]"), detail::req<std::int64_t>(v, "lo", "vars[]"),
                      detail::req<std::int64_t>(v, "hi", "vars[]")});
  }
  for (const auto& o : j.value("objects", Json::array())) {
    detail::only_keys(o, {"id", "duration", "params", "startMsg", "endMsg"}, "objects[]");
    TemporalObject obj;
    obj.id = detail::req<std::string>(o, "id", "objects[]");
    std::string where = "objects[" + obj.id + "]";
    const auto& d = o.at("duration");
    detail::only_keys(d, {"fixed", "flexible"}, where + ".duration");
    if (d.contains("fixed") == d.contains("flexible"))
      throw Error(where + ".duration: exactly one of fixed/flexible");
    if (d.contains("fixed")) {
      obj.duration = Duration::fixed(detail::req<std::int64_t>(d, "fixed", where));
    } else {
      const auto& f = d.at("flexible");
      detail::only_keys(f, {"dmin", "dmax"}, where + ".duration.flexible");
      obj.duration = Duration::range(detail::req<std::int64_t>(f, "dmin", where), detail::req<std::int64_t>(f, "dmax", where));
    }
    for (const auto& p : o.value("params", Json::array())) {
      detail::only_keys(p, {"offset", "target", "value"}, where + ".params[]");
      obj.params.push_back({detail::req<std::int64_t>(p, "offset", where), detail::req<std::string>(p, "target", where),
                            detail::req<std::int64_t>(p, "value", where)});
    }
    if (o.contains("startMsg")) obj.start_msg = message_from_json(o.at("startMsg"), where + ".startMsg");
    if (o.contains("endMsg")) obj.end_msg = message_from_json(o.at("endMsg"), where + ".endMsg");
    s.objects.push_back(std::move(obj));
  }
  for (const auto& r : j.value("relations", Json::array())) {
    auto kind = detail::req<std::string>(r, "kind", "relations[]");
    if (kind == "Precedence") {
      detail::only_keys(r, {"kind", "from", "to", "delay"}, "relations[Precedence]");
      auto [lo, hi] = detail::pair_of(r.at("delay"), "relations[Precedence].delay");
      s.relations.emplace_back(Precedence{detail::req<std::string>(r, "from", "relations[]"),
                                          detail::req<std::string>(r, "to", "relations[]"), lo, hi});
    } else if (kind == "SimultaneousStart") {
      detail::only_keys(r, {"kind", "a", "b"}, "relations[SimultaneousStart]");
      s.relations.emplace_back(
          SimultaneousStart{detail::req<std::string>(r, "a", "relations[]"), detail::req<std::string>(r, "b", "relations[]")});
    } else if (kind == "DurationRel") {
      detail::only_keys(r, {"kind", "a", "rel", "b", "offset"}, "relations[DurationRel]");
      bool flipped = false;
      s.relations.emplace_back(DurationRel{detail::req<std::string>(r, "a", "relations[]"),
                                           detail::parse_rel(detail::req<std::string>(r, "rel", "relations[]"), flipped,
                                                             "relations[DurationRel].rel"),
                                           detail::req<std::string>(r, "b", "relations[]"), r.value("offset", std::int64_t{0})});
    } else {
      throw Error("relations[]: unknown kind " + kind);
    }
  }
  for (const auto& p : j.value("points", Json::array())) {
    detail::only_keys(p, {"id", "binds", "window"}, "points[]");
    InteractionPoint ip;
    ip.id = detail::req<std::string>(p, "id", "points[]");
    std::string where = "points[" + ip.id + "]";
    const auto& b = p.at("binds");
    detail::only_keys(b, {"start-of", "duration-of", "delay-of"}, where + ".binds");
    if (b.size() != 1) throw Error(where + ".binds: exactly one binding");
    if (b.contains("start-of")) {
      ip.binds = InteractionPoint::Binds::StartOf;
      ip.object = detail::req<std::string>(b, "start-of", where);
    } else if (b.contains("duration-of")) {
      ip.binds = InteractionPoint::Binds::DurationOf;
      ip.object = detail::req<std::string>(b, "duration-of", where);
    } else {
      ip.binds = InteractionPoint::Binds::DelayOf;
      ip.relation = detail::req<std::size_t>(b, "delay-of", where);
    }
    std::tie(ip.earliest, ip.latest) = detail::pair_of(p.at("window"), where + ".window");
    s.points.push_back(std::move(ip));
  }
  for (const auto& b : j.value("branches", Json::array())) {
    detail::only_keys(b, {"at", "arms", "default"}, "branches[]");
    ConditionalBranch br;
    br.at = detail::req<std::string>(b, "at", "branches[]");
    for (const auto& a : b.value("arms", Json::array())) {
      detail::only_keys(a, {"condition", "successor"}, "branches[" + br.at + "].arms[]");
      br.arms.push_back({parse_constraint(detail::req<std::string>(a, "condition", "arms[]")),
                         detail::req<std::string>(a, "successor", "arms[]")});
    }
    if (b.contains("default")) br.fallback = b.at("default").get<std::string>();
    s.branches.push_back(std::move(br));
  }
  for (const auto& g : j.value("globals", Json::array())) s.globals.push_back(parse_constraint(g.get<std::string>()));
  for (const auto& r : j.value("roots", Json::array())) s.roots.push_back(r.get<std::string>());
  return s;
}

inline Score parse_score(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(std::string("score: invalid JSON: ") + e.what());
  }
  return score_from_json(j);
}

inline Json to_json(const Score& s) {
  Json j;
  j["horizon"] = s.horizon;
  j["vars"] = Json::array();
  for (const auto& v : s.vars) j["vars"].push_back({{"name", v.name}, {"lo", v.lo}, {"hi", v.hi}});
  j["objects"] = Json::array();
  for (const auto& o : s.objects) {
    Json jo{{"id", o.id}};
    if (o.duration.flexible)
      jo["duration"] = {{"flexible", {{"dmin", o.duration.dmin}, {"dmax", o.duration.dmax}}}};
    else
      jo["duration"] = {{"fixed", o.duration.dmin}};
    if (!o.params.empty()) {
      jo["params"] = Json::array();
      for (const auto& p : o.params) jo["params"].push_back({{"offset", p.offset}, {"target", p.target}, {"value", p.value}});
    }
    if (o.start_msg) jo["startMsg"] = to_json(*o.start_msg);
    if (o.end_msg) jo["endMsg"] = to_json(*o.end_msg);
    j["objects"].push_back(std::move(jo));
  }
  j["relations"] = Json::array();
  for (const auto& r : s.relations) {
    if (auto* p = std::get_if<Precedence>(&r))
      j["relations"].push_back({{"kind", "Precedence"}, {"from", p->from}, {"to", p->to}, {"delay", {p->delay_min, p->delay_max}}});
    else if (auto* ss = std::get_if<SimultaneousStart>(&r))
      j["relations"].push_back({{"kind", "SimultaneousStart"}, {"a", ss->a}, {"b", ss->b}});
    else if (auto* d = std::get_if<DurationRel>(&r))
      j["relations"].push_back({{"kind", "DurationRel"}, {"a", d->a}, {"rel", rel_str(d->rel)}, {"b", d->b}, {"offset", d->offset}});
  }
  j["points"] = Json::array();
  for (const auto& p : s.points) {
    Json b;
    switch (p.binds) {
      case InteractionPoint::Binds::StartOf: b = {{"start-of", p.object}}; break;
      case InteractionPoint::Binds::DurationOf: b = {{"duration-of", p.object}}; break;
      case InteractionPoint::Binds::DelayOf: b = {{"delay-of", p.relation}}; break;
    }
    j["points"].push_back({{"id", p.id}, {"binds", b}, {"window", {p.earliest, p.latest}}});
  }
  j["branches"] = Json::array();
  for (const auto& b : s.branches) {
    Json jb{{"at", b.at}, {"arms", Json::array()}};
    for (const auto& a : b.arms) jb["arms"].push_back({{"condition", a.condition.str()}, {"successor", a.successor}});
    if (b.fallback) jb["default"] = *b.fallback;
    j["branches"].push_back(std::move(jb));
  }
  j["globals"] = Json::array();
  for (const auto& g : s.globals) j["globals"].push_back(g.str());
  j["roots"] = s.roots;
  return j;
}

// ---------------------------------------------------------------------------
// Static analysis

struct Diagnostic {
  Id subject;
  std::string kind;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
  friend bool operator<(const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.subject, a.kind, a.message) < std::tie(b.subject, b.kind, b.message);
  }
};

/// Duration range of every object after intersecting duration relations.
/// Objects whose duration is bound to an interaction point take the range
/// the point's window can produce and are not narrowed further.
/// What happens when a start-of or delay-of point's window passes without a
/// trigger. A duration-of point is always forced: the object must end.
enum class UnfiredPoint { Force, Drop };

struct CompileOptions {
  UnfiredPoint unfired{UnfiredPoint::Force};
};

struct DurationBounds {
  std::vector<std::int64_t> lo, hi;
  bool empty{false};
  Id culprit;
};

/// A trigger in unit t takes effect in unit t+1, so a window [e, l] on an
/// object's duration (relative to its start unit) yields durations e+2..l+2
/// and a window on a delay yields delays e+1..l+1.
inline constexpr std::int64_t kDurationPointShift = 2;
inline constexpr std::int64_t kDelayPointShift = 1;

inline DurationBounds duration_bounds(const Score& s) {
  DurationBounds b;
  std::vector<char> pinned(s.objects.size(), 0);
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    if (const auto* p = s.point_on(InteractionPoint::Binds::DurationOf, o.id)) {
      b.lo.push_back(p->earliest + kDurationPointShift);
      b.hi.push_back(p->latest + kDurationPointShift);
      pinned[i] = 1;
    } else {
      b.lo.push_back(o.duration.dmin);
      b.hi.push_back(o.duration.dmax);
      pinned[i] = !o.duration.flexible;
    }
  }
  auto set_lo = [&](std::size_t i, std::int64_t v, bool& changed) {
    if (v > b.lo[i] && !pinned[i]) {
      b.lo[i] = v;
      changed = true;
    } else if (v > b.hi[i]) {
      b.empty = true;
    }
  };
  auto set_hi = [&](std::size_t i, std::int64_t v, bool& changed) {
    if (v < b.hi[i] && !pinned[i]) {
      b.hi[i] = v;
      changed = true;
    } else if (v < b.lo[i]) {
      b.empty = true;
    }
  };
  bool changed = true;
  while (changed && !b.empty) {
    changed = false;
    for (const auto& r : s.relations) {
      const auto* d = std::get_if<DurationRel>(&r);
      if (!d) continue;
      auto ia = s.object_index(d->a), ib = s.object_index(d->b);
      if (!ia || !ib) continue;
      auto a = *ia, c = *ib;
      auto off = d->offset;
      switch (d->rel) {
        case Rel::Eq:
          set_lo(a, b.lo[c] + off, changed);
          set_hi(a, b.hi[c] + off, changed);
          set_lo(c, b.lo[a] - off, changed);
          set_hi(c, b.hi[a] - off, changed);
          break;
        case Rel::Le:
        case Rel::Lt: {
          auto strict = d->rel == Rel::Lt ? 1 : 0;
          set_hi(a, b.hi[c] + off - strict, changed);
          set_lo(c, b.lo[a] - off + strict, changed);
          break;
        }
        case Rel::Ne:
          if (b.lo[a] == b.hi[a] && b.lo[c] == b.hi[c] && b.lo[a] == b.lo[c] + off) b.empty = true;
          break;
      }
      if (b.lo[a] > b.hi[a] || b.lo[c] > b.hi[c]) b.empty = true;
      if (b.empty) {
        b.culprit = d->a;
        break;
      }
    }
  }
  return b;
}

inline std::vector<Id> branch_condition_vars(const Score& s) {
  std::vector<Id> out;
  for (const auto& b : s.branches)
    for (const auto& a : b.arms)
      for (const auto& v : a.condition.vars())
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

/// The variables the environment may set: one event per interaction point,
/// then every score variable used in a branch condition.
inline std::vector<Id> event_alphabet(const Score& s) {
  std::vector<Id> out;
  for (const auto& p : s.points) out.push_back(names::event(p.id));
  for (const auto& v : branch_condition_vars(s))
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

namespace detail {

inline bool valid_ident(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace detail

/// Empty iff the score is well formed and every object reachable from the
/// roots has a nonempty start window inside the horizon. Diagnostics are
/// sorted by (subject, kind).
inline std::vector<Diagnostic> validate(const Score& s) {
  std::vector<Diagnostic> out;
  auto diag = [&](const Id& subject, const std::string& kind, const std::string& msg) {
    out.push_back({subject, kind, msg});
  };
  auto exists = [&](const Id& id) { return s.object(id) != nullptr; };

  if (s.horizon < 1) diag("score", "horizon", "horizon must be at least 1");

  std::set<std::string> seen;
  for (const auto& v : s.vars) {
    if (!detail::valid_ident(v.name)) diag(v.name, "name", "invalid variable name " + v.name);
    if (names::reserved(v.name)) diag(v.name, "name", "variable name " + v.name + " uses a reserved prefix");
    if (!seen.insert("var:" + v.name).second) diag(v.name, "duplicate", "duplicate variable " + v.name);
    if (v.lo > v.hi) diag(v.name, "domain", "empty domain for " + v.name);
  }
  for (const auto& o : s.objects) {
    if (!detail::valid_ident(o.id)) diag(o.id, "name", "invalid object id " + o.id);
    if (!seen.insert("obj:" + o.id).second) diag(o.id, "duplicate", "duplicate object " + o.id);
    const auto& d = o.duration;
    if (!d.flexible && d.dmin < 1) diag(o.id, "duration", o.id + " duration must be at least 1");
    if (d.flexible && (d.dmin < 1 || d.dmin > d.dmax)) diag(o.id, "duration", o.id + " needs 1 <= dmin <= dmax");
    for (const auto& p : o.params)
      if (p.offset < 0 || p.offset >= d.dmin) diag(o.id, "param", o.id + " param offset " + std::to_string(p.offset) + " outside the duration");
    if (o.start_msg && (o.start_msg->kind != ControlMessage::Kind::Start || o.start_msg->object != o.id))
      diag(o.id, "message", o.id + " startMsg must be a start message for the object");
    if (o.end_msg && (o.end_msg->kind != ControlMessage::Kind::Stop || o.end_msg->object != o.id))
      diag(o.id, "message", o.id + " endMsg must be a stop message for the object");
  }
  std::set<Id> score_vars;
  for (const auto& v : s.vars) score_vars.insert(v.name);

  for (std::size_t i = 0; i < s.relations.size(); ++i) {
    const auto& r = s.relations[i];
    auto where = "relation " + std::to_string(i);
    if (const auto* p = std::get_if<Precedence>(&r)) {
      for (const auto& e : {p->from, p->to})
        if (!exists(e)) diag(e, "reference", where + " references unknown object " + e);
      if (p->delay_min < 1 || p->delay_min > p->delay_max) diag(p->to, "delay", where + " needs 1 <= delay min <= delay max");
    } else if (const auto* ss = std::get_if<SimultaneousStart>(&r)) {
      for (const auto& e : {ss->a, ss->b})
        if (!exists(e)) diag(e, "reference", where + " references unknown object " + e);
    } else if (const auto* d = std::get_if<DurationRel>(&r)) {
      for (const auto& e : {d->a, d->b})
        if (!exists(e)) diag(e, "reference", where + " references unknown object " + e);
    }
  }

  std::set<std::string> bound;
  for (const auto& p : s.points) {
    if (!detail::valid_ident(p.id)) diag(p.id, "name", "invalid point id " + p.id);
    if (!seen.insert("pt:" + p.id).second) diag(p.id, "duplicate", "duplicate point " + p.id);
    if (p.earliest < 0 || p.earliest > p.latest) diag(p.id, "window", p.id + " window needs 0 <= earliest <= latest");
    switch (p.binds) {
      case InteractionPoint::Binds::StartOf:
        if (!exists(p.object)) diag(p.id, "reference", p.id + " binds unknown object " + p.object);
        if (!bound.insert("start:" + p.object).second) diag(p.id, "duplicate", "start of " + p.object + " bound twice");
        break;
      case InteractionPoint::Binds::DurationOf: {
        const auto* o = s.object(p.object);
        if (!o) {
          diag(p.id, "reference", p.id + " binds unknown object " + p.object);
          break;
        }
        if (!bound.insert("dur:" + p.object).second) diag(p.id, "duplicate", "duration of " + p.object + " bound twice");
        if (!o->duration.flexible) diag(p.id, "flexibility", p.id + " binds the fixed duration of " + p.object);
        else if (p.earliest + kDurationPointShift < o->duration.dmin || p.latest + kDurationPointShift > o->duration.dmax)
          diag(p.id, "window", p.id + " window does not fit the duration range of " + p.object);
        break;
      }
      case InteractionPoint::Binds::DelayOf: {
        if (p.relation >= s.relations.size() || !std::holds_alternative<Precedence>(s.relations[p.relation])) {
          diag(p.id, "reference", p.id + " must bind the delay of a Precedence relation");
          break;
        }
        if (!bound.insert("rel:" + std::to_string(p.relation)).second)
          diag(p.id, "duplicate", "delay of relation " + std::to_string(p.relation) + " bound twice");
        const auto& pr = std::get<Precedence>(s.relations[p.relation]);
        if (pr.delay_min >= pr.delay_max) diag(p.id, "flexibility", p.id + " binds a fixed delay");
        else if (p.earliest + kDelayPointShift < pr.delay_min || p.latest + kDelayPointShift > pr.delay_max)
          diag(p.id, "window", p.id + " window does not fit the delay range");
        break;
      }
    }
  }

  std::set<Id> branched;
  for (const auto& b : s.branches) {
    if (!exists(b.at)) diag(b.at, "reference", "branch at unknown object " + b.at);
    if (!branched.insert(b.at).second) diag(b.at, "duplicate", "two branches at " + b.at);
    if (b.arms.empty() && !b.fallback) diag(b.at, "branch", "branch at " + b.at + " has no arm and no default");
    for (const auto& a : b.arms) {
      if (!exists(a.successor)) diag(b.at, "reference", "branch successor " + a.successor + " unknown");
      for (const auto& v : a.condition.vars())
        if (!score_vars.count(v)) diag(b.at, "condition", "branch condition uses undeclared variable " + v);
    }
    if (b.fallback && !exists(*b.fallback)) diag(b.at, "reference", "branch default " + *b.fallback + " unknown");
  }

  std::set<Id> roots;
  for (const auto& r : s.roots) {
    if (!exists(r)) diag(r, "reference", "unknown root " + r);
    if (!roots.insert(r).second) diag(r, "duplicate", "duplicate root " + r);
  }

  for (const auto& g : s.globals)
    for (const auto& v : g.vars()) {
      bool dur = v.rfind("dur_", 0) == 0 && exists(v.substr(4));
      if (!dur && !score_vars.count(v)) diag("globals", "reference", "global uses unknown symbol " + v);
    }

  if (!out.empty()) {
    std::sort(out.begin(), out.end());
    return out;
  }

  // Precedence must be acyclic; loops go through branches only.
  {
    std::map<Id, std::vector<Id>> g;
    for (const auto& r : s.relations)
      if (const auto* p = std::get_if<Precedence>(&r)) g[p->from].push_back(p->to);
    std::map<Id, int> color;
    std::function<bool(const Id&)> dfs = [&](const Id& n) {
      color[n] = 1;
      for (const auto& m : g[n]) {
        if (color[m] == 1) return false;
        if (color[m] == 0 && !dfs(m)) return false;
      }
      color[n] = 2;
      return true;
    };
    for (const auto& o : s.objects)
      if (color[o.id] == 0 && !dfs(o.id)) diag(o.id, "cycle", "precedence cycle through " + o.id);
  }

  auto bounds = duration_bounds(s);
  if (bounds.empty) diag(bounds.culprit, "duration-relation", "duration relation unsatisfiable");

  // Earliest start of every reachable object; branch back-edges are cut.
  if (!bounds.empty) {
    constexpr auto inf = std::numeric_limits<std::int64_t>::max();
    std::size_t n = s.objects.size();
    std::vector<std::int64_t> est(n, inf);
    auto start_delay = [&](const Id& o) -> std::int64_t {
      const auto* p = s.point_on(InteractionPoint::Binds::StartOf, o);
      return p ? p->earliest + kDelayPointShift : 0;
    };
    struct Edge {
      std::size_t from, to;
      std::int64_t gap;  // from end unit of `from` to go of `to`
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < s.relations.size(); ++i)
      if (const auto* p = std::get_if<Precedence>(&s.relations[i])) {
        const auto* pt = s.point_on_relation(i);
        edges.push_back({*s.object_index(p->from), *s.object_index(p->to),
                         pt ? pt->earliest + kDelayPointShift : p->delay_min});
      }
    std::vector<Edge> branch_edges;
    for (const auto& b : s.branches) {
      for (const auto& a : b.arms) branch_edges.push_back({*s.object_index(b.at), *s.object_index(a.successor), 1});
      if (b.fallback) branch_edges.push_back({*s.object_index(b.at), *s.object_index(*b.fallback), 1});
    }
    // back-edges: DFS over all edges from the roots
    std::vector<std::vector<std::pair<std::size_t, bool>>> adj(n);  // (to, is_branch)
    for (const auto& e : edges) adj[e.from].push_back({e.to, false});
    for (const auto& e : branch_edges) adj[e.from].push_back({e.to, true});
    std::set<std::pair<std::size_t, std::size_t>> back;
    std::vector<int> color(n, 0);
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
      color[u] = 1;
      for (auto [v, br] : adj[u]) {
        if (color[v] == 1 && br) back.insert({u, v});
        if (color[v] == 0) dfs(v);
      }
      color[u] = 2;
    };
    for (const auto& r : s.roots) {
      auto i = *s.object_index(r);
      if (color[i] == 0) dfs(i);
    }
    for (const auto& r : s.roots) {
      auto i = *s.object_index(r);
      est[i] = std::min(est[i], start_delay(r));
    }
    for (const auto& e : branch_edges)
      if (!back.count({e.from, e.to})) edges.push_back(e);
    std::vector<std::pair<std::size_t, std::size_t>> sims;
    for (const auto& r : s.relations)
      if (const auto* ss = std::get_if<SimultaneousStart>(&r)) sims.push_back({*s.object_index(ss->a), *s.object_index(ss->b)});
    for (std::size_t iter = 0; iter <= n + 1; ++iter) {
      bool changed = false;
      for (const auto& e : edges) {
        if (est[e.from] == inf) continue;
        auto cand = est[e.from] + bounds.lo[e.from] - 1 + e.gap + start_delay(s.objects[e.to].id);
        if (cand < est[e.to]) {
          est[e.to] = cand;
          changed = true;
        }
      }
      for (auto [a, b] : sims) {
        auto m = std::min(est[a], est[b]);
        if (est[a] != m || est[b] != m) changed = true;
        est[a] = est[b] = m;
      }
      if (!changed) break;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (est[i] != inf && est[i] >= s.horizon) diag(s.objects[i].id, "start-window", s.objects[i].id + " start window empty");
  }

  // globals together with the duration ranges
  if (!bounds.empty && !s.globals.empty()) {
    std::vector<VarDecl> decls = s.vars;
    for (std::size_t i = 0; i < s.objects.size(); ++i) decls.push_back({names::dur(s.objects[i].id), bounds.lo[i], bounds.hi[i]});
    Store st(decls);
    for (const auto& g : s.globals) st.tell(g);
    if (!st.sat()) diag("globals", "globals", "global constraints unsatisfiable");
  }

  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace iscore::score
