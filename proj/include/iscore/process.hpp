#pragma once

// ntcc process terms, definition tables and their canonical text form.

#include <iscore/constraint.hpp>

#include <map>
#include <unordered_map>

namespace iscore::ntcc {

class Process {
public:
  enum class Kind { Skip, Tell, Sum, Par, Local, Next, Unless, Star, Bang, Call };

  Process() : Process(skip()) {}

  static Process skip() {
    static const Process s{make(Kind::Skip)};
    return s;
  }
  static Process tell(Constraint c) {
    auto n = make(Kind::Tell);
    n->guard = std::move(c);
    return Process(std::move(n));
  }
  static Process sum(std::vector<std::pair<Constraint, Process>> branches);
  static Process par(Process a, Process b) {
    if (a.kind() == Kind::Skip) return b;
    if (b.kind() == Kind::Skip) return a;
    auto n = make(Kind::Par);
    n->kids = {std::move(a), std::move(b)};
    return Process(std::move(n));
  }
  static Process par_all(const std::vector<Process>& ps) {
    if (ps.empty()) return skip();
    return par_range(ps, 0, ps.size());
  }
  /// `local x:[lo,hi] in body`. `opened` marks a local whose variable has
  /// already been renamed and declared in the current store.
  static Process local(VarDecl decl, Process body, bool opened = false) {
    auto n = make(Kind::Local);
    n->decl = std::move(decl);
    n->opened = opened;
    n->kids = {std::move(body)};
    return Process(std::move(n));
  }
  static Process next(Process body) {
    auto n = make(Kind::Next);
    n->kids = {std::move(body)};
    return Process(std::move(n));
  }
  static Process next(Process body, int times) {
    for (int i = 0; i < times; ++i) body = next(std::move(body));
    return body;
  }
  /// `unless c next P`: P runs in the next time unit unless c is entailed now.
  static Process unless(Constraint guard, Process body) {
    auto n = make(Kind::Unless);
    n->guard = std::move(guard);
    n->kids = {std::move(body)};
    return Process(std::move(n));
  }
  static Process star(Process body) {
    auto n = make(Kind::Star);
    n->kids = {std::move(body)};
    return Process(std::move(n));
  }
  static Process bang(Process body) {
    auto n = make(Kind::Bang);
    n->kids = {std::move(body)};
    return Process(std::move(n));
  }
  static Process call(std::string def, std::vector<LinExpr> args = {}) {
    auto n = make(Kind::Call);
    n->name = std::move(def);
    n->args = std::move(args);
    return Process(std::move(n));
  }
  /// `when c do P`, a single-branch sum.
  static Process when(Constraint c, Process body) { return sum({{std::move(c), std::move(body)}}); }

  Kind kind() const { return node_->kind; }
  const Constraint& constraint() const { return node_->guard; }
  const Process& body() const { return node_->kids[0]; }
  const Process& left() const { return node_->kids[0]; }
  const Process& right() const { return node_->kids[1]; }
  const std::vector<Constraint>& guards() const { return node_->guards; }
  const std::vector<Process>& bodies() const { return node_->kids; }
  const VarDecl& decl() const { return node_->decl; }
  bool opened() const { return node_->opened; }
  const std::string& name() const { return node_->name; }
  const std::vector<LinExpr>& args() const { return node_->args; }

  bool same(const Process& o) const { return node_ == o.node_; }

  std::string str() const {
    std::string out;
    print(out, false);
    return out;
  }

private:
  struct Node {
    Kind kind;
    Constraint guard;                 // Tell, Unless
    std::vector<Constraint> guards;   // Sum
    std::vector<Process> kids;        // Sum bodies, Par operands, unary bodies
    VarDecl decl;                     // Local
    bool opened{false};
    std::string name;                 // Call
    std::vector<LinExpr> args;        // Call
  };

  explicit Process(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static std::shared_ptr<Node> make(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }
  static Process par_range(const std::vector<Process>& ps, std::size_t b, std::size_t e) {
    if (e - b == 1) return ps[b];
    auto mid = b + (e - b) / 2;
    return par(par_range(ps, b, mid), par_range(ps, mid, e));
  }

  bool atomic() const { return kind() == Kind::Skip || kind() == Kind::Tell || kind() == Kind::Call; }

  void print(std::string& out, bool nested) const {
    bool paren = nested && !atomic();
    if (paren) out += '(';
    switch (kind()) {
      case Kind::Skip: out += "skip"; break;
      case Kind::Tell: out += "tell(" + constraint().str() + ")"; break;
      case Kind::Sum:
        for (std::size_t i = 0; i < guards().size(); ++i) {
          if (i) out += " + ";
          out += "when " + guards()[i].str() + " do ";
          bodies()[i].print(out, true);
        }
        break;
      case Kind::Par:
        print_par(out);
        break;
      case Kind::Local:
        out += "local " + decl().name + ":[" + std::to_string(decl().lo) + "," + std::to_string(decl().hi) + "] in ";
        body().print(out, true);
        break;
      case Kind::Next:
        out += "next ";
        body().print(out, true);
        break;
      case Kind::Unless:
        out += "unless " + constraint().str() + " next ";
        body().print(out, true);
        break;
      case Kind::Star:
        out += "*";
        body().print(out, true);
        break;
      case Kind::Bang:
        out += "!";
        body().print(out, true);
        break;
      case Kind::Call:
        out += name() + "(";
        for (std::size_t i = 0; i < args().size(); ++i) {
          if (i) out += ",";
          out += args()[i].str();
        }
        out += ")";
        break;
    }
    if (paren) out += ')';
  }
  // Par chains print flat: `P || Q || R`.
  void print_par(std::string& out) const {
    for (int i = 0; i < 2; ++i) {
      if (i) out += " || ";
      const Process& k = node_->kids[i];
      if (k.kind() == Kind::Par)
        k.print_par(out);
      else
        k.print(out, true);
    }
  }

  std::shared_ptr<const Node> node_;
};

inline Process Process::sum(std::vector<std::pair<Constraint, Process>> branches) {
  if (branches.empty()) throw Error("sum needs at least one branch");
  auto n = make(Kind::Sum);
  for (auto& [g, p] : branches) {
    n->guards.push_back(std::move(g));
    n->kids.push_back(std::move(p));
  }
  return Process(std::move(n));
}

struct Definition {
  std::vector<std::string> params;
  Process body;
};

using DefTable = std::map<std::string, Definition>;

/// A substitution maps a name to a constant (parameter passing) or to another
/// name (renaming of a hidden variable).
using Subst = std::unordered_map<std::string, std::variant<std::int64_t, std::string>>;

inline LinExpr substitute(const LinExpr& e, const Subst& s) {
  if (s.empty()) return e;
  return e.map_vars([&](const std::string& v) -> std::variant<std::int64_t, std::string> {
    auto it = s.find(v);
    if (it == s.end()) return v;
    return it->second;
  });
}

inline Constraint substitute(const Constraint& c, const Subst& s) {
  if (s.empty()) return c;
  return c.map_vars([&](const std::string& v) -> std::variant<std::int64_t, std::string> {
    auto it = s.find(v);
    if (it == s.end()) return v;
    return it->second;
  });
}

inline Process substitute(const Process& p, const Subst& s) {
  using K = Process::Kind;
  if (s.empty()) return p;
  switch (p.kind()) {
    case K::Skip: return p;
    case K::Tell: return Process::tell(substitute(p.constraint(), s));
    case K::Sum: {
      std::vector<std::pair<Constraint, Process>> bs;
      for (std::size_t i = 0; i < p.guards().size(); ++i)
        bs.emplace_back(substitute(p.guards()[i], s), substitute(p.bodies()[i], s));
      return Process::sum(std::move(bs));
    }
    case K::Par: return Process::par(substitute(p.left(), s), substitute(p.right(), s));
    case K::Local: {
      if (!s.count(p.decl().name)) return Process::local(p.decl(), substitute(p.body(), s), p.opened());
      Subst inner = s;
      inner.erase(p.decl().name);
      return Process::local(p.decl(), substitute(p.body(), inner), p.opened());
    }
    case K::Next: return Process::next(substitute(p.body(), s));
    case K::Unless: return Process::unless(substitute(p.constraint(), s), substitute(p.body(), s));
    case K::Star: return Process::star(substitute(p.body(), s));
    case K::Bang: return Process::bang(substitute(p.body(), s));
    case K::Call: {
      std::vector<LinExpr> args;
      args.reserve(p.args().size());
      for (const auto& a : p.args()) args.push_back(substitute(a, s));
      return Process::call(p.name(), std::move(args));
    }
  }
  return p;
}

namespace detail {

// Calls reachable from `p` within the current time unit (not under a delay).
inline void immediate_calls(const Process& p, std::vector<std::string>& out) {
  using K = Process::Kind;
  switch (p.kind()) {
    case K::Call: out.push_back(p.name()); break;
    case K::Sum:
    case K::Par:
      for (const auto& b : p.bodies()) immediate_calls(b, out);
      break;
    case K::Local:
    case K::Bang: immediate_calls(p.body(), out); break;
    default: break;  // Next, Unless and Star delay their bodies
  }
}

inline void all_calls(const Process& p, std::vector<const Process*>& out) {
  using K = Process::Kind;
  switch (p.kind()) {
    case K::Call: out.push_back(&p); break;
    case K::Sum:
    case K::Par:
      for (const auto& b : p.bodies()) all_calls(b, out);
      break;
    case K::Local:
    case K::Next:
    case K::Unless:
    case K::Star:
    case K::Bang: all_calls(p.body(), out); break;
    default: break;
  }
}

}  // namespace detail

/// Checks that every call target exists with the right arity and that every
/// recursive cycle passes through next, unless or star. Returns the problems
/// found; empty means well-formed.
inline std::vector<std::string> check_definitions(const DefTable& defs, const Process& entry = Process::skip()) {
  std::vector<std::string> problems;
  auto check_calls = [&](const Process& p, const std::string& where) {
    std::vector<const Process*> calls;
    detail::all_calls(p, calls);
    for (const auto* c : calls) {
      auto it = defs.find(c->name());
      if (it == defs.end())
        problems.push_back(where + ": call to undefined " + c->name());
      else if (it->second.params.size() != c->args().size())
        problems.push_back(where + ": arity mismatch calling " + c->name());
    }
  };
  check_calls(entry, "entry");
  for (const auto& [name, d] : defs) check_calls(d.body, name);
  if (!problems.empty()) return problems;

  // cycle detection on the graph of undelayed calls
  std::map<std::string, std::vector<std::string>> graph;
  for (const auto& [name, d] : defs) detail::immediate_calls(d.body, graph[name]);
  std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
  std::function<bool(const std::string&)> dfs = [&](const std::string& n) {
    color[n] = 1;
    for (const auto& m : graph[n]) {
      if (color[m] == 1) return false;
      if (color[m] == 0 && !dfs(m)) return false;
    }
    color[n] = 2;
    return true;
  };
  for (const auto& [name, d] : defs)
    if (color[name] == 0 && !dfs(name)) problems.push_back(name + ": recursion not guarded by next/unless/star");
  return problems;
}

inline std::string dump_definitions(const DefTable& defs) {
  std::string out;
  for (const auto& [name, d] : defs) {
    out += name + "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) out += (i ? "," : "") + d.params[i];
    out += ") = " + d.body.str() + "\n";
  }
  return out;
}

}  // namespace iscore::ntcc
