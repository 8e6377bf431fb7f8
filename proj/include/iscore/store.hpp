#pragma once

// Finite-domain constraint store: tell, exact satisfiability and exact
// entailment over integer variables with finite bounds.
//
// The store keeps a bounds view of every variable, narrowed by bounds
// propagation on the told constraints. Constraints that the bounds already
// satisfy are retired; the remaining "active" constraints are checked by a
// backtracking search restricted to the connected component of the variables
// involved.

#include <iscore/constraint.hpp>

#include <map>
#include <optional>
#include <unordered_map>

namespace iscore {

namespace detail {

struct ITerm {
  std::int64_t coef;
  int var;
};

/// A constraint with variables resolved to dense indices.
struct INode {
  Constraint::Kind kind{Constraint::Kind::True};
  std::vector<ITerm> terms;
  std::int64_t k{0};
  Rel rel{Rel::Eq};
  std::vector<INode> kids;
};

enum class Tri { False, True, Unknown };

struct Box {
  std::vector<std::int64_t> lo, hi;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

inline std::pair<std::int64_t, std::int64_t> range(const INode& n, const Box& b) {
  std::int64_t mn = n.k, mx = n.k;
  for (const auto& t : n.terms) {
    auto x = t.coef * b.lo[t.var];
    auto y = t.coef * b.hi[t.var];
    mn += std::min(x, y);
    mx += std::max(x, y);
  }
  return {mn, mx};
}

inline Tri eval(const INode& n, const Box& b) {
  using K = Constraint::Kind;
  switch (n.kind) {
    case K::True: return Tri::True;
    case K::False: return Tri::False;
    case K::Atom: {
      auto [mn, mx] = range(n, b);
      switch (n.rel) {
        case Rel::Eq:
          if (mn == 0 && mx == 0) return Tri::True;
          return (mn > 0 || mx < 0) ? Tri::False : Tri::Unknown;
        case Rel::Ne:
          if (mn == 0 && mx == 0) return Tri::False;
          return (mn > 0 || mx < 0) ? Tri::True : Tri::Unknown;
        case Rel::Lt:
          if (mx < 0) return Tri::True;
          return mn >= 0 ? Tri::False : Tri::Unknown;
        case Rel::Le:
          if (mx <= 0) return Tri::True;
          return mn > 0 ? Tri::False : Tri::Unknown;
      }
      return Tri::Unknown;
    }
    case K::And: {
      Tri a = eval(n.kids[0], b), c = eval(n.kids[1], b);
      if (a == Tri::False || c == Tri::False) return Tri::False;
      return (a == Tri::True && c == Tri::True) ? Tri::True : Tri::Unknown;
    }
    case K::Or: {
      Tri a = eval(n.kids[0], b), c = eval(n.kids[1], b);
      if (a == Tri::True || c == Tri::True) return Tri::True;
      return (a == Tri::False && c == Tri::False) ? Tri::False : Tri::Unknown;
    }
  }
  return Tri::Unknown;
}

// sum(terms) + k <= 0
inline bool propagate_le(const std::vector<ITerm>& terms, std::int64_t k, std::int64_t sign, Box& b,
                         bool& changed) {
  std::int64_t mn = k * sign;
  for (const auto& t : terms) {
    auto c = t.coef * sign;
    mn += std::min(c * b.lo[t.var], c * b.hi[t.var]);
  }
  if (mn > 0) return false;
  for (const auto& t : terms) {
    auto c = t.coef * sign;
    auto own = std::min(c * b.lo[t.var], c * b.hi[t.var]);
    auto rest = -(mn - own);  // c*x <= rest
    if (c > 0) {
      auto ub = floor_div(rest, c);
      if (ub < b.hi[t.var]) {
        b.hi[t.var] = ub;
        changed = true;
      }
    } else {
      auto lb = ceil_div(rest, c);
      if (lb > b.lo[t.var]) {
        b.lo[t.var] = lb;
        changed = true;
      }
    }
    if (b.lo[t.var] > b.hi[t.var]) return false;
  }
  return true;
}

/// Narrows `b` under the requirement that `n` holds. False on wipe-out.
inline bool propagate(const INode& n, Box& b, bool& changed) {
  using K = Constraint::Kind;
  switch (n.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::And: return propagate(n.kids[0], b, changed) && propagate(n.kids[1], b, changed);
    case K::Or: {
      Tri l = eval(n.kids[0], b), r = eval(n.kids[1], b);
      if (l == Tri::True || r == Tri::True) return true;
      if (l == Tri::False && r == Tri::False) return false;
      if (l == Tri::False) return propagate(n.kids[1], b, changed);
      if (r == Tri::False) return propagate(n.kids[0], b, changed);
      return true;
    }
    case K::Atom:
      switch (n.rel) {
        case Rel::Le: return propagate_le(n.terms, n.k, 1, b, changed);
        case Rel::Lt: return propagate_le(n.terms, n.k + 1, 1, b, changed);
        case Rel::Eq:
          return propagate_le(n.terms, n.k, 1, b, changed) && propagate_le(n.terms, n.k, -1, b, changed);
        case Rel::Ne: {
          const ITerm* open = nullptr;
          std::int64_t rest = n.k;
          for (const auto& t : n.terms) {
            if (b.lo[t.var] == b.hi[t.var]) {
              rest += t.coef * b.lo[t.var];
            } else if (open) {
              return true;  // two free variables: nothing to prune
            } else {
              open = &t;
            }
          }
          if (!open) return rest != 0;
          if ((-rest) % open->coef != 0) return true;
          auto v = -rest / open->coef;
          auto& lo = b.lo[open->var];
          auto& hi = b.hi[open->var];
          if (v == lo) {
            ++lo;
            changed = true;
          } else if (v == hi) {
            --hi;
            changed = true;
          }
          return lo <= hi;
        }
      }
  }
  return true;
}

inline bool fixpoint(const std::vector<INode>& cons, Box& b) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : cons)
      if (!propagate(c, b, changed)) return false;
  }
  return true;
}

inline void collect_vars(const INode& n, std::vector<int>& out) {
  for (const auto& t : n.terms) out.push_back(t.var);
  for (const auto& k : n.kids) collect_vars(k, out);
}

inline std::vector<int> vars_of(const INode& n) {
  std::vector<int> v;
  collect_vars(n, v);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename F>
INode remap(const INode& n, F&& f) {
  INode out = n;
  for (auto& t : out.terms) t.var = f(t.var);
  for (auto& k : out.kids) k = remap(k, f);
  return out;
}

/// Decides whether `cons` has an integer solution inside `b`. Branches on the
/// smallest open domain first, values ascending.
inline bool solve(const std::vector<INode>& cons, Box b) {
  if (!fixpoint(cons, b)) return false;
  bool all_true = true;
  int pick = -1;
  std::int64_t best = 0;
  for (const auto& c : cons) {
    if (eval(c, b) == Tri::True) continue;
    all_true = false;
    for (int v : vars_of(c)) {
      auto size = b.hi[v] - b.lo[v];
      if (size > 0 && (pick < 0 || size < best || (size == best && v < pick))) {
        pick = v;
        best = size;
      }
    }
  }
  if (all_true) return true;
  if (pick < 0) return false;
  for (auto val = b.lo[pick]; val <= b.hi[pick]; ++val) {
    Box next = b;
    next.lo[pick] = next.hi[pick] = val;
    if (solve(cons, std::move(next))) return true;
  }
  return false;
}

}  // namespace detail

/// Immutable table of variable declarations shared between stores.
class Universe {
public:
  Universe() = default;
  explicit Universe(std::vector<VarDecl> decls) {
    for (auto& d : decls) add(std::move(d));
  }

  void add(VarDecl d) {
    if (d.lo > d.hi) throw Error("empty domain for variable " + d.name);
    if (!index_.emplace(d.name, static_cast<int>(decls_.size())).second)
      throw Error("duplicate variable " + d.name);
    decls_.push_back(std::move(d));
  }
  std::optional<int> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<VarDecl>& decls() const { return decls_; }

private:
  std::vector<VarDecl> decls_;
  std::unordered_map<std::string, int> index_;
};

using Assignment = std::map<std::string, std::int64_t>;

class Store {
public:
  enum class Status { Consistent, Inconsistent };

  Store() : Store(std::make_shared<const Universe>()) {}
  explicit Store(std::vector<VarDecl> decls) : Store(std::make_shared<const Universe>(std::move(decls))) {}
  explicit Store(std::shared_ptr<const Universe> u) : base_(std::move(u)) {
    const auto& ds = base_->decls();
    box_.lo.reserve(ds.size());
    box_.hi.reserve(ds.size());
    for (const auto& d : ds) {
      box_.lo.push_back(d.lo);
      box_.hi.push_back(d.hi);
    }
  }

  /// Adds a variable local to this store (e.g. a hidden ntcc variable).
  void declare(VarDecl d) {
    if (d.lo > d.hi) throw Error("empty domain for variable " + d.name);
    if (find(d.name)) throw Error("duplicate variable " + d.name);
    extra_index_.emplace(d.name, static_cast<int>(base_->decls().size() + extra_.size()));
    box_.lo.push_back(d.lo);
    box_.hi.push_back(d.hi);
    extra_.push_back(std::move(d));
  }

  bool has_var(const std::string& name) const { return find(name).has_value(); }

  std::vector<VarDecl> decls() const {
    auto out = base_->decls();
    out.insert(out.end(), extra_.begin(), extra_.end());
    return out;
  }

  const std::vector<Constraint>& told() const { return told_; }
  Status status() const { return status_; }
  bool sat() const { return status_ == Status::Consistent; }

  /// Monotone counter bumped by every tell.
  std::uint64_t version() const { return version_; }

  void tell(const Constraint& c) {
    detail::INode n = resolve(c);
    told_.push_back(c);
    ++version_;
    if (status_ == Status::Inconsistent) return;
    if (detail::eval(n, box_) == detail::Tri::True) return;
    auto seeds = detail::vars_of(n);
    active_.push_back(std::move(n));
    if (!detail::fixpoint(active_, box_)) {
      status_ = Status::Inconsistent;
      return;
    }
    retire_entailed();
    auto comp = component(seeds, nullptr);
    if (!comp.empty() && !solve_component(comp, nullptr)) status_ = Status::Inconsistent;
  }

  /// True iff every solution of the store satisfies `c`. Inconsistent stores
  /// entail everything.
  bool entails(const Constraint& c) const {
    detail::INode n = resolve(c);
    if (status_ == Status::Inconsistent) return true;
    switch (detail::eval(n, box_)) {
      case detail::Tri::True: return true;
      case detail::Tri::False: return false;  // the store has a solution, and it violates c
      case detail::Tri::Unknown: break;
    }
    detail::INode neg = resolve(negate(c));
    auto comp = component(detail::vars_of(neg), &neg);
    return !solve_component(comp, &neg);
  }

  /// Value of a variable when the store fixes it.
  std::optional<std::int64_t> value(const std::string& name) const {
    auto i = index_of(name);
    if (status_ == Status::Consistent && box_.lo[i] == box_.hi[i]) return box_.lo[i];
    return std::nullopt;
  }
  std::pair<std::int64_t, std::int64_t> bounds(const std::string& name) const {
    auto i = index_of(name);
    return {box_.lo[i], box_.hi[i]};
  }

  /// Complete enumeration of satisfying assignments, ordered lexicographically
  /// by declaration order. Throws when the declared search space exceeds `cap`.
  std::vector<Assignment> solutions(std::uint64_t cap = 1'000'000) const {
    auto ds = decls();
    std::uint64_t space = 1;
    for (const auto& d : ds) {
      auto size = static_cast<std::uint64_t>(d.hi - d.lo + 1);
      if (space > cap / size) throw Error("enumeration too large");
      space *= size;
    }
    std::vector<Assignment> out;
    if (status_ == Status::Inconsistent) return out;
    enumerate(ds, 0, box_, out);
    return out;
  }

  /// One declaration or constraint per line.
  std::string dump() const {
    std::string out;
    for (const auto& d : decls())
      out += d.name + " in [" + std::to_string(d.lo) + "," + std::to_string(d.hi) + "]\n";
    for (const auto& c : told_) out += c.str() + "\n";
    return out;
  }

private:
  std::optional<int> find(const std::string& name) const {
    if (auto i = base_->find(name)) return i;
    auto it = extra_index_.find(name);
    if (it == extra_index_.end()) return std::nullopt;
    return it->second;
  }
  int index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw Error("unknown variable: " + name);
    return *i;
  }

  detail::INode resolve(const Constraint& c) const {
    detail::INode n;
    n.kind = c.kind();
    switch (c.kind()) {
      case Constraint::Kind::Atom:
        n.rel = c.rel();
        n.k = c.expr().constant();
        for (const auto& t : c.expr().terms()) n.terms.push_back({t.coef, index_of(t.var)});
        break;
      case Constraint::Kind::And:
      case Constraint::Kind::Or:
        n.kids.push_back(resolve(c.lhs()));
        n.kids.push_back(resolve(c.rhs()));
        break;
      default: break;
    }
    return n;
  }

  void retire_entailed() {
    std::erase_if(active_, [&](const detail::INode& n) { return detail::eval(n, box_) == detail::Tri::True; });
  }

  // Indices into active_ of the constraints connected to `seeds`.
  std::vector<int> component(const std::vector<int>& seeds, const detail::INode* extra) const {
    if (active_.empty()) return {};
    std::vector<char> in_vars(box_.lo.size(), 0);
    for (int v : seeds) in_vars[v] = 1;
    if (extra)
      for (int v : detail::vars_of(*extra)) in_vars[v] = 1;
    std::vector<std::vector<int>> cvars;
    cvars.reserve(active_.size());
    for (const auto& a : active_) cvars.push_back(detail::vars_of(a));
    std::vector<char> taken(active_.size(), 0);
    std::vector<int> out;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t i = 0; i < active_.size(); ++i) {
        if (taken[i]) continue;
        bool touches = std::any_of(cvars[i].begin(), cvars[i].end(), [&](int v) { return in_vars[v] != 0; });
        if (!touches) continue;
        taken[i] = 1;
        out.push_back(static_cast<int>(i));
        for (int v : cvars[i]) in_vars[v] = 1;
        grew = true;
      }
    }
    return out;
  }

  // Solves active_[comp] (plus `extra`) on a compact copy of the involved variables.
  bool solve_component(const std::vector<int>& comp, const detail::INode* extra) const {
    std::unordered_map<int, int> local;
    detail::Box b;
    auto map = [&](int v) {
      auto [it, fresh] = local.emplace(v, static_cast<int>(b.lo.size()));
      if (fresh) {
        b.lo.push_back(box_.lo[v]);
        b.hi.push_back(box_.hi[v]);
      }
      return it->second;
    };
    std::vector<detail::INode> cons;
    cons.reserve(comp.size() + 1);
    for (int i : comp) cons.push_back(detail::remap(active_[i], map));
    if (extra) cons.push_back(detail::remap(*extra, map));
    return detail::solve(cons, std::move(b));
  }

  void enumerate(const std::vector<VarDecl>& ds, std::size_t i, const detail::Box& b,
                 std::vector<Assignment>& out) const {
    for (const auto& a : active_)
      if (detail::eval(a, b) == detail::Tri::False) return;
    if (i == ds.size()) {
      Assignment asg;
      for (std::size_t j = 0; j < ds.size(); ++j) asg[ds[j].name] = b.lo[j];
      out.push_back(std::move(asg));
      return;
    }
    for (auto v = b.lo[i]; v <= b.hi[i]; ++v) {
      detail::Box next = b;
      next.lo[i] = next.hi[i] = v;
      enumerate(ds, i + 1, next, out);
    }
  }

  std::shared_ptr<const Universe> base_;
  std::vector<VarDecl> extra_;
  std::unordered_map<std::string, int> extra_index_;
  detail::Box box_;
  std::vector<Constraint> told_;
  std::vector<detail::INode> active_;
  Status status_{Status::Consistent};
  std::uint64_t version_{0};
};

inline Store tell(Store s, const Constraint& c) {
  s.tell(c);
  return s;
}
inline bool sat(const Store& s) { return s.sat(); }
inline bool entails(const Store& s, const Constraint& c) { return s.entails(c); }
inline std::vector<Assignment> solutions(const Store& s, std::uint64_t cap = 1'000'000) { return s.solutions(cap); }

}  // namespace iscore
