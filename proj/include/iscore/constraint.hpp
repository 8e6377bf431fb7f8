#pragma once

// Linear integer constraints over named finite-domain variables.
//
// A constraint is an atom `e REL 0` with `e` a linear expression and REL one
// of =, !=, <, <=, or a conjunction/disjunction of constraints, or one of the
// constants true/false. The language is closed under negation.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace iscore {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VarDecl {
  std::string name;
  std::int64_t lo{0};
  std::int64_t hi{0};

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

/// sum(coef_i * var_i) + constant. Terms are kept sorted by variable name with
/// no zero coefficients, so two equal expressions compare equal.
class LinExpr {
public:
  struct Term {
    std::int64_t coef;
    std::string var;
    friend bool operator==(const Term&, const Term&) = default;
  };

  LinExpr() = default;
  LinExpr(std::int64_t c) : constant_(c) {}  // NOLINT(implicit)

  static LinExpr var(std::string name, std::int64_t coef = 1) {
    LinExpr e;
    if (coef != 0) e.terms_.push_back({coef, std::move(name)});
    return e;
  }

  const std::vector<Term>& terms() const { return terms_; }
  std::int64_t constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  LinExpr& operator+=(const LinExpr& o) {
    std::vector<Term> merged;
    merged.reserve(terms_.size() + o.terms_.size());
    auto a = terms_.begin();
    auto b = o.terms_.begin();
    while (a != terms_.end() || b != o.terms_.end()) {
      if (b == o.terms_.end() || (a != terms_.end() && a->var < b->var)) {
        merged.push_back(*a++);
      } else if (a == terms_.end() || b->var < a->var) {
        merged.push_back(*b++);
      } else {
        if (auto c = a->coef + b->coef; c != 0) merged.push_back({c, a->var});
        ++a;
        ++b;
      }
    }
    terms_ = std::move(merged);
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator*=(std::int64_t k) {
    if (k == 0) {
      terms_.clear();
      constant_ = 0;
      return *this;
    }
    for (auto& t : terms_) t.coef *= k;
    constant_ *= k;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, LinExpr b) { return a += (b *= -1); }
  friend LinExpr operator-(LinExpr a) { return a *= -1; }
  friend LinExpr operator*(std::int64_t k, LinExpr a) { return a *= k; }
  friend bool operator==(const LinExpr&, const LinExpr&) = default;

  /// Replaces variables: `f` returns either a constant or a new name.
  template <typename F>
  LinExpr map_vars(F&& f) const {
    LinExpr out(constant_);
    for (const auto& t : terms_) {
      auto r = f(t.var);  // std::variant<std::int64_t, std::string> or similar
      out += apply(t.coef, r);
    }
    return out;
  }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
      if (!first) os << " + ";
      first = false;
      if (t.coef != 1) os << t.coef << '*';
      os << t.var;
    }
    if (first)
      os << constant_;
    else if (constant_ != 0)
      os << " + " << constant_;
    return os.str();
  }

private:
  template <typename R>
  static LinExpr apply(std::int64_t coef, const R& r) {
    if (r.index() == 0) return LinExpr(coef * std::get<0>(r));
    return LinExpr::var(std::get<1>(r), coef);
  }

  std::vector<Term> terms_;
  std::int64_t constant_{0};
};

enum class Rel { Eq, Ne, Lt, Le };

inline const char* rel_str(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
  }
  return "?";
}

class Constraint {
public:
  enum class Kind { True, False, Atom, And, Or };

  Constraint() : Constraint(Kind::True) {}

  static Constraint truth() { return Constraint(Kind::True); }
  static Constraint falsity() { return Constraint(Kind::False); }
  static Constraint atom(LinExpr e, Rel rel) {
    Constraint c(Kind::Atom);
    c.node_->expr = std::move(e);
    c.node_->rel = rel;
    return c;
  }
  static Constraint conj(Constraint a, Constraint b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Constraint disj(Constraint a, Constraint b) { return binary(Kind::Or, std::move(a), std::move(b)); }

  Kind kind() const { return node_->kind; }
  const LinExpr& expr() const { return node_->expr; }
  Rel rel() const { return node_->rel; }
  const Constraint& lhs() const { return *node_->lhs; }
  const Constraint& rhs() const { return *node_->rhs; }

  void collect_vars(std::set<std::string>& out) const {
    switch (kind()) {
      case Kind::Atom:
        for (const auto& t : expr().terms()) out.insert(t.var);
        break;
      case Kind::And:
      case Kind::Or:
        lhs().collect_vars(out);
        rhs().collect_vars(out);
        break;
      default: break;
    }
  }
  std::set<std::string> vars() const {
    std::set<std::string> s;
    collect_vars(s);
    return s;
  }

  template <typename F>
  Constraint map_vars(F&& f) const {
    switch (kind()) {
      case Kind::Atom: return atom(expr().map_vars(f), rel());
      case Kind::And:
      case Kind::Or: return binary(kind(), lhs().map_vars(f), rhs().map_vars(f));
      default: return *this;
    }
  }

  /// Canonical text, e.g. `3*x + -1*y + 2 <= 0`.
  std::string str() const {
    switch (kind()) {
      case Kind::True: return "true";
      case Kind::False: return "false";
      case Kind::Atom: return expr().str() + " " + rel_str(rel()) + " 0";
      case Kind::And: return "(" + lhs().str() + ") /\\ (" + rhs().str() + ")";
      case Kind::Or: return "(" + lhs().str() + ") \\/ (" + rhs().str() + ")";
    }
    return {};
  }

  friend bool operator==(const Constraint& a, const Constraint& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Atom: return a.rel() == b.rel() && a.expr() == b.expr();
      case Kind::And:
      case Kind::Or: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
      default: return true;
    }
  }

private:
  struct Node {
    Kind kind;
    LinExpr expr;
    Rel rel{Rel::Eq};
    std::shared_ptr<const Constraint> lhs, rhs;
  };

  explicit Constraint(Kind k) : node_(std::make_shared<Node>()) { node_->kind = k; }
  static Constraint binary(Kind k, Constraint a, Constraint b) {
    Constraint c(k);
    c.node_->lhs = std::make_shared<const Constraint>(std::move(a));
    c.node_->rhs = std::make_shared<const Constraint>(std::move(b));
    return c;
  }

  std::shared_ptr<Node> node_;
};

inline Constraint eq(const LinExpr& a, const LinExpr& b) { return Constraint::atom(a - b, Rel::Eq); }
inline Constraint ne(const LinExpr& a, const LinExpr& b) { return Constraint::atom(a - b, Rel::Ne); }
inline Constraint lt(const LinExpr& a, const LinExpr& b) { return Constraint::atom(a - b, Rel::Lt); }
inline Constraint le(const LinExpr& a, const LinExpr& b) { return Constraint::atom(a - b, Rel::Le); }
inline Constraint gt(const LinExpr& a, const LinExpr& b) { return lt(b, a); }
inline Constraint ge(const LinExpr& a, const LinExpr& b) { return le(b, a); }
inline Constraint operator&&(Constraint a, Constraint b) { return Constraint::conj(std::move(a), std::move(b)); }
inline Constraint operator||(Constraint a, Constraint b) { return Constraint::disj(std::move(a), std::move(b)); }

inline Constraint negate(const Constraint& c) {
  using K = Constraint::Kind;
  switch (c.kind()) {
    case K::True: return Constraint::falsity();
    case K::False: return Constraint::truth();
    case K::Atom:
      switch (c.rel()) {
        case Rel::Eq: return Constraint::atom(c.expr(), Rel::Ne);
        case Rel::Ne: return Constraint::atom(c.expr(), Rel::Eq);
        // not (e < 0)  <=>  -e <= 0
        case Rel::Lt: return Constraint::atom(-c.expr(), Rel::Le);
        // not (e <= 0) <=>  -e < 0
        case Rel::Le: return Constraint::atom(-c.expr(), Rel::Lt);
      }
      break;
    case K::And: return Constraint::disj(negate(c.lhs()), negate(c.rhs()));
    case K::Or: return Constraint::conj(negate(c.lhs()), negate(c.rhs()));
  }
  throw Error("bad constraint");
}

/// Evaluates `c` under a total assignment given as a lookup function.
template <typename Lookup>
bool evaluate(const Constraint& c, Lookup&& value_of) {
  using K = Constraint::Kind;
  switch (c.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::Atom: {
      std::int64_t v = c.expr().constant();
      for (const auto& t : c.expr().terms()) v += t.coef * value_of(t.var);
      switch (c.rel()) {
        case Rel::Eq: return v == 0;
        case Rel::Ne: return v != 0;
        case Rel::Lt: return v < 0;
        case Rel::Le: return v <= 0;
      }
      return false;
    }
    case K::And: return evaluate(c.lhs(), value_of) && evaluate(c.rhs(), value_of);
    case K::Or: return evaluate(c.lhs(), value_of) || evaluate(c.rhs(), value_of);
  }
  return false;
}

inline Constraint conj_all(const std::vector<Constraint>& cs) {
  if (cs.empty()) return Constraint::truth();
  Constraint out = cs.front();
  for (std::size_t i = 1; i < cs.size(); ++i) out = out && cs[i];
  return out;
}

inline Constraint disj_all(const std::vector<Constraint>& cs) {
  if (cs.empty()) return Constraint::falsity();
  Constraint out = cs.front();
  for (std::size_t i = 1; i < cs.size(); ++i) out = out || cs[i];
  return out;
}

namespace detail {

// Recursive-descent parser for the textual constraint syntax:
//
//   disj := conj (('\/' | 'or') conj)*
//   conj := unary (('/\' | 'and') unary)*
//   unary := 'not' unary | '(' disj ')' | 'true' | 'false' | lin relop lin
//   lin  := ['-'] term (('+' | '-') term)*
//   term := int ['*' ident] | ident
class ConstraintParser {
public:
  explicit ConstraintParser(std::string_view src) : s_(src) {}

  Constraint parse() {
    Constraint c = disj();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return c;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("constraint parse error at column " + std::to_string(pos_ + 1) + ": " + what + " in `" +
                std::string(s_) + "`");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    // keywords must not be a prefix of an identifier
    if (std::isalpha(static_cast<unsigned char>(tok.back())) && pos_ + tok.size() < s_.size() &&
        is_ident_char(s_[pos_ + tok.size()]))
      return false;
    pos_ += tok.size();
    return true;
  }
  static bool is_ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '#' || ch == '.';
  }

  Constraint disj() {
    Constraint c = conj();
    while (accept("\\/") || accept("or")) c = c || conj();
    return c;
  }
  Constraint conj() {
    Constraint c = unary();
    while (accept("/\\") || accept("and")) c = c && unary();
    return c;
  }
  Constraint unary() {
    if (accept("not")) return negate(unary());
    if (accept("(")) {
      Constraint c = disj();
      if (!accept(")")) fail("expected `)`");
      return c;
    }
    if (accept("true")) return Constraint::truth();
    if (accept("false")) return Constraint::falsity();
    LinExpr a = lin();
    skip_ws();
    std::string op;
    for (std::string_view cand : {"==", "!=", "<>", "<=", ">=", "=", "<", ">"}) {
      if (accept(cand)) {
        op = cand;
        break;
      }
    }
    if (op.empty()) fail("expected relational operator");
    LinExpr b = lin();
    if (op == "=" || op == "==") return eq(a, b);
    if (op == "!=" || op == "<>") return ne(a, b);
    if (op == "<") return lt(a, b);
    if (op == "<=") return le(a, b);
    if (op == ">") return gt(a, b);
    return ge(a, b);
  }
  LinExpr lin() {
    LinExpr e;
    bool neg = accept("-");
    e += term(neg);
    while (true) {
      if (accept("+")) {
        neg = accept("-");
        e += term(neg);
      } else if (accept("-")) {
        e += term(true);
      } else {
        break;
      }
    }
    return e;
  }
  LinExpr term(bool neg) {
    skip_ws();
    std::int64_t sign = neg ? -1 : 1;
    if (accept("-")) sign = -sign;
    skip_ws();
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      std::int64_t v = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        v = v * 10 + (s_[pos_++] - '0');
      if (accept("*")) return LinExpr::var(ident(), sign * v);
      return LinExpr(sign * v);
    }
    return LinExpr::var(ident(), sign);
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    }
    if (start == pos_) fail("expected identifier or integer");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string_view s_;
  std::size_t pos_{0};
};

}  // namespace detail

/// Parses e.g. `k < 2`, `dur_A + dur_B <= 9`, `a = 1 /\ not (b = 1)`.
inline Constraint parse_constraint(std::string_view text) { return detail::ConstraintParser(text).parse(); }

}  // namespace iscore
