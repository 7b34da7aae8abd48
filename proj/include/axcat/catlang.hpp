#ifndef AXCAT_CATLANG_HPP_
#define AXCAT_CATLANG_HPP_

// A core subset of the CAT language: named relation definitions (possibly
// mutually recursive, in monotone positions) and acyclic / irreflexive /
// empty assertions over them.
//
// Operator precedence, loosest first:  |   ;   \   &   *   postfix
// Postfix operators: ^-1  ^+  ^*  ^{<=k}  where k is a literal or w / w'
// with an optional +/- offset.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "axcat/error.hpp"
#include "axcat/events.hpp"
#include "axcat/relation.hpp"
#include "axcat/speculation.hpp"

namespace axcat {

struct BoundSpec {
  enum class Base { Literal, Window, Buffer };
  Base base = Base::Literal;
  long offset = 0;  // literal value, or offset added to w / w'

  long resolve(const SpecConfig& cfg) const {
    switch (base) {
      case Base::Literal: return offset;
      case Base::Window: return static_cast<long>(cfg.window) + offset;
      case Base::Buffer: return static_cast<long>(cfg.buffer) + offset;
    }
    return offset;
  }

  std::string str() const {
    if (base == Base::Literal) return std::to_string(offset);
    std::string s = base == Base::Window ? "w" : "w'";
    if (offset > 0) s += "+" + std::to_string(offset);
    if (offset < 0) s += std::to_string(offset);
    return s;
  }
};

struct CatTerm {
  enum class Kind {
    Base,       // po fence rf co loc addr srf rfe
    Identity,   // [S]
    Product,    // S * S
    Name,
    Union,
    Intersection,
    Difference,
    Inverse,
    Plus,
    Star,
    Sequence,
    Bounded,    // r^{<=k}
  };

  Kind kind = Kind::Base;
  std::string name;   // Base/Name: relation name; Identity/Product: first set
  std::string name2;  // Product: second set
  BoundSpec bound;
  std::shared_ptr<const CatTerm> lhs;
  std::shared_ptr<const CatTerm> rhs;
};

using CatTermPtr = std::shared_ptr<const CatTerm>;

inline std::string to_string(const CatTerm& t) {
  switch (t.kind) {
    case CatTerm::Kind::Base:
    case CatTerm::Kind::Name: return t.name;
    case CatTerm::Kind::Identity: return "[" + t.name + "]";
    case CatTerm::Kind::Product: return "(" + t.name + "*" + t.name2 + ")";
    case CatTerm::Kind::Union: return "(" + to_string(*t.lhs) + " | " + to_string(*t.rhs) + ")";
    case CatTerm::Kind::Intersection:
      return "(" + to_string(*t.lhs) + " & " + to_string(*t.rhs) + ")";
    case CatTerm::Kind::Difference:
      return "(" + to_string(*t.lhs) + " \\ " + to_string(*t.rhs) + ")";
    case CatTerm::Kind::Sequence: return "(" + to_string(*t.lhs) + ";" + to_string(*t.rhs) + ")";
    case CatTerm::Kind::Inverse: return to_string(*t.lhs) + "^-1";
    case CatTerm::Kind::Plus: return to_string(*t.lhs) + "^+";
    case CatTerm::Kind::Star: return to_string(*t.lhs) + "^*";
    case CatTerm::Kind::Bounded: return to_string(*t.lhs) + "^{<=" + t.bound.str() + "}";
  }
  return "?";
}

enum class AssertionKind { Acyclic, Irreflexive, Empty };

inline const char* to_string(AssertionKind k) {
  switch (k) {
    case AssertionKind::Acyclic: return "acyclic";
    case AssertionKind::Irreflexive: return "irreflexive";
    case AssertionKind::Empty: return "empty";
  }
  return "?";
}

struct CatDefinition {
  std::string name;
  CatTermPtr term;
  int line = 0;
};

struct CatAssertion {
  AssertionKind kind = AssertionKind::Acyclic;
  CatTermPtr term;
  std::string text;  // source text, for reporting
  std::string as_name;
  int line = 0;
};

struct CatModel {
  std::string name;
  std::vector<CatDefinition> definitions;
  std::vector<CatAssertion> assertions;

  /// True if any definition or assertion mentions the base relation `base`.
  bool uses(std::string_view base) const {
    std::function<bool(const CatTerm&)> walk = [&](const CatTerm& t) {
      if (t.kind == CatTerm::Kind::Base && t.name == base) return true;
      return (t.lhs && walk(*t.lhs)) || (t.rhs && walk(*t.rhs));
    };
    for (const auto& d : definitions)
      if (walk(*d.term)) return true;
    for (const auto& a : assertions)
      if (walk(*a.term)) return true;
    return false;
  }
};

inline bool is_base_relation(std::string_view n) {
  static const std::set<std::string, std::less<>> names = {
      "po", "fence", "rf", "co", "loc", "addr", "srf", "rfe", "add"};
  return names.count(n) != 0;
}

inline bool is_event_set(std::string_view n) {
  return n == "E" || n == "M" || n == "W" || n == "R" || n == "S";
}

namespace detail {

class CatParser {
 public:
  CatParser(std::string_view src, int line) : src_(src), line_(line) {}

  CatTermPtr parse_term_all() {
    CatTermPtr t = parse_union();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(src_.substr(pos_, 1)) + "'");
    return t;
  }

  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg, ErrorKind kind = ErrorKind::Syntax) const {
    throw Error(kind, msg, line_, static_cast<int>(pos_) + 1);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static CatTermPtr node(CatTerm::Kind k, CatTermPtr a, CatTermPtr b = nullptr) {
    auto t = std::make_shared<CatTerm>();
    t->kind = k;
    t->lhs = std::move(a);
    t->rhs = std::move(b);
    return t;
  }

  CatTermPtr parse_union() {
    CatTermPtr t = parse_seq();
    while (accept("|") || accept("\xE2\x88\xAA")) t = node(CatTerm::Kind::Union, t, parse_seq());
    return t;
  }
  CatTermPtr parse_seq() {
    CatTermPtr t = parse_diff();
    while (accept(";")) t = node(CatTerm::Kind::Sequence, t, parse_diff());
    return t;
  }
  CatTermPtr parse_diff() {
    CatTermPtr t = parse_inter();
    while (accept("\\")) t = node(CatTerm::Kind::Difference, t, parse_inter());
    return t;
  }
  CatTermPtr parse_inter() {
    CatTermPtr t = parse_postfix();
    while (accept("&") || accept("\xE2\x88\xA9"))
      t = node(CatTerm::Kind::Intersection, t, parse_postfix());
    return t;
  }

  CatTermPtr parse_postfix() {
    CatTermPtr t = parse_primary();
    while (true) {
      skip_ws();
      if (accept("^-1")) t = node(CatTerm::Kind::Inverse, t);
      else if (accept("^+")) t = node(CatTerm::Kind::Plus, t);
      else if (accept("^*")) t = node(CatTerm::Kind::Star, t);
      else if (accept("^{")) {
        expect("<=");
        auto b = std::make_shared<CatTerm>();
        b->kind = CatTerm::Kind::Bounded;
        b->lhs = t;
        b->bound = parse_bound();
        expect("}");
        t = b;
      } else break;
    }
    return t;
  }

  BoundSpec parse_bound() {
    skip_ws();
    BoundSpec b;
    if (accept("w'") || accept("w\xE2\x80\xB2")) b.base = BoundSpec::Base::Buffer;
    else if (accept("w")) b.base = BoundSpec::Base::Window;
    if (b.base == BoundSpec::Base::Literal) {
      b.offset = parse_int();
      return b;
    }
    skip_ws();
    if (accept("-")) b.offset = -parse_int();
    else if (accept("+")) b.offset = parse_int();
    return b;
  }

  long parse_int() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return std::stol(std::string(src_.substr(start, pos_ - start)));
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
              src_[pos_] == '-'))
        ++pos_;
    }
    // A trailing '-' belongs to "^-1" style operators, not to the name.
    while (pos_ > start && src_[pos_ - 1] == '-') --pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  CatTermPtr parse_primary() {
    skip_ws();
    if (accept("(")) {
      CatTermPtr t = parse_union();
      expect(")");
      return t;
    }
    if (accept("[")) {
      const std::string s = ident();
      if (!is_event_set(s)) fail("expected an event set (E, M, W, R, S)");
      expect("]");
      auto t = std::make_shared<CatTerm>();
      t->kind = CatTerm::Kind::Identity;
      t->name = s;
      return t;
    }
    const std::size_t start = pos_;
    const std::string id = ident();
    if (id.empty()) fail("expected a relation");
    if (is_event_set(id)) {
      if (!(accept("*") || accept("\xC3\x97"))) {
        pos_ = start;
        fail("event set '" + id + "' used as a relation (write [" + id + "])");
      }
      const std::string id2 = ident();
      if (!is_event_set(id2)) fail("expected an event set after '*'");
      auto t = std::make_shared<CatTerm>();
      t->kind = CatTerm::Kind::Product;
      t->name = id;
      t->name2 = id2;
      return t;
    }
    auto t = std::make_shared<CatTerm>();
    t->kind = is_base_relation(id) ? CatTerm::Kind::Base : CatTerm::Kind::Name;
    t->name = id;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
};

inline void collect_names(const CatTerm& t, std::set<std::string>& out) {
  if (t.kind == CatTerm::Kind::Name) out.insert(t.name);
  if (t.lhs) collect_names(*t.lhs, out);
  if (t.rhs) collect_names(*t.rhs, out);
}

// Names occurring in negative position (right of a difference).
inline void collect_negative(const CatTerm& t, bool negative, std::set<std::string>& out) {
  if (t.kind == CatTerm::Kind::Name && negative) out.insert(t.name);
  if (t.kind == CatTerm::Kind::Difference) {
    collect_negative(*t.lhs, negative, out);
    collect_negative(*t.rhs, !negative, out);
    return;
  }
  if (t.lhs) collect_negative(*t.lhs, negative, out);
  if (t.rhs) collect_negative(*t.rhs, negative, out);
}

// Strongly connected components of the definition graph, dependencies first.
inline std::vector<std::vector<std::size_t>> definition_sccs(const CatModel& m) {
  const std::size_t n = m.definitions.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[m.definitions[i].name] = i;
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> names;
    collect_names(*m.definitions[i].term, names);
    for (const auto& nm : names) deps[i].push_back(index.at(nm));
  }
  // Tarjan's algorithm; emits SCCs in reverse topological order of the
  // "depends on" graph, i.e. dependencies first.
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : deps[v]) {
      if (idx[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (std::size_t i = 0; i < n; ++i)
    if (idx[i] < 0) visit(i);
  return out;
}

inline bool is_recursive(const CatModel& m, const std::vector<std::size_t>& scc) {
  if (scc.size() > 1) return true;
  std::set<std::string> names;
  collect_names(*m.definitions[scc[0]].term, names);
  return names.count(m.definitions[scc[0]].name) != 0;
}

}  // namespace detail

/// Parses a .cat model: one definition or assertion per line, '#' comments,
/// an optional quoted title line naming the model.
inline CatModel parse_cat(std::string_view text, std::string default_name = "model") {
  CatModel m;
  m.name = std::move(default_name);
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  bool first = true;
  std::map<std::string, int> defined_at;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = axcat::detail::trim(raw);
    if (line.empty()) continue;
    if (first && line.front() == '"') {
      const auto close = line.find('"', 1);
      if (close == std::string::npos) throw Error(ErrorKind::Syntax, "unterminated title", lineno);
      m.name = line.substr(1, close - 1);
      first = false;
      continue;
    }
    first = false;
    std::string body = line;
    auto starts = [&](std::string_view kw) {
      return body.size() > kw.size() && body.compare(0, kw.size(), kw) == 0 &&
             std::isspace(static_cast<unsigned char>(body[kw.size()]));
    };
    std::optional<AssertionKind> akind;
    std::size_t skip = 0;
    if (starts("acyclic")) { akind = AssertionKind::Acyclic; skip = 7; }
    else if (starts("irreflexive")) { akind = AssertionKind::Irreflexive; skip = 11; }
    else if (starts("empty")) { akind = AssertionKind::Empty; skip = 5; }
    if (akind) {
      CatAssertion a;
      a.kind = *akind;
      a.line = lineno;
      std::string term = body.substr(skip);
      // Optional "as NAME" suffix.
      if (const auto as = term.rfind(" as "); as != std::string::npos) {
        a.as_name = axcat::detail::trim(term.substr(as + 4));
        term = term.substr(0, as);
      }
      a.text = axcat::detail::trim(term);
      detail::CatParser p(term, lineno);
      a.term = p.parse_term_all();
      m.assertions.push_back(std::move(a));
      continue;
    }
    if (starts("let")) body = axcat::detail::trim(body.substr(3));
    if (starts("include"))
      throw Error(ErrorKind::Syntax, "include is not supported", lineno);
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Syntax, "expected 'name = term' or an assertion", lineno);
    const std::string name = axcat::detail::trim(body.substr(0, eq));
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
      throw Error(ErrorKind::Syntax, "bad relation name '" + name + "'", lineno);
    if (is_base_relation(name) || is_event_set(name))
      throw Error(ErrorKind::DuplicateDefinition, "cannot redefine '" + name + "'", lineno);
    if (defined_at.count(name))
      throw Error(ErrorKind::DuplicateDefinition,
                  "'" + name + "' already defined on line " + std::to_string(defined_at[name]),
                  lineno);
    defined_at[name] = lineno;
    detail::CatParser p(std::string_view(body).substr(eq + 1), lineno);
    m.definitions.push_back({name, p.parse_term_all(), lineno});
  }

  // Every referenced name needs a definition.
  auto check_names = [&](const CatTerm& t, int line) {
    std::set<std::string> names;
    detail::collect_names(t, names);
    for (const auto& nm : names)
      if (!defined_at.count(nm))
        throw Error(ErrorKind::UndefinedName, "relation '" + nm + "' is not defined", line);
  };
  for (const auto& d : m.definitions) check_names(*d.term, d.line);
  for (const auto& a : m.assertions) check_names(*a.term, a.line);

  // Recursive names may only appear in monotone positions.
  for (const auto& scc : detail::definition_sccs(m)) {
    if (!detail::is_recursive(m, scc)) continue;
    std::set<std::string> members;
    for (auto i : scc) members.insert(m.definitions[i].name);
    for (auto i : scc) {
      std::set<std::string> neg;
      detail::collect_negative(*m.definitions[i].term, false, neg);
      for (const auto& nm : neg)
        if (members.count(nm))
          throw Error(ErrorKind::NonMonotoneRecursion,
                      "'" + nm + "' is used recursively on the right of a difference",
                      m.definitions[i].line);
    }
  }
  return m;
}

using Bindings = std::map<std::string, Relation>;

namespace detail {

inline const EventSet& event_set(const BaseRelations& b, const std::string& s) {
  if (s == "E") return b.E;
  if (s == "M") return b.M;
  if (s == "R") return b.R;
  return b.W;  // W and its alias S
}

inline const Relation& base_relation(const BaseRelations& b, const std::string& n) {
  if (n == "po") return b.po;
  if (n == "fence") return b.fence;
  if (n == "rf") return b.rf;
  if (n == "co") return b.co;
  if (n == "loc" || n == "add") return b.loc;
  if (n == "addr") return b.addr;
  if (n == "srf") return b.srf;
  return b.rfe;
}

}  // namespace detail

/// r^{<=k}: r when k = 0, otherwise r ; r^{<=k-1}.
inline Relation bounded_compose(const Relation& r, long k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "bounded composition needs k >= 0");
  Relation out = r;
  for (long i = 0; i < k; ++i) out = r.compose(out);
  return out;
}

inline Relation eval_term(const CatTerm& t, const BaseRelations& b, const Bindings& env,
                          const SpecConfig& cfg) {
  const std::size_t n = b.E.universe();
  switch (t.kind) {
    case CatTerm::Kind::Base: return detail::base_relation(b, t.name);
    case CatTerm::Kind::Identity: return Relation::identity(detail::event_set(b, t.name));
    case CatTerm::Kind::Product:
      return Relation::product(detail::event_set(b, t.name), detail::event_set(b, t.name2));
    case CatTerm::Kind::Name: {
      auto it = env.find(t.name);
      return it == env.end() ? Relation(n) : it->second;
    }
    case CatTerm::Kind::Union:
      return eval_term(*t.lhs, b, env, cfg) | eval_term(*t.rhs, b, env, cfg);
    case CatTerm::Kind::Intersection:
      return eval_term(*t.lhs, b, env, cfg) & eval_term(*t.rhs, b, env, cfg);
    case CatTerm::Kind::Difference:
      return eval_term(*t.lhs, b, env, cfg) - eval_term(*t.rhs, b, env, cfg);
    case CatTerm::Kind::Sequence:
      return eval_term(*t.lhs, b, env, cfg).compose(eval_term(*t.rhs, b, env, cfg));
    case CatTerm::Kind::Inverse: return eval_term(*t.lhs, b, env, cfg).inverse();
    case CatTerm::Kind::Plus: return eval_term(*t.lhs, b, env, cfg).transitive_closure();
    case CatTerm::Kind::Star:
      return eval_term(*t.lhs, b, env, cfg).reflexive_transitive_closure();
    case CatTerm::Kind::Bounded:
      return bounded_compose(eval_term(*t.lhs, b, env, cfg), t.bound.resolve(cfg));
  }
  return Relation(n);
}

/// Least solution of the model's equation system by Kleene iteration from
/// the empty relation, one strongly connected group at a time.
inline Bindings evaluate(const CatModel& m, const BaseRelations& b, const SpecConfig& cfg) {
  Bindings env;
  const std::size_t n = b.E.universe();
  for (const auto& scc : detail::definition_sccs(m)) {
    if (!detail::is_recursive(m, scc)) {
      const auto& d = m.definitions[scc[0]];
      env[d.name] = eval_term(*d.term, b, env, cfg);
      continue;
    }
    for (auto i : scc) env[m.definitions[i].name] = Relation(n);
    const std::size_t limit = n * n + 1;
    for (std::size_t iter = 0; iter <= limit; ++iter) {
      bool changed = false;
      Bindings next = env;
      for (auto i : scc) {
        const auto& d = m.definitions[i];
        Relation r = eval_term(*d.term, b, env, cfg);
        if (!(r == env[d.name])) changed = true;
        next[d.name] = std::move(r);
      }
      env = std::move(next);
      if (!changed) break;
    }
  }
  return env;
}

struct AssertionResult {
  bool consistent = true;
  std::optional<std::size_t> violated;  // index into CatModel::assertions
};

inline bool assertion_holds(AssertionKind k, const Relation& r) {
  switch (k) {
    case AssertionKind::Acyclic: return r.acyclic();
    case AssertionKind::Irreflexive: return r.irreflexive();
    case AssertionKind::Empty: return r.empty();
  }
  return false;
}

/// Checks assertions in file order and reports the first failure.
inline AssertionResult check_assertions(const CatModel& m, const BaseRelations& b,
                                        const Bindings& env, const SpecConfig& cfg) {
  for (std::size_t i = 0; i < m.assertions.size(); ++i) {
    const auto& a = m.assertions[i];
    if (!assertion_holds(a.kind, eval_term(*a.term, b, env, cfg))) return {false, i};
  }
  return {};
}

inline AssertionResult check_model(const CatModel& m, const BaseRelations& b,
                                   const SpecConfig& cfg) {
  return check_assertions(m, b, evaluate(m, b, cfg), cfg);
}

/// srf & fence must be contained in loc: a fence between a store and a load
/// stops alias prediction between them.
inline bool check_srf_fence(const BaseRelations& b) {
  return (b.srf & b.fence).subset_of(b.loc);
}

}  // namespace axcat

#endif  // AXCAT_CATLANG_HPP_
