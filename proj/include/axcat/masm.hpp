#ifndef AXCAT_MASM_HPP_
#define AXCAT_MASM_HPP_

// μASM: a small assembly language with loads, stores, direct and conditional
// jumps, fences, and (conditional) register assignment. Programs consist of
// one or more threads plus a memory layout naming the arrays they touch and
// the address of the secret.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "axcat/error.hpp"

namespace axcat {

using Value = std::uint64_t;
using Label = std::uint32_t;
using ThreadId = std::uint32_t;

inline Value domain_mask(unsigned bits) {
  return bits >= 64 ? ~Value{0} : ((Value{1} << bits) - 1);
}

// ---------------------------------------------------------------------------
// Expressions

struct Expr {
  enum class Op {
    Reg, Const,
    Neg, BitNot, LogNot,
    Add, Sub, Mul, And, Or, Xor, Shl, Shr,
    Lt, Le, Gt, Ge, Eq, Ne,
  };

  Op op = Op::Const;
  std::string reg;   // Op::Reg
  Value value = 0;   // Op::Const
  std::string text;  // source spelling of a constant (symbol, A.size, ⊛)
  std::shared_ptr<const Expr> lhs;
  std::shared_ptr<const Expr> rhs;

  static std::shared_ptr<const Expr> constant(Value v, std::string text = {}) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const;
    e->value = v;
    e->text = std::move(text);
    return e;
  }
  static std::shared_ptr<const Expr> registr(std::string name) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Reg;
    e->reg = std::move(name);
    return e;
  }
  static std::shared_ptr<const Expr> unary(Op op,
                                           std::shared_ptr<const Expr> a) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(a);
    return e;
  }
  static std::shared_ptr<const Expr> binary(Op op,
                                            std::shared_ptr<const Expr> a,
                                            std::shared_ptr<const Expr> b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }
};

using ExprPtr = std::shared_ptr<const Expr>;

inline bool uses_register(const Expr& e, std::string_view reg) {
  if (e.op == Expr::Op::Reg) return e.reg == reg;
  return (e.lhs && uses_register(*e.lhs, reg)) ||
         (e.rhs && uses_register(*e.rhs, reg));
}

inline void collect_registers(const Expr& e, std::set<std::string>& out) {
  if (e.op == Expr::Op::Reg) out.insert(e.reg);
  if (e.lhs) collect_registers(*e.lhs, out);
  if (e.rhs) collect_registers(*e.rhs, out);
}

/// Evaluates `e` modulo 2^bits. `lookup(name)` returns the register value.
template <typename Lookup>
Value evaluate(const Expr& e, Lookup&& lookup, unsigned bits) {
  const Value m = domain_mask(bits);
  using Op = Expr::Op;
  switch (e.op) {
    case Op::Reg: return lookup(e.reg) & m;
    case Op::Const: return e.value & m;
    default: break;
  }
  const Value a = evaluate(*e.lhs, lookup, bits);
  switch (e.op) {
    case Op::Neg: return (~a + 1) & m;
    case Op::BitNot: return ~a & m;
    case Op::LogNot: return a == 0 ? 1 : 0;
    default: break;
  }
  const Value b = evaluate(*e.rhs, lookup, bits);
  switch (e.op) {
    case Op::Add: return (a + b) & m;
    case Op::Sub: return (a - b) & m;
    case Op::Mul: return (a * b) & m;
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Xor: return a ^ b;
    case Op::Shl: return b >= 64 ? 0 : (a << b) & m;
    case Op::Shr: return b >= 64 ? 0 : a >> b;
    case Op::Lt: return a < b ? 1 : 0;
    case Op::Le: return a <= b ? 1 : 0;
    case Op::Gt: return a > b ? 1 : 0;
    case Op::Ge: return a >= b ? 1 : 0;
    case Op::Eq: return a == b ? 1 : 0;
    case Op::Ne: return a != b ? 1 : 0;
    default: return 0;
  }
}

// ---------------------------------------------------------------------------
// Statements and programs

struct Stmt {
  enum class Kind { Assign, CondAssign, Load, Store, Jmp, Beqz, Skip, Fence };

  Kind kind = Kind::Skip;
  std::string reg;  // target of Assign/CondAssign/Load; tested by Beqz
  ExprPtr expr;     // assigned value, or the address of Load/Store
  ExprPtr cond;     // CondAssign guard
  ExprPtr value;    // value written by Store
  Label target = 0; // Jmp/Beqz

  bool is_memory() const { return kind == Kind::Load || kind == Kind::Store; }
  bool is_jump() const { return kind == Kind::Jmp || kind == Kind::Beqz; }
  bool writes_register() const {
    return kind == Kind::Assign || kind == Kind::CondAssign ||
           kind == Kind::Load;
  }
};

struct Provenance {
  Label label = 0;          // label in the source program
  std::uint32_t iteration = 0;  // 1-based unrolling copy; 0 for synthetic code
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Instruction {
  Label label = 0;
  Stmt stmt;
  ThreadId thread = 0;
  std::string text;
  Provenance origin;
  // Executions reaching this instruction exceeded the unrolling bound.
  bool unwind_marker = false;
};

struct Thread {
  ThreadId id = 0;
  std::vector<Instruction> code;

  bool empty() const { return code.empty(); }
  Label first_label() const { return code.empty() ? 0 : code.front().label; }
  Label last_label() const { return code.empty() ? 0 : code.back().label; }
  bool has_label(Label l) const {
    return !code.empty() && l >= first_label() && l <= last_label();
  }
  const Instruction& at(Label l) const { return code[l - first_label()]; }
};

struct Region {
  std::string name;
  Value base = 0;
  Value extent = 1;
  bool input = false;
  Value init = 0;
  bool contains(Value a) const { return a >= base && a < base + extent; }
};

/// `expect` trailer line consumed by the corpus runner.
struct Expectation {
  std::string outcome = "safe";  // safe, unsafe or unknown
  std::string model;
  std::map<std::string, std::string> params;
};

struct Program {
  std::vector<Thread> threads;
  std::vector<Region> layout;
  Value secret_addr = 0;
  std::set<std::string> registers;
  std::vector<Expectation> expectations;
  // Set by unroll() when some loop could not be fully unrolled.
  bool incomplete = false;

  std::set<Value> input_locations() const {
    std::set<Value> out;
    for (const auto& r : layout)
      if (r.input)
        for (Value a = r.base; a < r.base + r.extent; ++a) out.insert(a);
    return out;
  }

  std::set<Value> declared_addresses() const {
    std::set<Value> out;
    for (const auto& r : layout)
      for (Value a = r.base; a < r.base + r.extent; ++a) out.insert(a);
    return out;
  }

  const Region* region_of(Value a) const {
    for (const auto& r : layout)
      if (r.contains(a)) return &r;
    return nullptr;
  }

  /// Largest address the program names, including the secret.
  Value max_address() const {
    Value m = secret_addr;
    for (const auto& r : layout) m = std::max(m, r.base + r.extent - 1);
    return m;
  }

  std::size_t instruction_count() const {
    std::size_t n = 0;
    for (const auto& t : threads) n += t.code.size();
    return n;
  }

  bool has_unwind_markers() const {
    for (const auto& t : threads)
      for (const auto& i : t.code)
        if (i.unwind_marker) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_register_name(std::string_view s) {
  if (s.size() < 2 || s[0] != 'r') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

inline constexpr std::string_view kSecretGlyph = "\xE2\x8A\x9B";  // ⊛

class ExprParser {
 public:
  ExprParser(std::string_view src, int line, int col0, const Program& prog,
             const std::set<std::string>& declared_regs)
      : src_(src), line_(line), col0_(col0), prog_(prog), regs_(declared_regs) {}

  ExprPtr parse_all() {
    ExprPtr e = parse_binary(0);
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

  std::set<std::string> used_registers;

 private:
  struct BinOp {
    std::string_view tok;
    int prec;
    Expr::Op op;
  };

  static const std::vector<BinOp>& ops() {
    static const std::vector<BinOp> table = {
        {"<<", 5, Expr::Op::Shl}, {">>", 5, Expr::Op::Shr},
        {"<=", 4, Expr::Op::Le},  {">=", 4, Expr::Op::Ge},
        {"==", 3, Expr::Op::Eq},  {"!=", 3, Expr::Op::Ne},
        {"<", 4, Expr::Op::Lt},   {">", 4, Expr::Op::Gt},
        {"|", 0, Expr::Op::Or},   {"^", 1, Expr::Op::Xor},
        {"&", 2, Expr::Op::And},  {"+", 6, Expr::Op::Add},
        {"-", 6, Expr::Op::Sub},  {"*", 7, Expr::Op::Mul},
    };
    return table;
  }

  [[noreturn]] void fail(const std::string& msg,
                         ErrorKind kind = ErrorKind::Syntax) const {
    throw Error(kind, msg, line_, col0_ + static_cast<int>(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  const BinOp* peek_op() {
    skip_ws();
    for (const auto& op : ops())
      if (src_.substr(pos_, op.tok.size()) == op.tok) return &op;
    return nullptr;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    while (true) {
      const BinOp* op = peek_op();
      if (!op || op->prec < min_prec) break;
      pos_ += op->tok.size();
      ExprPtr rhs = parse_binary(op->prec + 1);
      lhs = Expr::binary(op->op, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected expression");
    const char c = src_[pos_];
    if (c == '-') { ++pos_; return Expr::unary(Expr::Op::Neg, parse_unary()); }
    if (c == '~') { ++pos_; return Expr::unary(Expr::Op::BitNot, parse_unary()); }
    if (c == '!') { ++pos_; return Expr::unary(Expr::Op::LogNot, parse_unary()); }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_binary(0);
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (src_.substr(pos_, kSecretGlyph.size()) == kSecretGlyph) {
      pos_ += kSecretGlyph.size();
      return Expr::constant(prog_.secret_addr, "secret");
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < src_.size() &&
             std::isalnum(static_cast<unsigned char>(src_[end])))
        ++end;
      const std::string tok(src_.substr(pos_, end - pos_));
      Value v = 0;
      try {
        std::size_t used = 0;
        v = std::stoull(tok, &used, 0);
        if (used != tok.size()) fail("bad number '" + tok + "'");
      } catch (const std::logic_error&) {
        fail("bad number '" + tok + "'");
      }
      pos_ = end;
      return Expr::constant(v);
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      const std::string name(src_.substr(start, pos_ - start));
      bool size_suffix = false;
      if (src_.substr(pos_, 5) == ".size") {
        size_suffix = true;
        pos_ += 5;
      }
      if (name == "secret" && !size_suffix)
        return Expr::constant(prog_.secret_addr, "secret");
      for (const auto& r : prog_.layout) {
        if (r.name != name) continue;
        if (size_suffix) return Expr::constant(r.extent, name + ".size");
        return Expr::constant(r.base, name);
      }
      if (size_suffix) fail("unknown array '" + name + "'", ErrorKind::UndefinedName);
      if (!is_register_name(name) && !regs_.count(name)) {
        pos_ = start;
        fail("unknown register '" + name + "'", ErrorKind::UnknownRegister);
      }
      used_registers.insert(name);
      return Expr::registr(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
  int col0_;
  const Program& prog_;
  const std::set<std::string>& regs_;
};

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline Value parse_number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const Value v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::Syntax, "expected a number, got '" + s + "'", line);
}

inline Region parse_region(const std::string& tok, bool input, int line) {
  // NAME[N]@ADDR[=INIT] or NAME@ADDR[=INIT]
  Region r;
  r.input = input;
  const auto at = tok.find('@');
  if (at == std::string::npos)
    throw Error(ErrorKind::Syntax, "layout entry '" + tok + "' lacks '@'", line);
  std::string head = tok.substr(0, at);
  std::string tail = tok.substr(at + 1);
  if (const auto eq = tail.find('='); eq != std::string::npos) {
    r.init = parse_number(tail.substr(eq + 1), line);
    tail = tail.substr(0, eq);
  }
  r.base = parse_number(tail, line);
  if (const auto lb = head.find('['); lb != std::string::npos) {
    const auto rb = head.find(']', lb);
    if (rb == std::string::npos || rb != head.size() - 1)
      throw Error(ErrorKind::Syntax, "bad extent in '" + tok + "'", line);
    r.extent = parse_number(head.substr(lb + 1, rb - lb - 1), line);
    head = head.substr(0, lb);
    if (r.extent == 0)
      throw Error(ErrorKind::Syntax, "empty region '" + head + "'", line);
  }
  if (head.empty() || !is_ident_start(head[0]))
    throw Error(ErrorKind::Syntax, "bad region name in '" + tok + "'", line);
  r.name = head;
  return r;
}

}  // namespace detail

/// Parses a litmus file. See README for the format.
inline Program parse_program(std::string_view text) {
  Program prog;
  bool have_secret = false;
  std::set<std::string> declared_regs;

  struct PendingInstr {
    Label label;
    std::string body;
    int line;
    int col;
  };
  std::vector<std::vector<PendingInstr>> pending;
  int current_thread = -1;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto words = detail::split_ws(line);
    const std::string& head = words.front();

    if (head == "layout") {
      bool input_next = false;
      for (std::size_t i = 1; i < words.size(); ++i) {
        if (words[i] == "input") {
          input_next = true;
          continue;
        }
        Region r = detail::parse_region(words[i], input_next, lineno);
        input_next = false;
        if (r.name == "secret") {
          if (r.extent != 1)
            throw Error(ErrorKind::Syntax, "secret must be a single address", lineno);
          prog.secret_addr = r.base;
          have_secret = true;
          continue;
        }
        for (const auto& other : prog.layout)
          if (other.name == r.name)
            throw Error(ErrorKind::DuplicateDefinition,
                        "region '" + r.name + "' declared twice", lineno);
        prog.layout.push_back(std::move(r));
      }
      if (input_next)
        throw Error(ErrorKind::Syntax, "'input' must precede a location", lineno);
      continue;
    }
    if (head == "regs") {
      for (std::size_t i = 1; i < words.size(); ++i) declared_regs.insert(words[i]);
      continue;
    }
    if (head == "thread") {
      if (words.size() != 2 || words[1].empty() || words[1].back() != ':')
        throw Error(ErrorKind::Syntax, "expected 'thread N:'", lineno);
      const Value id = detail::parse_number(words[1].substr(0, words[1].size() - 1), lineno);
      if (id != pending.size())
        throw Error(ErrorKind::Syntax, "thread ids must be contiguous from 0", lineno);
      pending.emplace_back();
      current_thread = static_cast<int>(id);
      continue;
    }
    if (head == "expect") {
      if (words.size() < 2 ||
          (words[1] != "safe" && words[1] != "unsafe" && words[1] != "unknown"))
        throw Error(ErrorKind::Syntax, "expected 'expect safe|unsafe|unknown ...'", lineno);
      Expectation ex;
      ex.outcome = words[1];
      for (std::size_t i = 2; i < words.size(); ++i) {
        const auto eq = words[i].find('=');
        if (eq == std::string::npos)
          throw Error(ErrorKind::Syntax, "expected key=value in trailer", lineno);
        const std::string key = words[i].substr(0, eq);
        const std::string val = words[i].substr(eq + 1);
        if (key == "model") ex.model = val;
        else ex.params[key] = val;
      }
      if (ex.model.empty())
        throw Error(ErrorKind::Syntax, "expect trailer needs model=<name>", lineno);
      prog.expectations.push_back(std::move(ex));
      continue;
    }

    // Numbered instruction "L: stmt".
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::Syntax, "expected 'LABEL: statement'", lineno);
    const std::string lab = detail::trim(line.substr(0, colon));
    if (lab.empty() || !std::all_of(lab.begin(), lab.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        }))
      throw Error(ErrorKind::Syntax, "bad label '" + lab + "'", lineno);
    if (current_thread < 0) {
      pending.emplace_back();
      current_thread = 0;
    }
    const auto body_start = raw.find(':') + 1;
    pending[current_thread].push_back(
        {static_cast<Label>(detail::parse_number(lab, lineno)),
         detail::trim(line.substr(colon + 1)), lineno,
         static_cast<int>(body_start) + 1});
  }

  if (!have_secret)
    throw Error(ErrorKind::Syntax, "layout must declare secret@ADDR");
  if (pending.empty()) pending.emplace_back();

  // Layout validation: regions pairwise disjoint, secret outside all of them.
  for (std::size_t i = 0; i < prog.layout.size(); ++i) {
    const Region& a = prog.layout[i];
    if (a.contains(prog.secret_addr))
      throw Error(ErrorKind::OverlappingLayout,
                  "secret address lies inside region '" + a.name + "'");
    for (std::size_t j = i + 1; j < prog.layout.size(); ++j) {
      const Region& b = prog.layout[j];
      if (a.base < b.base + b.extent && b.base < a.base + a.extent)
        throw Error(ErrorKind::OverlappingLayout,
                    "regions '" + a.name + "' and '" + b.name + "' overlap");
    }
  }

  for (std::size_t t = 0; t < pending.size(); ++t) {
    Thread thread;
    thread.id = static_cast<ThreadId>(t);
    std::set<Label> seen;
    for (const auto& pi : pending[t]) {
      if (!seen.insert(pi.label).second)
        throw Error(ErrorKind::DuplicateLabel,
                    "label " + std::to_string(pi.label) + " used twice", pi.line);
      if (!thread.code.empty() && pi.label != thread.code.back().label + 1)
        throw Error(ErrorKind::Syntax, "labels must be consecutive", pi.line);

      Instruction ins;
      ins.label = pi.label;
      ins.thread = thread.id;
      ins.text = pi.body;
      ins.origin = {pi.label, 1};
      Stmt& s = ins.stmt;
      const std::string& body = pi.body;

      auto parse_expr = [&](std::string_view src, std::size_t offset) {
        detail::ExprParser p(src, pi.line, pi.col + static_cast<int>(offset),
                             prog, declared_regs);
        ExprPtr e = p.parse_all();
        prog.registers.insert(p.used_registers.begin(), p.used_registers.end());
        return e;
      };
      auto parse_reg = [&](const std::string& name) {
        if (!detail::is_register_name(name) && !declared_regs.count(name))
          throw Error(ErrorKind::UnknownRegister,
                      "unknown register '" + name + "'", pi.line);
        prog.registers.insert(name);
        return name;
      };
      auto keyword = [&](std::string_view kw) {
        return body.size() >= kw.size() && body.compare(0, kw.size(), kw) == 0 &&
               (body.size() == kw.size() ||
                std::isspace(static_cast<unsigned char>(body[kw.size()])));
      };
      auto split_comma = [&](std::size_t from) {
        const auto comma = body.find(',', from);
        if (comma == std::string::npos)
          throw Error(ErrorKind::Syntax, "expected ','", pi.line);
        return comma;
      };

      if (body == "skip") {
        s.kind = Stmt::Kind::Skip;
      } else if (body == "fence") {
        s.kind = Stmt::Kind::Fence;
      } else if (keyword("jmp")) {
        s.kind = Stmt::Kind::Jmp;
        s.target = static_cast<Label>(detail::parse_number(detail::trim(body.substr(3)), pi.line));
      } else if (keyword("beqz")) {
        s.kind = Stmt::Kind::Beqz;
        const auto comma = split_comma(4);
        s.reg = parse_reg(detail::trim(body.substr(4, comma - 4)));
        s.target = static_cast<Label>(
            detail::parse_number(detail::trim(body.substr(comma + 1)), pi.line));
      } else if (keyword("load")) {
        s.kind = Stmt::Kind::Load;
        const auto comma = split_comma(4);
        s.reg = parse_reg(detail::trim(body.substr(4, comma - 4)));
        s.expr = parse_expr(std::string_view(body).substr(comma + 1), comma + 1);
      } else if (keyword("store")) {
        s.kind = Stmt::Kind::Store;
        const auto comma = split_comma(5);
        s.expr = parse_expr(std::string_view(body).substr(5, comma - 5), 5);
        s.value = parse_expr(std::string_view(body).substr(comma + 1), comma + 1);
      } else {
        // r <- e, r ← e, or r <-(c?) e
        std::size_t arrow = body.find("<-");
        std::size_t arrow_len = 2;
        if (arrow == std::string::npos) {
          arrow = body.find("\xE2\x86\x90");  // ←
          arrow_len = 3;
        }
        if (arrow == std::string::npos)
          throw Error(ErrorKind::Syntax, "unknown statement '" + body + "'", pi.line);
        s.reg = parse_reg(detail::trim(body.substr(0, arrow)));
        std::size_t rest = arrow + arrow_len;
        while (rest < body.size() && std::isspace(static_cast<unsigned char>(body[rest]))) ++rest;
        s.kind = Stmt::Kind::Assign;
        if (rest < body.size() && body[rest] == '(') {
          int depth = 0;
          std::size_t close = rest;
          for (; close < body.size(); ++close) {
            if (body[close] == '(') ++depth;
            if (body[close] == ')' && --depth == 0) break;
          }
          if (close < body.size() && close > rest + 1 && body[close - 1] == '?') {
            s.kind = Stmt::Kind::CondAssign;
            s.cond = parse_expr(std::string_view(body).substr(rest + 1, close - rest - 2),
                                rest + 1);
            rest = close + 1;
          }
        }
        s.expr = parse_expr(std::string_view(body).substr(rest), rest);
      }
      thread.code.push_back(std::move(ins));
    }
    for (const auto& ins : thread.code)
      if (ins.stmt.is_jump() && !thread.has_label(ins.stmt.target))
        throw Error(ErrorKind::UndefinedJumpTarget,
                    "label " + std::to_string(ins.stmt.target) + " does not exist in thread " +
                        std::to_string(thread.id),
                    pending[t][ins.label - thread.first_label()].line);
    prog.threads.push_back(std::move(thread));
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Static control flow

/// Static predecessors of `l` in thread `t`: the textual predecessor unless it
/// is a direct jump, plus every jump targeting `l`.
inline std::set<Label> pred(const Program& p, ThreadId t, Label l) {
  if (t >= p.threads.size())
    throw Error(ErrorKind::UnknownLabel, "no thread " + std::to_string(t));
  const Thread& th = p.threads[t];
  if (!th.has_label(l))
    throw Error(ErrorKind::UnknownLabel, "no label " + std::to_string(l) +
                                             " in thread " + std::to_string(t));
  std::set<Label> out;
  for (const auto& ins : th.code) {
    const Stmt& s = ins.stmt;
    if (ins.label + 1 == l && s.kind != Stmt::Kind::Jmp) out.insert(ins.label);
    if (s.is_jump() && s.target == l) out.insert(ins.label);
  }
  return out;
}

/// Control-flow successors of an instruction within its thread.
inline std::vector<Label> successors(const Thread& th, const Instruction& ins) {
  std::vector<Label> out;
  const bool falls = ins.stmt.kind != Stmt::Kind::Jmp;
  if (falls && th.has_label(ins.label + 1)) out.push_back(ins.label + 1);
  if (ins.stmt.is_jump() &&
      std::find(out.begin(), out.end(), ins.stmt.target) == out.end())
    out.push_back(ins.stmt.target);
  return out;
}

inline bool has_backward_jump(const Thread& th) {
  return std::any_of(th.code.begin(), th.code.end(), [](const Instruction& i) {
    return i.stmt.is_jump() && i.stmt.target <= i.label;
  });
}

/// Removes backward jumps by laying out `k` copies of each looping thread.
///
/// Back edges in copy i jump to copy i+1; in the last copy they jump to an
/// unwind marker, and executions reaching a marker are outside the bound.
/// Threads without backward jumps are returned unchanged.
inline Program unroll(const Program& p, unsigned k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "unroll bound must be >= 1");
  Program out = p;
  out.threads.clear();
  for (const Thread& th : p.threads) {
    if (!has_backward_jump(th)) {
      out.threads.push_back(th);
      continue;
    }
    const std::size_t n = th.code.size();
    const std::size_t copy_len = n + 1;
    const std::size_t marker = k * copy_len;
    const std::size_t end = marker + 1;
    std::vector<Instruction> flat(end + 1);
    std::vector<std::size_t> target(end + 1, SIZE_MAX);
    const Label base = th.first_label();

    for (unsigned c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        Instruction ins = th.code[i];
        ins.origin = {th.code[i].origin.label, c + 1};
        const std::size_t at = c * copy_len + i;
        if (ins.stmt.is_jump()) {
          const std::size_t t = ins.stmt.target - base;
          if (t > i) target[at] = c * copy_len + t;
          else target[at] = (c + 1 < k) ? (c + 1) * copy_len + t : marker;
        }
        flat[at] = std::move(ins);
      }
      Instruction exit;
      exit.stmt.kind = Stmt::Kind::Jmp;
      exit.text = "jmp <exit>";
      exit.thread = th.id;
      flat[c * copy_len + n] = exit;
      target[c * copy_len + n] = end;
    }
    flat[marker].stmt.kind = Stmt::Kind::Skip;
    flat[marker].text = "skip <unwind>";
    flat[marker].thread = th.id;
    flat[marker].unwind_marker = true;
    flat[end].stmt.kind = Stmt::Kind::Skip;
    flat[end].text = "skip <exit>";
    flat[end].thread = th.id;

    // Keep only instructions reachable from the entry.
    std::vector<bool> live(flat.size(), false);
    std::vector<std::size_t> work{0};
    while (!work.empty()) {
      const std::size_t i = work.back();
      work.pop_back();
      if (i >= flat.size() || live[i]) continue;
      live[i] = true;
      if (flat[i].stmt.kind != Stmt::Kind::Jmp) work.push_back(i + 1);
      if (flat[i].stmt.is_jump()) work.push_back(target[i]);
    }
    std::vector<Label> relabel(flat.size(), 0);
    Label next = 1;
    for (std::size_t i = 0; i < flat.size(); ++i)
      if (live[i]) relabel[i] = next++;

    Thread nt;
    nt.id = th.id;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (!live[i]) continue;
      Instruction ins = flat[i];
      ins.label = relabel[i];
      if (ins.stmt.is_jump()) ins.stmt.target = relabel[target[i]];
      if (ins.unwind_marker) out.incomplete = true;
      nt.code.push_back(std::move(ins));
    }
    out.threads.push_back(std::move(nt));
  }
  return out;
}

}  // namespace axcat

#endif  // AXCAT_MASM_HPP_
