#ifndef AXCAT_SMT_HPP_
#define AXCAT_SMT_HPP_

// SMT-LIB2 export of the isolation query. The formula is satisfiable iff the
// bounded program has a consistent execution in which some load reads from
// the secret's initial write.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "axcat/catlang.hpp"
#include "axcat/engine.hpp"
#include "axcat/error.hpp"
#include "axcat/masm.hpp"
#include "axcat/speculation.hpp"

namespace axcat {

namespace detail {

class SmtWriter {
 public:
  SmtWriter(const Program& p, const CatModel& m, const SpecConfig& cfg, unsigned k,
            unsigned bits)
      : p_(p), m_(m), cfg_(cfg), k_(k), bits_(bits) {}

  std::string run() {
    index_events();
    out_ << "; axcat isolation query\n";
    out_ << "; model " << m_.name << ", mode " << to_string(cfg_.mode) << ", k " << k_
         << ", w " << cfg_.window << ", w' " << cfg_.buffer << ", bits " << bits_ << "\n";
    out_ << "(set-logic ALL)\n";
    declarations();
    registers();
    control_flow();
    memory();
    reads_from();
    coherence();
    base_matrices();
    model();
    goal();
    out_ << "(check-sat)\n";
    return out_.str();
  }

 private:
  struct Node {
    bool init = false;
    ThreadId thread = 0;
    Label label = 0;
    Value addr = 0;  // init events only
    const Instruction* ins = nullptr;
    std::string tag;  // name suffix
  };
  using Mat = std::vector<std::string>;

  // -- naming ---------------------------------------------------------------

  static std::string quote(const std::string& s) { return "|" + s + "|"; }

  std::string bv(Value v) const {
    return "(_ bv" + std::to_string(v & domain_mask(bits_)) + " " + std::to_string(bits_) + ")";
  }
  std::string sort() const { return "(_ BitVec " + std::to_string(bits_) + ")"; }

  std::string x(std::size_t e) const { return nodes_[e].init ? "true" : "x" + nodes_[e].tag; }
  std::string tr(std::size_t e) const { return nodes_[e].init ? "false" : "tr" + nodes_[e].tag; }
  std::string cp(std::size_t e) const {
    return cfg_.mode == Mode::Speculative && cfg_.always_mispredict ? "cp" + nodes_[e].tag
                                                                    : "true";
  }
  std::string tk(std::size_t e) const { return "tk" + nodes_[e].tag; }
  std::string addr(std::size_t e) const { return nodes_[e].init ? bv(nodes_[e].addr) : "a" + nodes_[e].tag; }
  std::string val(std::size_t e) const { return "v" + nodes_[e].tag; }
  std::string reg(std::size_t e, const std::string& r) const { return quote("r" + nodes_[e].tag + "_" + r); }

  std::size_t ev(ThreadId t, Label l) const { return offset_[t] + (l - p_.threads[t].first_label()); }

  bool is_load(std::size_t e) const {
    return !nodes_[e].init && nodes_[e].ins->stmt.kind == Stmt::Kind::Load;
  }
  bool is_pstore(std::size_t e) const {
    return !nodes_[e].init && nodes_[e].ins->stmt.kind == Stmt::Kind::Store;
  }
  bool is_store(std::size_t e) const { return nodes_[e].init || is_pstore(e); }
  bool is_mem(std::size_t e) const { return is_load(e) || is_store(e); }
  const Stmt& stmt(std::size_t e) const { return nodes_[e].ins->stmt; }

  // -- formula helpers --------------------------------------------------------

  static std::string mk_and(const std::vector<std::string>& xs) {
    std::vector<std::string> keep;
    for (const auto& s : xs) {
      if (s == "false") return "false";
      if (s != "true") keep.push_back(s);
    }
    if (keep.empty()) return "true";
    if (keep.size() == 1) return keep[0];
    std::string r = "(and";
    for (const auto& s : keep) r += " " + s;
    return r + ")";
  }
  static std::string mk_or(const std::vector<std::string>& xs) {
    std::vector<std::string> keep;
    for (const auto& s : xs) {
      if (s == "true") return "true";
      if (s != "false") keep.push_back(s);
    }
    if (keep.empty()) return "false";
    if (keep.size() == 1) return keep[0];
    std::string r = "(or";
    for (const auto& s : keep) r += " " + s;
    return r + ")";
  }
  static std::string mk_not(const std::string& s) {
    if (s == "true") return "false";
    if (s == "false") return "true";
    return "(not " + s + ")";
  }
  static std::string mk_implies(const std::string& a, const std::string& b) {
    if (a == "false" || b == "true") return "true";
    if (a == "true") return b;
    return "(=> " + a + " " + b + ")";
  }

  void declare(const std::string& name, const std::string& sort) {
    out_ << "(declare-fun " << name << " () " << sort << ")\n";
  }
  void define(const std::string& name, const std::string& sort, const std::string& body) {
    out_ << "(define-fun " << name << " () " << sort << " " << body << ")\n";
  }
  void assert_(const std::string& f) {
    if (f == "true") return;
    out_ << "(assert " << f << ")\n";
  }

  // -- events -----------------------------------------------------------------

  void index_events() {
    for (const Thread& th : p_.threads) {
      offset_.push_back(nodes_.size());
      for (const Instruction& ins : th.code) {
        Node n;
        n.thread = th.id;
        n.label = ins.label;
        n.ins = &ins;
        n.tag = "_" + std::to_string(th.id) + "_" + std::to_string(ins.label);
        nodes_.push_back(n);
      }
    }
    program_nodes_ = nodes_.size();
    for (Value a = 0; a <= domain_mask(bits_); ++a) {
      Node n;
      n.init = true;
      n.addr = a;
      n.tag = "_i" + std::to_string(a);
      nodes_.push_back(n);
    }
  }

  // Static edge p -> l as taken on the path.
  std::string edge(std::size_t pe, Label l) const {
    const Stmt& s = stmt(pe);
    const Label pl = nodes_[pe].label;
    if (s.kind == Stmt::Kind::Jmp) return s.target == l ? "true" : "false";
    if (s.kind == Stmt::Kind::Beqz)
      return mk_or({pl + 1 == l ? mk_not(tk(pe)) : "false", s.target == l ? tk(pe) : "false"});
    return pl + 1 == l ? "true" : "false";
  }

  std::string nonzero(std::size_t e) const {
    return "(not (= " + in_reg(e, stmt(e).reg) + " " + bv(0) + "))";
  }

  void declarations() {
    const bool spec = cfg_.mode == Mode::Speculative;
    for (std::size_t e = 0; e < program_nodes_; ++e) {
      declare(x(e), "Bool");
      declare(tr(e), "Bool");
      if (stmt(e).kind == Stmt::Kind::Beqz) {
        declare(tk(e), "Bool");
        if (cp(e) != "true") declare(cp(e), "Bool");
      }
      if (spec) declare("n" + nodes_[e].tag, "Int");
    }
  }

  void control_flow() {
    out_ << "; control flow\n";
    const bool spec = cfg_.mode == Mode::Speculative;
    for (const Thread& th : p_.threads) {
      for (const Instruction& ins : th.code) {
        const std::size_t e = ev(th.id, ins.label);
        if (ins.label == th.first_label()) {
          assert_(x(e));
          assert_(mk_not(tr(e)));
          if (spec) assert_("(= n" + nodes_[e].tag + " 0)");
        } else {
          std::vector<std::string> reach, trans;
          for (Label pl : pred(p_, th.id, ins.label)) {
            const std::size_t pe = ev(th.id, pl);
            const std::string on = mk_and({x(pe), edge(pe, ins.label)});
            reach.push_back(on);
            const std::string opens =
                stmt(pe).kind == Stmt::Kind::Beqz ? mk_not(cp(pe)) : "false";
            trans.push_back(mk_and({on, mk_or({tr(pe), opens})}));
            if (spec)
              assert_(mk_implies(mk_and({on, x(e)}),
                                 "(= n" + nodes_[e].tag + " (ite " + tr(e) + " (+ n" +
                                     nodes_[pe].tag + " 1) 0))"));
          }
          assert_("(= " + x(e) + " " + mk_or(reach) + ")");
          assert_("(= " + tr(e) + " " + mk_and({x(e), mk_or(trans)}) + ")");
          // Dependency check against executed static predecessors.
          std::vector<std::string> holds;
          for (Label pl : pred(p_, th.id, ins.label)) {
            const std::size_t pe = ev(th.id, pl);
            holds.push_back(mk_and({x(pe), dependency(pe, ins.label, e)}));
          }
          assert_(mk_implies(x(e), mk_or(holds)));
        }
        if (ins.stmt.kind == Stmt::Kind::Fence) assert_(mk_implies(x(e), mk_not(tr(e))));
        if (ins.unwind_marker) assert_(mk_not(x(e)));
        if (spec)
          assert_(mk_implies(x(e), "(< n" + nodes_[e].tag + " " + std::to_string(cfg_.window) + ")"));
      }
    }
  }

  std::string dependency(std::size_t pe, Label l, std::size_t e) const {
    const Stmt& s = stmt(pe);
    const Label pl = nodes_[pe].label;
    const bool spec = cfg_.mode == Mode::Speculative;
    if (s.kind != Stmt::Kind::Beqz) {
      if (!spec) return "true";
      return "(ite " + tr(e) + " " + tr(pe) + " " + mk_not(tr(pe)) + ")";
    }
    const std::string nz = nonzero(pe), z = mk_not(nz);
    const std::string normal =
        mk_or({pl + 1 == l ? nz : "false", s.target == l ? z : "false"});
    if (!spec) return normal;
    const std::string specd =
        mk_or({pl + 1 == l ? z : "false", s.target == l ? nz : "false"});
    return "(ite " + tr(e) + " " + mk_and({mk_not(cp(pe)), specd}) + " " +
           mk_and({mk_not(tr(pe)), cp(pe), normal}) + ")";
  }

  // -- values -------------------------------------------------------------------

  std::string in_reg(std::size_t e, const std::string& r) const {
    if (!p_.registers.count(r)) return bv(0);
    const Node& n = nodes_[e];
    const Thread& th = p_.threads[n.thread];
    if (n.label == th.first_label()) return bv(0);
    std::string acc = bv(0);
    const auto ps = pred(p_, n.thread, n.label);
    for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
      const std::size_t pe = ev(n.thread, *it);
      acc = "(ite " + mk_and({x(pe), edge(pe, n.label)}) + " " + reg(pe, r) + " " + acc + ")";
    }
    return acc;
  }

  std::string expr(const Expr& ex, std::size_t e) const {
    using Op = Expr::Op;
    switch (ex.op) {
      case Op::Reg: return in_reg(e, ex.reg);
      case Op::Const: return bv(ex.value);
      default: break;
    }
    const std::string a = expr(*ex.lhs, e);
    auto flag = [&](const std::string& c) { return "(ite " + c + " " + bv(1) + " " + bv(0) + ")"; };
    switch (ex.op) {
      case Op::Neg: return "(bvneg " + a + ")";
      case Op::BitNot: return "(bvnot " + a + ")";
      case Op::LogNot: return flag("(= " + a + " " + bv(0) + ")");
      default: break;
    }
    const std::string b = expr(*ex.rhs, e);
    switch (ex.op) {
      case Op::Add: return "(bvadd " + a + " " + b + ")";
      case Op::Sub: return "(bvsub " + a + " " + b + ")";
      case Op::Mul: return "(bvmul " + a + " " + b + ")";
      case Op::And: return "(bvand " + a + " " + b + ")";
      case Op::Or: return "(bvor " + a + " " + b + ")";
      case Op::Xor: return "(bvxor " + a + " " + b + ")";
      case Op::Shl: return "(bvshl " + a + " " + b + ")";
      case Op::Shr: return "(bvlshr " + a + " " + b + ")";
      case Op::Lt: return flag("(bvult " + a + " " + b + ")");
      case Op::Le: return flag("(bvule " + a + " " + b + ")");
      case Op::Gt: return flag("(bvugt " + a + " " + b + ")");
      case Op::Ge: return flag("(bvuge " + a + " " + b + ")");
      case Op::Eq: return flag("(= " + a + " " + b + ")");
      case Op::Ne: return flag("(not (= " + a + " " + b + "))");
      default: return bv(0);
    }
  }

  void registers() {
    out_ << "; registers\n";
    for (std::size_t e = 0; e < program_nodes_; ++e) {
      const Stmt& s = stmt(e);
      for (const auto& r : p_.registers) {
        std::string body;
        if (s.writes_register() && s.reg == r) {
          if (s.kind == Stmt::Kind::Assign) body = expr(*s.expr, e);
          else if (s.kind == Stmt::Kind::CondAssign)
            body = "(ite (= " + expr(*s.cond, e) + " " + bv(0) + ") " + in_reg(e, r) + " " +
                   expr(*s.expr, e) + ")";
          else body = val(e);
        } else {
          body = in_reg(e, r);
        }
        if (s.kind == Stmt::Kind::Load && s.reg == r) declare(val(e), sort());
        define(reg(e, r), sort(), body);
      }
      if (s.kind == Stmt::Kind::Load && !p_.registers.count(s.reg)) declare(val(e), sort());
    }
  }

  void memory() {
    out_ << "; memory\n";
    for (std::size_t e = 0; e < program_nodes_; ++e) {
      const Stmt& s = stmt(e);
      if (s.kind == Stmt::Kind::Load || s.kind == Stmt::Kind::Store)
        define(addr(e), sort(), expr(*s.expr, e));
      if (s.kind == Stmt::Kind::Store) define(val(e), sort(), expr(*s.value, e));
    }
    const auto inputs = p_.input_locations();
    for (std::size_t e = program_nodes_; e < nodes_.size(); ++e) {
      const Value a = nodes_[e].addr;
      if (a == p_.secret_addr) {
        define(val(e), sort(), bv(secret_sentinel(bits_)));
      } else if (inputs.count(a)) {
        declare(val(e), sort());
      } else {
        const Region* r = p_.region_of(a);
        define(val(e), sort(), bv(r ? r->init : 0));
      }
    }
  }

  std::string src(std::size_t s, std::size_t l) const {
    return "rf" + nodes_[s].tag + "_" + nodes_[l].tag.substr(1);
  }

  void reads_from() {
    out_ << "; reads-from\n";
    for (std::size_t l = 0; l < program_nodes_; ++l) {
      if (!is_load(l)) continue;
      std::vector<std::string> vars;
      for (std::size_t s = 0; s < nodes_.size(); ++s) {
        if (!is_store(s)) continue;
        const std::string v = src(s, l);
        declare(v, "Bool");
        vars.push_back(v);
        sources_.push_back({s, l, v});
        std::vector<std::string> need{x(l), x(s), "(= " + val(l) + " " + val(s) + ")"};
        if (nodes_[s].init || !cfg_.psf) need.push_back("(= " + addr(l) + " " + addr(s) + ")");
        if (!nodes_[s].init) {
          const bool before =
              nodes_[s].thread == nodes_[l].thread && nodes_[s].label < nodes_[l].label;
          need.push_back(mk_or({mk_not(tr(s)), before ? tr(l) : "false"}));
        }
        assert_(mk_implies(v, mk_and(need)));
      }
      assert_(mk_implies(x(l), mk_or(vars)));
      for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
          assert_("(not (and " + vars[i] + " " + vars[j] + "))");
    }
  }

  void coherence() {
    out_ << "; coherence\n";
    co_.assign(nodes_.size() * nodes_.size(), "false");
    std::vector<std::size_t> st;
    for (std::size_t e = 0; e < program_nodes_; ++e)
      if (is_pstore(e)) {
        st.push_back(e);
        declare("o" + nodes_[e].tag, "Int");
      }
    auto live = [&](std::size_t e) { return mk_and({x(e), mk_not(tr(e))}); };
    for (std::size_t i = 0; i < st.size(); ++i) {
      for (std::size_t j = i + 1; j < st.size(); ++j) {
        const std::size_t a = st[i], b = st[j];
        const std::string same =
            mk_and({live(a), live(b), "(= " + addr(a) + " " + addr(b) + ")"});
        const std::string oa = "o" + nodes_[a].tag, ob = "o" + nodes_[b].tag;
        assert_(mk_implies(same, "(not (= " + oa + " " + ob + "))"));
        co_[a * nodes_.size() + b] = mk_and({same, "(< " + oa + " " + ob + ")"});
        co_[b * nodes_.size() + a] = mk_and({same, "(< " + ob + " " + oa + ")"});
      }
      for (std::size_t e = program_nodes_; e < nodes_.size(); ++e)
        co_[e * nodes_.size() + st[i]] =
            mk_and({live(st[i]), "(= " + addr(st[i]) + " " + addr(e) + ")"});
    }
  }

  // -- relations ---------------------------------------------------------------

  std::size_t n() const { return nodes_.size(); }

  Mat materialize(const Mat& m, const std::string& prefix) {
    Mat out = m;
    const std::string name = "R" + std::to_string(fresh_++) + "_" + prefix;
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) {
        std::string& cell = out[i * n() + j];
        if (cell == "true" || cell == "false") continue;
        const std::string id = quote(name + "_" + std::to_string(i) + "_" + std::to_string(j));
        define(id, "Bool", cell);
        cell = id;
      }
    return out;
  }

  void base_matrices() {
    out_ << "; base relations\n";
    const std::size_t N = n();
    Mat po(N * N, "false"), fence(N * N, "false"), addrm(N * N, "false"),
        loc(N * N, "false"), srcm(N * N, "false");
    for (std::size_t i = 0; i < program_nodes_; ++i) {
      for (std::size_t j = 0; j < program_nodes_; ++j) {
        if (nodes_[i].thread != nodes_[j].thread || nodes_[i].label >= nodes_[j].label) continue;
        po[i * N + j] = mk_and({x(i), x(j)});
        std::vector<std::string> fences, clear;
        for (std::size_t m = i + 1; m < j; ++m) {
          if (stmt(m).kind == Stmt::Kind::Fence) fences.push_back(x(m));
          if (is_load(i) && stmt(m).writes_register() && stmt(m).reg == stmt(i).reg)
            clear.push_back(mk_not(x(m)));
        }
        fence[i * N + j] = mk_and({po[i * N + j], mk_or(fences)});
        if (is_load(i) && is_mem(j) && uses_register(*stmt(j).expr, stmt(i).reg)) {
          clear.push_back(po[i * N + j]);
          addrm[i * N + j] = mk_and(clear);
        }
      }
    }
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        if (!is_mem(i) || !is_mem(j)) continue;
        if (nodes_[i].init && nodes_[j].init)
          loc[i * N + j] = nodes_[i].addr == nodes_[j].addr ? "true" : "false";
        else
          loc[i * N + j] = mk_and({x(i), x(j), "(= " + addr(i) + " " + addr(j) + ")"});
      }
    for (const auto& s : sources_) srcm[s.store * N + s.load] = s.var;

    base_["po"] = materialize(po, "po");
    base_["fence"] = materialize(fence, "fence");
    base_["addr"] = materialize(addrm, "addr");
    base_["loc"] = materialize(loc, "loc");
    base_["add"] = base_["loc"];
    Mat rf(N * N, "false"), srf(N * N, "false"), rfe(N * N, "false");
    for (std::size_t i = 0; i < N * N; ++i) {
      if (cfg_.psf) {
        srf[i] = srcm[i];
        rf[i] = mk_and({srcm[i], base_["loc"][i]});
      } else {
        rf[i] = srcm[i];
      }
    }
    base_["rf"] = materialize(rf, "rf");
    base_["srf"] = srf;
    for (std::size_t i = 0; i < program_nodes_; ++i)
      for (std::size_t j = 0; j < program_nodes_; ++j)
        if (nodes_[i].thread != nodes_[j].thread) rfe[i * N + j] = base_["rf"][i * N + j];
    base_["rfe"] = rfe;
    base_["co"] = materialize(co_, "co");
    if (cfg_.psf)
      for (std::size_t i = 0; i < N * N; ++i)
        assert_(mk_implies(mk_and({srf[i], base_["fence"][i]}), base_["loc"][i]));
  }

  std::string in_set(const std::string& s, std::size_t e) const {
    if (s == "E") return x(e);
    if (s == "M") return is_mem(e) ? x(e) : "false";
    if (s == "R") return is_load(e) ? x(e) : "false";
    return is_store(e) ? x(e) : "false";
  }

  Mat compose(const Mat& a, const Mat& b) {
    const std::size_t N = n();
    Mat out(N * N, "false");
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        std::vector<std::string> terms;
        for (std::size_t m = 0; m < N; ++m) {
          const std::string& l = a[i * N + m];
          const std::string& r = b[m * N + j];
          if (l == "false" || r == "false") continue;
          terms.push_back(mk_and({l, r}));
        }
        out[i * N + j] = mk_or(terms);
      }
    return materialize(out, "seq");
  }

  Mat pointwise(const Mat& a, const Mat& b, CatTerm::Kind k) {
    Mat out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (k == CatTerm::Kind::Union) out[i] = mk_or({a[i], b[i]});
      else if (k == CatTerm::Kind::Intersection) out[i] = mk_and({a[i], b[i]});
      else out[i] = mk_and({a[i], mk_not(b[i])});
    }
    return materialize(out, "op");
  }

  Mat closure(Mat r) {
    std::size_t steps = 1;
    while ((std::size_t{1} << steps) < n()) ++steps;
    for (std::size_t s = 0; s < steps; ++s) r = pointwise(r, compose(r, r), CatTerm::Kind::Union);
    return r;
  }

  Mat term(const CatTerm& t, const std::map<std::string, Mat>& env) {
    const std::size_t N = n();
    switch (t.kind) {
      case CatTerm::Kind::Base: return base_.at(t.name);
      case CatTerm::Kind::Identity: {
        Mat out(N * N, "false");
        for (std::size_t i = 0; i < N; ++i) out[i * N + i] = in_set(t.name, i);
        return out;
      }
      case CatTerm::Kind::Product: {
        Mat out(N * N, "false");
        for (std::size_t i = 0; i < N; ++i)
          for (std::size_t j = 0; j < N; ++j)
            out[i * N + j] = mk_and({in_set(t.name, i), in_set(t.name2, j)});
        return out;
      }
      case CatTerm::Kind::Name: {
        auto it = env.find(t.name);
        return it == env.end() ? Mat(N * N, "false") : it->second;
      }
      case CatTerm::Kind::Union:
      case CatTerm::Kind::Intersection:
      case CatTerm::Kind::Difference:
        return pointwise(term(*t.lhs, env), term(*t.rhs, env), t.kind);
      case CatTerm::Kind::Sequence: return compose(term(*t.lhs, env), term(*t.rhs, env));
      case CatTerm::Kind::Inverse: {
        const Mat a = term(*t.lhs, env);
        Mat out(N * N);
        for (std::size_t i = 0; i < N; ++i)
          for (std::size_t j = 0; j < N; ++j) out[i * N + j] = a[j * N + i];
        return out;
      }
      case CatTerm::Kind::Plus: return closure(term(*t.lhs, env));
      case CatTerm::Kind::Star: {
        Mat out = closure(term(*t.lhs, env));
        for (std::size_t i = 0; i < N; ++i) out[i * N + i] = mk_or({out[i * N + i], x(i)});
        return materialize(out, "star");
      }
      case CatTerm::Kind::Bounded: {
        const long k = t.bound.resolve(cfg_);
        if (k < 0) throw Error(ErrorKind::InvalidArgument, "bounded composition needs k >= 0");
        const Mat r = term(*t.lhs, env);
        Mat out = r;
        for (long i = 0; i < k; ++i) out = compose(r, out);
        return out;
      }
    }
    return Mat(N * N, "false");
  }

  void model() {
    out_ << "; model " << m_.name << "\n";
    std::map<std::string, Mat> env;
    const std::size_t N = n();
    for (const auto& scc : definition_sccs(m_)) {
      if (!is_recursive(m_, scc)) {
        const auto& d = m_.definitions[scc[0]];
        out_ << "; " << d.name << "\n";
        env[d.name] = term(*d.term, env);
        continue;
      }
      for (auto i : scc) env[m_.definitions[i].name] = Mat(N * N, "false");
      const std::size_t rounds = N * N * scc.size();
      for (std::size_t r = 0; r < rounds; ++r) {
        std::map<std::string, Mat> next = env;
        for (auto i : scc) next[m_.definitions[i].name] = term(*m_.definitions[i].term, env);
        env = std::move(next);
      }
    }
    for (std::size_t a = 0; a < m_.assertions.size(); ++a) {
      const auto& as = m_.assertions[a];
      out_ << "; " << to_string(as.kind) << " " << as.text << "\n";
      const Mat r = term(*as.term, env);
      switch (as.kind) {
        case AssertionKind::Acyclic: {
          const std::string ord = "c" + std::to_string(a) + "_";
          for (std::size_t i = 0; i < N; ++i) declare(ord + std::to_string(i), "Int");
          for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
              assert_(mk_implies(r[i * N + j], "(< " + ord + std::to_string(i) + " " + ord +
                                                   std::to_string(j) + ")"));
          break;
        }
        case AssertionKind::Irreflexive:
          for (std::size_t i = 0; i < N; ++i) assert_(mk_not(r[i * N + i]));
          break;
        case AssertionKind::Empty:
          for (const auto& c : r) assert_(mk_not(c));
          break;
      }
    }
  }

  void goal() {
    out_ << "; goal: a load reads the secret's initial write\n";
    std::vector<std::string> hits;
    for (const auto& s : sources_)
      if (nodes_[s.store].init && nodes_[s.store].addr == p_.secret_addr) hits.push_back(s.var);
    out_ << "(assert " << mk_or(hits) << ")\n";
  }

  struct Source {
    std::size_t store, load;
    std::string var;
  };

  const Program& p_;
  const CatModel& m_;
  SpecConfig cfg_;
  unsigned k_;
  unsigned bits_;
  std::ostringstream out_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> offset_;
  std::size_t program_nodes_ = 0;
  std::vector<Source> sources_;
  Mat co_;
  std::map<std::string, Mat> base_;
  std::size_t fresh_ = 0;
};

}  // namespace detail

/// SMT-LIB2 text over booleans, bit-vectors of width `bits`, and integers.
/// Satisfiable iff check_isolation reports Unsafe for the same arguments.
inline std::string emit_smt(const Program& p, const CatModel& m, const SpecConfig& cfg,
                            unsigned k, unsigned bits = 3) {
  cfg.validate();
  if (m.uses("srf") && !cfg.psf)
    throw Error(ErrorKind::ConfigMismatch,
                "model '" + m.name + "' uses srf but predictive forwarding is disabled");
  const Program unrolled = unroll(p, k);
  detail::validate_domain(unrolled, bits);
  return detail::SmtWriter(unrolled, m, cfg, k, bits).run();
}

}  // namespace axcat

#endif  // AXCAT_SMT_HPP_
