#ifndef AXCAT_EVENTS_HPP_
#define AXCAT_EVENTS_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "axcat/error.hpp"
#include "axcat/masm.hpp"
#include "axcat/relation.hpp"

namespace axcat {

enum class EventKind {
  Init,
  SecretInit,
  Load,
  Store,
  Local,
  CondLocal,
  Jump,
  CondJump,
  Fence,
  Skip,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Init: return "init";
    case EventKind::SecretInit: return "secret-init";
    case EventKind::Load: return "load";
    case EventKind::Store: return "store";
    case EventKind::Local: return "local";
    case EventKind::CondLocal: return "cond-local";
    case EventKind::Jump: return "jump";
    case EventKind::CondJump: return "cond-jump";
    case EventKind::Fence: return "fence";
    case EventKind::Skip: return "skip";
  }
  return "?";
}

inline EventKind event_kind(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Assign: return EventKind::Local;
    case Stmt::Kind::CondAssign: return EventKind::CondLocal;
    case Stmt::Kind::Load: return EventKind::Load;
    case Stmt::Kind::Store: return EventKind::Store;
    case Stmt::Kind::Jmp: return EventKind::Jump;
    case Stmt::Kind::Beqz: return EventKind::CondJump;
    case Stmt::Kind::Fence: return EventKind::Fence;
    case Stmt::Kind::Skip: return EventKind::Skip;
  }
  return EventKind::Skip;
}

inline constexpr ThreadId kNoThread = std::numeric_limits<ThreadId>::max();

/// Marks a load whose value comes from the initial write of its own address.
inline constexpr EventId kFromInit = std::numeric_limits<EventId>::max();

struct Event {
  EventId id = 0;
  EventKind kind = EventKind::Skip;
  ThreadId thread = kNoThread;
  Label label = 0;
  std::uint32_t instance = 0;       // unrolling copy the label came from
  const Instruction* instr = nullptr;  // null for init events
  std::optional<Value> addr;
  std::optional<Value> val;         // rval: loaded/stored/assigned/tested value
  std::optional<bool> cp;           // cond-jump only: prediction was correct
  bool taken = false;               // cond-jump only: path continues at target
  bool transient = false;

  bool is_init() const {
    return kind == EventKind::Init || kind == EventKind::SecretInit;
  }
  bool is_load() const { return kind == EventKind::Load; }
  bool is_store() const {
    return kind == EventKind::Store || is_init();
  }
  bool is_memory() const { return is_load() || is_store(); }
};

/// Choices that fix one thread's path: for each conditional jump met along
/// the path, in order, whether it was taken and whether cp holds.
struct PathChoice {
  std::vector<bool> taken;
  std::vector<bool> cp;
  friend bool operator==(const PathChoice&, const PathChoice&) = default;
};

struct BaseRelations {
  EventSet E, M, W, R;
  Relation po, fence, addr, loc, rf, co, rfe, srf;
};

/// One candidate execution: events, the committed/transient split, the
/// reads-from choices, initial memory, coherence order, and (once computed)
/// the valuation.
struct CandidateExecution {
  std::shared_ptr<const Program> program;
  unsigned bits = 3;
  bool psf = false;

  std::vector<Event> events;
  std::size_t program_events = 0;                  // ids [0, program_events)
  std::vector<std::vector<EventId>> thread_order;  // po sequence per thread

  // Value source per load id (kFromInit or a store id). Under PSF this is srf.
  std::map<EventId, EventId> reads;
  std::map<Value, Value> inputs;  // chosen initial values of input addresses
  std::map<Value, std::vector<EventId>> co_order;  // committed stores per address

  bool fence_transient = false;  // flagged by build_events
  bool reaches_unwind = false;   // path hits an unwind marker
  bool valued = false;           // propagate_values applied, inits materialized

  EventSet committed;
  EventSet transient;

  std::size_t size() const { return events.size(); }
  const Event& operator[](EventId e) const { return events[e]; }

  std::vector<EventId> loads() const {
    std::vector<EventId> out;
    for (EventId e = 0; e < program_events; ++e)
      if (events[e].is_load()) out.push_back(e);
    return out;
  }
  std::vector<EventId> stores() const {
    std::vector<EventId> out;
    for (EventId e = 0; e < program_events; ++e)
      if (events[e].kind == EventKind::Store) out.push_back(e);
    return out;
  }

  /// Event of `label` on `thread`'s path, if executed.
  std::optional<EventId> event_at(ThreadId thread, Label label) const {
    if (thread >= thread_order.size()) return std::nullopt;
    for (EventId e : thread_order[thread])
      if (events[e].label == label) return e;
    return std::nullopt;
  }

  std::optional<EventId> init_event(Value addr) const {
    for (EventId e = program_events; e < events.size(); ++e)
      if (events[e].addr == addr) return e;
    return std::nullopt;
  }

  /// Resolved value source of a load, after valuation.
  EventId source_of(EventId load) const {
    const EventId s = reads.at(load);
    if (s != kFromInit) return s;
    const auto init = init_event(*events[load].addr);
    return init ? *init : kFromInit;
  }
};

inline Value secret_sentinel(unsigned bits) { return domain_mask(bits); }

inline Value initial_value(const CandidateExecution& x, Value addr) {
  const Program& p = *x.program;
  if (addr == p.secret_addr) return secret_sentinel(x.bits);
  if (auto it = x.inputs.find(addr); it != x.inputs.end()) return it->second;
  if (const Region* r = p.region_of(addr)) return r->init & domain_mask(x.bits);
  return 0;
}

/// Builds the program events of the path selected by `choices` (one entry per
/// thread). Events after the first branch with cp = false are transient
/// unless `transient_override` supplies an explicit partition (one flag per
/// path event, per thread).
inline CandidateExecution build_events(
    std::shared_ptr<const Program> program, const std::vector<PathChoice>& choices,
    unsigned bits,
    const std::optional<std::vector<std::vector<bool>>>& transient_override = std::nullopt) {
  CandidateExecution x;
  x.program = program;
  x.bits = bits;
  const Program& p = *program;
  if (choices.size() != p.threads.size())
    throw Error(ErrorKind::InvalidArgument, "one path choice per thread required");
  x.thread_order.resize(p.threads.size());

  for (const Thread& th : p.threads) {
    if (th.empty()) continue;
    const PathChoice& pc = choices[th.id];
    std::size_t branch_idx = 0;
    bool transient = false;
    Label l = th.first_label();
    std::size_t pos = 0;
    while (th.has_label(l)) {
      const Instruction& ins = th.at(l);
      Event ev;
      ev.id = x.events.size();
      ev.kind = event_kind(ins.stmt);
      ev.thread = th.id;
      ev.label = l;
      ev.instance = ins.origin.iteration;
      ev.instr = &ins;
      if (transient_override) ev.transient = (*transient_override)[th.id].at(pos);
      else ev.transient = transient;
      if (ins.unwind_marker) x.reaches_unwind = true;
      if (ev.kind == EventKind::Fence && ev.transient) x.fence_transient = true;

      Label next = l + 1;
      if (ins.stmt.kind == Stmt::Kind::Jmp) {
        next = ins.stmt.target;
      } else if (ins.stmt.kind == Stmt::Kind::Beqz) {
        if (branch_idx >= pc.taken.size() || branch_idx >= pc.cp.size())
          throw Error(ErrorKind::InvalidArgument, "path choice too short");
        ev.taken = pc.taken[branch_idx];
        ev.cp = pc.cp[branch_idx];
        ++branch_idx;
        if (ev.taken) next = ins.stmt.target;
        if (!*ev.cp) transient = true;
      }
      x.thread_order[th.id].push_back(ev.id);
      x.events.push_back(ev);
      ++pos;
      l = next;
    }
  }
  x.program_events = x.events.size();
  return x;
}

struct Valuation {
  std::vector<std::optional<Value>> addr;
  std::vector<std::optional<Value>> val;
};

struct Propagation {
  enum class Status { Consistent, Inconsistent, Unresolved };
  Status status = Status::Consistent;
  Valuation valuation;
  std::vector<EventId> unresolved;  // loads caught in a value cycle
};

/// Computes register, address, and value slots for every program event.
///
/// Registers start at 0 and follow each thread's path; loads take the value
/// of their source. Loads whose value depends on itself through a reads-from
/// cycle are reported as unresolved unless `guesses` fixes them, in which
/// case the guess is checked against the source afterwards.
inline Propagation propagate_values(const CandidateExecution& x,
                                    const std::map<EventId, Value>& guesses = {}) {
  const Program& p = *x.program;
  const std::size_t n = x.program_events;
  Propagation out;
  Valuation& v = out.valuation;
  v.addr.assign(n, std::nullopt);
  v.val.assign(n, std::nullopt);

  const unsigned bits = x.bits;
  bool changed = true;
  std::size_t passes = 0;
  while (changed && passes++ <= n + 1) {
    changed = false;
    for (const auto& order : x.thread_order) {
      std::map<std::string, std::optional<Value>> regs;
      for (const auto& r : p.registers) regs[r] = Value{0};
      auto eval = [&](const Expr& e) -> std::optional<Value> {
        bool known = true;
        const Value res = evaluate(
            e,
            [&](const std::string& name) -> Value {
              auto it = regs.find(name);
              if (it == regs.end() || !it->second) {
                known = false;
                return 0;
              }
              return *it->second;
            },
            bits);
        if (!known) return std::nullopt;
        return res;
      };
      auto set = [&](std::optional<Value>& slot, std::optional<Value> value) {
        if (slot != value) {
          slot = value;
          changed = true;
        }
      };
      for (EventId e : order) {
        const Event& ev = x.events[e];
        const Stmt& s = ev.instr->stmt;
        switch (s.kind) {
          case Stmt::Kind::Assign: {
            auto r = eval(*s.expr);
            regs[s.reg] = r;
            set(v.val[e], r);
            break;
          }
          case Stmt::Kind::CondAssign: {
            auto c = eval(*s.cond);
            auto r = eval(*s.expr);
            std::optional<Value> res;
            if (c && *c == 0) res = regs[s.reg];
            else if (c) res = r;
            regs[s.reg] = res;
            set(v.val[e], res);
            break;
          }
          case Stmt::Kind::Load: {
            set(v.addr[e], eval(*s.expr));
            std::optional<Value> loaded;
            if (auto g = guesses.find(e); g != guesses.end()) {
              loaded = g->second & domain_mask(bits);
            } else {
              const EventId src = x.reads.at(e);
              if (src == kFromInit) {
                if (v.addr[e]) loaded = initial_value(x, *v.addr[e]);
              } else {
                loaded = v.val[src];
              }
            }
            regs[s.reg] = loaded;
            set(v.val[e], loaded);
            break;
          }
          case Stmt::Kind::Store:
            set(v.addr[e], eval(*s.expr));
            set(v.val[e], eval(*s.value));
            break;
          case Stmt::Kind::Beqz:
            set(v.val[e], regs.count(s.reg) ? regs[s.reg] : std::optional<Value>{0});
            break;
          default:
            break;
        }
      }
    }
  }

  // Reads-from consistency: same address (rf only) and same value. Pairs
  // whose slots are already known are checked even if others are not.
  bool consistent = true;
  for (const auto& [load, src] : x.reads) {
    const auto& a = v.addr[load];
    const auto& val = v.val[load];
    if (!a || !val) continue;
    if (src == kFromInit) {
      if (*val != initial_value(x, *a)) consistent = false;
      continue;
    }
    if (!x.psf && v.addr[src] && v.addr[src] != a) consistent = false;
    if (v.val[src] && v.val[src] != val) consistent = false;
  }
  if (!consistent) {
    out.status = Propagation::Status::Inconsistent;
    return out;
  }
  for (EventId e = 0; e < n; ++e)
    if (x.events[e].is_load() && !v.val[e]) out.unresolved.push_back(e);
  if (!out.unresolved.empty()) out.status = Propagation::Status::Unresolved;
  return out;
}

/// Writes a consistent valuation into `x`, then appends one init event per
/// declared or accessed address (the secret's is the secret-init event) and
/// builds the committed/transient sets.
inline void apply_valuation(CandidateExecution& x, const Valuation& v) {
  const Program& p = *x.program;
  x.events.resize(x.program_events);
  std::set<Value> addrs = p.declared_addresses();
  addrs.insert(p.secret_addr);
  for (EventId e = 0; e < x.program_events; ++e) {
    x.events[e].addr = v.addr[e];
    x.events[e].val = v.val[e];
    if (x.events[e].is_memory() && v.addr[e]) addrs.insert(*v.addr[e]);
  }
  for (Value a : addrs) {
    Event init;
    init.id = x.events.size();
    init.kind = a == p.secret_addr ? EventKind::SecretInit : EventKind::Init;
    init.addr = a;
    init.val = initial_value(x, a);
    x.events.push_back(init);
  }
  x.committed = EventSet(x.events.size());
  x.transient = EventSet(x.events.size());
  for (const Event& ev : x.events) {
    if (ev.transient) x.transient.insert(ev.id);
    else x.committed.insert(ev.id);
  }
  x.valued = true;
}

/// Store events that may appear in co: committed program stores.
inline std::map<Value, std::vector<EventId>> coherence_candidates(
    const CandidateExecution& x) {
  std::map<Value, std::vector<EventId>> out;
  for (EventId e = 0; e < x.program_events; ++e) {
    const Event& ev = x.events[e];
    if (ev.kind == EventKind::Store && !ev.transient) out[*ev.addr].push_back(e);
  }
  return out;
}

inline bool writes_register(const Event& ev, const std::string& reg) {
  return ev.instr && ev.instr->stmt.writes_register() && ev.instr->stmt.reg == reg;
}

/// po, fence and addr depend only on the executed path.
inline void static_relations(const CandidateExecution& x, BaseRelations& b) {
  const std::size_t n = x.size();
  b.po = Relation(n);
  b.fence = Relation(n);
  b.addr = Relation(n);
  for (const auto& order : x.thread_order) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      bool fence_between = false;
      const Event& ei = x.events[order[i]];
      const bool tracks = ei.is_load();
      bool redefined = false;
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const Event& ej = x.events[order[j]];
        b.po.insert(ei.id, ej.id);
        if (fence_between) b.fence.insert(ei.id, ej.id);
        if (tracks && !redefined && ej.is_memory() &&
            uses_register(*ej.instr->stmt.expr, ei.instr->stmt.reg))
          b.addr.insert(ei.id, ej.id);
        if (ej.kind == EventKind::Fence) fence_between = true;
        if (tracks && writes_register(ej, ei.instr->stmt.reg)) redefined = true;
      }
    }
  }
}

/// All eight base relations plus the event sets used by CAT models.
/// Requires a valued execution.
inline BaseRelations base_relations(const CandidateExecution& x) {
  if (!x.valued)
    throw Error(ErrorKind::InvalidArgument, "base_relations needs a valued execution");
  const std::size_t n = x.size();
  BaseRelations b;
  b.E = EventSet(n);
  b.M = EventSet(n);
  b.W = EventSet(n);
  b.R = EventSet(n);
  for (const Event& ev : x.events) {
    b.E.insert(ev.id);
    if (ev.is_memory()) b.M.insert(ev.id);
    if (ev.is_store()) b.W.insert(ev.id);
    if (ev.is_load()) b.R.insert(ev.id);
  }
  static_relations(x, b);

  b.loc = Relation(n);
  for (const Event& a : x.events)
    for (const Event& c : x.events)
      if (a.is_memory() && c.is_memory() && a.addr == c.addr) b.loc.insert(a.id, c.id);

  Relation sources(n);
  for (const auto& [load, src] : x.reads) {
    const EventId s = x.source_of(load);
    if (s != kFromInit) sources.insert(s, load);
  }
  if (x.psf) {
    b.srf = sources;
    b.rf = sources & b.loc;
  } else {
    b.srf = Relation(n);
    b.rf = sources;
  }

  b.rfe = Relation(n);
  for (const auto& [w, r] : b.rf.pairs()) {
    const Event& ew = x.events[w];
    const Event& er = x.events[r];
    if (!ew.is_init() && ew.thread != er.thread) b.rfe.insert(w, r);
  }

  b.co = Relation(n);
  for (const auto& [addr, order] : x.co_order) {
    const auto init = x.init_event(addr);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (init) b.co.insert(*init, order[i]);
      for (std::size_t j = i + 1; j < order.size(); ++j) b.co.insert(order[i], order[j]);
    }
  }
  return b;
}

}  // namespace axcat

#endif  // AXCAT_EVENTS_HPP_
