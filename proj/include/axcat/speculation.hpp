#ifndef AXCAT_SPECULATION_HPP_
#define AXCAT_SPECULATION_HPP_

// Control-flow constraints over candidate executions: which event sets form a
// legal (possibly speculative) path through the program.

#include <set>
#include <string>

#include "axcat/error.hpp"
#include "axcat/events.hpp"
#include "axcat/masm.hpp"

namespace axcat {

enum class Mode { Traditional, Speculative };

inline const char* to_string(Mode m) {
  return m == Mode::Traditional ? "traditional" : "speculative";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "traditional") return Mode::Traditional;
  if (s == "speculative") return Mode::Speculative;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

struct SpecConfig {
  Mode mode = Mode::Traditional;
  unsigned window = 8;   // branch speculation window w
  unsigned buffer = 2;   // store buffer size w'
  bool always_mispredict = true;  // cp unconstrained; false forces cp = true
  bool psf = false;      // loads read through srf

  void validate() const {
    if (buffer < 1) throw Error(ErrorKind::InvalidArgument, "store buffer size must be >= 1");
    if (window < 1) throw Error(ErrorKind::InvalidArgument, "speculation window must be >= 1");
  }
};

namespace detail {

enum class Semantics { Any, Committed, Transient };

// One case of CFD/SCFD for predecessor `from` of `to`, evaluated on x.
inline bool dependency_holds(const CandidateExecution& x, const Instruction& from_ins,
                             Label to, Semantics need_pred, bool speculative_case,
                             bool require_cp_case) {
  const auto e = x.event_at(from_ins.thread, from_ins.label);
  if (!e) return false;
  const Event& pred_ev = x.events[*e];
  auto pred_ok = [&](Semantics s) {
    switch (s) {
      case Semantics::Any: return true;
      case Semantics::Committed: return !pred_ev.transient;
      case Semantics::Transient: return pred_ev.transient;
    }
    return false;
  };
  const Stmt& s = from_ins.stmt;
  bool holds = false;
  if (s.kind != Stmt::Kind::Beqz) {
    // Fall-through from a non-branch, or a direct jump to `to`.
    holds = pred_ok(need_pred);
  } else {
    const bool nonzero = pred_ev.val.value_or(0) != 0;
    const bool cp = pred_ev.cp.value_or(true);
    // Fall-through case and taken case; both apply when target == to == l'+1.
    if (from_ins.label + 1 == to) {
      if (!speculative_case)
        holds |= pred_ok(need_pred) && nonzero && (!require_cp_case || cp);
      else
        holds |= !nonzero && !cp;
    }
    if (s.target == to) {
      if (!speculative_case)
        holds |= pred_ok(need_pred) && !nonzero && (!require_cp_case || cp);
      else
        holds |= nonzero && !cp;
    }
  }
  return holds;
}

inline bool is_entry(const CandidateExecution& x, const Event& ev) {
  return x.program->threads[ev.thread].first_label() == ev.label;
}

}  // namespace detail

/// Non-speculative control flow: every executed non-entry event has
/// a static predecessor whose control-flow dependency holds. T must be empty.
inline bool check_traditional_cf(const CandidateExecution& x) {
  const Program& p = *x.program;
  for (EventId e = 0; e < x.program_events; ++e) {
    const Event& ev = x.events[e];
    if (ev.transient) return false;
    if (detail::is_entry(x, ev)) continue;
    bool ok = false;
    for (Label l : pred(p, ev.thread, ev.label)) {
      const Instruction& from = p.threads[ev.thread].at(l);
      if (detail::dependency_holds(x, from, ev.label, detail::Semantics::Any, false, false)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

/// Committed events need a committed predecessor along a correctly predicted
/// edge; transient events need a transient predecessor or a mispredicted
/// branch whose condition contradicts the edge.
inline bool check_speculative_cf(const CandidateExecution& x, const SpecConfig& cfg) {
  const Program& p = *x.program;
  for (EventId e = 0; e < x.program_events; ++e) {
    const Event& ev = x.events[e];
    if (ev.kind == EventKind::CondJump && !cfg.always_mispredict && !ev.cp.value_or(true))
      return false;
    if (detail::is_entry(x, ev)) {
      if (ev.transient) return false;
      continue;
    }
    bool ok = false;
    for (Label l : pred(p, ev.thread, ev.label)) {
      const Instruction& from = p.threads[ev.thread].at(l);
      const bool holds =
          ev.transient
              ? detail::dependency_holds(x, from, ev.label, detail::Semantics::Transient,
                                         from.stmt.kind == Stmt::Kind::Beqz, false)
              : detail::dependency_holds(x, from, ev.label, detail::Semantics::Committed,
                                         false, true);
      if (holds) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

/// True iff no thread contains `w` po-consecutive transient events.
inline bool check_window(const CandidateExecution& x, unsigned w) {
  for (const auto& order : x.thread_order) {
    unsigned run = 0;
    for (EventId e : order) {
      run = x.events[e].transient ? run + 1 : 0;
      if (run >= w) return false;
    }
  }
  return true;
}

/// Fences never execute transiently.
inline bool check_fences(const CandidateExecution& x) {
  for (EventId e = 0; e < x.program_events; ++e)
    if (x.events[e].kind == EventKind::Fence && x.events[e].transient) return false;
  return true;
}

inline bool check_control_flow(const CandidateExecution& x, const SpecConfig& cfg) {
  return cfg.mode == Mode::Traditional ? check_traditional_cf(x)
                                       : check_speculative_cf(x, cfg);
}

}  // namespace axcat

#endif  // AXCAT_SPECULATION_HPP_
