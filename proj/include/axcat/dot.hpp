#ifndef AXCAT_DOT_HPP_
#define AXCAT_DOT_HPP_

// Graphviz rendering of candidate executions.

#include <sstream>
#include <string>

#include "axcat/events.hpp"

namespace axcat {

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Event name used in witnesses: program events are e1, e2, ... in thread
/// order, the secret's init is e_s and other inits are e0_<address>.
inline std::string event_name(const CandidateExecution& x, EventId e) {
  const Event& ev = x.events[e];
  if (ev.kind == EventKind::SecretInit) return "e_s";
  if (ev.is_init()) return "e0_" + std::to_string(*ev.addr);
  return "e" + std::to_string(e + 1);
}

/// One line describing an event: statement text plus address and value.
inline std::string describe_event(const CandidateExecution& x, EventId e) {
  const Event& ev = x.events[e];
  std::ostringstream os;
  os << event_name(x, e) << ": ";
  if (ev.kind == EventKind::SecretInit) {
    os << "init [" << *ev.addr << "] = secret";
    return os.str();
  }
  if (ev.is_init()) {
    os << "init [" << *ev.addr << "] = " << ev.val.value_or(0);
    return os.str();
  }
  os << ev.label << ": " << ev.instr->text;
  if (ev.addr) os << "  [" << *ev.addr << "]";
  if (ev.val) os << " = " << *ev.val;
  if (ev.kind == EventKind::CondJump) os << (ev.taken ? " taken" : " fall") << (ev.cp.value_or(true) ? "" : " mispredicted");
  return os.str();
}

/// DOT digraph of a valued execution: program events in thread order, init
/// events that take part in some edge, and po/rf/rfe/co/srf/fence edges.
/// Transient events are dashed and grey.
inline std::string emit_witness_dot(const CandidateExecution& x) {
  const BaseRelations b = base_relations(x);
  std::ostringstream os;
  os << "digraph witness {\n  node [shape=box, fontname=\"monospace\"];\n";

  EventSet shown(x.size());
  for (EventId e = 0; e < x.program_events; ++e) shown.insert(e);
  for (const auto& [w, r] : (b.rf | b.co | b.srf).pairs()) {
    shown.insert(w);
    shown.insert(r);
  }

  for (std::size_t t = 0; t < x.thread_order.size(); ++t) {
    if (x.thread_order[t].empty()) continue;
    os << "  subgraph cluster_t" << t << " {\n    label=\"thread " << t << "\";\n";
    for (EventId e : x.thread_order[t]) {
      os << "    " << event_name(x, e) << " [label=\""
         << detail::dot_escape(describe_event(x, e)) << "\"";
      if (x.events[e].transient) os << ", style=dashed, color=grey40";
      os << "];\n";
    }
    os << "  }\n";
  }
  for (EventId e = x.program_events; e < x.size(); ++e) {
    if (!shown.contains(e)) continue;
    os << "  " << event_name(x, e) << " [label=\""
       << detail::dot_escape(describe_event(x, e)) << "\", shape=ellipse";
    if (x.events[e].kind == EventKind::SecretInit) os << ", color=red";
    os << "];\n";
  }

  auto edge = [&](EventId a, EventId c, const char* label, const char* style) {
    os << "  " << event_name(x, a) << " -> " << event_name(x, c) << " [label=\""
       << label << "\"" << style << "];\n";
  };
  for (const auto& order : x.thread_order)
    for (std::size_t i = 0; i + 1 < order.size(); ++i) edge(order[i], order[i + 1], "po", "");
  for (const auto& [w, r] : b.rf.pairs())
    edge(w, r, b.rfe.contains(w, r) ? "rfe" : "rf", ", style=dashed, color=red");
  for (const auto& [w, r] : (b.srf - b.rf).pairs()) edge(w, r, "srf", ", style=dashed, color=orange");
  for (const auto& [a, c] : b.co.pairs()) {
    bool immediate = true;
    for (const auto& [m, n] : b.co.pairs())
      if (m == a && n != c && b.co.contains(n, c)) immediate = false;
    if (immediate) edge(a, c, "co", ", color=blue");
  }
  // Fence edges between memory events adjacent among the thread's memory accesses.
  for (const auto& order : x.thread_order) {
    EventId last = kFromInit;
    for (EventId e : order) {
      if (!x.events[e].is_memory()) continue;
      if (last != kFromInit && b.fence.contains(last, e)) edge(last, e, "fence", ", color=darkgreen");
      last = e;
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace axcat

#endif  // AXCAT_DOT_HPP_
