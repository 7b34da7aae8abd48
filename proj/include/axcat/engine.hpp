#ifndef AXCAT_ENGINE_HPP_
#define AXCAT_ENGINE_HPP_

// Explicit-state decision procedure for software isolation: enumerate every
// candidate execution of the bounded program, keep those allowed by the
// control-flow constraints and the CAT model, and look for a load that reads
// the secret's initial value.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "axcat/catlang.hpp"
#include "axcat/error.hpp"
#include "axcat/events.hpp"
#include "axcat/masm.hpp"
#include "axcat/speculation.hpp"

namespace axcat {

enum class Outcome { Safe, Unsafe, Unknown };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Safe: return "SAFE";
    case Outcome::Unsafe: return "UNSAFE";
    case Outcome::Unknown: return "UNKNOWN";
  }
  return "?";
}

struct Stats {
  std::uint64_t candidates = 0;
  std::uint64_t fence_rejected = 0;
  std::uint64_t window_rejected = 0;
  std::uint64_t value_rejected = 0;
  std::uint64_t cf_rejected = 0;
  std::uint64_t srf_fence_rejected = 0;
  std::uint64_t unwind_hits = 0;
  std::uint64_t benign = 0;  // no load reads the secret
  std::uint64_t model_rejected = 0;

  Stats& operator+=(const Stats& o) {
    candidates += o.candidates;
    fence_rejected += o.fence_rejected;
    window_rejected += o.window_rejected;
    value_rejected += o.value_rejected;
    cf_rejected += o.cf_rejected;
    srf_fence_rejected += o.srf_fence_rejected;
    unwind_hits += o.unwind_hits;
    benign += o.benign;
    model_rejected += o.model_rejected;
    return *this;
  }
};

struct Verdict {
  Outcome outcome = Outcome::Safe;
  std::optional<CandidateExecution> witness;
  std::optional<EventId> leaking_load;  // witness load reading the secret
  unsigned bound = 0;
  Stats stats;
};

/// Loads of `x` whose value source is the secret-init event.
inline std::vector<EventId> secret_reads(const CandidateExecution& x) {
  std::vector<EventId> out;
  for (const auto& [load, src] : x.reads) {
    (void)src;
    const EventId s = x.source_of(load);
    if (s != kFromInit && x.events[s].kind == EventKind::SecretInit) out.push_back(load);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

/// Every path through a loop-free thread, as branch decisions in path order.
/// Decisions per branch are ordered (fall-through, cp), (fall-through, !cp),
/// (taken, cp), (taken, !cp); cp is only varied in speculative mode with
/// always-mispredict semantics.
inline std::vector<PathChoice> enumerate_paths(const Thread& th, const SpecConfig& cfg) {
  std::vector<PathChoice> out;
  if (th.empty()) {
    out.emplace_back();
    return out;
  }
  const bool vary_cp = cfg.mode == Mode::Speculative && cfg.always_mispredict;
  PathChoice cur;
  std::function<void(Label)> walk = [&](Label l) {
    while (th.has_label(l)) {
      const Instruction& ins = th.at(l);
      if (ins.stmt.kind == Stmt::Kind::Jmp) {
        if (ins.stmt.target <= l)
          throw Error(ErrorKind::InvalidArgument, "enumeration needs a loop-free program");
        l = ins.stmt.target;
        continue;
      }
      if (ins.stmt.kind == Stmt::Kind::Beqz) {
        if (ins.stmt.target <= l)
          throw Error(ErrorKind::InvalidArgument, "enumeration needs a loop-free program");
        for (bool taken : {false, true}) {
          for (bool cp : {true, false}) {
            if (!cp && !vary_cp) continue;
            cur.taken.push_back(taken);
            cur.cp.push_back(cp);
            walk(taken ? ins.stmt.target : l + 1);
            cur.taken.pop_back();
            cur.cp.pop_back();
          }
        }
        return;
      }
      ++l;
    }
    out.push_back(cur);
  };
  walk(th.first_label());
  return out;
}

/// Store events a load may take its value from (besides its address's
/// initial write). Transient stores only feed po-later transient loads of the
/// same thread; committed stores feed any load.
inline std::vector<EventId> eligible_sources(const CandidateExecution& x, EventId load) {
  std::vector<EventId> out;
  const Event& r = x.events[load];
  for (EventId s = 0; s < x.program_events; ++s) {
    const Event& w = x.events[s];
    if (w.kind != EventKind::Store) continue;
    if (w.transient) {
      if (!r.transient || w.thread != r.thread) continue;
      const auto& order = x.thread_order[r.thread];
      const auto ws = std::find(order.begin(), order.end(), s);
      const auto rs = std::find(order.begin(), order.end(), load);
      if (ws > rs) continue;
    }
    out.push_back(s);
  }
  return out;
}

namespace detail {

inline void validate_domain(const Program& p, unsigned bits) {
  if (bits < 1 || bits > 16)
    throw Error(ErrorKind::DomainTooSmall, "domain bits must lie in [1, 16]");
  if (p.max_address() > domain_mask(bits))
    throw Error(ErrorKind::DomainTooSmall,
                "a " + std::to_string(bits) + "-bit domain cannot address " +
                    std::to_string(p.max_address()));
}

/// Advances a mixed-radix counter (last digit fastest). Returns false on wrap.
inline bool next_counter(std::vector<std::size_t>& digits, const std::vector<std::size_t>& radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix[i]) return true;
    digits[i] = 0;
  }
  return false;
}

struct Job {
  std::vector<std::size_t> path_index;  // one per thread
  std::vector<Value> input_values;      // one per input address
};

class Enumerator {
 public:
  Enumerator(const Program& unrolled, const SpecConfig& cfg, unsigned bits)
      : program_(std::make_shared<const Program>(unrolled)), cfg_(cfg), bits_(bits) {
    validate_domain(*program_, bits_);
    for (const Thread& th : program_->threads) paths_.push_back(enumerate_paths(th, cfg_));
    const auto in = program_->input_locations();
    inputs_.assign(in.begin(), in.end());
    if (inputs_.size() * bits_ > 24)
      throw Error(ErrorKind::DomainTooSmall, "too many input values to enumerate");
  }

  std::vector<Job> jobs() const {
    std::vector<Job> out;
    std::vector<std::size_t> pidx(paths_.size(), 0), prad;
    for (const auto& ps : paths_) prad.push_back(ps.size());
    const std::size_t dom = std::size_t{1} << bits_;
    do {
      std::vector<std::size_t> vals(inputs_.size(), 0), vrad(inputs_.size(), dom);
      do {
        Job j;
        j.path_index = pidx;
        for (auto v : vals) j.input_values.push_back(v);
        out.push_back(std::move(j));
      } while (next_counter(vals, vrad));
    } while (next_counter(pidx, prad));
    return out;
  }

  /// Calls fn on each candidate of `job` in choice order until fn returns false.
  /// Returns false if stopped early.
  bool run(const Job& job, const std::function<bool(CandidateExecution&)>& fn) const {
    std::vector<PathChoice> choice;
    for (std::size_t t = 0; t < paths_.size(); ++t) choice.push_back(paths_[t][job.path_index[t]]);
    CandidateExecution base = build_events(program_, choice, bits_);
    base.psf = cfg_.psf;
    for (std::size_t i = 0; i < inputs_.size(); ++i) base.inputs[inputs_[i]] = job.input_values[i];

    const auto loads = base.loads();
    std::vector<std::vector<EventId>> options;
    for (EventId l : loads) {
      std::vector<EventId> opts{kFromInit};
      for (EventId s : eligible_sources(base, l)) opts.push_back(s);
      options.push_back(std::move(opts));
    }
    std::vector<std::size_t> digits(loads.size(), 0), radix;
    for (const auto& o : options) radix.push_back(o.size());
    do {
      CandidateExecution x = base;
      for (std::size_t i = 0; i < loads.size(); ++i) x.reads[loads[i]] = options[i][digits[i]];
      if (!fn(x)) return false;
    } while (next_counter(digits, radix));
    return true;
  }

  const std::shared_ptr<const Program>& program() const { return program_; }

 private:
  std::shared_ptr<const Program> program_;
  SpecConfig cfg_;
  unsigned bits_;
  std::vector<std::vector<PathChoice>> paths_;
  std::vector<Value> inputs_;
};

}  // namespace detail

/// Yields every candidate execution skeleton (path, cp, partition, initial
/// inputs, reads-from choice) of `p` unrolled to `k`, in lexicographic order
/// of the choice vector. Coherence orders are chosen later, per valuation.
inline void enumerate_candidates(const Program& p, const SpecConfig& cfg, unsigned k,
                                 unsigned bits,
                                 const std::function<bool(CandidateExecution&)>& fn) {
  cfg.validate();
  detail::Enumerator en(unroll(p, k), cfg, bits);
  for (const auto& job : en.jobs())
    if (!en.run(job, fn)) return;
}

/// Runs every filter on one skeleton. Returns the first consistent execution
/// that reads the secret, if any, with its valuation and coherence order.
inline std::optional<CandidateExecution> examine_candidate(const CandidateExecution& x,
                                                           const CatModel& model,
                                                           const SpecConfig& cfg, Stats& stats) {
  ++stats.candidates;
  if (!check_fences(x)) {
    ++stats.fence_rejected;
    return std::nullopt;
  }
  if (cfg.mode == Mode::Speculative && !check_window(x, cfg.window)) {
    ++stats.window_rejected;
    return std::nullopt;
  }

  std::vector<Valuation> valuations;
  Propagation prop = propagate_values(x);
  if (prop.status == Propagation::Status::Consistent) {
    valuations.push_back(std::move(prop.valuation));
  } else if (prop.status == Propagation::Status::Unresolved) {
    // Reads-from cycle: guess one load on it at a time and propagate again.
    std::function<void(std::map<EventId, Value>&, EventId)> guess =
        [&](std::map<EventId, Value>& fixed, EventId load) {
          for (Value v = 0; v <= domain_mask(x.bits); ++v) {
            fixed[load] = v;
            Propagation g = propagate_values(x, fixed);
            if (g.status == Propagation::Status::Consistent)
              valuations.push_back(std::move(g.valuation));
            else if (g.status == Propagation::Status::Unresolved)
              guess(fixed, g.unresolved.front());
          }
          fixed.erase(load);
        };
    std::map<EventId, Value> fixed;
    guess(fixed, prop.unresolved.front());
  }
  if (valuations.empty()) {
    ++stats.value_rejected;
    return std::nullopt;
  }

  for (const auto& v : valuations) {
    CandidateExecution y = x;
    apply_valuation(y, v);
    if (!check_control_flow(y, cfg)) {
      ++stats.cf_rejected;
      continue;
    }
    BaseRelations base = base_relations(y);
    if (y.psf && !check_srf_fence(base)) {
      ++stats.srf_fence_rejected;
      continue;
    }
    if (y.reaches_unwind) {
      ++stats.unwind_hits;
      continue;
    }
    if (secret_reads(y).empty()) {
      ++stats.benign;
      continue;
    }

    // Coherence: every per-address permutation of committed stores.
    const auto cands = coherence_candidates(y);
    std::vector<std::vector<EventId>> perms;
    for (const auto& [addr, ids] : cands) {
      (void)addr;
      perms.push_back(ids);
    }
    while (true) {
      y.co_order.clear();
      std::size_t i = 0;
      for (const auto& [addr, ids] : cands) {
        (void)ids;
        y.co_order[addr] = perms[i++];
      }
      BaseRelations b = base_relations(y);
      if (check_model(model, b, cfg).consistent) return y;
      ++stats.model_rejected;
      // Next permutation, last address fastest.
      std::size_t k = perms.size();
      bool advanced = false;
      while (k-- > 0) {
        if (std::next_permutation(perms[k].begin(), perms[k].end())) {
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
  }
  return std::nullopt;
}

inline unsigned default_jobs() {
  if (const char* env = std::getenv("AXCAT_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Decides software isolation of `p` under `model` and `cfg`, exploring loops
/// up to `k` iterations and values over a `bits`-wide domain.
///
/// The first witness in choice order is reported regardless of how many
/// workers run, so verdicts and witnesses are reproducible.
inline Verdict check_isolation(const Program& p, const CatModel& model, const SpecConfig& cfg,
                               unsigned k, unsigned bits, unsigned jobs = 0) {
  cfg.validate();
  if (model.uses("srf") && !cfg.psf)
    throw Error(ErrorKind::ConfigMismatch,
                "model '" + model.name + "' uses srf but predictive forwarding is disabled");
  const Program unrolled = unroll(p, k);
  detail::Enumerator en(unrolled, cfg, bits);
  const auto all_jobs = en.jobs();

  struct Result {
    Stats stats;
    std::optional<CandidateExecution> witness;
    bool done = false;
  };
  std::vector<Result> results(all_jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};

  auto worker = [&] {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= all_jobs.size()) return;
      if (j > best.load()) continue;
      Result& r = results[j];
      en.run(all_jobs[j], [&](CandidateExecution& x) {
        if (j > best.load()) return false;
        if (auto w = examine_candidate(x, model, cfg, r.stats)) {
          r.witness = std::move(w);
          return false;
        }
        return true;
      });
      r.done = true;
      if (r.witness) {
        std::size_t cur = best.load();
        while (j < cur && !best.compare_exchange_weak(cur, j)) {
        }
      }
    }
  };

  if (jobs == 0) jobs = default_jobs();
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(all_jobs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Verdict v;
  v.bound = k;
  const std::size_t stop = best.load();
  for (std::size_t j = 0; j < results.size() && j <= stop; ++j) v.stats += results[j].stats;
  if (stop != std::numeric_limits<std::size_t>::max()) {
    v.outcome = Outcome::Unsafe;
    v.witness = std::move(results[stop].witness);
    v.leaking_load = secret_reads(*v.witness).front();
  } else if (v.stats.unwind_hits > 0) {
    v.outcome = Outcome::Unknown;
  } else {
    v.outcome = Outcome::Safe;
  }
  return v;
}

}  // namespace axcat

#endif  // AXCAT_ENGINE_HPP_
