#ifndef AXCAT_RUN_HPP_
#define AXCAT_RUN_HPP_

// One analysis run as driven from the command line: load a program and a
// model, decide isolation or export the query, and write artifacts.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "axcat/catlang.hpp"
#include "axcat/dot.hpp"
#include "axcat/engine.hpp"
#include "axcat/error.hpp"
#include "axcat/masm.hpp"
#include "axcat/models.hpp"
#include "axcat/smt.hpp"
#include "axcat/speculation.hpp"

namespace axcat {

struct RunSpec {
  std::string program;  // path
  std::string model = "inorder";  // bundled name or .cat path
  Mode mode = Mode::Traditional;
  unsigned k = 2;
  unsigned window = 8;
  unsigned buffer = 2;
  unsigned bits = 3;
  std::string engine = "enumerate";  // or emit-smt
  std::optional<std::string> dot_path;
  std::optional<std::string> smt_path;
  std::optional<std::string> json_path;
  unsigned jobs = 0;
};

struct RunResult {
  std::optional<Verdict> verdict;  // absent for emit-smt
  std::string smt;                 // filled for emit-smt or when smt_path is set
  double elapsed_ms = 0;
  nlohmann::ordered_json record;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
}

/// Bundled model by name, else a .cat file on disk.
inline CatModel resolve_model(const std::string& name_or_path) {
  if (find_bundled_model(name_or_path)) return bundled_model(name_or_path);
  if (name_or_path.find('/') != std::string::npos || name_or_path.ends_with(".cat")) {
    const std::filesystem::path path(name_or_path);
    return parse_cat(read_file(name_or_path), path.stem().string());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + name_or_path + "'");
}

inline SpecConfig spec_config(const RunSpec& spec, const CatModel& model) {
  SpecConfig cfg;
  cfg.mode = spec.mode;
  cfg.window = spec.window;
  cfg.buffer = spec.buffer;
  cfg.psf = model.uses("srf");
  return cfg;
}

inline nlohmann::ordered_json verdict_record(const RunSpec& spec, const CatModel& model,
                                             const Verdict& v, double elapsed_ms) {
  nlohmann::ordered_json out;
  out["program"] = spec.program;
  out["model"] = model.name;
  out["mode"] = to_string(spec.mode);
  out["k"] = spec.k;
  out["w"] = spec.window;
  out["w_prime"] = spec.buffer;
  out["bits"] = spec.bits;
  out["outcome"] = to_string(v.outcome);
  out["candidates"] = v.stats.candidates;
  out["elapsed_ms"] = elapsed_ms;
  return out;
}

/// Runs `spec` on an already parsed program and model.
inline RunResult run(const RunSpec& spec, const Program& program, const CatModel& model) {
  RunResult r;
  const SpecConfig cfg = spec_config(spec, model);
  if (spec.engine == "emit-smt") {
    r.smt = emit_smt(program, model, cfg, spec.k, spec.bits);
    if (spec.smt_path) write_file(*spec.smt_path, r.smt);
    return r;
  }
  if (spec.engine != "enumerate")
    throw Error(ErrorKind::InvalidArgument, "unknown engine '" + spec.engine + "'");
  const auto start = std::chrono::steady_clock::now();
  Verdict v = check_isolation(program, model, cfg, spec.k, spec.bits, spec.jobs);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.record = verdict_record(spec, model, v, r.elapsed_ms);
  if (spec.dot_path && v.witness) write_file(*spec.dot_path, emit_witness_dot(*v.witness));
  if (spec.smt_path) {
    r.smt = emit_smt(program, model, cfg, spec.k, spec.bits);
    write_file(*spec.smt_path, r.smt);
  }
  if (spec.json_path) write_file(*spec.json_path, r.record.dump(2) + "\n");
  r.verdict = std::move(v);
  return r;
}

inline RunResult run(const RunSpec& spec) {
  const Program program = parse_program(read_file(spec.program));
  const CatModel model = resolve_model(spec.model);
  return run(spec, program, model);
}

inline int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Safe: return 0;
    case Outcome::Unsafe: return 1;
    case Outcome::Unknown: return 2;
  }
  return 3;
}

}  // namespace axcat

#endif  // AXCAT_RUN_HPP_
