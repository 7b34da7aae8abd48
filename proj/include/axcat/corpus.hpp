#ifndef AXCAT_CORPUS_HPP_
#define AXCAT_CORPUS_HPP_

// Runs every litmus file of a directory against its `expect` trailers and
// tabulates the verdicts, fenced and unfenced variants side by side.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "axcat/engine.hpp"
#include "axcat/error.hpp"
#include "axcat/masm.hpp"
#include "axcat/run.hpp"

namespace axcat {

struct CorpusRow {
  std::string file;     // file name
  std::string group;    // file stem without a -fence suffix
  std::string variant;  // none or fence
  std::string model;
  std::string params;   // remaining trailer settings, sorted
  std::string expected;
  std::string got;      // outcome, or ERROR
  std::string message;  // error text
  bool pass = false;
};

struct CorpusReport {
  std::vector<CorpusRow> rows;
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CorpusRow& r) { return !r.pass; }));
  }
};

/// RunSpec for one trailer line; keys: mode, k, w, buffer, bits.
inline RunSpec trailer_spec(const std::string& path, const Expectation& ex) {
  RunSpec spec;
  spec.program = path;
  spec.model = ex.model;
  for (const auto& [key, val] : ex.params) {
    try {
      if (key == "mode") spec.mode = parse_mode(val);
      else if (key == "k") spec.k = static_cast<unsigned>(std::stoul(val));
      else if (key == "w") spec.window = static_cast<unsigned>(std::stoul(val));
      else if (key == "buffer") spec.buffer = static_cast<unsigned>(std::stoul(val));
      else if (key == "bits") spec.bits = static_cast<unsigned>(std::stoul(val));
      else throw Error(ErrorKind::InvalidArgument, "unknown trailer key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad value for trailer key '" + key + "'");
    }
  }
  return spec;
}

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// Runs every *.litmus file under `dir`. Throws MissingExpectation before
/// running anything if some file has no trailer.
inline CorpusReport run_corpus(const std::string& dir, unsigned jobs = 0) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".litmus") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  struct Task {
    std::string path;
    std::shared_ptr<const Program> program;
    Expectation ex;
    CorpusRow row;
  };
  std::vector<Task> tasks;
  for (const auto& f : files) {
    auto program = std::make_shared<const Program>(parse_program(read_file(f.string())));
    if (program->expectations.empty())
      throw Error(ErrorKind::MissingExpectation, "no expect trailer in '" + f.filename().string() + "'");
    std::string stem = f.stem().string();
    std::string variant = "none";
    if (stem.size() > 6 && stem.ends_with("-fence")) {
      stem.resize(stem.size() - 6);
      variant = "fence";
    }
    for (const auto& ex : program->expectations) {
      Task t{f.string(), program, ex, {}};
      t.row.file = f.filename().string();
      t.row.group = stem;
      t.row.variant = variant;
      t.row.model = ex.model;
      std::string params;
      for (const auto& [k, v] : ex.params) params += (params.empty() ? "" : " ") + k + "=" + v;
      t.row.params = params;
      t.row.expected = ex.outcome;
      tasks.push_back(std::move(t));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      Task& t = tasks[i];
      try {
        RunSpec spec = trailer_spec(t.path, t.ex);
        spec.jobs = 1;
        const RunResult r = run(spec, *t.program, resolve_model(spec.model));
        t.row.got = lowercase(to_string(r.verdict->outcome));
      } catch (const std::exception& e) {
        t.row.got = "error";
        t.row.message = e.what();
      }
      t.row.pass = t.row.got == t.row.expected;
    }
  };
  if (jobs == 0) jobs = default_jobs();
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  CorpusReport report;
  for (auto& t : tasks) report.rows.push_back(std::move(t.row));
  std::sort(report.rows.begin(), report.rows.end(), [](const CorpusRow& a, const CorpusRow& b) {
    return std::tie(a.group, a.model, a.params, a.variant, a.file) <
           std::tie(b.group, b.model, b.params, b.variant, b.file);
  });
  return report;
}

namespace detail {

inline std::string verdict_mark(const std::string& s) {
  if (s == "safe") return "+";
  if (s == "unsafe") return "-";
  if (s == "unknown") return "?";
  return "!";
}

}  // namespace detail

/// Table with one line per (test, model, settings) and a column pair per
/// variant: expected/got marks (+ safe, - unsafe, ? unknown, ! error).
inline std::string format_corpus(const CorpusReport& report) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::map<std::string, const CorpusRow*>> lines;
  for (const auto& r : report.rows) lines[{r.group, r.model, r.params}][r.variant] = &r;

  std::ostringstream os;
  os << std::left << std::setw(20) << "test" << std::setw(10) << "model" << std::setw(30)
     << "settings" << std::setw(12) << "none" << std::setw(12) << "fence" << "\n";
  auto cell = [](const CorpusRow* r) {
    if (!r) return std::string("");
    return detail::verdict_mark(r->expected) + "/" + detail::verdict_mark(r->got) +
           (r->pass ? " ok" : " FAIL");
  };
  for (const auto& [key, variants] : lines) {
    const auto& [group, model, params] = key;
    auto find = [&](const char* v) -> const CorpusRow* {
      auto it = variants.find(v);
      return it == variants.end() ? nullptr : it->second;
    };
    os << std::setw(20) << group << std::setw(10) << model << std::setw(30) << params
       << std::setw(12) << cell(find("none")) << std::setw(12) << cell(find("fence")) << "\n";
  }
  for (const auto& r : report.rows)
    if (!r.message.empty()) os << r.file << ": " << r.message << "\n";
  os << "(+ safe, - unsafe, ? unknown, ! error; expected/got)\n";
  os << report.rows.size() << " checks, " << report.failures() << " failed\n";
  return os.str();
}

}  // namespace axcat

#endif  // AXCAT_CORPUS_HPP_
