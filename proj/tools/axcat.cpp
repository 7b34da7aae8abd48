// axcat: software-isolation checker for uASM programs under CAT models.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "axcat/axcat.hpp"

namespace {

void print_verdict(const axcat::Verdict& v) {
  std::cout << axcat::to_string(v.outcome) << "\n";
  const auto& s = v.stats;
  std::cout << "candidates " << s.candidates << ", fence " << s.fence_rejected << ", window "
            << s.window_rejected << ", values " << s.value_rejected << ", control-flow "
            << s.cf_rejected << ", srf-fence " << s.srf_fence_rejected << ", unwind "
            << s.unwind_hits << ", benign " << s.benign << ", model " << s.model_rejected
            << "\n";
  if (v.outcome == axcat::Outcome::Unknown)
    std::cout << "no violation up to k = " << v.bound << ", but some loop was not fully unrolled\n";
  if (!v.witness) return;
  const auto& x = *v.witness;
  std::cout << "witness:\n";
  for (const auto& order : x.thread_order)
    for (auto e : order)
      std::cout << "  " << (x.events[e].transient ? "T " : "C ") << axcat::describe_event(x, e)
                << "\n";
  const auto load = *v.leaking_load;
  std::cout << "  " << axcat::event_name(x, load) << " reads the secret at address " << *x.events[load].addr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decide software isolation of uASM programs under CAT speculation models"};
  app.require_subcommand(0, 1);

  axcat::RunSpec spec;
  std::string mode = "traditional";
  std::string dot, smt, json;
  app.add_option("--program", spec.program, "uASM litmus file");
  app.add_option("--model", spec.model, "bundled model name or .cat file")
      ->default_val("inorder");
  app.add_option("--mode", mode, "traditional or speculative")
      ->check(CLI::IsMember({"traditional", "speculative"}));
  app.add_option("-k,--k", spec.k, "loop unrolling bound")->default_val(2)->check(CLI::Range(1U, 64U));
  app.add_option("-w,--window", spec.window, "speculation window")->default_val(8);
  app.add_option("--buffer", spec.buffer, "store buffer size w'")->default_val(2);
  app.add_option("--bits", spec.bits, "value domain width in bits")->default_val(3);
  app.add_option("--engine", spec.engine, "enumerate or emit-smt")
      ->check(CLI::IsMember({"enumerate", "emit-smt"}));
  app.add_option("--dot", dot, "write the witness as DOT");
  app.add_option("--smt", smt, "write the SMT-LIB2 query");
  app.add_option("--json", json, "write a JSON verdict record");

  std::string corpus_dir;
  auto* corpus = app.add_subcommand("corpus", "run every litmus file of a directory");
  corpus->add_option("dir", corpus_dir, "corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (corpus->parsed()) {
      const auto report = axcat::run_corpus(corpus_dir);
      std::cout << axcat::format_corpus(report);
      return report.failures() == 0 ? 0 : 1;
    }
    if (spec.program.empty()) {
      std::cerr << "axcat: --program is required\n" << app.help();
      return 64;
    }
    spec.mode = axcat::parse_mode(mode);
    if (!dot.empty()) spec.dot_path = dot;
    if (!smt.empty()) spec.smt_path = smt;
    if (!json.empty()) spec.json_path = json;
    const auto result = axcat::run(spec);
    if (!result.verdict) {
      if (!spec.smt_path) std::cout << result.smt;
      return 0;
    }
    print_verdict(*result.verdict);
    return axcat::exit_code(result.verdict->outcome);
  } catch (const axcat::Error& e) {
    std::cerr << "axcat: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << "axcat: " << e.what() << "\n";
    return 70;
  }
}
