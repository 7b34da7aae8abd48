#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "axcat/axcat.hpp"

using namespace axcat;

namespace {

namespace fs = std::filesystem;

const std::string kCorpus = AXCAT_CORPUS_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("axcat_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, const std::string& out = "/dev/null") {
  const std::string cmd = std::string(AXCAT_CLI) + " " + args + " > " + out + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Corpus, ShippedCorpusPasses) {
  const CorpusReport r = run_corpus(kCorpus, 2);
  EXPECT_GT(r.rows.size(), 30U);
  EXPECT_EQ(r.failures(), 0U) << format_corpus(r);
}

TEST(Corpus, OrderIndependent) {
  // Same files, copied in opposite orders, run with different worker counts.
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kCorpus)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  const fs::path a = scratch("order_a"), b = scratch("order_b");
  for (const auto& f : files) fs::copy_file(f, a / f.filename());
  for (auto it = files.rbegin(); it != files.rend(); ++it) fs::copy_file(*it, b / it->filename());
  EXPECT_EQ(format_corpus(run_corpus(a.string(), 1)), format_corpus(run_corpus(b.string(), 3)));
}

TEST(Corpus, FlippedExpectationGivesOneFailure) {
  const fs::path dir = scratch("flipped");
  std::string text = read_file(kCorpus + "/pht-bounds.litmus");
  const std::string from = "expect safe model=inorder mode=speculative w=4";
  text.replace(text.find(from), from.size(), "expect unsafe model=inorder mode=speculative w=4");
  write_file((dir / "pht-bounds.litmus").string(), text);
  const CorpusReport r = run_corpus(dir.string());
  EXPECT_EQ(r.failures(), 1U);
  const std::string table = format_corpus(r);
  EXPECT_NE(table.find("-/+ FAIL"), std::string::npos) << table;
  EXPECT_EQ(cli("corpus " + dir.string()), 1);
}

TEST(Corpus, EmptyDirectory) {
  const fs::path dir = scratch("empty");
  const CorpusReport r = run_corpus(dir.string());
  EXPECT_TRUE(r.rows.empty());
  EXPECT_NE(format_corpus(r).find("0 checks, 0 failed"), std::string::npos);
  EXPECT_EQ(cli("corpus " + dir.string()), 0);
}

TEST(Corpus, MissingTrailer) {
  const fs::path dir = scratch("missing");
  write_file((dir / "a.litmus").string(), "layout secret@1\nthread 0:\n1: skip\n");
  try {
    run_corpus(dir.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingExpectation);
  }
  EXPECT_EQ(cli("corpus " + dir.string()), 65);
  EXPECT_THROW(run_corpus((dir / "nope").string()), Error);
}

TEST(Cli, ExitCodes) {
  const std::string bounds = "--program " + kCorpus + "/pht-bounds.litmus";
  EXPECT_EQ(cli(bounds + " --model inorder --mode traditional"), 0);
  EXPECT_EQ(cli(bounds + " --model inorder --mode speculative -w 8"), 1);
  EXPECT_EQ(cli("--program " + kCorpus + "/mp-clear.litmus --model tso-mcu --bits 2"), 1);
  EXPECT_EQ(cli("--program " + kCorpus + "/pht-loop.litmus -k 1"), 2);
  EXPECT_EQ(cli(bounds + " --mode sideways"), 64);
  EXPECT_EQ(cli(""), 64);
  EXPECT_EQ(cli(bounds + " --model nosuch"), 65);
  EXPECT_EQ(cli("--program /nonexistent.litmus"), 65);
  const fs::path dir = scratch("cli_bad");
  write_file((dir / "bad.litmus").string(), "layout secret@1\nthread 0:\n1: bogus\n");
  EXPECT_EQ(cli("--program " + (dir / "bad.litmus").string()), 65);
}

TEST(Cli, ModelFromFile) {
  const std::string bounds = "--program " + kCorpus + "/pht-bounds.litmus --mode speculative";
  EXPECT_EQ(cli(bounds + " --model " + std::string(AXCAT_MODELS_DIR) + "/stl.cat"), 1);
}

TEST(Cli, ArtifactsAndJson) {
  const fs::path dir = scratch("cli_artifacts");
  const std::string args = "--program " + kCorpus +
                           "/pht-bounds.litmus --mode speculative --dot " + (dir / "w.dot").string() +
                           " --smt " + (dir / "q.smt2").string() + " --json " +
                           (dir / "v.json").string();
  EXPECT_EQ(cli(args, (dir / "out.txt").string()), 1);
  const std::string out = read_file((dir / "out.txt").string());
  EXPECT_EQ(out.rfind("UNSAFE\n", 0), 0U) << out;
  EXPECT_NE(out.find("e4 reads the secret at address 6"), std::string::npos) << out;
  EXPECT_NE(read_file((dir / "w.dot").string()).find("e_s -> e4"), std::string::npos);
  EXPECT_NE(read_file((dir / "q.smt2").string()).find("(check-sat)"), std::string::npos);

  const auto j = nlohmann::json::parse(read_file((dir / "v.json").string()));
  for (const char* key : {"program", "model", "mode", "k", "w", "w_prime", "bits", "outcome",
                          "candidates", "elapsed_ms"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["outcome"], "UNSAFE");
  EXPECT_EQ(j["model"], "inorder");
  EXPECT_EQ(j["mode"], "speculative");
  EXPECT_EQ(j["k"], 2);
  EXPECT_EQ(j["w"], 8);
  EXPECT_EQ(j["w_prime"], 2);

  // The CLI reports what the library reports for the same settings.
  RunSpec spec;
  spec.program = kCorpus + "/pht-bounds.litmus";
  spec.mode = Mode::Speculative;
  const RunResult lib = run(spec);
  EXPECT_EQ(lib.record["outcome"], j["outcome"]);
  EXPECT_EQ(lib.record["candidates"], j["candidates"]);
}

TEST(Cli, EmitSmtToStdout) {
  const fs::path dir = scratch("cli_smt");
  const std::string args =
      "--program " + kCorpus + "/pht-bounds.litmus --engine emit-smt --mode speculative";
  EXPECT_EQ(cli(args, (dir / "a.smt2").string()), 0);
  EXPECT_EQ(cli(args, (dir / "b.smt2").string()), 0);
  const std::string a = read_file((dir / "a.smt2").string());
  EXPECT_EQ(a, read_file((dir / "b.smt2").string()));
  EXPECT_EQ(a.rfind("; axcat isolation query", 0), 0U);
}

}  // namespace
