#include <gtest/gtest.h>

#include "axcat/engine.hpp"
#include "axcat/models.hpp"
#include "oracle.hpp"
#include "random_programs.hpp"

using namespace axcat;

namespace {

class OracleAgreement : public ::testing::TestWithParam<unsigned> {};

TEST_P(OracleAgreement, EngineMatchesBruteForce) {
  gen::Generator g(GetParam());
  for (int i = 0; i < 50; ++i) {
    const gen::Case c = g.next();
    const Program p = parse_program(c.text);
    const CatModel m = bundled_model(c.model);
    const bool engine = check_isolation(p, m, c.cfg, 1, 2, 1).outcome == Outcome::Unsafe;
    EXPECT_EQ(engine, oracle::unsafe(p, m, c.cfg, 2))
        << c.model << " " << to_string(c.cfg.mode) << " w=" << c.cfg.window
        << " w'=" << c.cfg.buffer << "\n"
        << c.text;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleAgreement, ::testing::Values(101U, 202U, 303U, 404U));

// The reference must itself tell configurations apart, or agreement says
// little: flipping the mode changes some verdicts.
TEST(OracleSanity, DistinguishesModes) {
  gen::Generator g(505);
  int differ = 0;
  for (int i = 0; i < 200; ++i) {
    gen::Case c = g.next();
    const Program p = parse_program(c.text);
    const CatModel m = bundled_model(c.model);
    SpecConfig other = c.cfg;
    other.mode = c.cfg.mode == Mode::Speculative ? Mode::Traditional : Mode::Speculative;
    differ += oracle::unsafe(p, m, c.cfg, 2) != oracle::unsafe(p, m, other, 2);
  }
  EXPECT_GT(differ, 5);
}

}  // namespace
