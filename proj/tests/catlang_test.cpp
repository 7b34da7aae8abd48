#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "axcat/models.hpp"

using namespace axcat;

namespace {

// One thread of W/R events, po total in index order, no fences.
BaseRelations chain(const std::string& kinds) {
  const std::size_t n = kinds.size();
  BaseRelations b;
  b.E = b.M = b.W = b.R = EventSet(n);
  b.po = b.fence = b.addr = b.loc = b.rf = b.co = b.rfe = b.srf = Relation(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.E.insert(i);
    b.M.insert(i);
    (kinds[i] == 'W' ? b.W : b.R).insert(i);
    for (std::size_t j = i + 1; j < n; ++j) b.po.insert(i, j);
  }
  return b;
}

SpecConfig buffer(unsigned w) {
  SpecConfig c;
  c.buffer = w;
  return c;
}

ErrorKind cat_error(const std::string& text) {
  try {
    parse_cat(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorKind::Io;
}

TEST(CatParse, Assertions) {
  const CatModel m = parse_cat("\"demo\"\nlet r = po | rf\nacyclic r as ok\nempty rf & co\n");
  EXPECT_EQ(m.name, "demo");
  ASSERT_EQ(m.definitions.size(), 1U);
  ASSERT_EQ(m.assertions.size(), 2U);
  EXPECT_EQ(m.assertions[0].kind, AssertionKind::Acyclic);
  EXPECT_EQ(m.assertions[0].as_name, "ok");
  EXPECT_EQ(m.assertions[1].kind, AssertionKind::Empty);
}

TEST(CatParse, Errors) {
  EXPECT_EQ(cat_error("acyclic po | nope\n"), ErrorKind::UndefinedName);
  EXPECT_EQ(cat_error("t = po \\ t\n"), ErrorKind::NonMonotoneRecursion);
  EXPECT_EQ(cat_error("a = po\na = rf\n"), ErrorKind::DuplicateDefinition);
  EXPECT_EQ(cat_error("po = rf\n"), ErrorKind::DuplicateDefinition);
  EXPECT_EQ(cat_error("a = po |\n"), ErrorKind::Syntax);
  EXPECT_EQ(cat_error("acyclic\n"), ErrorKind::Syntax);
}

TEST(CatParse, MutualRecursionThroughDifferenceRejected) {
  EXPECT_EQ(cat_error("a = po | b\nb = rf \\ a\n"), ErrorKind::NonMonotoneRecursion);
  EXPECT_NO_THROW(parse_cat("a = po | b\nb = a \\ rf\n"));
}

TEST(CatEval, WinAtBufferTwoMatchesHandExpansion) {
  const CatModel stl = bundled_model("stl");
  const CatModel hand = parse_cat("win = [W];po;[W];po;[W];po;[R]\n");
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    std::string kinds;
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int k = 0; k < n; ++k) kinds += std::bernoulli_distribution(0.6)(rng) ? 'W' : 'R';
    const BaseRelations b = chain(kinds);
    const Relation win = evaluate(stl, b, buffer(2)).at("win");
    EXPECT_EQ(win, evaluate(hand, b, buffer(2)).at("win")) << kinds;
    // Direct count: at least two stores strictly between the pair.
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        int between = 0;
        for (int m = a + 1; m < c; ++m) between += kinds[m] == 'W';
        const bool expect = kinds[a] == 'W' && kinds[c] == 'R' && a < c && between >= 2;
        EXPECT_EQ(win.contains(a, c), expect) << kinds << " " << a << "," << c;
      }
  }
}

TEST(CatEval, BoundedCompositionCountsCopies) {
  Relation r(5);
  for (EventId i = 0; i + 1 < 5; ++i) r.insert(i, i + 1);
  EXPECT_EQ(bounded_compose(r, 0), r);
  EXPECT_EQ(bounded_compose(r, 1), r.compose(r));
  EXPECT_TRUE(bounded_compose(r, 1).contains(0, 2));
  EXPECT_FALSE(bounded_compose(r, 1).contains(0, 1));
  EXPECT_THROW(bounded_compose(r, -1), Error);
}

TEST(CatEval, RecursiveDefinitionIsLeastFixpoint) {
  const CatModel m = parse_cat("t = po | (t;po)\nu = (u;u) | rf\n");
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    BaseRelations b = chain(std::string(static_cast<std::size_t>(n), 'W'));
    b.po = Relation(n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        if (std::bernoulli_distribution(0.2)(rng)) b.po.insert(a, c);
        if (std::bernoulli_distribution(0.2)(rng)) b.rf.insert(a, c);
      }
    const Bindings env = evaluate(m, b, SpecConfig{});
    const Relation& t = env.at("t");
    EXPECT_EQ(t, b.po | t.compose(b.po));
    EXPECT_EQ(t, b.po.transitive_closure());
    EXPECT_EQ(env.at("u"), b.rf.transitive_closure());
  }
}

TEST(CatEval, AssertionsReportFirstViolation) {
  const CatModel m = parse_cat("irreflexive po\nacyclic po | po^-1\n");
  BaseRelations b = chain("WR");
  const AssertionResult r = check_model(m, b, SpecConfig{});
  EXPECT_FALSE(r.consistent);
  ASSERT_TRUE(r.violated);
  EXPECT_EQ(*r.violated, 1U);
}

TEST(Models, BundledTextMatchesFiles) {
  for (const auto& bm : kBundledModels) {
    std::ifstream in(std::string(AXCAT_MODELS_DIR) + "/" + std::string(bm.name) + ".cat",
                     std::ios::binary);
    ASSERT_TRUE(in) << bm.name;
    std::ostringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), bm.text) << bm.name;
    EXPECT_EQ(bundled_model(bm.name).name, bm.name);
  }
  EXPECT_THROW(bundled_model("sc"), Error);
}

TEST(Models, UsesSrfOnlyInPsf) {
  for (const auto& bm : kBundledModels)
    EXPECT_EQ(bundled_model(bm.name).uses("srf"), bm.name == "psf") << bm.name;
}

}  // namespace
