#include <random>
#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "axcat/relation.hpp"

using axcat::EventSet;
using axcat::Relation;

namespace {

using Pairs = std::set<std::pair<std::size_t, std::size_t>>;

Pairs to_pairs(const Relation& r) {
  auto v = r.pairs();
  return {v.begin(), v.end()};
}

Relation random_relation(std::mt19937& rng, std::size_t n, double density) {
  std::bernoulli_distribution coin(density);
  Relation r(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (coin(rng)) r.insert(a, b);
  return r;
}

Pairs compose(const Pairs& x, const Pairs& y) {
  Pairs out;
  for (auto [a, b] : x)
    for (auto [c, d] : y)
      if (b == c) out.emplace(a, d);
  return out;
}

Pairs closure(Pairs x) {
  while (true) {
    Pairs next = x;
    for (auto p : compose(x, x)) next.insert(p);
    if (next == x) return x;
    x = std::move(next);
  }
}

class RelationLaws : public ::testing::TestWithParam<unsigned> {};

TEST_P(RelationLaws, AgreeWithPairSets) {
  std::mt19937 rng(GetParam());
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const double d = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
    const Relation r = random_relation(rng, n, d);
    const Relation s = random_relation(rng, n, d);
    const Relation t = random_relation(rng, n, d);
    const Pairs pr = to_pairs(r), ps = to_pairs(s);

    EXPECT_EQ(r.inverse().inverse(), r);
    EXPECT_EQ(r.compose(s).inverse(), s.inverse().compose(r.inverse()));
    EXPECT_EQ(r.compose(s).compose(t), r.compose(s.compose(t)));
    EXPECT_EQ(r.compose(s | t), r.compose(s) | r.compose(t));
    EXPECT_EQ(to_pairs(r.compose(s)), compose(pr, ps));

    const Relation plus = r.transitive_closure();
    EXPECT_EQ(to_pairs(plus), closure(pr));
    EXPECT_EQ(plus.transitive_closure(), plus);
    EXPECT_TRUE(plus.compose(plus).subset_of(plus));
    EXPECT_TRUE(r.subset_of(plus));
    EXPECT_EQ(plus, r | r.compose(plus));

    EventSet all(n);
    for (std::size_t e = 0; e < n; ++e) all.insert(e);
    const Relation id = Relation::identity(all);
    EXPECT_EQ(r.reflexive_transitive_closure(), plus | id);
    EXPECT_EQ(id.compose(r), r);
    EXPECT_EQ(r.compose(id), r);

    EXPECT_EQ(r.acyclic(), plus.irreflexive());
    EXPECT_EQ(to_pairs(r & s).size() + to_pairs(r | s).size(), pr.size() + ps.size());
    EXPECT_EQ((r - s) & s, Relation(n));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RelationLaws, ::testing::Range(0U, 10U));

TEST(Relation, ProductAndRestrict) {
  EventSet a(4), b(4);
  a.insert(0);
  a.insert(1);
  b.insert(2);
  const Relation p = Relation::product(a, b);
  EXPECT_EQ(to_pairs(p), (Pairs{{0, 2}, {1, 2}}));
  EXPECT_EQ(to_pairs(p.restrict(a)), Pairs{});
  EXPECT_EQ(p.domain(), a);
}

TEST(Relation, CycleDetection) {
  Relation r(3);
  r.insert(0, 1);
  r.insert(1, 2);
  EXPECT_TRUE(r.acyclic());
  r.insert(2, 0);
  EXPECT_FALSE(r.acyclic());
  EXPECT_TRUE(r.irreflexive());
}

TEST(Relation, EmptyUniverse) {
  Relation r(0);
  EXPECT_TRUE(r.empty());
  EXPECT_TRUE(r.transitive_closure().empty());
  EXPECT_TRUE(r.acyclic());
}

}  // namespace
