#include <memory>

#include <gtest/gtest.h>

#include "axcat/engine.hpp"

using namespace axcat;

namespace {

const char* kBoundsCheck =
    "layout input idx@0 A[2]@1 B[2]@3 secret@6\n"
    "regs temp\n"
    "thread 0:\n"
    "1: load r1, idx\n"
    "2: r2 <- r1 < A.size\n"
    "3: beqz r2, 7\n"
    "4: load r3, A + r1\n"
    "5: load r4, B + r3\n"
    "6: temp <- temp & r4\n"
    "7: skip\n";

// Single-thread execution of kBoundsCheck with every load reading its init.
CandidateExecution gadget(bool taken, bool cp, Value idx) {
  auto p = std::make_shared<const Program>(parse_program(kBoundsCheck));
  CandidateExecution x = build_events(p, {PathChoice{{taken}, {cp}}}, 3);
  x.inputs[0] = idx;
  for (EventId l : x.loads()) x.reads[l] = kFromInit;
  const Propagation prop = propagate_values(x);
  EXPECT_EQ(prop.status, Propagation::Status::Consistent);
  apply_valuation(x, prop.valuation);
  return x;
}

SpecConfig speculative(unsigned w) {
  SpecConfig c;
  c.mode = Mode::Speculative;
  c.window = w;
  return c;
}

TEST(Events, MispredictedPathIsTransient) {
  const CandidateExecution x = gadget(false, false, 5);
  ASSERT_EQ(x.program_events, 7U);
  for (EventId e = 0; e < 3; ++e) EXPECT_FALSE(x.events[e].transient);
  for (EventId e = 3; e < 7; ++e) EXPECT_TRUE(x.events[e].transient);
  EXPECT_EQ(x.transient.count(), 4U);
}

TEST(Events, ValuesFollowThePath) {
  const CandidateExecution x = gadget(false, false, 5);
  EXPECT_EQ(x.events[0].val, 5U);
  EXPECT_EQ(x.events[1].val, 0U);
  EXPECT_EQ(x.events[3].addr, 6U);
  EXPECT_EQ(x.events[3].val, secret_sentinel(3));
  const auto leaks = secret_reads(x);
  ASSERT_EQ(leaks.size(), 1U);
  EXPECT_EQ(leaks[0], 3U);
  EXPECT_EQ(x.events[x.source_of(3)].kind, EventKind::SecretInit);
}

TEST(ControlFlow, TraditionalRejectsTransientEvents) {
  EXPECT_FALSE(check_traditional_cf(gadget(false, false, 5)));
  EXPECT_TRUE(check_traditional_cf(gadget(true, true, 5)));
  EXPECT_TRUE(check_traditional_cf(gadget(false, true, 1)));
}

TEST(ControlFlow, CommittedEdgeMustAgreeWithCondition) {
  EXPECT_FALSE(check_speculative_cf(gadget(false, true, 5), speculative(8)));
  EXPECT_FALSE(check_speculative_cf(gadget(true, true, 1), speculative(8)));
  EXPECT_TRUE(check_speculative_cf(gadget(true, true, 5), speculative(8)));
}

TEST(ControlFlow, MispredictionMustContradictCondition) {
  EXPECT_TRUE(check_speculative_cf(gadget(false, false, 5), speculative(8)));
  EXPECT_FALSE(check_speculative_cf(gadget(false, false, 1), speculative(8)));
  SpecConfig c = speculative(8);
  c.always_mispredict = false;
  EXPECT_FALSE(check_speculative_cf(gadget(false, false, 5), c));
}

TEST(Window, CountsConsecutiveTransientEvents) {
  const CandidateExecution x = gadget(false, false, 5);
  EXPECT_FALSE(check_window(x, 4));
  EXPECT_TRUE(check_window(x, 5));
  for (unsigned w = 5; w < 12; ++w) EXPECT_TRUE(check_window(x, w));
  EXPECT_TRUE(check_window(gadget(true, true, 5), 1));
}

TEST(Fences, TransientFenceRejected) {
  auto p = std::make_shared<const Program>(parse_program(
      "layout input idx@0 secret@3\nthread 0:\n1: load r1, idx\n2: beqz r1, 4\n"
      "3: fence\n4: skip\n"));
  const CandidateExecution spec = build_events(p, {PathChoice{{false}, {false}}}, 3);
  EXPECT_TRUE(spec.fence_transient);
  EXPECT_FALSE(check_fences(spec));
  const CandidateExecution comm = build_events(p, {PathChoice{{false}, {true}}}, 3);
  EXPECT_TRUE(check_fences(comm));
}

TEST(Paths, EnumerationCoversBothDirectionsAndPredictions) {
  const Program p = parse_program(kBoundsCheck);
  EXPECT_EQ(enumerate_paths(p.threads[0], speculative(8)).size(), 4U);
  EXPECT_EQ(enumerate_paths(p.threads[0], SpecConfig{}).size(), 2U);
}

TEST(Propagation, RfCycleIsUnresolvedThenChecked) {
  auto p = std::make_shared<const Program>(parse_program(
      "layout x@0 y@1 secret@3\n"
      "thread 0:\n1: load r1, 0\n2: store 1, r1\n"
      "thread 1:\n1: load r2, 1\n2: store 0, r2\n"));
  CandidateExecution x = build_events(p, {PathChoice{}, PathChoice{}}, 2);
  x.reads[0] = 3;
  x.reads[2] = 1;
  const Propagation open = propagate_values(x);
  EXPECT_EQ(open.status, Propagation::Status::Unresolved);
  EXPECT_FALSE(open.unresolved.empty());
  std::map<EventId, Value> guess;
  for (EventId l : open.unresolved) guess[l] = 2;
  EXPECT_EQ(propagate_values(x, guess).status, Propagation::Status::Consistent);
}

TEST(BaseRelations, PoAddrLocAndInits) {
  const CandidateExecution x = gadget(false, false, 5);
  const BaseRelations b = base_relations(x);
  EXPECT_TRUE(b.po.contains(0, 3));
  EXPECT_FALSE(b.po.contains(3, 0));
  EXPECT_TRUE(b.addr.contains(0, 3));
  EXPECT_TRUE(b.addr.contains(3, 4));
  EXPECT_TRUE(b.po.acyclic());
  const auto secret = x.init_event(6);
  ASSERT_TRUE(secret);
  EXPECT_TRUE(b.loc.contains(*secret, 3));
  EXPECT_TRUE(b.W.contains(*secret));
}

}  // namespace
