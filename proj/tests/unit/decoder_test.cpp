#include <gtest/gtest.h>

#include <vector>

#include "streamlab/decoder.hpp"
#include "streamlab/errors.hpp"
#include "streamlab/validation/oracles.hpp"

using namespace streamlab;

namespace {

CodedCombo combo(std::vector<PacketIndex> support, std::uint64_t slot = 0) {
  return make_random_combo(std::move(support), slot, 12345);
}

std::vector<PacketIndex> range(PacketIndex lo, PacketIndex hi) {
  std::vector<PacketIndex> v;
  for (PacketIndex k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

}  // namespace

TEST(WidthRules, Examples) {
  const std::vector<int> a{1, 3, 3, 3}, b{3, 3}, empty{}, c{3, 3, 3}, d{1, 1, 1};
  EXPECT_EQ(prefix_decodable_count(a), 3);
  EXPECT_EQ(prefix_decodable_count(b), 0);
  EXPECT_EQ(prefix_decodable_count(empty), 0);
  EXPECT_EQ(prefix_rank(a), 3);
  EXPECT_EQ(prefix_rank(c), 3);
  EXPECT_EQ(prefix_rank(d), 1);
  EXPECT_EQ(prefix_rank(empty), 0);
}

TEST(GenericRank, Examples) {
  const std::vector<PacketIndex> u1{1}, u3{1, 2, 3};
  const std::vector<CodedCombo> one{combo({1})};
  auto r = generic_rank(one, u1);
  EXPECT_EQ(r.rank, 1U);
  EXPECT_EQ(r.determined, (std::vector<PacketIndex>{1}));

  const std::vector<CodedCombo> two{combo(range(1, 3), 1), combo(range(1, 3), 2)};
  r = generic_rank(two, u3);
  EXPECT_EQ(r.rank, 2U);
  EXPECT_TRUE(r.determined.empty());

  const std::vector<CodedCombo> four{combo({1}, 1), combo(range(1, 3), 2), combo(range(1, 3), 3),
                                     combo(range(1, 3), 4)};
  r = generic_rank(four, u3);
  EXPECT_EQ(r.rank, 3U);
  EXPECT_EQ(r.determined, u3);

  EXPECT_EQ(generic_rank({}, u3).rank, 0U);
}

TEST(WidthRules, AgreeWithFieldEliminationExhaustivelyAndAtRandom) {
  const auto rep = validation::check_prefix_rules(8, 10'000, 2024);
  EXPECT_EQ(rep.exhaustive_cases, 67U);  // partitions of 0..8
  EXPECT_EQ(rep.rank_mismatches, 0U) << rep.first_mismatch;
  EXPECT_EQ(rep.prefix_mismatches, 0U) << rep.first_mismatch;
}

TEST(Receiver, DirectInOrderHit) {
  ReceiverState rx;
  EXPECT_EQ(rx.ingest(combo({1}), true).delivered, 1U);
  const auto r = rx.ingest(combo({2}), true);
  EXPECT_EQ(r.delivered, 1U);
  EXPECT_TRUE(r.innovative);
  EXPECT_EQ(rx.delivered_prefix(), 2U);
}

TEST(Receiver, BurstReleaseAfterGapFilled) {
  ReceiverState rx;
  EXPECT_EQ(rx.ingest(combo({1}, 1), true).delivered, 1U);
  EXPECT_EQ(rx.ingest(combo({3}, 2), true).delivered, 0U);
  EXPECT_EQ(rx.ingest(combo({4}, 3), true).delivered, 0U);
  EXPECT_TRUE(rx.decoded(3));
  EXPECT_EQ(rx.ingest(combo({2}, 4), true).delivered, 3U);
  EXPECT_EQ(rx.delivered_prefix(), 4U);
}

TEST(Receiver, BuffersUndeterminedCombination) {
  ReceiverState rx;
  const auto r = rx.ingest(combo(range(1, 3)), true);
  EXPECT_EQ(r.delivered, 0U);
  EXPECT_TRUE(r.innovative);
  EXPECT_EQ(rx.buffered(), 1U);
  EXPECT_EQ(rx.decoded_count(), 0U);
}

TEST(Receiver, ErasedAndDependentCombosChangeNothing) {
  ReceiverState rx;
  rx.ingest(combo({1}, 1), true);
  const auto erased = rx.ingest(combo(range(2, 3), 2), false);
  EXPECT_FALSE(erased.innovative);
  EXPECT_EQ(rx.buffered(), 0U);
  const auto dependent = rx.ingest(combo({1}, 3), true);
  EXPECT_FALSE(dependent.innovative);
  EXPECT_EQ(dependent.delivered, 0U);
  EXPECT_EQ(rx.decoded_count(), 1U);
}

TEST(Receiver, WidthPatternMatchesRule) {
  // Widths {1,3,3,3} over s1..s3 decode the whole prefix.
  ReceiverState rx;
  std::uint64_t delivered = 0;
  delivered += rx.ingest(combo({1}, 1), true).delivered;
  for (std::uint64_t s = 2; s <= 4; ++s) delivered += rx.ingest(combo(range(1, 3), s), true).delivered;
  EXPECT_EQ(delivered, 3U);
}

TEST(SeenMarks, DefinitionExamples) {
  ReceiverState rx;
  rx.mark_seen(combo(range(1, 3)), true);
  EXPECT_TRUE(rx.seen().contains(3));
  EXPECT_EQ(rx.seen().size(), 1U);

  ReceiverState single;
  single.mark_seen(combo({1}), true);
  EXPECT_TRUE(single.seen().contains(1));

  ReceiverState erased;
  erased.mark_seen(combo(range(1, 2)), false);
  EXPECT_EQ(erased.seen().size(), 0U);
}

TEST(SeenMarks, RejectsNonPrefixSupport) {
  ReceiverState rx;
  EXPECT_THROW(rx.mark_seen(combo({2, 3}), true), ModelViolation);
}

TEST(SeenMarks, VisibleToTransmitterOnlyAtFeedback) {
  ReceiverState rx;
  rx.mark_seen(combo({1}), true);
  EXPECT_EQ(rx.seen_at_feedback().size(), 0U);
  EXPECT_EQ(rx.seen_since_feedback(), 1U);
  rx.feedback_boundary();
  EXPECT_EQ(rx.seen_at_feedback().size(), 1U);
  EXPECT_EQ(rx.seen_since_feedback(), 0U);
}

TEST(SeenSet, PrefixAbsorbsScatteredMarks) {
  SeenSet s;
  s.insert(2);
  s.insert(4);
  EXPECT_EQ(s.prefix(), 0U);
  EXPECT_EQ(s.lowest_unseen(3), (std::vector<PacketIndex>{1, 3, 5}));
  s.insert(1);
  EXPECT_EQ(s.prefix(), 2U);
  s.insert(3);
  EXPECT_EQ(s.prefix(), 4U);
  EXPECT_EQ(s.size(), 4U);
}
