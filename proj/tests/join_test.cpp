#include <gtest/gtest.h>

#include <random>
#include <set>

#include "rpnjoin/join.hpp"
#include "support/oracles.hpp"

namespace rpnjoin {
namespace {

using testing::brute_force_join;
using testing::sorted_tuples;

Relation keyed(std::string name, std::initializer_list<Value> keys) {
  Relation r(std::move(name), 1);
  Value serial = 0;
  for (Value k : keys) {
    const Value p = serial++;
    r.append(k, std::span<const Value>(&p, 1));
  }
  return r;
}

Relation sized(std::string name, std::size_t n, Value key_hi, std::uint64_t seed) {
  return generate_relation(std::move(name), n, {0, key_hi}, seed);
}

std::uint64_t pages(std::size_t n, std::uint64_t page_size) { return (n + page_size - 1) / page_size; }

Relation run(JoinAlgorithm a, const Relation& r, const Relation& s, CostCounters& c,
             JoinResultPolicy policy = {}) {
  return join(a, r, s, policy, c);
}

class EveryAlgorithm : public ::testing::TestWithParam<JoinAlgorithm> {};

TEST_P(EveryAlgorithm, SingleMatch) {
  CostCounters c;
  auto out = run(GetParam(), keyed("R", {1, 2}), keyed("S", {2, 3}), c);
  ASSERT_EQ(out.cardinality(), 1u);
  EXPECT_EQ(out.tuple(0), (Tuple{2, {1, 0}}));
  EXPECT_EQ(out.arity(), 2u);
}

TEST_P(EveryAlgorithm, EmptyOperands) {
  CostCounters c;
  EXPECT_TRUE(run(GetParam(), Relation("R", 1), keyed("S", {1}), c).empty());
  EXPECT_TRUE(run(GetParam(), keyed("R", {1}), Relation("S", 1), c).empty());
  EXPECT_TRUE(run(GetParam(), Relation("R", 1), Relation("S", 1), c).empty());
}

TEST_P(EveryAlgorithm, ManyToManyRuns) {
  CostCounters c;
  // Sum over keys of cR * cS: 2 * 3 = 6.
  EXPECT_EQ(run(GetParam(), keyed("R", {1, 1}), keyed("S", {1, 1, 1}), c).cardinality(), 6u);
  // 2 * 2 = 4, all with key 2.
  auto out = run(GetParam(), keyed("R", {1, 2, 2}), keyed("S", {2, 2, 3}), c);
  ASSERT_EQ(out.cardinality(), 4u);
  for (Value k : out.keys()) EXPECT_EQ(k, 2);
  // 1 * 2 = 2: duplicate keys on the inner side.
  EXPECT_EQ(run(GetParam(), keyed("R", {1}), keyed("S", {1, 1}), c).cardinality(), 2u);
}

TEST_P(EveryAlgorithm, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 77);
  for (int trial = 0; trial < 250; ++trial) {
    auto r = testing::random_relation(rng, "R", 64, 16, 1 + trial % 3);
    auto s = testing::random_relation(rng, "S", 64, 16, 1 + trial % 2);
    CostCounters c;
    c.page_size = 1 + trial % 9;
    auto out = run(GetParam(), r, s, c);
    ASSERT_EQ(sorted_tuples(out), brute_force_join(r.tuples(), s.tuples())) << "trial " << trial;
    EXPECT_EQ(out.cardinality(), expected_join_cardinality(key_histogram(r), key_histogram(s)));
    EXPECT_EQ(out.arity(), r.arity() + s.arity());
  }
}

TEST_P(EveryAlgorithm, OutputKeysAppearInBothInputs) {
  auto r = sized("R", 200, 40, 1);
  auto s = sized("S", 200, 60, 2);
  CostCounters c;
  auto out = run(GetParam(), r, s, c);
  const std::set<Value> rk(r.keys().begin(), r.keys().end());
  const std::set<Value> sk(s.keys().begin(), s.keys().end());
  for (Value k : out.keys()) {
    EXPECT_TRUE(rk.count(k) && sk.count(k));
  }
}

TEST_P(EveryAlgorithm, SwappingOperandsSwapsPayloadHalves) {
  std::mt19937_64 rng(9);
  auto r = testing::random_relation(rng, "R", 50, 6, 2);
  auto s = testing::random_relation(rng, "S", 50, 6, 1);
  CostCounters c;
  auto rs = run(GetParam(), r, s, c);
  auto sr = run(GetParam(), s, r, c);
  std::vector<Tuple> swapped;
  for (auto t : sr.tuples()) {
    std::rotate(t.payload.begin(), t.payload.begin() + static_cast<std::ptrdiff_t>(s.arity()), t.payload.end());
    swapped.push_back(std::move(t));
  }
  std::sort(swapped.begin(), swapped.end());
  EXPECT_EQ(swapped, sorted_tuples(rs));
}

TEST_P(EveryAlgorithm, CardinalityCap) {
  auto r = keyed("R", {1, 1, 1});
  auto s = keyed("S", {1, 1, 1});
  CostCounters c;
  EXPECT_EQ(run(GetParam(), r, s, c, JoinResultPolicy{9}).cardinality(), 9u);
  try {
    run(GetParam(), r, s, c, JoinResultPolicy{8});
    FAIL() << "expected the cap to trip";
  } catch (const CardinalityLimitError& e) {
    EXPECT_EQ(e.limit(), 8u);
  }
}

TEST_P(EveryAlgorithm, InputsAreNotModified) {
  auto r = sized("R", 100, 10, 3);
  auto s = sized("S", 100, 10, 4);
  const auto r_before = r.tuples();
  const auto s_before = s.tuples();
  CostCounters c;
  run(GetParam(), r, s, c);
  EXPECT_EQ(r.tuples(), r_before);
  EXPECT_EQ(s.tuples(), s_before);
}

TEST_P(EveryAlgorithm, ZeroPageSizeIsRejected) {
  CostCounters c;
  c.page_size = 0;
  EXPECT_THROW(run(GetParam(), keyed("R", {1}), keyed("S", {1}), c), std::invalid_argument);
}

INSTANTIATE_TEST_SUITE_P(Join, EveryAlgorithm, ::testing::ValuesIn(kAllJoinAlgorithms),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(NestedLoopJoin, ComparesEveryPair) {
  for (auto [n, m] : {std::pair{0, 5}, {5, 0}, {7, 13}, {100, 64}}) {
    CostCounters c;
    nested_loop_join(sized("R", n, 4, 1), sized("S", m, 4, 2), {}, c);
    EXPECT_EQ(c.tuple_comparisons, static_cast<std::uint64_t>(n) * m);
  }
}

TEST(BlockNestedLoopJoin, PageReads) {
  CostCounters c;  // page_size 64
  block_nested_loop_join(sized("R", 128, 10, 1), sized("S", 128, 10, 2), {}, c);
  EXPECT_EQ(c.page_reads, 6u);  // 2 + 2 * 2

  CostCounters empty_inner;
  auto out = block_nested_loop_join(sized("R", 130, 10, 1), Relation("S", 1), {}, empty_inner);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(empty_inner.page_reads, 3u);
}

TEST(RockingNestedLoopJoin, PageReads) {
  CostCounters c;
  rocking_nested_loop_join(sized("R", 128, 10, 1), sized("S", 128, 10, 2), {}, c);
  EXPECT_EQ(c.page_reads, 5u);  // 2 + 2 + 1 * 1

  // One outer page: nothing to rock.
  CostCounters single, block;
  rocking_nested_loop_join(sized("R", 10, 10, 1), sized("S", 300, 10, 2), {}, single);
  block_nested_loop_join(sized("R", 10, 10, 1), sized("S", 300, 10, 2), {}, block);
  EXPECT_EQ(single.page_reads, 1u + 5u);
  EXPECT_EQ(single.page_reads, block.page_reads);
}

// Page counts for both algorithms against the closed forms, plus the claim
// that rocking never reads more and reads strictly less from 2x2 pages up.
TEST(RockingNestedLoopJoin, NeverReadsMoreThanBlockNested) {
  for (std::uint64_t page_size : {1, 3, 8, 64}) {
    for (std::size_t n : {1, 2, 7, 8, 9, 24, 65, 130}) {
      for (std::size_t m : {1, 2, 5, 8, 17, 64, 129}) {
        auto r = sized("R", n, 5, n);
        auto s = sized("S", m, 5, m + 1000);
        CostCounters block, rock;
        block.page_size = rock.page_size = page_size;
        auto a = block_nested_loop_join(r, s, {}, block);
        auto b = rocking_nested_loop_join(r, s, {}, rock);
        const auto pr = pages(n, page_size);
        const auto ps = pages(m, page_size);
        EXPECT_EQ(block.page_reads, pr + pr * ps);
        EXPECT_EQ(rock.page_reads, pr + ps + (pr - 1) * (ps - 1));
        EXPECT_LE(rock.page_reads, block.page_reads);
        if (pr >= 2 && ps >= 2) {
          EXPECT_LT(rock.page_reads, block.page_reads);
        }
        EXPECT_EQ(block.tuple_comparisons, static_cast<std::uint64_t>(n) * m);
        EXPECT_EQ(rock.tuple_comparisons, static_cast<std::uint64_t>(n) * m);
        EXPECT_TRUE(multiset_equal(a, b));
      }
    }
  }
}

TEST(HashJoin, EmptyOuterDoesNotProbe) {
  CostCounters c;
  EXPECT_TRUE(hash_join(Relation("R", 1), sized("S", 50, 5, 1), {}, c).empty());
  EXPECT_EQ(c.tuple_comparisons, 0u);
}

TEST(JoinNames, AreSynthesizedAndBounded) {
  CostCounters c;
  auto out = sort_merge_join(keyed("R1", {1}), keyed("R2", {1}), {}, c);
  EXPECT_EQ(out.name(), "R1_R2");
  Relation acc = keyed("R0", {1});
  for (int i = 1; i < 40; ++i) acc = sort_merge_join(acc, keyed("R" + std::to_string(i), {1}), {}, c);
  EXPECT_LE(acc.name().size(), 48u);
}

TEST(ExpectedJoinCardinality, Examples) {
  EXPECT_EQ(expected_join_cardinality({{1, 2}}, {{2, 3}}), 0u);
  EXPECT_EQ(expected_join_cardinality({{1, 2}}, {{1, 3}}), 6u);
  EXPECT_EQ(expected_join_cardinality({}, {{1, 3}}), 0u);
  EXPECT_EQ(expected_join_cardinality({{1, 2}, {4, 5}, {9, 1}}, {{0, 7}, {4, 2}, {9, 3}}), 13u);
}

TEST(ExpectedJoinCardinality, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = testing::random_relation(rng, "R", 40, 10);
    auto s = testing::random_relation(rng, "S", 40, 10);
    EXPECT_EQ(expected_join_cardinality(key_histogram(r), key_histogram(s)),
              brute_force_join(r.tuples(), s.tuples()).size());
  }
}

TEST(ExpectedMultiwayCardinality, ProductsAndSaturation) {
  const std::vector<KeyHistogram> h{{{1, 2}, {2, 3}}, {{1, 5}, {2, 1}}, {{1, 1}, {3, 9}}};
  EXPECT_EQ(expected_multiway_cardinality(h), 10u);
  EXPECT_EQ(expected_multiway_cardinality(std::span(h).first(2)), 13u);
  EXPECT_EQ(expected_multiway_cardinality({}), 0u);

  std::vector<KeyHistogram> huge(5, KeyHistogram{{0, 1u << 20}});
  EXPECT_EQ(expected_multiway_cardinality(huge), std::numeric_limits<std::uint64_t>::max());
}

TEST(JoinAlgorithmNames, RoundTrip) {
  for (auto a : kAllJoinAlgorithms) EXPECT_EQ(parse_join_algorithm(to_string(a)), a);
  EXPECT_FALSE(parse_join_algorithm("merge"));
}

}  // namespace
}  // namespace rpnjoin
