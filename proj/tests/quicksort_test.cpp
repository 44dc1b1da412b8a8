#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rpnjoin/quicksort.hpp"

namespace rpnjoin {
namespace {

std::vector<Tuple> with_keys(std::initializer_list<Value> keys) {
  std::vector<Tuple> out;
  Value serial = 0;
  for (Value k : keys) out.push_back({k, {serial++}});
  return out;
}

std::vector<Value> keys_of(const std::vector<Tuple>& t) {
  std::vector<Value> k;
  for (const auto& x : t) k.push_back(x.key);
  return k;
}

// Reference: std::sort of the full tuples. Same multiset, same key sequence.
void expect_sorted_permutation(std::vector<Tuple> input) {
  auto expected = input;
  std::sort(expected.begin(), expected.end());
  quicksort_by_key(input);
  ASSERT_TRUE(is_sorted_by_key(input));
  EXPECT_EQ(keys_of(input), keys_of(expected));
  std::sort(input.begin(), input.end());
  EXPECT_EQ(input, expected);
}

TEST(Quicksort, SmallCases) {
  auto t = with_keys({3, 1, 2});
  quicksort_by_key(t);
  EXPECT_EQ(keys_of(t), (std::vector<Value>{1, 2, 3}));

  std::vector<Tuple> empty;
  quicksort_by_key(empty);
  EXPECT_TRUE(empty.empty());
}

TEST(Quicksort, IsSortedByKey) {
  EXPECT_TRUE(is_sorted_by_key(std::vector<Tuple>{}));
  EXPECT_TRUE(is_sorted_by_key(with_keys({1, 1, 2})));
  EXPECT_FALSE(is_sorted_by_key(with_keys({2, 1})));
}

TEST(Quicksort, TenThousandRandomTuples) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<Value> key(-500, 500);
  std::vector<Tuple> t;
  for (Value i = 0; i < 10'000; ++i) t.push_back({key(rng), {i}});
  expect_sorted_permutation(std::move(t));
}

TEST(Quicksort, EveryLengthAroundTheCutoff) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 0; n <= 3 * static_cast<std::size_t>(kInsertionSortCutoff) + 2; ++n) {
    for (Value range : {1, 3, 1000}) {
      std::uniform_int_distribution<Value> key(0, range - 1);
      std::vector<Tuple> t;
      for (std::size_t i = 0; i < n; ++i) t.push_back({key(rng), {static_cast<Value>(i)}});
      expect_sorted_permutation(std::move(t));
    }
  }
}

TEST(Quicksort, AdversarialInputsOfHundredThousand) {
  constexpr Value n = 100'000;
  std::vector<Tuple> ascending, descending, constant, organ_pipe;
  for (Value i = 0; i < n; ++i) {
    ascending.push_back({i, {i}});
    descending.push_back({n - i, {i}});
    constant.push_back({7, {i}});
    organ_pipe.push_back({i < n / 2 ? i : n - i, {i}});
  }
  expect_sorted_permutation(std::move(ascending));
  expect_sorted_permutation(std::move(descending));
  expect_sorted_permutation(std::move(constant));
  expect_sorted_permutation(std::move(organ_pipe));
}

TEST(Quicksort, ProjectionOverPlainStructs) {
  struct Row {
    Value key;
    int tag;
  };
  std::vector<Row> rows{{5, 0}, {-1, 1}, {5, 2}, {0, 3}};
  quicksort_by_key(rows.begin(), rows.end(), &Row::key);
  EXPECT_TRUE(is_sorted_by_key(std::span<const Row>(rows), &Row::key));
}

}  // namespace
}  // namespace rpnjoin
