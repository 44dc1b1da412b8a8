#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <iterator>
#include <span>
#include <utility>
#include <vector>

#include "rpnjoin/relation.hpp"

namespace rpnjoin {

// Segments at or below this length are finished with insertion sort.
inline constexpr std::ptrdiff_t kInsertionSortCutoff = 16;

struct TupleKey {
  Value operator()(const Tuple& t) const noexcept { return t.key; }
};

namespace detail {

template <std::random_access_iterator It, class Proj>
void insertion_sort_by_key(It first, It last, Proj& key) {
  if (first == last) {
    return;
  }
  for (It i = std::next(first); i != last; ++i) {
    auto value = std::move(*i);
    const auto k = std::invoke(key, value);
    It j = i;
    while (j != first && k < std::invoke(key, *std::prev(j))) {
      *j = std::move(*std::prev(j));
      --j;
    }
    *j = std::move(value);
  }
}

// Hoare partition of the inclusive range [lo, hi] around the median of the
// first, middle and last keys. Returns p with lo <= p < hi such that every key
// in [lo, p] is <= every key in [p + 1, hi].
template <std::random_access_iterator It, class Proj>
It partition_median_of_three(It lo, It hi, Proj& key) {
  using std::iter_swap;
  It mid = lo + (hi - lo) / 2;
  if (std::invoke(key, *mid) < std::invoke(key, *lo)) iter_swap(mid, lo);
  if (std::invoke(key, *hi) < std::invoke(key, *lo)) iter_swap(hi, lo);
  if (std::invoke(key, *hi) < std::invoke(key, *mid)) iter_swap(hi, mid);
  const auto pivot = std::invoke(key, *mid);

  It i = lo - 1;
  It j = hi + 1;
  while (true) {
    do {
      ++i;
    } while (std::invoke(key, *i) < pivot);
    do {
      --j;
    } while (pivot < std::invoke(key, *j));
    if (i >= j) {
      return j;
    }
    iter_swap(i, j);
  }
}

}  // namespace detail

// Unstable in-place quicksort by key.
//
// Works off an explicit segment stack instead of recursion: after each
// partition the larger half is pushed and the smaller one is processed next,
// so the stack never holds more than log2(n) segments.
template <std::random_access_iterator It, class Proj = TupleKey>
void quicksort_by_key(It first, It last, Proj key = {}) {
  struct Segment {
    It first;
    It last;
  };
  std::vector<Segment> pending;
  pending.push_back({first, last});
  while (!pending.empty()) {
    auto [lo, hi] = pending.back();
    pending.pop_back();
    while (hi - lo > kInsertionSortCutoff) {
      It split = detail::partition_median_of_three(lo, hi - 1, key);
      It left_end = split + 1;
      if (left_end - lo < hi - left_end) {
        pending.push_back({left_end, hi});
        hi = left_end;
      } else {
        pending.push_back({lo, left_end});
        lo = left_end;
      }
    }
    detail::insertion_sort_by_key(lo, hi, key);
  }
}

template <class T, class Proj = TupleKey>
void quicksort_by_key(std::span<T> items, Proj key = {}) {
  quicksort_by_key(items.begin(), items.end(), std::move(key));
}

template <class T, class Proj = TupleKey>
bool is_sorted_by_key(std::span<const T> items, Proj key = {}) {
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (std::invoke(key, items[i]) < std::invoke(key, items[i - 1])) {
      return false;
    }
  }
  return true;
}

inline void quicksort_by_key(std::vector<Tuple>& tuples) {
  quicksort_by_key(tuples.begin(), tuples.end(), TupleKey{});
}

inline bool is_sorted_by_key(const std::vector<Tuple>& tuples) {
  return is_sorted_by_key(std::span<const Tuple>(tuples), TupleKey{});
}

}  // namespace rpnjoin
