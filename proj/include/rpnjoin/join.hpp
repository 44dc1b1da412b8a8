#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpnjoin/error.hpp"
#include "rpnjoin/quicksort.hpp"
#include "rpnjoin/relation.hpp"

// Pairwise equi-joins on the key column.
//
// Every algorithm produces the same multiset: for each pair (r, s) with
// r.key == s.key, one tuple (key, r.payload ++ s.payload). R is the outer
// operand and S the inner one.
namespace rpnjoin {

enum class JoinAlgorithm { kSortMerge, kNestedLoop, kBlockNestedLoop, kRockingNestedLoop, kHash };

inline constexpr std::array<JoinAlgorithm, 5> kAllJoinAlgorithms = {
    JoinAlgorithm::kSortMerge, JoinAlgorithm::kNestedLoop, JoinAlgorithm::kBlockNestedLoop,
    JoinAlgorithm::kRockingNestedLoop, JoinAlgorithm::kHash};

inline std::string_view to_string(JoinAlgorithm a) {
  switch (a) {
    case JoinAlgorithm::kSortMerge: return "sortmerge";
    case JoinAlgorithm::kNestedLoop: return "nested";
    case JoinAlgorithm::kBlockNestedLoop: return "block";
    case JoinAlgorithm::kRockingNestedLoop: return "rocking";
    case JoinAlgorithm::kHash: return "hash";
  }
  return "?";
}

inline std::optional<JoinAlgorithm> parse_join_algorithm(std::string_view text) {
  for (auto a : kAllJoinAlgorithms) {
    if (to_string(a) == text) {
      return a;
    }
  }
  return std::nullopt;
}

struct JoinResultPolicy {
  std::uint64_t max_output_tuples = 10'000'000;
};

// Simulated cost of one or more joins. page_size is the number of tuples per
// logical page.
struct CostCounters {
  std::uint64_t tuple_comparisons = 0;
  std::uint64_t page_reads = 0;
  std::uint64_t page_size = 64;

  CostCounters& operator+=(const CostCounters& other) {
    tuple_comparisons += other.tuple_comparisons;
    page_reads += other.page_reads;
    return *this;
  }
};

inline std::uint64_t page_count(std::size_t tuples, std::uint64_t page_size) {
  return (tuples + page_size - 1) / page_size;
}

namespace detail {

inline std::string joined_name(const Relation& r, const Relation& s) {
  constexpr std::size_t kMaxName = 48;
  std::string name = r.name() + "_" + s.name();
  if (name.size() > kMaxName) {
    name = name.substr(0, 22) + "..." + name.substr(name.size() - 22);
  }
  return name;
}

inline void check_page_size(const CostCounters& c) {
  if (c.page_size == 0) {
    throw std::invalid_argument("page_size must be positive");
  }
}

// Output relation with the cardinality guard applied on every emit.
class JoinOutput {
 public:
  JoinOutput(const Relation& r, const Relation& s, const JoinResultPolicy& policy)
      : result_(joined_name(r, s), r.arity() + s.arity()), limit_(policy.max_output_tuples) {}

  void reserve(std::uint64_t rows) { result_.reserve(static_cast<std::size_t>(rows)); }

  void ensure_room(std::uint64_t extra) const {
    if (extra > limit_ - std::min(limit_, emitted())) {
      throw CardinalityLimitError(limit_);
    }
  }

  void emit(Value key, std::span<const Value> left, std::span<const Value> right) {
    ensure_room(1);
    result_.append_concat(key, left, right);
  }

  std::uint64_t emitted() const noexcept { return result_.cardinality(); }
  Relation take() && { return std::move(result_); }

 private:
  Relation result_;
  std::uint64_t limit_;
};

// Scans inner pages in the given order against every tuple of one outer page.
template <class PageOrder>
void join_outer_page(const Relation& r, const Relation& s, std::size_t outer_page,
                     std::uint64_t page_size, PageOrder&& inner_pages, CostCounters& counters,
                     JoinOutput& out) {
  const std::size_t r_begin = outer_page * page_size;
  const std::size_t r_end = std::min<std::size_t>(r_begin + page_size, r.cardinality());
  inner_pages([&](std::size_t inner_page) {
    const std::size_t s_begin = inner_page * page_size;
    const std::size_t s_end = std::min<std::size_t>(s_begin + page_size, s.cardinality());
    for (std::size_t i = r_begin; i < r_end; ++i) {
      const Value k = r.key(i);
      for (std::size_t j = s_begin; j < s_end; ++j) {
        ++counters.tuple_comparisons;
        if (k == s.key(j)) {
          out.emit(k, r.payload(i), s.payload(j));
        }
      }
    }
  });
}

}  // namespace detail

// Tuple-at-a-time nested loops: one full inner scan per outer tuple.
// page_reads = pages(R) + |R| * pages(S).
inline Relation nested_loop_join(const Relation& r, const Relation& s,
                                 const JoinResultPolicy& policy, CostCounters& counters) {
  detail::check_page_size(counters);
  detail::JoinOutput out(r, s, policy);
  const auto inner_pages = page_count(s.cardinality(), counters.page_size);
  counters.page_reads += page_count(r.cardinality(), counters.page_size);
  for (std::size_t i = 0; i < r.cardinality(); ++i) {
    counters.page_reads += inner_pages;
    const Value k = r.key(i);
    for (std::size_t j = 0; j < s.cardinality(); ++j) {
      ++counters.tuple_comparisons;
      if (k == s.key(j)) {
        out.emit(k, r.payload(i), s.payload(j));
      }
    }
  }
  return std::move(out).take();
}

// Page-at-a-time nested loops: every inner page is fetched once per outer page.
// page_reads = pages(R) + pages(R) * pages(S).
inline Relation block_nested_loop_join(const Relation& r, const Relation& s,
                                       const JoinResultPolicy& policy, CostCounters& counters) {
  detail::check_page_size(counters);
  detail::JoinOutput out(r, s, policy);
  const auto page_size = counters.page_size;
  const auto outer_pages = page_count(r.cardinality(), page_size);
  const auto inner_pages = page_count(s.cardinality(), page_size);
  for (std::size_t p = 0; p < outer_pages; ++p) {
    ++counters.page_reads;
    detail::join_outer_page(r, s, p, page_size,
                            [&](auto&& visit) {
                              for (std::size_t q = 0; q < inner_pages; ++q) {
                                ++counters.page_reads;
                                visit(q);
                              }
                            },
                            counters, out);
  }
  return std::move(out).take();
}

// Block nested loops where the inner scan direction alternates per outer page.
// The inner page left in the buffer by one pass is the first page the next
// pass needs, so it is not fetched again:
// page_reads = pages(R) + pages(S) + (pages(R) - 1) * (pages(S) - 1).
inline Relation rocking_nested_loop_join(const Relation& r, const Relation& s,
                                         const JoinResultPolicy& policy, CostCounters& counters) {
  detail::check_page_size(counters);
  detail::JoinOutput out(r, s, policy);
  const auto page_size = counters.page_size;
  const auto outer_pages = page_count(r.cardinality(), page_size);
  const auto inner_pages = page_count(s.cardinality(), page_size);
  std::optional<std::size_t> buffered;
  auto fetch = [&](std::size_t q) {
    if (buffered != q) {
      ++counters.page_reads;
      buffered = q;
    }
  };
  for (std::size_t p = 0; p < outer_pages; ++p) {
    ++counters.page_reads;
    const bool forward = p % 2 == 0;
    detail::join_outer_page(r, s, p, page_size,
                            [&](auto&& visit) {
                              for (std::size_t n = 0; n < inner_pages; ++n) {
                                const std::size_t q = forward ? n : inner_pages - 1 - n;
                                fetch(q);
                                visit(q);
                              }
                            },
                            counters, out);
  }
  return std::move(out).take();
}

// Build a chained-bucket table on S, probe with each tuple of R.
// page_reads = pages(S) for the build plus pages(R) for the probe.
inline Relation hash_join(const Relation& r, const Relation& s, const JoinResultPolicy& policy,
                          CostCounters& counters) {
  detail::check_page_size(counters);
  detail::JoinOutput out(r, s, policy);
  if (r.empty() || s.empty()) {
    return std::move(out).take();
  }
  counters.page_reads += page_count(s.cardinality(), counters.page_size);
  counters.page_reads += page_count(r.cardinality(), counters.page_size);

  constexpr std::uint32_t kEnd = std::numeric_limits<std::uint32_t>::max();
  const std::size_t buckets = std::bit_ceil(std::max<std::size_t>(s.cardinality(), 16));
  const auto mask = static_cast<std::uint64_t>(buckets - 1);
  auto bucket_of = [mask](Value k) {
    std::uint64_t h = static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>((h ^ (h >> 32)) & mask);
  };

  // Chains are threaded through next[]; inserting in reverse keeps each chain
  // in S order.
  std::vector<std::uint32_t> head(buckets, kEnd);
  std::vector<std::uint32_t> next(s.cardinality(), kEnd);
  for (std::size_t j = s.cardinality(); j-- > 0;) {
    auto& h = head[bucket_of(s.key(j))];
    next[j] = h;
    h = static_cast<std::uint32_t>(j);
  }

  for (std::size_t i = 0; i < r.cardinality(); ++i) {
    const Value k = r.key(i);
    for (std::uint32_t j = head[bucket_of(k)]; j != kEnd; j = next[j]) {
      ++counters.tuple_comparisons;
      if (s.key(j) == k) {
        out.emit(k, r.payload(i), s.payload(j));
      }
    }
  }
  return std::move(out).take();
}

// Sorts (key, row) index copies of both operands with quicksort_by_key, then
// merges. Matching key runs are recorded first so the output size is known
// (and checked against the policy) before anything is materialized; the
// emit pass then forms the cross product of each pair of runs.
// page_reads = pages(R) + pages(S), one pass over each sorted input.
inline Relation sort_merge_join(const Relation& r, const Relation& s,
                                const JoinResultPolicy& policy, CostCounters& counters) {
  detail::check_page_size(counters);
  detail::JoinOutput out(r, s, policy);
  if (r.empty() || s.empty()) {
    return std::move(out).take();
  }
  counters.page_reads += page_count(r.cardinality(), counters.page_size);
  counters.page_reads += page_count(s.cardinality(), counters.page_size);

  struct KeyRow {
    Value key;
    std::uint32_t row;
  };
  auto sorted_rows = [](const Relation& rel) {
    std::vector<KeyRow> rows(rel.cardinality());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i] = {rel.key(i), static_cast<std::uint32_t>(i)};
    }
    quicksort_by_key(rows.begin(), rows.end(), &KeyRow::key);
    return rows;
  };
  const auto left = sorted_rows(r);
  const auto right = sorted_rows(s);

  struct RunPair {
    std::size_t left_begin, left_end, right_begin, right_end;
  };
  std::vector<RunPair> runs;
  std::uint64_t total = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < left.size() && j < right.size()) {
    ++counters.tuple_comparisons;
    const Value lk = left[i].key;
    const Value rk = right[j].key;
    if (lk < rk) {
      ++i;
    } else if (rk < lk) {
      ++j;
    } else {
      std::size_t i_end = i + 1;
      while (i_end < left.size() && left[i_end].key == lk) ++i_end;
      std::size_t j_end = j + 1;
      while (j_end < right.size() && right[j_end].key == lk) ++j_end;
      const std::uint64_t product = static_cast<std::uint64_t>(i_end - i) * (j_end - j);
      out.ensure_room(total + product);
      total += product;
      runs.push_back({i, i_end, j, j_end});
      i = i_end;
      j = j_end;
    }
  }

  out.reserve(total);
  for (const auto& run : runs) {
    for (std::size_t a = run.left_begin; a < run.left_end; ++a) {
      const auto lp = r.payload(left[a].row);
      for (std::size_t b = run.right_begin; b < run.right_end; ++b) {
        out.emit(left[a].key, lp, s.payload(right[b].row));
      }
    }
  }
  return std::move(out).take();
}

inline Relation join(JoinAlgorithm algorithm, const Relation& r, const Relation& s,
                     const JoinResultPolicy& policy, CostCounters& counters) {
  switch (algorithm) {
    case JoinAlgorithm::kSortMerge: return sort_merge_join(r, s, policy, counters);
    case JoinAlgorithm::kNestedLoop: return nested_loop_join(r, s, policy, counters);
    case JoinAlgorithm::kBlockNestedLoop: return block_nested_loop_join(r, s, policy, counters);
    case JoinAlgorithm::kRockingNestedLoop:
      return rocking_nested_loop_join(r, s, policy, counters);
    case JoinAlgorithm::kHash: return hash_join(r, s, policy, counters);
  }
  throw std::invalid_argument("unknown join algorithm");
}

inline Relation join(JoinAlgorithm algorithm, const Relation& r, const Relation& s) {
  CostCounters counters;
  return join(algorithm, r, s, JoinResultPolicy{}, counters);
}

// Sum over keys of hR(v) * hS(v).
inline std::uint64_t expected_join_cardinality(const KeyHistogram& hr, const KeyHistogram& hs) {
  std::uint64_t total = 0;
  auto a = hr.begin();
  auto b = hs.begin();
  while (a != hr.end() && b != hs.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      total += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return total;
}

// Sum over keys of the product of every histogram's count, saturating at
// UINT64_MAX. This is the size of the k-way key equi-join.
inline std::uint64_t expected_multiway_cardinality(std::span<const KeyHistogram> histograms) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (histograms.empty()) {
    return 0;
  }
  std::uint64_t total = 0;
  for (const auto& [key, first_count] : histograms.front()) {
    unsigned __int128 product = first_count;
    for (std::size_t h = 1; h < histograms.size() && product != 0; ++h) {
      auto it = histograms[h].find(key);
      product = it == histograms[h].end() ? 0 : std::min<unsigned __int128>(product * it->second, kMax);
    }
    const unsigned __int128 sum = static_cast<unsigned __int128>(total) + product;
    total = sum > kMax ? kMax : static_cast<std::uint64_t>(sum);
  }
  return total;
}

}  // namespace rpnjoin
