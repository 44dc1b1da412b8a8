#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "rpnjoin/error.hpp"
#include "rpnjoin/eval.hpp"
#include "rpnjoin/join.hpp"
#include "rpnjoin/plan.hpp"
#include "rpnjoin/relation.hpp"

// Execution time versus tuples per relation and number of relations, for
// linear and bushy plan shapes.
namespace rpnjoin {

enum class GridLayout { kPaired, kCross };

struct BenchConfig {
  std::vector<std::size_t> tuples_per_relation;
  std::vector<std::size_t> relation_counts;
  GridLayout layout = GridLayout::kPaired;
  // Unset: each cell uses [0, max(1, tuples / 10)).
  std::optional<KeyRange> key_range;
  std::uint64_t seed = 1;
  std::vector<PlanShape> shapes = {PlanShape::kLinear, PlanShape::kBushy};
  JoinAlgorithm algorithm = JoinAlgorithm::kSortMerge;
  EvalMode mode = EvalMode::kSequential;
  JoinResultPolicy policy;
  std::size_t repetitions = 5;
  std::size_t warmup = 1;
};

enum class BenchStatus { kOk, kCapExceeded };

inline std::string_view to_string(BenchStatus s) {
  return s == BenchStatus::kOk ? "ok" : "cap_exceeded";
}

// One measured (tuples, relations, shape) cell.
//
// For kOk records result_cardinality is the size of the evaluated result.
// For kCapExceeded records nothing was fully evaluated; the column then holds
// the exact size the query would have had (key-histogram product, saturating),
// and median_ms is the time until the cap aborted the evaluation.
struct BenchRecord {
  PlanShape shape = PlanShape::kLinear;
  JoinAlgorithm algorithm = JoinAlgorithm::kSortMerge;
  std::size_t tuples = 0;
  std::size_t relations = 0;
  Value key_lo = 0;
  Value key_hi = 0;
  std::uint64_t seed = 0;
  double median_ms = 0.0;
  std::uint64_t result_cardinality = 0;
  BenchStatus status = BenchStatus::kOk;
};

inline KeyRange default_key_range(std::size_t tuples) {
  return KeyRange{0, static_cast<Value>(std::max<std::size_t>(1, tuples / 10))};
}

// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t tuples, std::size_t relations) {
  return seed ^ mix_seed((static_cast<std::uint64_t>(tuples) << 32) ^ relations);
}

inline std::vector<std::pair<std::size_t, std::size_t>> bench_cells(const BenchConfig& config) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  if (config.layout == GridLayout::kPaired) {
    if (config.tuples_per_relation.size() != config.relation_counts.size()) {
      throw std::invalid_argument("paired grid needs as many tuple counts as relation counts");
    }
    for (std::size_t i = 0; i < config.tuples_per_relation.size(); ++i) {
      cells.emplace_back(config.tuples_per_relation[i], config.relation_counts[i]);
    }
  } else {
    for (auto t : config.tuples_per_relation) {
      for (auto r : config.relation_counts) {
        cells.emplace_back(t, r);
      }
    }
  }
  return cells;
}

inline void validate(const BenchConfig& config) {
  if (config.tuples_per_relation.empty() || config.relation_counts.empty()) {
    throw std::invalid_argument("benchmark grid is empty");
  }
  for (auto t : config.tuples_per_relation) {
    if (t == 0) throw std::invalid_argument("tuples per relation must be positive");
  }
  for (auto r : config.relation_counts) {
    if (r < 2) throw std::invalid_argument("relation counts must be at least 2");
  }
  if (config.shapes.empty()) throw std::invalid_argument("no plan shapes selected");
  if (config.repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  if (config.key_range && config.key_range->empty()) {
    throw InvalidRangeError("empty benchmark key range");
  }
}

// Canonical output order: tuples, then relations, then shape name.
inline void sort_records(std::vector<BenchRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tuple(a.tuples, a.relations, to_string(a.shape)) <
           std::tuple(b.tuples, b.relations, to_string(b.shape));
  });
}

inline std::vector<BenchRecord> run_benchmark(const BenchConfig& config) {
  using Clock = std::chrono::steady_clock;
  validate(config);
  std::vector<BenchRecord> records;

  for (auto [tuples, relations] : bench_cells(config)) {
    const KeyRange range = config.key_range.value_or(default_key_range(tuples));
    const std::uint64_t seed = cell_seed(config.seed, tuples, relations);

    Catalog catalog;
    std::vector<std::string> names;
    std::vector<KeyHistogram> histograms;
    for (std::size_t i = 0; i < relations; ++i) {
      names.push_back("R" + std::to_string(i + 1));
      Relation r = generate_relation(names.back(), tuples, range, mix_seed(seed + i));
      histograms.push_back(key_histogram(r));
      catalog.add(std::move(r));
    }

    for (PlanShape shape : config.shapes) {
      const PlanTree plan = make_plan(shape, names);
      BenchRecord rec;
      rec.shape = shape;
      rec.algorithm = config.algorithm;
      rec.tuples = tuples;
      rec.relations = relations;
      rec.key_lo = range.lo;
      rec.key_hi = range.hi;
      rec.seed = seed;

      std::vector<double> samples;
      for (std::size_t run = 0; run < config.warmup + config.repetitions; ++run) {
        EvalContext ctx(catalog, config.algorithm, config.mode);
        ctx.policy = config.policy;
        const auto start = Clock::now();
        try {
          Relation result = eval_plan(plan, ctx);
          const auto stop = Clock::now();
          rec.result_cardinality = result.cardinality();
          if (run >= config.warmup) {
            samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
          }
        } catch (const CardinalityLimitError&) {
          const auto stop = Clock::now();
          rec.status = BenchStatus::kCapExceeded;
          rec.result_cardinality = expected_multiway_cardinality(histograms);
          samples = {std::chrono::duration<double, std::milli>(stop - start).count()};
          break;
        }
      }
      std::sort(samples.begin(), samples.end());
      const std::size_t n = samples.size();
      rec.median_ms = n % 2 == 1 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2.0;
      records.push_back(rec);
    }
  }

  sort_records(records);
  return records;
}

inline constexpr std::string_view kBenchCsvHeader =
    "shape,algorithm,tuples,relations,key_lo,key_hi,seed,median_ms,result_cardinality,status";

inline void write_results_csv(std::vector<BenchRecord> records, std::ostream& out) {
  sort_records(records);
  out << kBenchCsvHeader << '\n';
  for (const auto& r : records) {
    char ms[64];
    std::snprintf(ms, sizeof ms, "%.3f", r.median_ms);
    out << to_string(r.shape) << ',' << to_string(r.algorithm) << ',' << r.tuples << ','
        << r.relations << ',' << r.key_lo << ',' << r.key_hi << ',' << r.seed << ',' << ms << ','
        << r.result_cardinality << ',' << to_string(r.status) << '\n';
  }
}

inline void write_results_csv(const std::vector<BenchRecord>& records,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_results_csv(records, static_cast<std::ostream&>(out));
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

}  // namespace rpnjoin
