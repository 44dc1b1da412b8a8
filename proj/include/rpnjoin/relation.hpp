#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rpnjoin/error.hpp"

namespace rpnjoin {

using Value = std::int64_t;

// One join key plus the provenance values carried from the base relations.
struct Tuple {
  Value key = 0;
  std::vector<Value> payload;

  friend bool operator==(const Tuple&, const Tuple&) = default;
  friend auto operator<=>(const Tuple&, const Tuple&) = default;
};

// Half-open key interval [lo, hi).
struct KeyRange {
  Value lo = 0;
  Value hi = 0;

  bool empty() const noexcept { return lo >= hi; }
  friend bool operator==(const KeyRange&, const KeyRange&) = default;
};

// A named multiset of tuples sharing one payload width.
//
// Storage is row-major and flat: keys live in one vector and the payloads in
// another with stride arity(). Tuples are materialized on request only.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, std::size_t arity) : name_(std::move(name)), arity_(arity) {}

  static Relation from_tuples(std::string name, std::size_t arity, std::span<const Tuple> tuples) {
    Relation r(std::move(name), arity);
    r.reserve(tuples.size());
    for (const auto& t : tuples) {
      r.append(t);
    }
    return r;
  }

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  std::size_t arity() const noexcept { return arity_; }
  std::size_t cardinality() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  Value key(std::size_t row) const { return keys_[row]; }
  std::span<const Value> keys() const noexcept { return keys_; }

  std::span<const Value> payload(std::size_t row) const {
    return std::span<const Value>(payload_).subspan(row * arity_, arity_);
  }

  Tuple tuple(std::size_t row) const {
    auto p = payload(row);
    return Tuple{keys_[row], std::vector<Value>(p.begin(), p.end())};
  }

  std::vector<Tuple> tuples() const {
    std::vector<Tuple> out;
    out.reserve(cardinality());
    for (std::size_t i = 0; i < cardinality(); ++i) {
      out.push_back(tuple(i));
    }
    return out;
  }

  void reserve(std::size_t rows) {
    keys_.reserve(rows);
    payload_.reserve(rows * arity_);
  }

  void append(Value key, std::span<const Value> payload) {
    if (payload.size() != arity_) {
      throw std::invalid_argument("payload width " + std::to_string(payload.size()) +
                                  " does not match arity " + std::to_string(arity_) +
                                  " of relation '" + name_ + "'");
    }
    keys_.push_back(key);
    payload_.insert(payload_.end(), payload.begin(), payload.end());
  }

  void append(const Tuple& t) { append(t.key, t.payload); }

  // Appends key with the concatenation left ++ right as payload.
  void append_concat(Value key, std::span<const Value> left, std::span<const Value> right) {
    if (left.size() + right.size() != arity_) {
      throw std::invalid_argument("joined payload width does not match arity of '" + name_ + "'");
    }
    keys_.push_back(key);
    payload_.insert(payload_.end(), left.begin(), left.end());
    payload_.insert(payload_.end(), right.begin(), right.end());
  }

 private:
  std::string name_;
  std::size_t arity_ = 0;
  std::vector<Value> keys_;
  std::vector<Value> payload_;
};

using KeyHistogram = std::map<Value, std::uint64_t>;

inline KeyHistogram key_histogram(const Relation& r) {
  KeyHistogram h;
  for (Value k : r.keys()) {
    ++h[k];
  }
  return h;
}

// Relations produced here have arity 1; the payload is the 0-based serial
// number of the tuple. Keys come from mt19937_64 seeded with `seed` through
// uniform_int_distribution, so output is reproducible for a given standard
// library.
inline Relation generate_relation(std::string name, std::size_t count, KeyRange range,
                                  std::uint64_t seed) {
  if (range.empty()) {
    throw InvalidRangeError("empty key range [" + std::to_string(range.lo) + ", " +
                            std::to_string(range.hi) + ")");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Value> draw(range.lo, range.hi - 1);
  Relation r(std::move(name), 1);
  r.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Value serial = static_cast<Value>(i);
    r.append(draw(rng), std::span<const Value>(&serial, 1));
  }
  return r;
}

inline bool multiset_equal(const Relation& a, const Relation& b) {
  if (a.cardinality() != b.cardinality()) {
    return false;
  }
  if (a.empty()) {
    return true;
  }
  if (a.arity() != b.arity()) {
    return false;
  }
  auto lhs = a.tuples();
  auto rhs = b.tuples();
  std::sort(lhs.begin(), lhs.end());
  std::sort(rhs.begin(), rhs.end());
  return lhs == rhs;
}

// Name -> relation map. Relations are shared immutably once registered.
class Catalog {
 public:
  void add(Relation r) {
    auto name = r.name();
    auto [it, inserted] =
        relations_.emplace(name, std::make_shared<const Relation>(std::move(r)));
    if (!inserted) {
      throw CatalogError("relation '" + name + "' is already in the catalog");
    }
  }

  const Relation& get(std::string_view name) const {
    auto it = relations_.find(name);
    if (it == relations_.end()) {
      throw CatalogError("unknown relation '" + std::string(name) + "'");
    }
    return *it->second;
  }

  bool contains(std::string_view name) const { return relations_.find(name) != relations_.end(); }
  std::size_t size() const noexcept { return relations_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(relations_.size());
    for (const auto& [name, _] : relations_) {
      out.push_back(name);
    }
    return out;
  }

 private:
  std::map<std::string, std::shared_ptr<const Relation>, std::less<>> relations_;
};

}  // namespace rpnjoin
