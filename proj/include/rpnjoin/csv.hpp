#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rpnjoin/error.hpp"
#include "rpnjoin/relation.hpp"

// Relation CSV: header `key,p0,...,p{arity-1}`, one decimal-integer row per
// tuple, no quoting. Arity is taken from the header.
namespace rpnjoin {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline bool parse_value(std::string_view field, Value& out) {
  if (!field.empty() && field.front() == '+') {
    return false;
  }
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && !field.empty();
}

inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') {
    line.remove_suffix(1);
  }
  return line;
}

}  // namespace detail

inline void write_relation_csv(const Relation& r, std::ostream& out) {
  out << "key";
  for (std::size_t i = 0; i < r.arity(); ++i) {
    out << ",p" << i;
  }
  out << '\n';
  for (std::size_t row = 0; row < r.cardinality(); ++row) {
    out << r.key(row);
    for (Value v : r.payload(row)) {
      out << ',' << v;
    }
    out << '\n';
  }
}

inline Relation read_relation_csv(std::istream& in, std::string name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("missing header", 1);
  }
  auto header = detail::split_fields(detail::chomp(line));
  if (header.front() != "key") {
    throw ParseError("header must start with 'key'", 1);
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "p" + std::to_string(i - 1)) {
      throw ParseError("expected column 'p" + std::to_string(i - 1) + "' in header", 1);
    }
  }
  const std::size_t arity = header.size() - 1;

  Relation r(std::move(name), arity);
  std::vector<Value> payload(arity);
  std::size_t line_no = 1;
  bool saw_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::chomp(line);
    if (text.empty()) {
      saw_blank = true;
      continue;
    }
    if (saw_blank) {
      throw ParseError("blank line inside data", line_no - 1);
    }
    auto fields = detail::split_fields(text);
    if (fields.size() != arity + 1) {
      throw ParseError("expected " + std::to_string(arity + 1) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    Value key = 0;
    if (!detail::parse_value(fields[0], key)) {
      throw ParseError("non-integer key '" + std::string(fields[0]) + "'", line_no);
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (!detail::parse_value(fields[i + 1], payload[i])) {
        throw ParseError("non-integer field '" + std::string(fields[i + 1]) + "'", line_no);
      }
    }
    r.append(key, payload);
  }
  return r;
}

inline void relation_to_csv(const Relation& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_relation_csv(r, out);
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

// The relation is named after the file stem unless a name is given.
inline Relation relation_from_csv(const std::filesystem::path& path, std::string name = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  if (name.empty()) {
    name = path.stem().string();
  }
  return read_relation_csv(in, std::move(name));
}

}  // namespace rpnjoin
