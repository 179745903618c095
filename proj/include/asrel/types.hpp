#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace asrel {

using Asn = std::uint32_t;

/// Ordered hop list of an AS path, first hop is the vantage side.
using AsPath = std::vector<Asn>;

/// AS degree in the full graph built from the input path set.
using DegreeMap = std::map<Asn, std::size_t>;

/// Canonical unordered AS pair (lo < hi).
struct EdgeKey {
  Asn lo = 0;
  Asn hi = 0;

  EdgeKey() = default;
  EdgeKey(Asn a, Asn b) : lo(a < b ? a : b), hi(a < b ? b : a) {
    if (a == b) throw std::invalid_argument("EdgeKey: self-loop on AS " + std::to_string(a));
  }

  bool has(Asn a) const { return a == lo || a == hi; }
  Asn other(Asn a) const { return a == lo ? hi : lo; }

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

inline std::string to_string(const EdgeKey& e) {
  return std::to_string(e.lo) + "-" + std::to_string(e.hi);
}

/// Input that could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A solver or oracle refused an input that exceeds its size limit.
class LimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asrel

template <>
struct std::hash<asrel::EdgeKey> {
  std::size_t operator()(const asrel::EdgeKey& e) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{e.lo} << 32) | e.hi);
  }
};
