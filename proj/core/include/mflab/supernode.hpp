#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace mflab {

/// Joint queue-length observation of a node and its k neighbors: an ordered
/// tuple of k+1 nonnegative integers. Ordering is lexicographic, which fixes
/// the iteration order of every sparse map keyed by SuperNode.
struct SuperNode {
  std::vector<int> q;

  SuperNode() = default;
  explicit SuperNode(std::vector<int> coords) : q(std::move(coords)) {}
  SuperNode(std::initializer_list<int> coords) : q(coords) {}

  auto operator<=>(const SuperNode&) const = default;

  int size() const { return static_cast<int>(q.size()); }
  int operator[](int i) const { return q[static_cast<std::size_t>(i)]; }

  int min_value() const;
  /// Indices attaining the minimum, in coordinate order.
  std::vector<int> argmin() const;
  /// Copy with coordinate n shifted by delta (+1 arrival, -1 departure).
  SuperNode shifted(int n, int delta) const;

  /// Comma-joined decimal coordinates, e.g. "0,3,1". Used as JSON/CSV key.
  std::string label() const;
  /// Inverse of label(). Throws ConfigError on malformed input.
  static SuperNode parse(const std::string& label);
};

}  // namespace mflab
