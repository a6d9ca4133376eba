#pragma once

#include <cstddef>
#include <cstdint>

#include "mflab/errors.hpp"
#include "mflab/supernode.hpp"

namespace mflab {

/// Dense index space {0..cap}^dims with lexicographic layout (last coordinate
/// fastest). Shared by the truncated ODE grid and the truncated chain solves.
class TupleBox {
 public:
  TupleBox(int dims, int cap) : dims_(dims), cap_(cap) {
    if (dims < 1 || cap < 0) throw ConfigError("TupleBox: dims >= 1 and cap >= 0 required");
    size_ = 1;
    for (int d = 0; d < dims; ++d) {
      size_ *= static_cast<std::size_t>(cap + 1);
      if (size_ > (std::size_t{1} << 32)) throw ConfigError("TupleBox: index space too large");
    }
  }

  int dims() const { return dims_; }
  int cap() const { return cap_; }
  std::size_t size() const { return size_; }

  bool contains(const SuperNode& u) const {
    if (u.size() != dims_) return false;
    for (int v : u.q)
      if (v < 0 || v > cap_) return false;
    return true;
  }

  std::size_t index(const SuperNode& u) const {
    std::size_t idx = 0;
    for (int d = 0; d < dims_; ++d) idx = idx * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(u.q[static_cast<std::size_t>(d)]);
    return idx;
  }

  SuperNode decode(std::size_t idx) const {
    SuperNode u;
    u.q.assign(static_cast<std::size_t>(dims_), 0);
    for (int d = dims_ - 1; d >= 0; --d) {
      u.q[static_cast<std::size_t>(d)] = static_cast<int>(idx % static_cast<std::size_t>(cap_ + 1));
      idx /= static_cast<std::size_t>(cap_ + 1);
    }
    return u;
  }

 private:
  int dims_;
  int cap_;
  std::size_t size_;
};

}  // namespace mflab
