#pragma once

#include <map>
#include <optional>
#include <string>

#include "mflab/supernode.hpp"

namespace mflab {

/// Sparse vector over supernode tuples: the fraction of supernodes currently
/// observing each (k+1)-tuple. Entries absent from the map are zero. Also
/// holds stationary laws of the (k+1)-queue reference model, so membership in
/// the probability simplex is a checked property, not a type invariant.
class ProportionVector {
 public:
  using Map = std::map<SuperNode, double>;

  ProportionVector() = default;
  ProportionVector(int k, Map entries) : k_(k), entries_(std::move(entries)) {}

  int k() const { return k_; }
  const Map& entries() const { return entries_; }
  Map& entries() { return entries_; }

  /// Value at u; absent means zero.
  double at(const SuperNode& u) const {
    auto it = entries_.find(u);
    return it == entries_.end() ? 0.0 : it->second;
  }

  void set(const SuperNode& u, double v) { entries_[u] = v; }

  std::size_t support_size() const { return entries_.size(); }
  double sum() const;

  /// JSON object mapping "u0,u1,...,uk" to the stored fraction.
  std::string to_json_string(int indent = -1) const;
  static ProportionVector from_json_string(const std::string& text);

 private:
  int k_ = 0;
  Map entries_;
};

/// True iff all entries lie in [0,1], the total is 1 within 1e-12, and, when
/// n is given, every n*z_u is an integer within 1e-9.
bool validate_membership(const ProportionVector& z, std::optional<long long> n = std::nullopt);

/// sup over tuples of |z_u - z'_u| / (u_k + 1) with u_k the last coordinate.
/// The supremum runs over the union of supports; everything else contributes 0.
double rho_distance(const ProportionVector& z, const ProportionVector& zp);

/// (1/2) * sum over tuples of |z_u - z'_u|.
double total_variation(const ProportionVector& z, const ProportionVector& zp);

/// max over tuples of |z_u - z'_u|.
double max_abs_difference(const ProportionVector& z, const ProportionVector& zp);

}  // namespace mflab
