#include "mflab/proportion.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "mflab/errors.hpp"

namespace mflab {

int SuperNode::min_value() const {
  int m = q.front();
  for (int v : q) m = std::min(m, v);
  return m;
}

std::vector<int> SuperNode::argmin() const {
  const int m = min_value();
  std::vector<int> idx;
  for (int n = 0; n < size(); ++n)
    if (q[static_cast<std::size_t>(n)] == m) idx.push_back(n);
  return idx;
}

SuperNode SuperNode::shifted(int n, int delta) const {
  SuperNode out = *this;
  out.q[static_cast<std::size_t>(n)] += delta;
  return out;
}

std::string SuperNode::label() const {
  std::ostringstream os;
  for (int n = 0; n < size(); ++n) {
    if (n > 0) os << ',';
    os << q[static_cast<std::size_t>(n)];
  }
  return os.str();
}

SuperNode SuperNode::parse(const std::string& label) {
  SuperNode u;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    std::size_t comma = label.find(',', pos);
    const std::string part = label.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      u.q.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("SuperNode::parse: bad coordinate '" + part + "' in '" + label + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (u.q.empty()) throw ConfigError("SuperNode::parse: empty label");
  return u;
}

double ProportionVector::sum() const {
  double s = 0.0;
  for (const auto& [u, v] : entries_) s += v;
  return s;
}

std::string ProportionVector::to_json_string(int indent) const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [u, v] : entries_) j[u.label()] = v;
  return j.dump(indent);
}

ProportionVector ProportionVector::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw ConfigError("ProportionVector: expected a JSON object");
  ProportionVector out;
  int k = -1;
  for (const auto& [key, val] : j.items()) {
    SuperNode u = SuperNode::parse(key);
    if (k < 0)
      k = u.size() - 1;
    else if (u.size() - 1 != k)
      throw DimensionError("ProportionVector: mixed tuple lengths in JSON");
    out.entries()[u] = val.get<double>();
  }
  return ProportionVector(std::max(k, 0), std::move(out.entries()));
}

bool validate_membership(const ProportionVector& z, std::optional<long long> n) {
  double s = 0.0;
  for (const auto& [u, v] : z.entries()) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    if (n) {
      const double scaled = static_cast<double>(*n) * v;
      if (std::abs(scaled - std::round(scaled)) > 1e-9) return false;
    }
    s += v;
  }
  return std::abs(s - 1.0) <= 1e-12;
}

namespace {
void check_same_k(const ProportionVector& a, const ProportionVector& b) {
  if (a.k() != b.k()) throw DimensionError("proportion vectors have different neighbor counts");
}
}  // namespace

double rho_distance(const ProportionVector& z, const ProportionVector& zp) {
  check_same_k(z, zp);
  double sup = 0.0;
  auto visit = [&](const SuperNode& u, double a, double b) {
    const int last = u.q.back();
    sup = std::max(sup, std::abs(a - b) / static_cast<double>(last + 1));
  };
  for (const auto& [u, v] : z.entries()) visit(u, v, zp.at(u));
  for (const auto& [u, v] : zp.entries())
    if (!z.entries().count(u)) visit(u, 0.0, v);
  return sup;
}

double total_variation(const ProportionVector& z, const ProportionVector& zp) {
  check_same_k(z, zp);
  double acc = 0.0;
  for (const auto& [u, v] : z.entries()) acc += std::abs(v - zp.at(u));
  for (const auto& [u, v] : zp.entries())
    if (!z.entries().count(u)) acc += std::abs(v);
  return 0.5 * acc;
}

double max_abs_difference(const ProportionVector& z, const ProportionVector& zp) {
  check_same_k(z, zp);
  double m = 0.0;
  for (const auto& [u, v] : z.entries()) m = std::max(m, std::abs(v - zp.at(u)));
  for (const auto& [u, v] : zp.entries())
    if (!z.entries().count(u)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace mflab
