#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace plmm {

/// A partitioned pair of nodal vectors: (P, Q) for NLS, (Gamma, W) for
/// Boussinesq.
struct PartitionedState {
  std::vector<double> p;
  std::vector<double> q;
  double t = 0.0;
};

inline double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_norm(const PartitionedState& s) { return std::max(max_norm(s.p), max_norm(s.q)); }

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// max_j max(|a.p_j - b.p_j|, |a.q_j - b.q_j|)
inline double max_diff(const PartitionedState& a, const PartitionedState& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.p.size(); ++j) m = std::max(m, std::abs(a.p[j] - b.p[j]));
  for (std::size_t j = 0; j < a.q.size(); ++j) m = std::max(m, std::abs(a.q[j] - b.q[j]));
  return m;
}

}  // namespace plmm
