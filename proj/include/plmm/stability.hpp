#pragma once

// Linear stability of a partitioned method on p' = gamma q, q' = delta p with
// gamma*delta < 0. With z = dt*sqrt(-gamma*delta) the iteration is governed by
// the roots of r(x) = rho_p(x) rho_q(x) + z^2 sigma_p(x) sigma_q(x).

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "plmm/lmm_catalog.hpp"
#include "plmm/polynomial.hpp"

namespace plmm {

inline poly::Coeffs stability_polynomial(const PLMMethod& method, double z) {
  const auto rr = poly::multiply(method.p_pair.rho(), method.q_pair.rho());
  const auto ss = poly::multiply(method.p_pair.sigma(), method.q_pair.sigma());
  return poly::add_scaled(rr, z * z, ss);
}

inline std::vector<std::complex<double>> stability_roots(const PLMMethod& method, double z) {
  return poly::roots(stability_polynomial(method, z));
}

inline double max_root_modulus(const PLMMethod& method, double z) {
  double m = 0.0;
  for (auto r : stability_roots(method, z)) m = std::max(m, std::abs(r));
  return m;
}

struct StabilityScan {
  std::vector<double> z_values;
  std::vector<double> max_moduli;
};

/// max_root_modulus on z = step, 2 step, ..., z_max.
inline StabilityScan scan_stability(const PLMMethod& method, double z_max, double step = 1e-3) {
  StabilityScan scan;
  const auto n = static_cast<std::size_t>(std::floor(z_max / step + 1e-9));
  for (std::size_t i = 1; i <= n; ++i) {
    const double z = static_cast<double>(i) * step;
    scan.z_values.push_back(z);
    scan.max_moduli.push_back(max_root_modulus(method, z));
  }
  return scan;
}

/// Largest scanned z* <= z_max such that every scanned z <= z* has
/// max_root_modulus <= 1 + tol. Zero when the first scan point already fails.
inline double imaginary_axis_interval(const PLMMethod& method, double tol, double z_max,
                                      double step = 1e-3) {
  const auto scan = scan_stability(method, z_max, step);
  double z_star = 0.0;
  for (std::size_t i = 0; i < scan.z_values.size(); ++i) {
    if (scan.max_moduli[i] > 1.0 + tol) break;
    z_star = scan.z_values[i];
  }
  return z_star;
}

}  // namespace plmm
