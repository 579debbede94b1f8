#pragma once

// Generating-polynomial pairs of linear multistep methods, their partitioned
// combinations, and the three named methods used throughout the project.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plmm/errors.hpp"
#include "plmm/polynomial.hpp"

namespace plmm {

/// An irreducible, consistent, zero-stable pair (rho, sigma) of a k-step
/// method. Coefficients ascend by power; sigma is zero-padded to length k+1
/// so an explicit method has sigma[k] == 0.
class GeneratingPair {
 public:
  static constexpr double kConsistencyTol = 1e-12;
  static constexpr double kUnitTol = 1e-10;

  GeneratingPair(std::vector<double> rho, std::vector<double> sigma)
      : rho_(poly::trimmed(rho)), sigma_(std::move(sigma)) {
    if (rho_.size() < 2 || rho_.back() == 0.0)
      throw InconsistentPair("rho must have degree >= 1 with nonzero leading coefficient");
    const std::size_t k = rho_.size() - 1;
    if (poly::degree(sigma_) > k)
      throw InconsistentPair("deg sigma exceeds deg rho");
    sigma_.resize(k + 1, 0.0);

    const double rho1 = poly::evaluate<double>(rho_, 1.0);
    const double drho1 = poly::evaluate<double>(poly::derivative(rho_), 1.0);
    const double sigma1 = poly::evaluate<double>(sigma_, 1.0);
    double scale = 0.0;
    for (double c : rho_) scale = std::max(scale, std::abs(c));
    if (std::abs(rho1) > kConsistencyTol * scale)
      throw InconsistentPair("rho(1) = " + std::to_string(rho1));
    if (std::abs(drho1 - sigma1) > kConsistencyTol * std::max(1.0, scale))
      throw InconsistentPair("rho'(1) != sigma(1)");

    check_zero_stability();

    if (poly::degree(poly::gcd(rho_, sigma_)) > 0)
      throw ReduciblePair("rho and sigma share a common factor");
  }

  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& sigma() const { return sigma_; }
  std::size_t steps() const { return rho_.size() - 1; }
  bool is_explicit() const { return sigma_.back() == 0.0; }

 private:
  void check_zero_stability() const {
    const auto rs = poly::roots(rho_);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const double m = std::abs(rs[i]);
      if (m > 1.0 + kUnitTol) {
        std::ostringstream os;
        os << "root " << rs[i] << " outside the unit disk";
        throw NotZeroStable(os.str());
      }
      if (std::abs(m - 1.0) <= kUnitTol) {
        for (std::size_t j = i + 1; j < rs.size(); ++j)
          if (std::abs(rs[j] - rs[i]) < 1e-6) throw NotZeroStable("multiple root on the unit circle");
      }
    }
  }

  std::vector<double> rho_;
  std::vector<double> sigma_;
};

struct OrderInfo {
  int order = 0;
  /// c_j for j = order, order+1, ...
  std::vector<double> constants;
};

/// Order r and the sigma(E)-normalized error constants of a pair.
///
/// The local residual rho(E)Y - dt sigma(E)Y' on Y = e^t is rho(e^z) - z sigma(e^z)
/// with z = dt; its Taylor coefficients come from exact evaluation on the
/// monomials t^m. Dividing that series by sigma(e^z) gives
/// sum_j c_j z^{j+1}, which is the normalization
///   rho(E)Y - dt sigma(E)Y' = sigma(E) sum_j c_j dt^{j+1} Y^{(j+1)}.
inline OrderInfo detect_order(const GeneratingPair& pair, std::size_t n_constants = 4) {
  constexpr int kMaxTerms = 16;
  const auto& a = pair.rho();
  const auto& b = pair.sigma();

  // residual[m] = (sum_j a_j j^m - m sum_j b_j j^{m-1}) / m!
  // sigma_series[m] = sum_j b_j j^m / m!
  std::vector<double> residual(kMaxTerms + 1, 0.0), sigma_series(kMaxTerms + 1, 0.0);
  double factorial = 1.0;
  for (int m = 0; m <= kMaxTerms; ++m) {
    if (m > 0) factorial *= m;
    double ra = 0.0, rb = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double jd = static_cast<double>(j);
      ra += a[j] * std::pow(jd, m);
      sb += b[j] * std::pow(jd, m);
      if (m > 0) rb += b[j] * (m == 1 ? 1.0 : std::pow(jd, m - 1));
    }
    residual[static_cast<std::size_t>(m)] = (ra - m * rb) / factorial;
    sigma_series[static_cast<std::size_t>(m)] = sb / factorial;
  }

  double scale = 0.0;
  for (double c : a) scale = std::max(scale, std::abs(c));
  int order = -1;
  for (int m = 0; m <= kMaxTerms; ++m) {
    if (std::abs(residual[static_cast<std::size_t>(m)]) > 1e-10 * scale) {
      order = m - 1;
      break;
    }
  }
  if (order <= 0) throw InconsistentPair("detected order " + std::to_string(order));

  // quotient series q = residual / sigma_series
  std::vector<double> q(kMaxTerms + 1, 0.0);
  for (std::size_t i = 0; i <= kMaxTerms; ++i) {
    double acc = residual[i];
    for (std::size_t k = 1; k <= i; ++k) acc -= sigma_series[k] * q[i - k];
    q[i] = acc / sigma_series[0];
  }

  OrderInfo info;
  info.order = order;
  for (std::size_t j = 0; j < n_constants; ++j) {
    const std::size_t idx = static_cast<std::size_t>(order) + j + 1;
    double c = idx <= kMaxTerms ? q[idx] : 0.0;
    if (std::abs(c) < 1e-13) c = 0.0;
    info.constants.push_back(c);
  }
  return info;
}

/// Coefficient reflection rules a_{k-j} = -a_j, b_{k-j} = b_j.
inline bool is_symmetric(const GeneratingPair& pair, double tol = 1e-14) {
  const auto& a = pair.rho();
  const auto& b = pair.sigma();
  const std::size_t k = pair.steps();
  for (std::size_t j = 0; j <= k; ++j) {
    if (std::abs(a[k - j] + a[j]) > tol) return false;
    if (std::abs(b[k - j] - b[j]) > tol) return false;
  }
  return true;
}

/// Roots of rho on the unit circle (always includes 1).
inline std::vector<std::complex<double>> unit_roots(const GeneratingPair& pair) {
  std::vector<std::complex<double>> out;
  for (auto r : poly::roots(pair.rho()))
    if (std::abs(std::abs(r) - 1.0) <= GeneratingPair::kUnitTol) out.push_back(r);
  std::sort(out.begin(), out.end(), [](auto x, auto y) {
    return std::arg(x) < std::arg(y);
  });
  return out;
}

/// sigma(x_i) / (x_i rho'(x_i)) for every unit root x_i other than 1.
inline std::vector<std::complex<double>> unit_root_multipliers(const GeneratingPair& pair) {
  const auto drho = poly::derivative(pair.rho());
  std::vector<std::complex<double>> out;
  for (auto x : unit_roots(pair)) {
    if (std::abs(x - 1.0) < 1e-8) continue;
    out.push_back(poly::evaluate<std::complex<double>>(pair.sigma(), x) /
                  (x * poly::evaluate<std::complex<double>>(drho, x)));
  }
  return out;
}

struct PLMMethod {
  std::string name;
  GeneratingPair p_pair;
  GeneratingPair q_pair;
  int order = 0;
  bool symmetric = false;
  /// c_{j,p} and c_{j,q} for j = order .. 2*order-1.
  std::vector<double> error_constants_p;
  std::vector<double> error_constants_q;

  std::size_t steps() const { return std::max(p_pair.steps(), q_pair.steps()); }
  bool is_explicit() const { return p_pair.is_explicit() && q_pair.is_explicit(); }
};

inline PLMMethod make_method(GeneratingPair p_pair, GeneratingPair q_pair, std::string name) {
  const int r = detect_order(p_pair).order;
  const int rq = detect_order(q_pair).order;
  if (r != rq)
    throw OrderMismatch(name + ": p order " + std::to_string(r) + " vs q order " +
                        std::to_string(rq));
  const auto n = static_cast<std::size_t>(r);
  auto cp = detect_order(p_pair, n).constants;
  auto cq = detect_order(q_pair, n).constants;
  const bool sym = is_symmetric(p_pair) && is_symmetric(q_pair);
  return PLMMethod{std::move(name), std::move(p_pair), std::move(q_pair), r, sym,
                   std::move(cp), std::move(cq)};
}

/// Same method with the roles of the two partitions exchanged.
inline PLMMethod swapped(const PLMMethod& m) {
  PLMMethod out = m;
  std::swap(out.p_pair, out.q_pair);
  std::swap(out.error_constants_p, out.error_constants_q);
  out.name = m.name + "-swapped";
  return out;
}

inline std::map<std::string, PLMMethod> catalog() {
  const GeneratingPair midpoint({-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0});
  const GeneratingPair sym3({-1.0, 1.0, -1.0, 1.0}, {0.0, 1.0, 1.0, 0.0});
  const GeneratingPair adams2({0.0, -1.0, 1.0}, {-0.5, 1.5, 0.0});
  const GeneratingPair adams3({0.0, 0.0, -1.0, 1.0},
                              {5.0 / 12.0, -16.0 / 12.0, 23.0 / 12.0, 0.0});
  std::map<std::string, PLMMethod> out;
  out.emplace("SPLMM2", make_method(midpoint, sym3, "SPLMM2"));
  out.emplace("NSPLMM2", make_method(midpoint, adams2, "NSPLMM2"));
  out.emplace("NSNPLMM3", make_method(adams3, adams3, "NSNPLMM3"));
  return out;
}

inline PLMMethod method_by_name(const std::string& name) {
  auto all = catalog();
  auto it = all.find(name);
  if (it == all.end()) throw UnknownMethod(name);
  return it->second;
}

}  // namespace plmm
