#pragma once

// Dense real polynomials stored by ascending power.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

namespace plmm::poly {

using Coeffs = std::vector<double>;

inline std::size_t degree(std::span<const double> c) {
  std::size_t d = c.size();
  while (d > 1 && c[d - 1] == 0.0) --d;
  return d == 0 ? 0 : d - 1;
}

template <class T>
T evaluate(std::span<const double> c, T x) {
  T acc{0};
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + T(c[i]);
  return acc;
}

inline Coeffs derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  Coeffs d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

inline Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// a + s*b, padded to the longer length.
inline Coeffs add_scaled(std::span<const double> a, double s, std::span<const double> b) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += s * b[i];
  return out;
}

inline Coeffs trimmed(std::span<const double> c, double tol = 0.0) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  std::size_t d = c.size();
  while (d > 1 && std::abs(c[d - 1]) <= tol * scale) --d;
  return Coeffs(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(d));
}

/// Roots as eigenvalues of the companion matrix of the trimmed polynomial.
inline std::vector<std::complex<double>> roots(std::span<const double> c) {
  const Coeffs p = trimmed(c);
  const std::size_t n = p.size() - 1;
  if (n == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -p[i] / p[n];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& ev = solver.eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  return out;
}

/// Monic greatest common divisor by the Euclidean algorithm. Remainder
/// coefficients below tol (relative to the divisor) are treated as zero.
inline Coeffs gcd(std::span<const double> a_in, std::span<const double> b_in, double tol = 1e-12) {
  auto monic = [](Coeffs c) {
    const double lead = c.back();
    for (double& v : c) v /= lead;
    return c;
  };
  Coeffs a = monic(trimmed(a_in));
  Coeffs b = monic(trimmed(b_in));
  if (a.size() < b.size()) std::swap(a, b);
  while (true) {
    if (b.size() == 1) {
      // a nonzero constant divides everything
      return std::abs(b[0]) > tol ? Coeffs{1.0} : a;
    }
    Coeffs r = a;
    for (std::size_t shift = r.size() - b.size() + 1; shift-- > 0;) {
      const double q = r[shift + b.size() - 1];
      for (std::size_t j = 0; j < b.size(); ++j) r[shift + j] -= q * b[j];
    }
    r.resize(b.size() - 1);
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::abs(v));
    if (rmax <= tol) return b;
    a = std::move(b);
    b = monic(trimmed(r, tol));
  }
}

}  // namespace plmm::poly
