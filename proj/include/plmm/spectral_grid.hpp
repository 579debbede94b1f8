#pragma once

// Periodic Fourier-collocation grid with matrix-free spectral operators.
//
// Conventions: forward transform unnormalized, inverse scaled by 1/N. The
// first-derivative multiplier i*kappa is zeroed at the Nyquist mode so the
// operator is real and antisymmetric; the second-derivative multiplier
// -kappa^2 keeps the Nyquist mode. Hence diff2 != diff1(diff1(.)) on the
// Nyquist component. helmholtz_inverse inverts I - b*diff1^2, i.e. it uses
// the diff1 convention.

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "plmm/errors.hpp"

namespace plmm {

using Vec = std::vector<double>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftPlans(int n) {
    // Plans are created on scratch buffers and later executed through the
    // new-array interface, so FFTW_UNALIGNED is required.
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n / 2 + 1));
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(n, real.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_c2r_1d(n, c, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

}  // namespace detail

class SpectralGrid {
 public:
  SpectralGrid(double l_i, double l_s, std::size_t n) : l_i_(l_i), l_s_(l_s), n_(n) {
    if (n % 2 != 0 || n < 8)
      throw BadGrid("N must be even and >= 8, got " + std::to_string(n));
    if (!(l_s > l_i)) throw BadGrid("l_s must exceed l_i");
    const double l = length();
    nodes_.resize(n);
    for (std::size_t j = 0; j < n; ++j) nodes_[j] = l_i + static_cast<double>(j) * l / static_cast<double>(n);
    kappa_.resize(n / 2 + 1);
    for (std::size_t m = 0; m <= n / 2; ++m)
      kappa_[m] = 2.0 * std::numbers::pi * static_cast<double>(m) / l;
    plans_ = std::make_shared<detail::FftPlans>(static_cast<int>(n));
  }

  double left() const { return l_i_; }
  double right() const { return l_s_; }
  double length() const { return l_s_ - l_i_; }
  std::size_t size() const { return n_; }
  double dx() const { return length() / static_cast<double>(n_); }
  const Vec& nodes() const { return nodes_; }
  /// kappa_m = 2 pi m / l for m = 0..N/2 (the r2c half spectrum).
  const Vec& wavenumbers() const { return kappa_; }

  /// B_N v.
  Vec diff1(std::span<const double> v) const {
    return apply(v, [this](std::size_t m) {
      return m == n_ / 2 ? std::complex<double>(0.0) : std::complex<double>(0.0, kappa_[m]);
    });
  }

  /// A_N v.
  Vec diff2(std::span<const double> v) const {
    return apply(v, [this](std::size_t m) { return std::complex<double>(-kappa_[m] * kappa_[m]); });
  }

  /// Solves (I - b B_N^2) w = v.
  Vec helmholtz_inverse(double b, std::span<const double> v) const {
    if (b < 0.0) throw BadParams("helmholtz_inverse requires b >= 0");
    if (b == 0.0) {
      check(v);
      return Vec(v.begin(), v.end());
    }
    return apply(v, [this, b](std::size_t m) {
      const double k2 = m == n_ / 2 ? 0.0 : kappa_[m] * kappa_[m];
      return std::complex<double>(1.0 / (1.0 + b * k2));
    });
  }

  /// (I - b B_N^2) v, the operator inverted by helmholtz_inverse.
  Vec helmholtz(double b, std::span<const double> v) const {
    return apply(v, [this, b](std::size_t m) {
      const double k2 = m == n_ / 2 ? 0.0 : kappa_[m] * kappa_[m];
      return std::complex<double>(1.0 + b * k2);
    });
  }

  /// (l/N) sum_j v_j.
  double quadrature(std::span<const double> v) const {
    check(v);
    double s = 0.0;
    for (double x : v) s += x;
    return dx() * s;
  }

  /// (l/N) sum_j u_j v_j.
  double inner(std::span<const double> u, std::span<const double> v) const {
    check(u);
    check(v);
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += u[j] * v[j];
    return dx() * s;
  }

  /// Unnormalized r2c transform (N/2+1 coefficients).
  std::vector<std::complex<double>> forward(std::span<const double> v) const {
    check(v);
    std::vector<std::complex<double>> spec(n_ / 2 + 1);
    fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(v.data()),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    return spec;
  }

  /// Inverse of forward, including the 1/N factor. Consumes its argument.
  Vec backward(std::vector<std::complex<double>> spec) const {
    if (spec.size() != n_ / 2 + 1) throw LengthMismatch("spectrum length");
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (auto& c : spec) c *= inv_n;
    Vec out(n_);
    fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(spec.data()),
                         out.data());
    return out;
  }

  /// Symbol of diff1 at half-spectrum index m (zero at Nyquist).
  double diff1_wavenumber(std::size_t m) const { return m == n_ / 2 ? 0.0 : kappa_[m]; }

  /// Nodal samples of f.
  template <class F>
  Vec sample(F&& f) const {
    Vec out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = f(nodes_[j]);
    return out;
  }

 private:
  void check(std::span<const double> v) const {
    if (v.size() != n_)
      throw LengthMismatch("expected " + std::to_string(n_) + " values, got " +
                           std::to_string(v.size()));
  }

  template <class Multiplier>
  Vec apply(std::span<const double> v, Multiplier&& mult) const {
    check(v);
    std::vector<std::complex<double>> spec(n_ / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(v.data()), c);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t m = 0; m <= n_ / 2; ++m) spec[m] *= mult(m) * inv_n;
    Vec out(n_);
    fftw_execute_dft_c2r(plans_->backward, c, out.data());
    return out;
  }

  double l_i_;
  double l_s_;
  std::size_t n_;
  Vec nodes_;
  Vec kappa_;
  std::shared_ptr<detail::FftPlans> plans_;
};

inline SpectralGrid make_grid(double l_i, double l_s, std::size_t n) { return {l_i, l_s, n}; }

}  // namespace plmm
