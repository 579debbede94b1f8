#pragma once

// Fourier-collocation semidiscretization of the (a,b,c,d)-Boussinesq system
//   eta_t + w_x + (eta w)_x + a w_xxx - b eta_xxt = 0
//   w_t + eta_x + w w_x + c eta_xxx - d w_xxt = 0.
//
// The nonlinear terms are discretized in conservative form,
//   dGamma = -(I - b B^2)^{-1} B [ (I + a B^2) W + W.Gamma ]
//   dW     = -(I - d B^2)^{-1} B [ (I + c B^2) Gamma + W.^2 / 2 ],
// which for b = d is S grad H_N with S skew-adjoint, so M1, M2 and H_N are
// conserved exactly. I_N is conserved up to aliasing error.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plmm/errors.hpp"
#include "plmm/spectral_grid.hpp"
#include "plmm/state.hpp"

namespace plmm {

using BoussinesqState = PartitionedState;

struct BoussinesqParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  BoussinesqParams() = default;
  BoussinesqParams(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
    if (a > 0.0 || c > 0.0) throw BadParams("a and c must be <= 0");
    if (b < 0.0 || d < 0.0) throw BadParams("b and d must be >= 0");
    if (std::abs(a + b + c + d - 1.0 / 3.0) > 1e-12) throw BadParams("a + b + c + d must equal 1/3");
  }

  bool hamiltonian() const { return b == d; }
};

/// a = 0, b = d = (theta^2 - 1/3)/2, c = 2/3 - theta^2.
inline BoussinesqParams bona_smith_params(double theta_sq) {
  if (!(theta_sq > 1.0 / 3.0 && theta_sq <= 1.0))
    throw BadParams("Bona-Smith systems need 1/3 < theta^2 <= 1");
  const double b = 0.5 * (theta_sq - 1.0 / 3.0);
  return {0.0, b, 2.0 / 3.0 - theta_sq, b};
}

struct BoussinesqInvariants {
  double m1 = 0.0;
  double m2 = 0.0;
  std::optional<double> momentum;  // I_N, only when b == d
  std::optional<double> energy;    // H_N, only when b == d
};

class BoussinesqModel {
 public:
  BoussinesqModel(SpectralGrid grid, BoussinesqParams params)
      : grid_(std::move(grid)), params_(params) {}

  const SpectralGrid& grid() const { return grid_; }
  const BoussinesqParams& params() const { return params_; }
  std::size_t size() const { return grid_.size(); }

  void rhs(std::span<const double> gamma, std::span<const double> w, Vec& dgamma, Vec& dw) const {
    const std::size_t n = gamma.size();
    Vec wg(n), half_w2(n);
    for (std::size_t j = 0; j < n; ++j) {
      wg[j] = w[j] * gamma[j];
      half_w2[j] = 0.5 * w[j] * w[j];
    }
    auto w_hat = grid_.forward(w);
    auto g_hat = grid_.forward(gamma);
    const auto wg_hat = grid_.forward(wg);
    const auto w2_hat = grid_.forward(half_w2);
    const auto& p = params_;
    for (std::size_t m = 0; m < w_hat.size(); ++m) {
      const double k = grid_.diff1_wavenumber(m);
      const double k2 = k * k;
      const std::complex<double> ik(0.0, k);
      const auto u = (1.0 - p.a * k2) * w_hat[m] + wg_hat[m];
      const auto v = (1.0 - p.c * k2) * g_hat[m] + w2_hat[m];
      w_hat[m] = -ik * u / (1.0 + p.b * k2);
      g_hat[m] = -ik * v / (1.0 + p.d * k2);
    }
    dgamma = grid_.backward(std::move(w_hat));
    dw = grid_.backward(std::move(g_hat));
    if (!all_finite(dgamma) || !all_finite(dw)) throw NonFinite("Boussinesq right-hand side");
  }

  /// Scaled (by dx) M1, M2 and, when b == d, I_N and H_N.
  BoussinesqInvariants invariants(std::span<const double> gamma, std::span<const double> w) const {
    const Vec bg = grid_.diff1(gamma), bw = grid_.diff1(w);
    double m1 = 0.0, m2 = 0.0, gw = 0.0, bgbw = 0.0, gg = 0.0, ww = 0.0, bwbw = 0.0, bgbg = 0.0,
           gw2 = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      m1 += gamma[j];
      m2 += w[j];
      gw += gamma[j] * w[j];
      bgbw += bg[j] * bw[j];
      gg += gamma[j] * gamma[j];
      ww += w[j] * w[j];
      bwbw += bw[j] * bw[j];
      bgbg += bg[j] * bg[j];
      gw2 += gamma[j] * w[j] * w[j];
    }
    const double dx = grid_.dx();
    BoussinesqInvariants out;
    out.m1 = dx * m1;
    out.m2 = dx * m2;
    if (params_.hamiltonian()) {
      out.momentum = dx * (gw + params_.b * bgbw);
      out.energy = 0.5 * dx * (gg + ww - params_.a * bwbw - params_.c * bgbg + gw2);
    }
    if (!std::isfinite(out.m1) || !std::isfinite(out.m2)) throw NonFinite("Boussinesq invariants");
    return out;
  }

  double momentum(std::span<const double> gamma, std::span<const double> w) const {
    auto inv = invariants(gamma, w);
    if (!inv.momentum) throw NotHamiltonian("I_N requires b == d");
    return *inv.momentum;
  }
  double energy(std::span<const double> gamma, std::span<const double> w) const {
    auto inv = invariants(gamma, w);
    if (!inv.energy) throw NotHamiltonian("H_N requires b == d");
    return *inv.energy;
  }

  /// M1, M2, I, H (the last two throw NotHamiltonian when b != d).
  std::vector<double> invariant_values(std::span<const double> gamma, std::span<const double> w) const {
    auto inv = invariants(gamma, w);
    if (!inv.momentum) throw NotHamiltonian("I_N and H_N require b == d");
    return {inv.m1, inv.m2, *inv.momentum, *inv.energy};
  }
  static std::vector<std::string> invariant_names() { return {"M1", "M2", "I", "H"}; }

  // Gradients of the unscaled sums.

  /// (Gamma + c B^2 Gamma + W.^2/2, W + a B^2 W + W.Gamma)
  std::array<Vec, 2> grad_energy(std::span<const double> gamma, std::span<const double> w) const {
    Vec bbg = grid_.diff1(grid_.diff1(gamma));
    Vec bbw = grid_.diff1(grid_.diff1(w));
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      bbg[j] = gamma[j] + params_.c * bbg[j] + 0.5 * w[j] * w[j];
      bbw[j] = w[j] + params_.a * bbw[j] + w[j] * gamma[j];
    }
    return {bbg, bbw};
  }
  /// ((I - b B^2) W, (I - b B^2) Gamma)
  std::array<Vec, 2> grad_momentum(std::span<const double> gamma, std::span<const double> w) const {
    return {grid_.helmholtz(params_.b, w), grid_.helmholtz(params_.b, gamma)};
  }

 private:
  SpectralGrid grid_;
  BoussinesqParams params_;
};

/// The explicit sech^2 solitary-wave family.
struct SolitaryWaveBB {
  double beta = 0.0;
  double amplitude = 0.0;
  double lambda = 0.0;
  double speed = 0.0;
  double x0 = 0.0;

  /// Relative tolerance on the traveling-wave compatibility relations. Loose
  /// enough to accept a speed quoted to five significant digits.
  static constexpr double kAdmissibleTol = 1e-4;

  SolitaryWaveBB(double beta_, const BoussinesqParams& p, double x0_) : beta(beta_), x0(x0_) {
    const double b2 = beta * beta;
    if (!(b2 > 0.0 && b2 < 1.0)) throw BadParams("solitary wave requires 0 < beta^2 < 1");
    const double denom = (p.a - p.b) * b2 + 2.0 * p.b;
    if (!(denom > 0.0)) throw BadParams("lambda^2 <= 0 for this beta");
    amplitude = 3.0 * (1.0 - b2) / b2;
    lambda = 0.5 * std::sqrt(2.0 * (1.0 - b2) / denom);
    speed = (2.0 - b2) / beta;

    // Substituting eta = A sech^2(lambda x), w = beta eta into the profile
    // equations -c eta + w + w eta + a w'' + c b eta'' = 0,
    // -c w + eta + w^2/2 + c eta'' + c d w'' = 0 and matching the eta and
    // eta^2 coefficients gives four relations.
    const double l2 = lambda * lambda, cs = speed, amp = amplitude;
    const double r[4] = {
        -cs + beta + 4.0 * l2 * (p.a * beta + cs * p.b),
        beta - 6.0 * l2 * (p.a * beta + cs * p.b) / amp,
        -cs * beta + 1.0 + 4.0 * l2 * (p.c + cs * p.d * beta),
        0.5 * b2 - 6.0 * l2 * (p.c + cs * p.d * beta) / amp,
    };
    for (double v : r)
      if (std::abs(v) > kAdmissibleTol * std::max(1.0, cs))
        throw BadParams("beta = " + std::to_string(beta) +
                        " does not give a sech^2 solitary wave for these parameters");
  }

  double eta(double x, double t) const {
    const double s = 1.0 / std::cosh(lambda * (x - speed * t - x0));
    return amplitude * s * s;
  }
};

/// Positive root of beta^2 + c_s beta - 2 = 0.
inline double beta_from_speed(double c_s) {
  if (!(c_s > 0.0)) throw BadParams("speed must be positive");
  return 0.5 * (-c_s + std::sqrt(c_s * c_s + 8.0));
}

inline BoussinesqState solitary_wave_bb(double beta, const BoussinesqParams& params, double x0,
                                        const SpectralGrid& grid, double t) {
  const SolitaryWaveBB wave(beta, params, x0);
  BoussinesqState s;
  s.t = t;
  s.p = grid.sample([&](double x) { return wave.eta(x, t); });
  s.q = s.p;
  for (double& v : s.q) v *= beta;
  return s;
}

/// Gamma = A exp(-B (x - x0)^2), W = C Gamma.
inline BoussinesqState gaussian_data(double amp, double width, double ratio, double x0,
                                     const SpectralGrid& grid) {
  if (!(width > 0.0)) throw BadParams("Gaussian width parameter B must be positive");
  BoussinesqState s;
  s.p = grid.sample([&](double x) { return amp * std::exp(-width * (x - x0) * (x - x0)); });
  s.q = s.p;
  for (double& v : s.q) v *= ratio;
  return s;
}

}  // namespace plmm
