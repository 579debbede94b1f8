#pragma once

// Fourier-collocation semidiscretization of the NLS equation
//   p_t + q_xx + (p^2+q^2)^sigma q = 0,   q_t - p_xx - (p^2+q^2)^sigma p = 0
// on a periodic interval, with u = p + i q.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "plmm/errors.hpp"
#include "plmm/spectral_grid.hpp"
#include "plmm/state.hpp"

namespace plmm {

using NlsState = PartitionedState;

/// Soliton family parameters. a = lambda1 - lambda2^2/4 must be positive.
struct SolitonParams {
  double lambda1 = 1.25;
  double lambda2 = 1.0;  // speed
  double x0 = 0.0;
  double theta0 = 0.0;

  double a() const { return lambda1 - 0.25 * lambda2 * lambda2; }

  /// Parameters with a given amplitude parameter a and speed.
  static SolitonParams from_a(double a, double speed, double x0, double theta0) {
    return {a + 0.25 * speed * speed, speed, x0, theta0};
  }
};

struct NlsInvariants {
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;
};

class NlsModel {
 public:
  NlsModel(SpectralGrid grid, double sigma_exp) : grid_(std::move(grid)), sigma_(sigma_exp) {
    if (!(sigma_exp > 0.0)) throw BadParams("nonlinearity exponent must be positive");
  }

  const SpectralGrid& grid() const { return grid_; }
  double sigma_exp() const { return sigma_; }
  std::size_t size() const { return grid_.size(); }

  /// (p^2+q^2)^sigma pointwise, with 0^sigma = 0.
  Vec nonlinearity(std::span<const double> p, std::span<const double> q) const {
    Vec out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double s = p[j] * p[j] + q[j] * q[j];
      if (sigma_ == 1.0)
        out[j] = s;
      else
        out[j] = s > 0.0 ? std::exp(sigma_ * std::log(s)) : 0.0;
    }
    return out;
  }

  /// dP = -A_N Q - |u|^{2 sigma} Q,  dQ = A_N P + |u|^{2 sigma} P.
  void rhs(std::span<const double> p, std::span<const double> q, Vec& dp, Vec& dq) const {
    const Vec a_q = grid_.diff2(q);
    const Vec a_p = grid_.diff2(p);
    const Vec nl = nonlinearity(p, q);
    dp.resize(p.size());
    dq.resize(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      dp[j] = -a_q[j] - nl[j] * q[j];
      dq[j] = a_p[j] + nl[j] * p[j];
    }
    if (!all_finite(dp) || !all_finite(dq)) throw NonFinite("NLS right-hand side");
  }

  /// Scaled mass, momentum and energy: dx * (1/2)(P.P + Q.Q), dx * (1/2)(P.BQ - Q.BP),
  /// -dx * (1/2)[Q.AQ + P.AP + (1/(sigma+1)) sum |u|^{2 sigma + 2}].
  NlsInvariants invariants(std::span<const double> p, std::span<const double> q) const {
    const Vec bp = grid_.diff1(p), bq = grid_.diff1(q);
    const Vec ap = grid_.diff2(p), aq = grid_.diff2(q);
    const Vec nl = nonlinearity(p, q);
    double mass = 0.0, mom = 0.0, quad = 0.0, pot = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double s = p[j] * p[j] + q[j] * q[j];
      mass += s;
      mom += p[j] * bq[j] - q[j] * bp[j];
      quad += q[j] * aq[j] + p[j] * ap[j];
      pot += nl[j] * s;
    }
    const double dx = grid_.dx();
    NlsInvariants out{0.5 * dx * mass, 0.5 * dx * mom,
                      -0.5 * dx * (quad + pot / (sigma_ + 1.0))};
    if (!std::isfinite(out.mass) || !std::isfinite(out.energy)) throw NonFinite("NLS invariants");
    return out;
  }

  std::vector<double> invariant_values(std::span<const double> p, std::span<const double> q) const {
    const auto inv = invariants(p, q);
    return {inv.mass, inv.momentum, inv.energy};
  }
  static std::vector<std::string> invariant_names() { return {"mass", "momentum", "energy"}; }

  // Gradients of the unscaled sums (multiply by dx for the scaled invariants).

  /// grad of -(1/2)[Q.AQ + P.AP + sum |u|^{2sigma+2}/(sigma+1)]
  std::array<Vec, 2> grad_energy(std::span<const double> p, std::span<const double> q) const {
    Vec gp = grid_.diff2(p), gq = grid_.diff2(q);
    const Vec nl = nonlinearity(p, q);
    for (std::size_t j = 0; j < p.size(); ++j) {
      gp[j] = -gp[j] - nl[j] * p[j];
      gq[j] = -gq[j] - nl[j] * q[j];
    }
    return {gp, gq};
  }
  static std::array<Vec, 2> grad_mass(std::span<const double> p, std::span<const double> q) {
    return {Vec(p.begin(), p.end()), Vec(q.begin(), q.end())};
  }
  /// grad of (1/2)(P.BQ - Q.BP) = P.BQ is (BQ, -BP).
  std::array<Vec, 2> grad_momentum(std::span<const double> p, std::span<const double> q) const {
    Vec gp = grid_.diff1(q), gq = grid_.diff1(p);
    for (double& v : gq) v = -v;
    return {gp, gq};
  }

 private:
  SpectralGrid grid_;
  double sigma_;
};

/// Nodal soliton rho(xi) e^{i alpha} with xi = x - lambda2 t - x0 and
/// alpha = (lambda2/2) xi + theta0 + lambda1 t,
/// rho(xi) = (a(sigma+1))^{1/(2 sigma)} sech(sigma sqrt(a) xi)^{1/sigma}.
inline NlsState soliton(const SolitonParams& params, double sigma_exp, const SpectralGrid& grid,
                        double t) {
  const double a = params.a();
  if (!(a > 0.0)) throw BadParams("soliton requires a = lambda1 - lambda2^2/4 > 0");
  if (!(sigma_exp > 0.0)) throw BadParams("nonlinearity exponent must be positive");
  const double amp = std::pow(a * (sigma_exp + 1.0), 1.0 / (2.0 * sigma_exp));
  const double k = sigma_exp * std::sqrt(a);
  NlsState s;
  s.t = t;
  s.p.resize(grid.size());
  s.q.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double xi = grid.nodes()[j] - params.lambda2 * t - params.x0;
    const double rho = amp * std::pow(1.0 / std::cosh(k * xi), 1.0 / sigma_exp);
    const double alpha = 0.5 * params.lambda2 * xi + params.theta0 + params.lambda1 * t;
    s.p[j] = rho * std::cos(alpha);
    s.q[j] = rho * std::sin(alpha);
  }
  return s;
}

inline NlsState perturb(NlsState state, double a1, double a2) {
  for (double& v : state.p) v *= a1;
  for (double& v : state.q) v *= a2;
  return state;
}

}  // namespace plmm
