#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "plmm/nls.hpp"

using namespace plmm;

namespace {

const SpectralGrid kDesk(-128.0, 128.0, 2048);

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// Smooth random state: a few random Fourier modes under a Gaussian envelope.
NlsState random_state(std::mt19937_64& rng, const SpectralGrid& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NlsState s;
  s.p.assign(g.size(), 0.0);
  s.q.assign(g.size(), 0.0);
  for (int m = 0; m < 6; ++m) {
    const double k = 2.0 * std::numbers::pi * (1 + static_cast<int>(8 * std::abs(u(rng)))) / g.length();
    const double ap = u(rng), aq = u(rng), ph = 3.0 * u(rng);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double x = g.nodes()[j];
      s.p[j] += ap * std::cos(k * x + ph);
      s.q[j] += aq * std::sin(k * x - ph);
    }
  }
  return s;
}

// Fourth-order central difference in t of the exact soliton.
NlsState soliton_time_derivative(const SolitonParams& sp, double sigma, const SpectralGrid& g,
                                 double t) {
  const double h = 1e-3;
  const auto m2 = soliton(sp, sigma, g, t - 2 * h), m1 = soliton(sp, sigma, g, t - h);
  const auto p1 = soliton(sp, sigma, g, t + h), p2 = soliton(sp, sigma, g, t + 2 * h);
  NlsState d;
  d.p.resize(g.size());
  d.q.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    d.p[j] = (m2.p[j] - 8 * m1.p[j] + 8 * p1.p[j] - p2.p[j]) / (12 * h);
    d.q[j] = (m2.q[j] - 8 * m1.q[j] + 8 * p1.q[j] - p2.q[j]) / (12 * h);
  }
  return d;
}

}  // namespace

TEST(Nls, SolitonSatisfiesEquation) {
  // sech^(1/sigma) has branch points nearer the real axis for sigma = 2, so
  // that case gets a finer grid.
  for (double sigma : {1.0, 2.0}) {
    const SpectralGrid g = sigma == 1.0 ? kDesk : SpectralGrid(-64.0, 64.0, 2048);
    const NlsModel model(g, sigma);
    const auto sp = SolitonParams::from_a(1.0, 1.0, -10.0, 0.3);
    const auto s = soliton(sp, sigma, g, 0.7);
    Vec dp, dq;
    model.rhs(s.p, s.q, dp, dq);
    const auto d = soliton_time_derivative(sp, sigma, g, 0.7);
    EXPECT_LT(max_diff({dp, dq, 0.0}, d), 1e-9) << sigma;
  }
}

TEST(Nls, SolitonInvariants) {
  const NlsModel model(kDesk, 1.0);
  const auto s = soliton(SolitonParams::from_a(1.0, 1.0, 0.0, 0.0), 1.0, kDesk, 0.0);
  const auto inv = model.invariants(s.p, s.q);
  EXPECT_NEAR(inv.mass, 2.0, 1e-10);
  EXPECT_NEAR(inv.momentum, 1.0, 1e-10);
  EXPECT_NEAR(inv.energy, -1.0 / 6.0, 1e-10);
  EXPECT_EQ(NlsModel::invariant_names().size(), model.invariant_values(s.p, s.q).size());
}

TEST(Nls, SolitonIsRelativeEquilibrium) {
  const NlsModel model(kDesk, 1.0);
  const auto sp = SolitonParams::from_a(1.0, 1.0, 5.0, 1.1);
  const auto s = soliton(sp, 1.0, kDesk, 0.0);
  const auto gh = model.grad_energy(s.p, s.q);
  const auto gm = NlsModel::grad_mass(s.p, s.q);
  const auto gi = model.grad_momentum(s.p, s.q);
  double res = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < kDesk.size(); ++j)
      res = std::max(res, std::abs(gh[c][j] + sp.lambda1 * gm[c][j] - sp.lambda2 * gi[c][j]));
  EXPECT_LT(res, 1e-8);
}

TEST(Nls, ConservationIdentities) {
  std::mt19937_64 rng(42);
  const SpectralGrid g(-20.0, 20.0, 128);
  const NlsModel model(g, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(rng, g);
    Vec dp, dq;
    model.rhs(s.p, s.q, dp, dq);
    const double rn = std::hypot(norm(dp), norm(dq));
    const auto gm = NlsModel::grad_mass(s.p, s.q);
    const auto gh = model.grad_energy(s.p, s.q);
    const double mass_rate = dot(gm[0], dp) + dot(gm[1], dq);
    const double energy_rate = dot(gh[0], dp) + dot(gh[1], dq);
    EXPECT_LE(std::abs(mass_rate), 1e-10 * rn * std::hypot(norm(gm[0]), norm(gm[1])));
    EXPECT_LE(std::abs(energy_rate), 1e-10 * rn * std::hypot(norm(gh[0]), norm(gh[1])));
  }
}

TEST(Nls, MomentumRateVanishesForLinearFlow) {
  // The quadratic part of the flow conserves the discrete momentum exactly.
  std::mt19937_64 rng(1);
  const SpectralGrid g(-20.0, 20.0, 128);
  const NlsModel model(g, 1.0);
  auto s = random_state(rng, g);
  for (double& v : s.p) v *= 1e-6;
  for (double& v : s.q) v *= 1e-6;
  Vec dp, dq;
  model.rhs(s.p, s.q, dp, dq);
  const auto gi = model.grad_momentum(s.p, s.q);
  const double rate = dot(gi[0], dp) + dot(gi[1], dq);
  EXPECT_LE(std::abs(rate), 1e-10 * std::hypot(norm(dp), norm(dq)) *
                                std::hypot(norm(gi[0]), norm(gi[1])));
}

TEST(Nls, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  const SpectralGrid g(-8.0, 8.0, 64);
  const NlsModel model(g, 1.0);
  const auto s = random_state(rng, g);
  const double dx = g.dx();
  const double h = 1e-6;
  const auto gh = model.grad_energy(s.p, s.q);
  const auto gi = model.grad_momentum(s.p, s.q);
  const auto gm = NlsModel::grad_mass(s.p, s.q);
  double worst = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      auto plus = s, minus = s;
      (c == 0 ? plus.p : plus.q)[j] += h;
      (c == 0 ? minus.p : minus.q)[j] -= h;
      const auto ip = model.invariants(plus.p, plus.q), im = model.invariants(minus.p, minus.q);
      const double fd_h = (ip.energy - im.energy) / (2 * h * dx);
      const double fd_i = (ip.momentum - im.momentum) / (2 * h * dx);
      const double fd_m = (ip.mass - im.mass) / (2 * h * dx);
      worst = std::max({worst, std::abs(fd_h - gh[c][j]) / std::max(1.0, std::abs(gh[c][j])),
                        std::abs(fd_i - gi[c][j]) / std::max(1.0, std::abs(gi[c][j])),
                        std::abs(fd_m - gm[c][j]) / std::max(1.0, std::abs(gm[c][j]))});
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Nls, PhaseRotationEquivariance) {
  std::mt19937_64 rng(4);
  const SpectralGrid g(-20.0, 20.0, 128);
  const NlsModel model(g, 1.0);
  const auto s = random_state(rng, g);
  const double th = 0.83, c = std::cos(th), sn = std::sin(th);
  NlsState r = s;
  for (std::size_t j = 0; j < g.size(); ++j) {
    r.p[j] = c * s.p[j] - sn * s.q[j];
    r.q[j] = sn * s.p[j] + c * s.q[j];
  }
  Vec dp, dq, rp, rq;
  model.rhs(s.p, s.q, dp, dq);
  model.rhs(r.p, r.q, rp, rq);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    err = std::max(err, std::abs(rp[j] - (c * dp[j] - sn * dq[j])));
    err = std::max(err, std::abs(rq[j] - (sn * dp[j] + c * dq[j])));
  }
  EXPECT_LT(err, 1e-10 * std::max(1.0, max_norm(dp)));
  const auto a = model.invariants(s.p, s.q), b = model.invariants(r.p, r.q);
  EXPECT_NEAR(a.mass, b.mass, 1e-12);
  EXPECT_NEAR(a.energy, b.energy, 1e-10);
}

TEST(Nls, PerturbScalesComponents) {
  const auto s = soliton(SolitonParams{}, 1.0, kDesk, 0.0);
  const auto t = perturb(s, 1.05, 0.5);
  EXPECT_DOUBLE_EQ(t.p[1000], 1.05 * s.p[1000]);
  EXPECT_DOUBLE_EQ(t.q[1000], 0.5 * s.q[1000]);
}

TEST(Nls, Errors) {
  EXPECT_THROW(NlsModel(kDesk, 0.0), BadParams);
  EXPECT_THROW(soliton(SolitonParams{0.1, 2.0, 0.0, 0.0}, 1.0, kDesk, 0.0), BadParams);
  const NlsModel model(kDesk, 1.0);
  Vec p(kDesk.size(), 0.0), q(kDesk.size(), 0.0), dp, dq;
  p[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model.rhs(p, q, dp, dq), NonFinite);
  EXPECT_THROW(model.rhs(Vec(10), Vec(10), dp, dq), LengthMismatch);
}
