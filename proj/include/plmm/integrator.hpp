#pragma once

// Partitioned linear multistep time stepping with starting procedures and
// invariant monitoring.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plmm/errors.hpp"
#include "plmm/lmm_catalog.hpp"
#include "plmm/state.hpp"

namespace plmm {

/// A partitioned ODE system dP/dt = f(P,Q), dQ/dt = g(P,Q) with monitored
/// invariant quantities.
template <class M>
concept PartitionedModel = requires(const M& m, std::span<const double> v, std::vector<double>& out) {
  { m.size() } -> std::convertible_to<std::size_t>;
  m.rhs(v, v, out, out);
  { m.invariant_values(v, v) } -> std::convertible_to<std::vector<double>>;
  { M::invariant_names() } -> std::convertible_to<std::vector<std::string>>;
};

using ExactSolution = std::function<PartitionedState(double)>;

/// Last max(k_p, k_q) states with their right-hand sides. Time of entry n is
/// t0 + n*dt, computed as a product.
class History {
 public:
  struct Entry {
    PartitionedState state;
    std::vector<double> f;
    std::vector<double> g;
  };

  History(std::size_t depth, double t0, double dt) : depth_(depth), t0_(t0), dt_(dt) {}

  void push(Entry e) {
    ++count_;
    e.state.t = time(count_ - 1);
    entries_.push_back(std::move(e));
    if (entries_.size() > depth_) entries_.pop_front();
  }

  template <PartitionedModel M>
  void push(const M& model, PartitionedState s) {
    Entry e{std::move(s), {}, {}};
    model.rhs(e.state.p, e.state.q, e.f, e.g);
    push(std::move(e));
  }

  /// back = 0 is the newest entry.
  const Entry& back(std::size_t i) const { return entries_[entries_.size() - 1 - i]; }
  const PartitionedState& newest() const { return entries_.back().state; }
  std::size_t depth() const { return depth_; }
  std::size_t filled() const { return entries_.size(); }
  /// Index of the newest entry.
  std::size_t index() const { return count_ - 1; }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  double time(std::size_t n) const { return t0_ + static_cast<double>(n) * dt_; }

  /// The stored window in reverse order, stepping with -dt from the newest
  /// time. A symmetric method run on it retraces the forward trajectory.
  History reversed() const {
    History out(depth_, newest().t, -dt_);
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) out.push(*it);
    return out;
  }

 private:
  std::size_t depth_;
  double t0_;
  double dt_;
  std::size_t count_ = 0;
  std::deque<Entry> entries_;
};

namespace detail {

/// (1/a_k)[ -sum_{j<k} a_j x_{n+1-k+j} + dt sum_{j<k} b_j F_{n+1-k+j} ]
inline std::vector<double> explicit_part(const GeneratingPair& pair, const History& h, bool use_p) {
  const auto& a = pair.rho();
  const auto& b = pair.sigma();
  const std::size_t k = pair.steps();
  const double dt = h.dt();
  const std::size_t n = (use_p ? h.newest().p : h.newest().q).size();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& e = h.back(k - 1 - j);
    const auto& x = use_p ? e.state.p : e.state.q;
    const auto& fx = use_p ? e.f : e.g;
    const double aj = a[j];
    const double bj = dt * b[j];
    if (aj != 0.0)
      for (std::size_t i = 0; i < n; ++i) out[i] -= aj * x[i];
    if (bj != 0.0)
      for (std::size_t i = 0; i < n; ++i) out[i] += bj * fx[i];
  }
  const double inv = 1.0 / a[k];
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace detail

struct FixedPointOptions {
  double tol = 1e-13;
  int max_iter = 50;
};

/// Advances the history by one step of the partitioned method and returns the
/// new state. Both recurrences are aligned on the newest index, so P and Q
/// are computed from the same window; implicit pairs are solved jointly by
/// fixed-point iteration.
template <PartitionedModel M>
const PartitionedState& plmm_step(const PLMMethod& method, History& hist, const M& model,
                                  FixedPointOptions fp = {}) {
  if (hist.filled() < method.steps())
    throw Error("history holds " + std::to_string(hist.filled()) + " values, method needs " +
                std::to_string(method.steps()));
  History::Entry next;
  next.state.p = detail::explicit_part(method.p_pair, hist, true);
  next.state.q = detail::explicit_part(method.q_pair, hist, false);

  const double cp = hist.dt() * method.p_pair.sigma().back() / method.p_pair.rho().back();
  const double cq = hist.dt() * method.q_pair.sigma().back() / method.q_pair.rho().back();
  if (cp == 0.0 && cq == 0.0) {
    model.rhs(next.state.p, next.state.q, next.f, next.g);
  } else {
    const auto base_p = next.state.p;
    const auto base_q = next.state.q;
    const auto& last = hist.back(0);
    std::vector<double> f = last.f, g = last.g;
    bool converged = false;
    for (int it = 0; it < fp.max_iter && !converged; ++it) {
      double change = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < base_p.size(); ++i) {
        const double v = base_p[i] + cp * f[i];
        change = std::max(change, std::abs(v - next.state.p[i]));
        scale = std::max(scale, std::abs(v));
        next.state.p[i] = v;
      }
      for (std::size_t i = 0; i < base_q.size(); ++i) {
        const double v = base_q[i] + cq * g[i];
        change = std::max(change, std::abs(v - next.state.q[i]));
        scale = std::max(scale, std::abs(v));
        next.state.q[i] = v;
      }
      model.rhs(next.state.p, next.state.q, f, g);
      converged = it > 0 && change <= fp.tol * scale;
    }
    if (!converged) throw FixedPointDiverged("implicit step did not converge");
    next.f = std::move(f);
    next.g = std::move(g);
  }
  if (!all_finite(next.state.p) || !all_finite(next.state.q)) throw NonFinite("PLMM step");
  hist.push(std::move(next));
  return hist.newest();
}

// One-step utilities -------------------------------------------------------

/// Classical fourth-order Runge-Kutta step.
template <PartitionedModel M>
PartitionedState rk4_step(const M& model, const PartitionedState& y, double h) {
  const std::size_t n = y.p.size();
  std::vector<double> k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q;
  PartitionedState tmp{std::vector<double>(n), std::vector<double>(y.q.size()), 0.0};
  auto stage = [&](const std::vector<double>& kp, const std::vector<double>& kq, double c) {
    for (std::size_t i = 0; i < n; ++i) tmp.p[i] = y.p[i] + c * kp[i];
    for (std::size_t i = 0; i < y.q.size(); ++i) tmp.q[i] = y.q[i] + c * kq[i];
  };
  model.rhs(y.p, y.q, k1p, k1q);
  stage(k1p, k1q, 0.5 * h);
  model.rhs(tmp.p, tmp.q, k2p, k2q);
  stage(k2p, k2q, 0.5 * h);
  model.rhs(tmp.p, tmp.q, k3p, k3q);
  stage(k3p, k3q, h);
  model.rhs(tmp.p, tmp.q, k4p, k4q);
  PartitionedState out = y;
  out.t = y.t + h;
  for (std::size_t i = 0; i < n; ++i)
    out.p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
  for (std::size_t i = 0; i < y.q.size(); ++i)
    out.q[i] += h / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
  return out;
}

/// Implicit midpoint rule y1 = y0 + h F((y0 + y1)/2), solved by fixed point.
template <PartitionedModel M>
PartitionedState implicit_midpoint_step(const M& model, const PartitionedState& y, double h,
                                        FixedPointOptions fp = {}) {
  std::vector<double> f, g;
  model.rhs(y.p, y.q, f, g);
  PartitionedState mid = y;
  PartitionedState out = y;
  for (int it = 0; it < fp.max_iter; ++it) {
    double change = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < y.p.size(); ++i) {
      const double v = y.p[i] + h * f[i];
      change = std::max(change, std::abs(v - out.p[i]));
      scale = std::max(scale, std::abs(v));
      out.p[i] = v;
      mid.p[i] = 0.5 * (y.p[i] + v);
    }
    for (std::size_t i = 0; i < y.q.size(); ++i) {
      const double v = y.q[i] + h * g[i];
      change = std::max(change, std::abs(v - out.q[i]));
      scale = std::max(scale, std::abs(v));
      out.q[i] = v;
      mid.q[i] = 0.5 * (y.q[i] + v);
    }
    if (it > 0 && change <= fp.tol * scale) {
      out.t = y.t + h;
      return out;
    }
    model.rhs(mid.p, mid.q, f, g);
  }
  throw FixedPointDiverged("implicit midpoint iteration did not converge");
}

/// Advances y over [y.t, y.t + h] with RK4, halving the substep until the
/// step-doubling estimate of the error is at most tol. Returns the finer result.
template <PartitionedModel M>
PartitionedState rk4_controlled(const M& model, const PartitionedState& y, double h, double tol,
                                std::size_t max_substeps = std::size_t{1} << 18) {
  auto run = [&](std::size_t m) {
    PartitionedState s = y;
    const double sub = h / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) s = rk4_step(model, s, sub);
    s.t = y.t + h;
    return s;
  };
  PartitionedState coarse = run(1);
  for (std::size_t m = 2; m <= max_substeps; m *= 2) {
    PartitionedState fine = run(m);
    const bool finite = all_finite(fine.p) && all_finite(fine.q);
    if (finite && max_diff(fine, coarse) / 15.0 <= tol) return fine;
    coarse = std::move(fine);
  }
  throw Error("RK4 substep control could not reach tolerance " + std::to_string(tol));
}

// Starting procedures ----------------------------------------------------------

enum class StartKind { ExactNodal, ImplicitMidpoint, ReferenceRK };

struct StartingProcedure {
  StartKind kind = StartKind::ExactNodal;
  /// Used by ReferenceRK: local error <= 0.01 * dt^(target_order + 1).
  int target_order = 4;
};

/// Fills a history with the method's k starting values at t0, t0+dt, ...
template <PartitionedModel M>
History make_start(const PLMMethod& method, const StartingProcedure& proc, const M& model,
                   const PartitionedState& initial, double dt, const ExactSolution& exact = {}) {
  const std::size_t k = method.steps();
  History hist(k, initial.t, dt);
  switch (proc.kind) {
    case StartKind::ExactNodal: {
      if (!exact) throw NoExactSolution("ExactNodal start needs an exact solution");
      for (std::size_t n = 0; n < k; ++n) hist.push(model, exact(hist.time(n)));
      break;
    }
    case StartKind::ImplicitMidpoint: {
      PartitionedState y = initial;
      hist.push(model, y);
      for (std::size_t n = 1; n < k; ++n) {
        y = implicit_midpoint_step(model, y, dt);
        hist.push(model, y);
      }
      break;
    }
    case StartKind::ReferenceRK: {
      const double tol = 0.01 * std::pow(std::abs(dt), proc.target_order + 1);
      PartitionedState y = initial;
      hist.push(model, y);
      for (std::size_t n = 1; n < k; ++n) {
        y = rk4_controlled(model, y, dt, tol);
        hist.push(model, y);
      }
      break;
    }
  }
  return hist;
}

// Monitoring -------------------------------------------------------------------

struct InvariantRecord {
  double t = 0.0;
  std::vector<double> values;
  /// values - values(t0)
  std::vector<double> deviations;
  /// max-norm error against the exact solution, NaN when none is known
  double sol_err = std::numeric_limits<double>::quiet_NaN();
};

struct IntegrateOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t record_every = 1;
  double blowup_threshold = 1e6;
  /// States closest to these times are kept in IntegrationResult::snapshots.
  std::vector<double> snapshot_times;
};

struct IntegrationResult {
  std::vector<InvariantRecord> records;
  PartitionedState final_state;
  std::vector<PartitionedState> snapshots;
  bool truncated = false;
  double truncation_time = std::numeric_limits<double>::quiet_NaN();
};

/// Runs the method from the starting procedure to t_end. A state whose max
/// norm exceeds the blow-up threshold (or becomes non-finite) ends the run
/// with truncated = true; records up to that point are kept.
template <PartitionedModel M>
IntegrationResult integrate(const PLMMethod& method, const StartingProcedure& proc, const M& model,
                            const PartitionedState& initial, const IntegrateOptions& opt,
                            const ExactSolution& exact = {}) {
  if (!(opt.t_end > initial.t)) throw Error("t_end must exceed the initial time");
  if (opt.record_every < 1) throw Error("record_every must be >= 1");
  const auto total = static_cast<std::size_t>(std::llround((opt.t_end - initial.t) / opt.dt));

  IntegrationResult result;
  std::vector<std::size_t> snap_steps;
  for (double ts : opt.snapshot_times)
    snap_steps.push_back(static_cast<std::size_t>(std::llround((ts - initial.t) / opt.dt)));

  std::vector<double> base;
  auto observe = [&](const PartitionedState& s, std::size_t n) {
    for (std::size_t i = 0; i < snap_steps.size(); ++i)
      if (snap_steps[i] == n) result.snapshots.push_back(s);
    if (n % opt.record_every != 0 && n != total) return;
    InvariantRecord rec;
    rec.t = s.t;
    rec.values = model.invariant_values(s.p, s.q);
    if (base.empty()) base = rec.values;
    rec.deviations.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) rec.deviations[i] = rec.values[i] - base[i];
    if (exact) rec.sol_err = max_diff(s, exact(s.t));
    result.records.push_back(std::move(rec));
  };

  // The initial state is recorded even if the starting procedure regenerates it.
  History hist = make_start(method, proc, model, initial, opt.dt, exact);
  for (std::size_t n = 0; n < hist.filled(); ++n) {
    const auto& e = hist.back(hist.filled() - 1 - n);
    observe(e.state, n);
  }

  auto truncate = [&](double t) {
    result.truncated = true;
    result.truncation_time = t;
  };
  for (std::size_t n = hist.index() + 1; n <= total; ++n) {
    try {
      plmm_step(method, hist, model);
    } catch (const NonFinite&) {
      truncate(hist.time(n));
      break;
    }
    const auto& s = hist.newest();
    if (max_norm(s) > opt.blowup_threshold) {
      truncate(s.t);
      break;
    }
    observe(s, n);
  }
  result.final_state = hist.newest();
  return result;
}

/// Fixed-step RK4 trajectory from y0, reported at multiples of sample_every
/// steps (and at the end). Throws BlowUp when the max norm exceeds the guard.
template <PartitionedModel M>
std::vector<PartitionedState> reference_solve(const M& model, const PartitionedState& y0,
                                              double dt_ref, double t_end,
                                              std::size_t sample_every = 1,
                                              double blowup_threshold = 1e6) {
  const auto total = static_cast<std::size_t>(std::llround((t_end - y0.t) / dt_ref));
  std::vector<PartitionedState> out{y0};
  PartitionedState y = y0;
  for (std::size_t n = 1; n <= total; ++n) {
    y = rk4_step(model, y, dt_ref);
    y.t = y0.t + static_cast<double>(n) * dt_ref;
    if (!(max_norm(y) <= blowup_threshold)) throw BlowUp("reference trajectory at t = " + std::to_string(y.t));
    if (n % sample_every == 0 || n == total) out.push_back(y);
  }
  return out;
}

}  // namespace plmm
