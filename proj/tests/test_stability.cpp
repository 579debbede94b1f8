#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "plmm/stability.hpp"

using namespace plmm;

namespace {

bool contains(const std::vector<std::complex<double>>& roots, std::complex<double> x, double tol) {
  return std::any_of(roots.begin(), roots.end(), [&](auto r) { return std::abs(r - x) < tol; });
}

}  // namespace

TEST(Stability, RootsClosedUnderConjugation) {
  for (const auto& [name, m] : catalog())
    for (double z : {0.1, 0.4, 0.9}) {
      const auto roots = stability_roots(m, z);
      for (auto r : roots) EXPECT_TRUE(contains(roots, std::conj(r), 1e-9)) << name << ' ' << z;
    }
}

TEST(Stability, SymmetricMethodIsSelfReciprocal) {
  const auto m = method_by_name("SPLMM2");
  for (double z : {0.2, 0.6, 1.5}) {
    const auto roots = stability_roots(m, z);
    for (auto r : roots) EXPECT_TRUE(contains(roots, 1.0 / std::conj(r), 1e-8)) << z;
  }
}

TEST(Stability, FactorsAtZero) {
  for (const auto& [name, m] : catalog()) {
    auto roots = stability_roots(m, 0.0);
    auto expected = poly::roots(poly::multiply(m.p_pair.rho(), m.q_pair.rho()));
    ASSERT_EQ(roots.size(), expected.size()) << name;
    for (auto r : expected) EXPECT_TRUE(contains(roots, r, 1e-6)) << name;
  }
}

TEST(Stability, ModulusIsContinuousInZ) {
  for (const auto& [name, m] : catalog()) {
    const auto scan = scan_stability(m, 1.0, 1e-3);
    ASSERT_EQ(scan.z_values.size(), 1000u);
    for (std::size_t i = 1; i < scan.z_values.size(); ++i)
      EXPECT_LT(std::abs(scan.max_moduli[i] - scan.max_moduli[i - 1]), 0.05) << name << ' ' << i;
  }
}

TEST(Stability, ImaginaryAxisIntervals) {
  EXPECT_NEAR(imaginary_axis_interval(method_by_name("SPLMM2"), 1e-10, 2.0), 0.708, 2e-3);
  EXPECT_NEAR(imaginary_axis_interval(method_by_name("NSNPLMM3"), 1e-10, 2.0), 0.724, 2e-3);
  // The excess z^4/8 stays under the tolerance only while z < (8e-10)^(1/4).
  EXPECT_NEAR(imaginary_axis_interval(method_by_name("NSPLMM2"), 1e-10, 2.0), 0.005, 1e-3);
}

TEST(Stability, WeakInstabilityOfNonSymmetricPair) {
  // max modulus - 1 ~ z^4 / 8 at small z.
  const auto m = method_by_name("NSPLMM2");
  for (double z : {0.01, 0.02, 0.05}) {
    const double excess = max_root_modulus(m, z) - 1.0;
    EXPECT_NEAR(excess / std::pow(z, 4), 0.125, 0.02) << z;
  }
}
