#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>

#include "oqft/errors.hpp"
#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

using namespace oqft;
using namespace oqft::errors;
using units::kPi;

namespace {

Vector two_strings(std::size_t n, std::size_t a, std::size_t b) {
  Vector c = Vector::Zero(Eigen::Index{1} << n);
  c(static_cast<Eigen::Index>(a)) = c(static_cast<Eigen::Index>(b)) = 1.0 / std::sqrt(2.0);
  return c;
}

/// 1 - F_{n'}(t0 (1 + x)) without cancellation.
double chain_loss(std::size_t nodes, double x) {
  const double s = std::sin(kPi * x / 4.0);
  return -std::expm1(2.0 * static_cast<double>(nodes - 1) * std::log1p(-2.0 * s * s));
}

/// Quadratic coefficient of 1 - F(x) from the exact weighted formula, by
/// symmetric finite differences at small x.
double quadratic_coefficient(const PathDecomposition& d) {
  auto loss = [&](double x) {
    double l = 0.0;
    for (const auto& e : d.entries) {
      double log_f = 0.0;
      for (auto nodes : e.chains) log_f += std::log1p(-chain_loss(nodes, x));
      l += e.weight * -std::expm1(2.0 * log_f);
    }
    return l;
  };
  // Richardson on h^2 to cancel the quartic term.
  const double h = 1e-3;
  const double c1 = loss(h) / (h * h), c2 = loss(h / 2) / (h * h / 4);
  return (4.0 * c2 - c1) / 3.0;
}

}  // namespace

TEST(DecomposePaths, PrintedExample) {
  const auto d = decompose_paths(two_strings(3, 0b010, 0b101), 3);
  ASSERT_EQ(d.entries.size(), 2u);
  EXPECT_EQ(d.entries[0].bits, "010");
  EXPECT_EQ(d.entries[0].chains, (std::vector<std::size_t>{2}));
  EXPECT_EQ(d.entries[1].bits, "101");
  EXPECT_EQ(d.entries[1].chains, (std::vector<std::size_t>{4, 3}));
  EXPECT_DOUBLE_EQ(d.entries[0].weight, 0.5);
}

TEST(DecomposePaths, GroundStringHasNoChains) {
  Vector c = Vector::Zero(8);
  c(0) = 1.0;
  const auto d = decompose_paths(c, 3);
  ASSERT_EQ(d.entries.size(), 1u);
  EXPECT_TRUE(d.entries[0].chains.empty());
}

TEST(DecomposePaths, UniformThreeQubits) {
  const auto d = uniform_paths(3);
  ASSERT_EQ(d.entries.size(), 8u);
  const std::vector<std::vector<std::size_t>> want{{}, {3}, {2}, {2, 3}, {4}, {4, 3}, {4, 2}, {4, 2, 3}};
  for (std::size_t b = 0; b < 8; ++b) EXPECT_EQ(d.entries[b].chains, want[b]) << b;
}

TEST(DecomposePaths, NodeCountsFollowSetBits) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto d = uniform_paths(n);
    ASSERT_EQ(d.entries.size(), std::size_t{1} << n);
    for (std::size_t b = 0; b < d.entries.size(); ++b) {
      std::size_t total = 0, want = 0;
      for (auto nodes : d.entries[b].chains) total += nodes;
      for (std::size_t k = 0; k < n; ++k)
        if ((b >> k) & 1U) want += k == 0 ? 3 : (std::size_t{1} << k);
      EXPECT_EQ(total, want);
      EXPECT_EQ(d.entries[b].chains.size(), static_cast<std::size_t>(std::popcount(b)));
    }
  }
}

TEST(DecomposePaths, Rejects) {
  EXPECT_THROW(decompose_paths(Vector::Zero(4), 2), PreconditionError);
  EXPECT_THROW(decompose_paths(Vector::Constant(3, 1.0 / std::sqrt(3.0)), 2), DimensionError);
}

TEST(ChainFidelity, Examples) {
  const double omega = 2.0;
  for (std::size_t nodes = 2; nodes <= 16; ++nodes) EXPECT_NEAR(chain_fidelity(nodes, kPi / omega, omega), 1.0, 1e-15);
  EXPECT_NEAR(chain_fidelity(2, kPi / 2 / omega, omega), 0.5, 1e-15);
  EXPECT_THROW(chain_fidelity(1, 1.0, 1.0), PreconditionError);
}

TEST(ChainFidelity, AgreesWithStableForm) {
  for (std::size_t nodes : {2u, 3u, 4u, 8u})
    for (double x : {1e-3, 1e-2, 0.05, -0.07})
      EXPECT_NEAR(1.0 - chain_fidelity(nodes, 1.0 + x, kPi), chain_loss(nodes, x), 1e-15);
}

TEST(ChainInfidelity, KeepsRelativePrecisionNearTheTransferTime) {
  for (std::size_t nodes : {2u, 3u, 4u, 8u})
    for (double x : {1e-6, 1e-4, 1e-2, -0.05}) {
      const double t = 1.0 + x;
      EXPECT_NEAR(chain_infidelity(nodes, t, kPi) / chain_loss(nodes, t - 1.0), 1.0, 1e-12);
    }
  EXPECT_EQ(chain_infidelity(3, 1.0, kPi), 0.0);
  EXPECT_NEAR(chain_infidelity(2, 0.5, kPi), 0.5, 1e-15);
}

TEST(ChainFidelityJitter, Examples) {
  EXPECT_EQ(chain_fidelity_jitter(4, 0.0, 2.5), 1.0);
  EXPECT_NEAR(chain_fidelity_jitter(2, 0.01, 1.0), 1.0 - kPi * kPi / 4.0 * 1e-4, 1e-16);
  EXPECT_THROW(chain_fidelity_jitter(2, 0.2, 1.0), PreconditionError);
}

TEST(ChainFidelityJitter, ResidualIsQuartic) {
  for (std::size_t nodes : {2u, 3u, 4u, 8u}) {
    std::vector<double> x, y;
    for (double r = 1e-4; r <= 1e-2 * (1 + 1e-9); r *= std::pow(10.0, 0.25)) {
      // quadratic form minus exact chain fidelity, formed without cancellation.
      const double quad = static_cast<double>(nodes - 1) * kPi * kPi / 4.0 * r * r;
      x.push_back(r);
      y.push_back(chain_loss(nodes, r) - quad);
    }
    EXPECT_GE(loglog_slope(x, y), 3.9) << "n'=" << nodes;
  }
  // Library values at the coarse end; the quartic term of cos^6(pi x/2) is pi^4 x^4 / 4.
  const double r = 1e-2;
  EXPECT_LT(std::abs(chain_fidelity_jitter(4, r, 1.0) - chain_fidelity(4, 1.0 + r, kPi)), 1.01 * kPi * kPi * kPi * kPi / 4.0 * r * r * r * r);
}

TEST(TransferFidelityJitter, PrintedExample) {
  const double t0 = 2.5, dt = 0.04, omega = kPi / t0;
  const auto d = decompose_paths(two_strings(3, 0b010, 0b101), 3);
  const double f2 = chain_fidelity(2, t0 + dt, omega), f3 = chain_fidelity(3, t0 + dt, omega),
               f4 = chain_fidelity(4, t0 + dt, omega);
  EXPECT_DOUBLE_EQ(transfer_fidelity_jitter(d, dt, t0), (f2 * f2 + f3 * f4 * f3 * f4) / 2.0);
  EXPECT_LT(transfer_fidelity_jitter(d, dt, t0), 1.0);
}

TEST(TransferFidelityJitter, NoJitterIsPerfect) {
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_NEAR(transfer_fidelity_jitter(uniform_paths(n), 0.0, 1.7), 1.0, 1e-14);
}

TEST(TransferFidelityJitter, SingleChainReducesToChainFidelity) {
  Vector c = Vector::Zero(8);
  c(4) = 1.0;
  const auto d = decompose_paths(c, 3);
  const double f = chain_fidelity(4, 1.03, kPi);
  EXPECT_DOUBLE_EQ(transfer_fidelity_jitter(d, 0.03, 1.0), f * f);
}

TEST(TransferFidelityJitter, UniformMatchesEnumeration) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (double x : {0.003, 0.02, -0.05}) {
      // Explicit product over every string and every set bit.
      double want = 0.0;
      const std::size_t q = std::size_t{1} << n;
      for (std::size_t b = 0; b < q; ++b) {
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k)
          if ((b >> k) & 1U) {
            const double s = std::sin(kPi * (1.0 + x) / 2.0);
            prod *= std::pow(s * s, k == 0 ? 2.0 : static_cast<double>((std::size_t{1} << k) - 1));
          }
        want += prod * prod / static_cast<double>(q);
      }
      EXPECT_NEAR(transfer_fidelity_jitter(uniform_paths(n), x, 1.0), want, 1e-14);
    }
}

TEST(TransferFidelityJitter, OutputsStayInUnitInterval) {
  for (std::size_t n = 1; n <= 6; ++n)
    for (double x = -0.9; x < 0.9; x += 0.05) {
      const double f = transfer_fidelity_jitter(uniform_paths(n), x, 1.0);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0 + 1e-15);
    }
}

TEST(UniformJitterApprox, Examples) {
  EXPECT_EQ(uniform_jitter_approx(3, 0.0, 1.0), 1.0);
  EXPECT_NEAR(uniform_jitter_approx(1, 0.01, 1.0), 1.0 - kPi * kPi / 2.0 * 1e-4, 1e-16);
  EXPECT_THROW(uniform_jitter_approx(3, 0.06, 1.0), PreconditionError);
}

TEST(UniformJitterApprox, SingleQubitMatchesExactExpansion) {
  EXPECT_NEAR(quadratic_coefficient(uniform_paths(1)), kPi * kPi / 2.0, 1e-8);
}

TEST(UniformJitterApprox, ExactCoefficientOfTheWeightedFormula) {
  // Each set bit k contributes (2^k - 1) or 2 (bit 0) link losses, in half
  // the strings: coefficient (pi^2/4)(2^n - n + 1).
  for (std::size_t n = 1; n <= 6; ++n) {
    const double q = std::ldexp(1.0, static_cast<int>(n));
    const double want = kPi * kPi / 4.0 * (q - static_cast<double>(n) + 1.0);
    EXPECT_NEAR(quadratic_coefficient(uniform_paths(n)) / want, 1.0, 1e-6) << "n=" << n;
  }
}

TEST(UniformJitterApprox, PrintedCoefficientValue) {
  // 1 - F / x^2 of the closed form at n = 3: (pi^2/16) * 6 * 7 / 3.
  const double x = 0.01;
  EXPECT_NEAR((1.0 - uniform_jitter_approx(3, x, 1.0)) / (x * x), kPi * kPi / 16.0 * 14.0, 1e-9);
}

TEST(EnergyFidelity, Examples) {
  EXPECT_EQ(energy_fidelity(4, 0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(energy_fidelity(3, 0.01, 1.0), 0.98);
  const auto zero = aggregate_energy_fidelity(3, 0.0, 1.0);
  EXPECT_EQ(zero.exact, 1.0);
  EXPECT_EQ(zero.approx, 1.0);
  const auto two = aggregate_energy_fidelity(2, 0.01, 1.0);
  EXPECT_NEAR(two.exact, std::pow(1.0 + 0.98 * 0.98, 2) / 4.0, 1e-15);
  EXPECT_NEAR(two.exact, 0.96079204, 1e-12);
  EXPECT_DOUBLE_EQ(two.approx, 0.98);
  EXPECT_THROW(energy_fidelity(2, 0.5, 1.0), PreconditionError);
}

TEST(EnergyFidelity, ExactFormTracksTwiceThePrintedSlope) {
  // d/dx of [ (1 + (1-2x)^2) / 2 ]^n at x = 0 is -2n.
  for (std::size_t n = 1; n <= 6; ++n) {
    const double x = 1e-7;
    const auto f = aggregate_energy_fidelity(n, x, 1.0);
    EXPECT_NEAR((1.0 - f.exact) / x, 2.0 * static_cast<double>(n), 1e-5);
    EXPECT_NEAR((1.0 - f.approx) / x, static_cast<double>(n), 1e-9);
  }
}

TEST(EnergyFidelity, InUnitInterval) {
  for (std::size_t n = 1; n <= 8; ++n)
    for (double x = 0.0; x < 0.5; x += 0.01) {
      const auto f = aggregate_energy_fidelity(n, x, 1.0);
      EXPECT_GE(f.exact, 0.0);
      EXPECT_LE(f.exact, 1.0);
    }
}

TEST(CoherenceBudget, PrintedThresholds) {
  const auto b10 = coherence_budget(10);
  EXPECT_NEAR(b10.tau1, 3.0, 1e-12);
  EXPECT_GE(b10.qubit_lifetime, 3.0 - 1e-12);
  EXPECT_GE(b10.photon_lifetime, 3000.0 - 1e-9);
  const auto b3 = coherence_budget(3);
  EXPECT_NEAR(b3.tau2, 2.5, 1e-12);
  EXPECT_NEAR(coherence_budget(1).tau1, 0.3, 1e-12);
  for (std::size_t n = 1; n <= 12; ++n)
    EXPECT_NEAR(coherence_budget(n).tau2, 20.0 / std::ldexp(1.0, static_cast<int>(n)), 1e-12);
  EXPECT_THROW(coherence_budget(0), PreconditionError);
}

TEST(LoglogSlope, RecoversPowerLaw) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * v * v * v);
  EXPECT_NEAR(loglog_slope(x, y), 3.0, 1e-12);
}

TEST(MonteCarloEnergy, NoDisorderReturnsPerfectly) {
  const auto s = monte_carlo_energy(4, 0.0, 1.0, 4, 1);
  EXPECT_NEAR(s.mean_fidelity, 1.0, 1e-12);
}

TEST(MonteCarloEnergy, DisorderLowersFidelityQualitatively) {
  const double omega = units::from_khz(200.0), t0 = kPi / omega;
  const double dE = 0.01 / t0;
  const auto s = monte_carlo_energy(4, dE, omega, 200, 7);
  EXPECT_LT(s.mean_fidelity, 1.0);
  EXPECT_GT(s.mean_fidelity, 0.9);
  EXPECT_DOUBLE_EQ(s.formula, 0.98);
  const auto stronger = monte_carlo_energy(4, 5 * dE, omega, 200, 7);
  EXPECT_LT(stronger.mean_fidelity, s.mean_fidelity);
}

TEST(MonteCarloJitter, SingleQubitTracksTheAnalyticModel) {
  const auto plan = transfer::build_plan(1, {units::from_khz(200.0)}, dynamics::DeviceParams::nominal(1));
  Vector c(2);
  c << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto stats = monte_carlo_jitter(plan, c, {0.0, 0.01, 0.02, 0.04}, 16, 5);
  ASSERT_EQ(stats.size(), 4u);
  EXPECT_NEAR(stats[0].measured_infidelity, 0.0, 1e-12);
  for (std::size_t i = 1; i < stats.size(); ++i) {
    EXPECT_GT(stats[i].measured_infidelity, stats[i - 1].measured_infidelity);
    EXPECT_LT(stats[i].relative_error, 0.25) << stats[i].ratio;
  }
  EXPECT_THROW(monte_carlo_jitter(transfer::build_plan(3, {units::from_khz(200.0)}, dynamics::DeviceParams::nominal(3)),
                                  Vector::Constant(8, 1.0 / std::sqrt(8.0)), {0.01}, 1, 1),
               PreconditionError);
}
