#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "oqft/exceptions.hpp"
#include "oqft/kerr.hpp"
#include "oqft/transfer.hpp"
#include "oqft/units.hpp"
#include "support.hpp"

using namespace oqft;
using namespace oqft::kerr;
using hilbert::CompositeSpace;
using hilbert::FockRole;
using hilbert::FockSpace;

namespace {

const double kChi = units::from_khz(-50.0);

StateVector a_state(const Vector& c) {
  return StateVector(CompositeSpace({FockSpace{static_cast<std::size_t>(c.size()), FockRole::ResonatorA}}), c);
}

CompositeSpace ab_space(std::size_t da, std::size_t db) {
  return CompositeSpace({FockSpace{da, FockRole::ResonatorA}, FockSpace{db, FockRole::ResonatorB}});
}

/// 1 - |<a|b>|^2 for raw vectors.
double infidelity(const Vector& a, const Vector& b) {
  return 1.0 - std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

KerrConfig forward() { return {kChi, 0, Direction::Forward}; }

}  // namespace

TEST(QftDuration, Examples) {
  EXPECT_NEAR(qft_duration(8, forward()), 2.5, 1e-12);
  EXPECT_NEAR(qft_duration(8, {units::from_khz(50.0), 0, Direction::Inverse}), 2.5, 1e-12);
  EXPECT_NEAR(qft_duration(2, {-units::kPi, 0, Direction::Forward}), 1.0, 1e-15);
}

TEST(QftDuration, TwentyOverQMicroseconds) {
  for (std::size_t q = 1; q <= 1024; q *= 2) EXPECT_NEAR(qft_duration(q, forward()), 20.0 / q, 1e-12);
}

TEST(QftDuration, WrongWindingSuggestsNext) {
  try {
    qft_duration(8, {units::from_khz(50.0), 0, Direction::Forward});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("k=1"), std::string::npos);
  }
  EXPECT_NEAR(qft_duration(8, {units::from_khz(50.0), 1, Direction::Forward}), 17.5, 1e-12);
  EXPECT_THROW(qft_duration(8, {0.0, 0, Direction::Forward}), PreconditionError);
}

TEST(KerrEvolve, ZeroPhotonSupportIsUnchanged) {
  const auto space = ab_space(4, 4);
  Vector v = Vector::Zero(16);
  v(0 * 4 + 3) = 0.6;
  v(2 * 4 + 0) = hilbert::cplx(0.0, 0.8);
  const StateVector s(space, v);
  EXPECT_EQ(kerr_evolve(s, 1.3, 7.0).amplitudes(), v);
}

TEST(KerrEvolve, SinglePhotonPairFlipsSign) {
  const auto s = hilbert::basis_state(ab_space(3, 3), {1, 1});
  const auto out = kerr_evolve(s, units::kPi, 1.0);
  EXPECT_NEAR(std::abs(out.amplitudes()(4) + 1.0), 0.0, 1e-15);
}

TEST(KerrEvolve, UniformInputsGiveVacuumInB) {
  const std::size_t q = 4;
  const auto joint = hilbert::tensor(a_state(Vector::Constant(q, 1.0 / std::sqrt(double(q)))), prepare_uniform_B(q));
  const auto after = kerr_evolve(joint, kChi, qft_duration(q, forward()));
  const auto p = project_uniform(after, 0);
  ASSERT_TRUE(p.remainder);
  EXPECT_NEAR(std::norm(p.remainder->amplitudes()(0)), 1.0, 1e-12);
}

TEST(KerrEvolve, UnitaryAndComposes) {
  std::mt19937_64 rng(21);
  const auto s = test::random_state(ab_space(6, 7), rng);
  const auto a = kerr_evolve(kerr_evolve(s, 0.7, 0.3), 0.7, 1.1);
  const auto b = kerr_evolve(s, 0.7, 1.4);
  EXPECT_NEAR(a.norm(), 1.0, 1e-14);
  EXPECT_LT((a.amplitudes() - b.amplitudes()).norm(), 1e-13);
}

TEST(KerrEvolve, SpectatorFactorsKeepTheirIndex) {
  const CompositeSpace space({FockSpace{3, FockRole::ResonatorA}, hilbert::QubitRegister{1},
                              FockSpace{3, FockRole::ResonatorB}});
  const auto s = hilbert::basis_state(space, {2, 1, 2});
  const auto out = kerr_evolve(s, 0.25, 1.0);
  EXPECT_NEAR(std::abs(out.amplitudes()(space.index_of(std::vector<std::size_t>{2, 1, 2})) - std::polar(1.0, -1.0)), 0.0, 1e-15);
}

TEST(PrepareUniformB, Examples) {
  EXPECT_EQ(prepare_uniform_B(1).amplitudes()(0), hilbert::cplx(1.0));
  const auto b8 = prepare_uniform_B(8);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(b8.amplitudes()(i).real(), 1.0 / std::sqrt(8.0), 1e-15);
  const auto padded = prepare_uniform_B(4, 10);
  EXPECT_EQ(padded.dim(), 10u);
  EXPECT_EQ(padded.amplitudes()(5), hilbert::cplx(0.0));
  for (std::size_t q = 1; q <= 1024; q *= 2) EXPECT_NEAR(prepare_uniform_B(q).norm(), 1.0, 1e-12);
}

TEST(DftOracle, Examples) {
  for (std::size_t q : {1u, 3u, 8u}) {
    Vector delta = Vector::Zero(q);
    delta(0) = 1.0;
    EXPECT_TRUE(dft_oracle(delta).isApprox(Vector::Constant(q, 1.0 / std::sqrt(double(q))), 1e-14));
    const Vector uniform = Vector::Constant(q, 1.0 / std::sqrt(double(q)));
    EXPECT_TRUE(dft_oracle(uniform).isApprox(delta, 1e-14));
  }
  // Sign of the kernel: delta_1 -> e^{+2 pi i n / q}.
  Vector d1 = Vector::Zero(4);
  d1(1) = 1.0;
  EXPECT_NEAR(std::abs(dft_oracle(d1)(1) - hilbert::cplx(0.0, 0.5)), 0.0, 1e-15);
}

TEST(DftOracle, InverseUndoesForward) {
  std::mt19937_64 rng(22);
  for (std::size_t q = 1; q <= 64; ++q) {
    const Vector c = test::random_unit(static_cast<Eigen::Index>(q), rng);
    EXPECT_LT((dft_oracle(dft_oracle(c), Direction::Inverse) - c).norm(), 1e-12) << q;
  }
}

TEST(RunQft, TwoPeakStateFromTransfer) {
  Vector c = Vector::Zero(8);
  c(0) = c(7) = 1.0 / std::sqrt(2.0);
  const auto r = run_qft(a_state(c), forward());
  EXPECT_LT(infidelity(r.b_state.amplitudes(), dft_oracle(c)), 1e-10);
  EXPECT_NEAR(r.probability, 0.125, 1e-12);
}

TEST(RunQft, MatchesOracleWithProbabilityOneOverQ) {
  std::mt19937_64 rng(23);
  for (std::size_t q : {2u, 4u, 8u, 16u})
    for (int trial = 0; trial < 50; ++trial) {
      const Vector c = test::random_unit(static_cast<Eigen::Index>(q), rng);
      const auto r = run_qft(a_state(c), forward());
      EXPECT_LT(infidelity(r.b_state.amplitudes(), dft_oracle(c)), 1e-10);
      const Vector aligned = hilbert::align_global_phase(r.b_state.amplitudes(), dft_oracle(c));
      EXPECT_LT((aligned - dft_oracle(c)).norm(), 1e-6);
      EXPECT_NEAR(r.probability, 1.0 / q, 1e-12);
    }
}

TEST(RunQft, ForwardThenInverseRecoversInput) {
  std::mt19937_64 rng(24);
  const Vector c = test::random_unit(8, rng);
  const auto f = run_qft(a_state(c), forward());
  const Vector fb = f.b_state.amplitudes();
  const auto back = run_qft(a_state(fb), {units::from_khz(50.0), 0, Direction::Inverse});
  const Vector aligned = hilbert::align_global_phase(back.b_state.amplitudes(), c);
  EXPECT_LT((aligned - c).norm(), 1e-9);
}

TEST(RunQft, WindingDoesNotChangeTheResult) {
  std::mt19937_64 rng(25);
  const Vector c = test::random_unit(8, rng);
  const auto base = run_qft(a_state(c), forward()).b_state.amplitudes();
  for (unsigned k = 1; k <= 3; ++k) {
    const auto wound = run_qft(a_state(c), {-kChi, k, Direction::Forward}).b_state.amplitudes();
    EXPECT_LT(infidelity(wound, base), 1e-10) << "k=" << k;
  }
}

TEST(RunQft, ReducedStateIsMixtureOfFourierStates) {
  std::mt19937_64 rng(26);
  const std::size_t q = 8;
  const Vector c = test::random_unit(q, rng);
  const auto r = run_qft(a_state(c), forward());
  const std::vector<std::size_t> keep{1};
  const auto rho = hilbert::partial_trace(r.joint, keep).matrix();
  hilbert::Matrix want = hilbert::Matrix::Zero(q, q);
  for (std::size_t m = 0; m < q; ++m) {
    Vector e = Vector::Zero(q);
    e(static_cast<Eigen::Index>(m)) = 1.0;
    const Vector f = dft_oracle(e);
    want += std::norm(c(static_cast<Eigen::Index>(m))) * f * f.adjoint();
  }
  EXPECT_LT((rho - want).norm(), 1e-10);
}

TEST(ProjectUniform, Examples) {
  std::mt19937_64 rng(27);
  const std::size_t q = 4;
  const auto phi = prepare_uniform_B(3);
  const auto plus = a_state(Vector::Constant(q, 0.5));
  const auto p1 = project_uniform(hilbert::tensor(plus, phi), 0);
  EXPECT_NEAR(p1.probability, 1.0, 1e-14);
  EXPECT_LT((p1.remainder->amplitudes() - phi.amplitudes()).norm(), 1e-14);

  Vector zero = Vector::Zero(q);
  zero(0) = 1.0;
  const auto p2 = project_uniform(hilbert::tensor(a_state(zero), test::random_state(phi.space(), rng)), 0);
  EXPECT_NEAR(p2.probability, 0.25, 1e-14);
}

TEST(ProjectUniform, ZeroProbabilityOutcomeIsExplicit) {
  Vector odd(2);
  odd << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const auto p = project_uniform(hilbert::tensor(a_state(odd), prepare_uniform_B(2)), 0);
  EXPECT_EQ(p.probability, 0.0);
  EXPECT_FALSE(p.remainder.has_value());
}

TEST(ProjectVacuum, KeepsConditionalState) {
  Vector c(3);
  c << 0.6, 0.0, 0.8;
  const auto p = project_vacuum(hilbert::tensor(a_state(c), prepare_uniform_B(2)), 0);
  EXPECT_NEAR(p.probability, 0.36, 1e-14);
  EXPECT_LT((p.remainder->amplitudes() - prepare_uniform_B(2).amplitudes()).norm(), 1e-14);
}

TEST(PhysicalDisentangle, IdealBackendEqualsUniformProjection) {
  std::mt19937_64 rng(28);
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::size_t q = std::size_t{1} << n;
    const auto plan = transfer::build_plan(n, {units::from_khz(200.0)}, dynamics::DeviceParams::nominal(n));
    const transfer::TransferEngine engine(plan, transfer::Backend::Ideal);
    Vector c = Vector::Zero(static_cast<Eigen::Index>(plan.fock_dim));
    c.head(q) = test::random_unit(static_cast<Eigen::Index>(q), rng);
    const auto joint = kerr_evolve(hilbert::tensor(a_state(c), prepare_uniform_B(q)), kChi, qft_duration(q, forward()));
    const auto d = physical_disentangle(joint, engine);
    const auto p = project_uniform(joint, 0, q);
    EXPECT_NEAR(d.probability * d.a_vacuum, p.probability, 1e-9);
    EXPECT_NEAR(p.probability, 1.0 / q, 1e-12);
    EXPECT_LT((d.b_state.amplitudes() - p.remainder->amplitudes()).norm(), 1e-9) << "n=" << n;
    EXPECT_LT(infidelity(d.b_state.amplitudes(), dft_oracle(Vector(c.head(q)))), 1e-10);
  }
}

TEST(Wigner, VacuumAndSinglePhotonAtOrigin) {
  hilbert::Matrix vac = hilbert::Matrix::Zero(6, 6);
  vac(0, 0) = 1.0;
  EXPECT_NEAR(wigner_point(vac, 0.0), 2.0 / units::kPi, 1e-14);
  hilbert::Matrix one = hilbert::Matrix::Zero(6, 6);
  one(1, 1) = 1.0;
  EXPECT_NEAR(wigner_point(one, 0.0), -2.0 / units::kPi, 1e-14);
  // Coherent-state Gaussian of the vacuum.
  EXPECT_NEAR(wigner_point(vac, hilbert::cplx(0.5, -0.3)), 2.0 / units::kPi * std::exp(-2.0 * 0.34), 1e-10);
}

TEST(Wigner, GridIntegratesToOne) {
  std::mt19937_64 rng(29);
  const CompositeSpace space({FockSpace{10, FockRole::ResonatorB}});
  Vector v = Vector::Zero(10);
  v.head(6) = test::random_unit(6, rng);
  const StateVector s(space, v);
  const auto rho = hilbert::partial_trace(s, std::vector<std::size_t>{0});
  const auto grid = wigner_grid(rho);
  EXPECT_EQ(grid.w.rows(), 81);
  EXPECT_EQ(grid.w.cols(), 81);
  EXPECT_NEAR(grid.integral(), 1.0, 1e-2);
  EXPECT_TRUE(grid.warnings.empty());
}

TEST(Wigner, TopLevelPopulationWarns) {
  hilbert::Matrix top = hilbert::Matrix::Zero(4, 4);
  top(3, 3) = 1.0;
  const hilbert::DensityMatrix rho(CompositeSpace({FockSpace{4, FockRole::ResonatorB}}), top);
  WignerOptions o;
  o.nx = o.np = 5;
  EXPECT_FALSE(wigner_grid(rho, o).warnings.empty());
}

TEST(Wigner, MatchesDisplacedParityFromMatrixExponential) {
  std::mt19937_64 rng(30);
  const int d = 5, big = 60;
  const Vector psi = test::random_unit(d, rng);
  const hilbert::Matrix rho = psi * psi.adjoint();
  hilbert::Matrix a = hilbert::Matrix::Zero(big, big);
  for (int j = 1; j < big; ++j) a(j - 1, j) = std::sqrt(double(j));
  hilbert::Matrix parity = hilbert::Matrix::Zero(big, big);
  for (int j = 0; j < big; ++j) parity(j, j) = (j % 2 ? -1.0 : 1.0);
  hilbert::Matrix rho_big = hilbert::Matrix::Zero(big, big);
  rho_big.topLeftCorner(d, d) = rho;
  for (auto alpha : {hilbert::cplx(0.3, 0.1), hilbert::cplx(-1.0, 0.7), hilbert::cplx(0.0, -1.4)}) {
    const hilbert::Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    const hilbert::Matrix D = gen.exp();
    const double want = 2.0 / units::kPi * (rho_big * D * parity * D.adjoint()).trace().real();
    EXPECT_NEAR(wigner_point(rho, alpha), want, 1e-8);
  }
}

TEST(QftResult, JsonCarriesAmplitudes) {
  Vector c = Vector::Zero(4);
  c(1) = 1.0;
  const auto j = to_json(run_qft(a_state(c), forward()));
  EXPECT_NEAR(j["probability"].get<double>(), 0.25, 1e-12);
}
