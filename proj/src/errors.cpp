#include "oqft/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "oqft/drives.hpp"
#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

namespace oqft::errors {

using hilbert::cplx;
using hilbert::Matrix;
using units::kPi;

PathDecomposition decompose_paths(const Vector& amplitudes, std::size_t n) {
  if (n == 0 || n > 30) throw PreconditionError("decompose_paths: n out of range");
  if (static_cast<std::size_t>(amplitudes.size()) != (std::size_t{1} << n))
    throw DimensionError("decompose_paths: need 2^n amplitudes");
  if (std::abs(amplitudes.norm() - 1.0) > hilbert::kNormTolerance)
    throw PreconditionError("decompose_paths: amplitudes not normalized");
  PathDecomposition d;
  d.n = n;
  for (Eigen::Index b = 0; b < amplitudes.size(); ++b) {
    const double w = std::norm(amplitudes(b));
    if (w == 0.0) continue;
    PathEntry e;
    e.bits = hilbert::register_bits(static_cast<std::size_t>(b), n);
    e.weight = w;
    for (std::size_t k = n; k-- > 0;) {
      if (!((static_cast<std::size_t>(b) >> k) & 1U)) continue;
      e.chains.push_back(k == 0 ? 3 : (std::size_t{1} << k));
    }
    d.entries.push_back(std::move(e));
  }
  return d;
}

PathDecomposition uniform_paths(std::size_t n) {
  const auto q = static_cast<Eigen::Index>(std::size_t{1} << n);
  Vector c = Vector::Constant(q, 1.0 / std::sqrt(static_cast<double>(q)));
  return decompose_paths(c, n);
}

double chain_fidelity(std::size_t nodes, double t, double omega) {
  if (nodes < 2) throw PreconditionError("chain_fidelity: need n' >= 2");
  if (t < 0.0) throw PreconditionError("chain_fidelity: t must be >= 0");
  const double s = std::sin(0.5 * omega * t);
  return std::pow(s * s, static_cast<double>(nodes - 1));
}

double chain_infidelity(std::size_t nodes, double t, double omega) {
  if (nodes < 2) throw PreconditionError("chain_infidelity: need n' >= 2");
  if (t < 0.0) throw PreconditionError("chain_infidelity: t must be >= 0");
  // sin^2(Omega t / 2) = 1 - sin^2((Omega t - pi) / 2)
  const double c = std::sin(0.5 * (omega * t - kPi));
  return -std::expm1(static_cast<double>(nodes - 1) * std::log1p(-c * c));
}

double chain_fidelity_jitter(std::size_t nodes, double dt, double t0) {
  if (nodes < 2) throw PreconditionError("chain_fidelity_jitter: need n' >= 2");
  const double r = dt / t0;
  if (std::abs(r) > 0.1) throw PreconditionError("chain_fidelity_jitter: |dt/t0| must be <= 0.1");
  return 1.0 - static_cast<double>(nodes - 1) * kPi * kPi / 4.0 * r * r;
}

double transfer_fidelity_jitter(const PathDecomposition& paths, double dt, double t0) {
  if (!(t0 > 0.0)) throw PreconditionError("transfer_fidelity_jitter: t0 must be > 0");
  if (std::abs(dt) >= t0) throw PreconditionError("transfer_fidelity_jitter: |dt| must be < t0");
  const double omega = kPi / t0;
  double f = 0.0;
  for (const auto& e : paths.entries) {
    double prod = 1.0;
    for (std::size_t nodes : e.chains) prod *= chain_fidelity(nodes, t0 + dt, omega);
    f += e.weight * prod * prod;
  }
  return f;
}

double uniform_jitter_approx(std::size_t n, double dt, double t0) {
  if (n == 0) throw PreconditionError("uniform_jitter_approx: n must be >= 1");
  const double r = dt / t0;
  if (std::abs(r) > 0.05) throw PreconditionError("uniform_jitter_approx: |dt/t0| must be <= 0.05");
  const double q = std::ldexp(1.0, static_cast<int>(n));
  const double nn = static_cast<double>(n);
  return 1.0 - kPi * kPi / (2.0 * q) * (q - (nn - 1.0)) * (q - 1.0) / nn * r * r;
}

double energy_fidelity(std::size_t nodes, double dE, double t0) {
  if (nodes < 2) throw PreconditionError("energy_fidelity: need n' >= 2");
  if (!(2.0 * t0 * dE < 1.0)) throw PreconditionError("energy_fidelity: need 2 t0 dE < 1");
  return 1.0 - 2.0 * t0 * dE;
}

EnergyFidelity aggregate_energy_fidelity(std::size_t n, double dE, double t0) {
  if (!(2.0 * t0 * dE < 1.0)) throw PreconditionError("aggregate_energy_fidelity: need 2 t0 dE < 1");
  const double f = 1.0 - 2.0 * t0 * dE;
  const double nn = static_cast<double>(n);
  return {std::pow((1.0 + f * f) / 2.0, nn), 1.0 - nn * t0 * dE};
}

std::vector<JitterStats> monte_carlo_jitter(const transfer::TransferPlan& plan,
                                            const Vector& amplitudes,
                                            const std::vector<double>& ratios,
                                            std::size_t repetitions, std::uint64_t seed) {
  if (plan.n > 2) throw PreconditionError("monte_carlo_jitter: limited to n <= 2");
  if (repetitions == 0) throw PreconditionError("monte_carlo_jitter: need repetitions >= 1");
  const std::size_t n = plan.n;
  const std::size_t D = plan.fock_dim;
  const auto paths = decompose_paths(amplitudes, n);
  for (double r : ratios)
    if (std::abs(r) >= 1.0) throw PreconditionError("monte_carlo_jitter: |dt/t0| must be < 1");

  // Index 0: t0; then t0(1 - r), t0(1 + r) per ratio.
  std::vector<std::vector<Matrix>> maps;
  std::vector<Matrix> frames;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const double t0 = plan.steps[i].pulse.duration;
    std::vector<double> durations{t0};
    for (double r : ratios) {
      durations.push_back(t0 * (1.0 - r));
      durations.push_back(t0 * (1.0 + r));
    }
    auto u = transfer::propagate_step(plan, i, durations);
    const auto ph = transfer::step_phases(plan.steps[i], D, u[0]);
    frames.push_back(transfer::forward_frame(plan.steps[i], D, ph));
    maps.push_back(std::move(u));
  }

  hilbert::CompositeSpace space({hilbert::FockSpace{D, hilbert::FockRole::ResonatorA},
                                 hilbert::QubitRegister{n}});
  const std::size_t q = std::size_t{1} << n;
  auto embed = [&](const Vector& reg) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    v.head(static_cast<Eigen::Index>(q)) = reg;
    return v;
  };
  const Vector initial = embed(amplitudes);
  const Vector target = transfer::ideal_transfer(hilbert::StateVector(space, initial), n).amplitudes();

  // choice[i] selects the map of step i.
  auto run = [&](const std::vector<std::size_t>& choice, double& path_fid, double& state_fid) {
    path_fid = 0.0;
    for (const auto& e : paths.entries) {
      const std::size_t b = hilbert::register_value(e.bits);
      Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
      v(static_cast<Eigen::Index>(b)) = 1.0;
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const hilbert::Axis axes[] = {{0, -1}, {1, static_cast<int>(plan.steps[i].k)}};
        v = hilbert::apply_local(space, v, axes, frames[i] * maps[i][choice[i]]);
      }
      const std::size_t dst = b * q;  // |b>_A |0...0>
      const double p = std::norm(v(static_cast<Eigen::Index>(dst)));
      path_fid += e.weight * p * p;
    }
    Vector v = initial;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
      const hilbert::Axis axes[] = {{0, -1}, {1, static_cast<int>(plan.steps[i].k)}};
      v = hilbert::apply_local(space, v, axes, frames[i] * maps[i][choice[i]]);
    }
    state_fid = std::norm(target.dot(v));
  };

  double base_path = 0.0, base_state = 0.0;
  run(std::vector<std::size_t>(plan.steps.size(), 0), base_path, base_state);

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<JitterStats> out;
  for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
    const double r = ratios[ri];
    std::vector<double> samples;
    double state_sum = 0.0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      std::vector<std::size_t> choice;
      for (std::size_t i = 0; i < plan.steps.size(); ++i) choice.push_back(1 + 2 * ri + (coin(rng) ? 1 : 0));
      double pf = 0.0, sf = 0.0;
      run(choice, pf, sf);
      samples.push_back(pf);
      state_sum += sf;
    }
    JitterStats s;
    s.ratio = r;
    s.analytic_fidelity = transfer_fidelity_jitter(paths, r, 1.0);
    s.analytic_infidelity = 1.0 - s.analytic_fidelity;
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
    s.measured_fidelity = mean;
    s.measured_infidelity = base_path - mean;
    s.measured_stderr = std::sqrt(var / static_cast<double>(samples.size()));
    s.state_fidelity = state_sum / static_cast<double>(repetitions);
    s.relative_error = s.analytic_infidelity > 0.0
                           ? std::abs(s.measured_infidelity - s.analytic_infidelity) / s.analytic_infidelity
                           : 0.0;
    out.push_back(s);
  }
  return out;
}

EnergyStats monte_carlo_energy(std::size_t nodes, double dE, double omega,
                               std::size_t repetitions, std::uint64_t seed) {
  if (repetitions == 0) throw PreconditionError("monte_carlo_energy: need repetitions >= 1");
  const double t0 = kPi / omega;
  EnergyStats st;
  st.formula = energy_fidelity(nodes, dE, t0);
  const auto c = drives::perfect_chain_couplings(nodes, omega);
  const auto N = static_cast<Eigen::Index>(nodes);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-dE, dE);
  std::vector<double> f;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index l = 0; l + 1 < N; ++l) h(l, l + 1) = h(l + 1, l) = c[static_cast<std::size_t>(l)];
    for (Eigen::Index l = 0; l < N; ++l) h(l, l) = shift(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    cplx amp = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const double v = es.eigenvectors()(0, j);
      amp += v * v * std::polar(1.0, -es.eigenvalues()(j) * 2.0 * t0);
    }
    f.push_back(std::norm(amp));
  }
  const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  double var = 0.0;
  for (double x : f) var += (x - mean) * (x - mean);
  st.mean_fidelity = mean;
  st.stderr_fidelity = f.size() > 1 ? std::sqrt(var / static_cast<double>(f.size() - 1) / static_cast<double>(f.size())) : 0.0;
  return st;
}

BudgetInputs BudgetInputs::nominal() {
  return {units::from_mhz(5.0), 0.1, units::from_khz(50.0)};
}

CoherenceBudget coherence_budget(std::size_t n, const BudgetInputs& in) {
  if (n == 0 || n > 40) throw PreconditionError("coherence_budget: n out of range");
  if (!(in.omega_map > 0.0) || !(in.chi > 0.0) || in.tau_ad < 0.0)
    throw PreconditionError("coherence_budget: invalid inputs");
  CoherenceBudget b;
  b.n = n;
  b.q = std::size_t{1} << n;
  const double top = static_cast<double>(b.q - 1);
  b.tau1 = static_cast<double>(n) * (kPi / in.omega_map + 2.0 * in.tau_ad);
  b.qubit_lifetime = b.tau1;
  b.photon_lifetime = std::max(1.0, top) * b.tau1;
  b.tau2 = units::kTwoPi / (static_cast<double>(b.q) * in.chi);
  b.kerr_photon_lifetime = std::max(1.0, top) * b.tau2;
  return b;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oqft::errors
