#pragma once

// Timing-jitter and energy-fluctuation fidelity models, coherence budgets,
// and Monte-Carlo checks against the dynamical transfer.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oqft/hilbert.hpp"
#include "oqft/transfer.hpp"

namespace oqft::errors {

using hilbert::Vector;

struct PathEntry {
  std::string bits;
  double weight = 0.0;              // |c_b|^2
  std::vector<std::size_t> chains;  // node counts, highest bit first
};

struct PathDecomposition {
  std::size_t n = 0;
  std::vector<PathEntry> entries;  // strings with non-zero weight, ascending value
};

/// Amplitudes over the 2^n register basis (index = decimal value).
PathDecomposition decompose_paths(const Vector& amplitudes, std::size_t n);

/// [sin(Omega t / 2)]^{2(n'-1)}.
double chain_fidelity(std::size_t nodes, double t, double omega);

/// 1 - chain_fidelity, accurate when t is close to pi / Omega.
double chain_infidelity(std::size_t nodes, double t, double omega);
/// 1 - ((n'-1) pi^2 / 4) (dt/t0)^2; requires |dt/t0| <= 0.1.
double chain_fidelity_jitter(std::size_t nodes, double dt, double t0);

/// sum_b |c_b|^2 (prod_chains F_{n'}(t0 + dt))^2.
double transfer_fidelity_jitter(const PathDecomposition& paths, double dt, double t0);

/// 1 - (pi^2 / 2^{n+1}) [2^n - (n-1)] (2^n - 1) / n (dt/t0)^2; requires |dt/t0| <= 0.05.
double uniform_jitter_approx(std::size_t n, double dt, double t0);

/// Uniform superposition over all 2^n strings.
PathDecomposition uniform_paths(std::size_t n);

/// 1 - 2 t0 dE for any chain length.
double energy_fidelity(std::size_t nodes, double dE, double t0);

struct EnergyFidelity {
  double exact;   // [1 + (1 - 2 t0 dE)^2]^n / 2^n
  double approx;  // 1 - n t0 dE
};
EnergyFidelity aggregate_energy_fidelity(std::size_t n, double dE, double t0);

struct JitterStats {
  double ratio = 0.0;                // dt / t0
  double analytic_fidelity = 0.0;    // transfer_fidelity_jitter
  double analytic_infidelity = 0.0;  // 1 - analytic
  double measured_fidelity = 0.0;    // mean sum_b w_b P_b^2
  double measured_infidelity = 0.0;  // baseline minus measured
  double measured_stderr = 0.0;
  double state_fidelity = 0.0;       // mean |<ideal|psi>|^2 with the phase frame
  double relative_error = 0.0;       // |measured - analytic| / analytic (infidelities)
};

/// Runs the dynamical transfer with every drive lasting t0 (1 + s_k r) for
/// each ratio r, with random signs s_k per step and repetition. `amplitudes`
/// is the initial register state (A in vacuum). Requires n <= 2.
std::vector<JitterStats> monte_carlo_jitter(const transfer::TransferPlan& plan,
                                            const Vector& amplitudes,
                                            const std::vector<double>& ratios,
                                            std::size_t repetitions, std::uint64_t seed);

struct EnergyStats {
  double mean_fidelity = 0.0;
  double stderr_fidelity = 0.0;
  double formula = 0.0;  // energy_fidelity
};

/// Qualitative: perfect chain with independent level shifts uniform in
/// [-dE, dE], evolved for 2 t0, return probability to node 1.
EnergyStats monte_carlo_energy(std::size_t nodes, double dE, double omega,
                               std::size_t repetitions, std::uint64_t seed);

struct CoherenceBudget {
  std::size_t n = 0;
  std::size_t q = 0;
  double tau1 = 0.0;                  // us
  double qubit_lifetime = 0.0;        // us, >= tau1
  double photon_lifetime = 0.0;       // us, single photon, (q-1) tau1
  double tau2 = 0.0;                  // us
  double kerr_photon_lifetime = 0.0;  // us, (q-1) tau2
};

struct BudgetInputs {
  double omega_map;  // drive Omega of each step, rad/us
  double tau_ad;     // us
  double chi;        // |chi_AB|, rad/us
  static BudgetInputs nominal();  // 5 MHz, 100 ns, 50 kHz
};

CoherenceBudget coherence_budget(std::size_t n, const BudgetInputs& inputs = BudgetInputs::nominal());

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oqft::errors
