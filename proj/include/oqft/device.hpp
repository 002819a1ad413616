#pragma once

#include <cstddef>
#include <vector>

namespace oqft::dynamics {

/// Physical constants of the two-resonator / n-qubit device. All
/// frequencies are angular (rad/us), times in us.
struct DeviceParams {
  double omega_A = 0.0;
  double omega_B = 0.0;
  std::vector<double> omega_q;  // per-qubit idle frequencies
  std::vector<double> g;        // one shared value, or one per qubit
  double chi_AB = 0.0;          // signed cross-Kerr rate
  double alpha = 0.0;           // qubit anharmonicity; adiabaticity check only
  double tau_ad = 0.0;          // adiabatic ramp duration
  double detuning_start = 0.0;  // |omega_k - omega_A| at the start of a ramp

  /// Nominal superconducting-circuit parameters for an n-qubit device:
  /// g/2pi = 200 MHz, alpha/2pi = -200 MHz, chi/2pi = -50 kHz,
  /// tau_ad = 100 ns, omega_A/2pi = 5 GHz, ramps start 1 GHz above A.
  static DeviceParams nominal(std::size_t n);

  double coupling(std::size_t k) const;
  double qubit_frequency(std::size_t k) const;

  /// Throws PreconditionError on g <= 0, tau_ad <= 0, missing per-qubit
  /// entries or non-finite values.
  void validate(std::size_t n) const;

  struct Adiabaticity {
    double ratio_g;      // (1/tau_ad) / |g|
    double ratio_alpha;  // (1/tau_ad) / |alpha|
    bool ok;             // both ratios <= 0.1
  };
  Adiabaticity adiabaticity(std::size_t k) const;
};

enum class DressedSign { Ground, Plus, Minus, Edge };

struct DressedLevel {
  std::size_t m = 0;  // excitation count
  DressedSign sign = DressedSign::Ground;
  double energy = 0.0;
};

/// E_{m,+-} = m omega_A +- sqrt(m) g; the ground level has energy 0.
/// Throws PreconditionError for a +/- sign with m = 0 or Ground with m > 0.
double dressed_energy(std::size_t m, DressedSign sign, double omega_A, double g);
double dressed_energy(std::size_t m, DressedSign sign, const DeviceParams& params,
                      std::size_t k);

}  // namespace oqft::dynamics
