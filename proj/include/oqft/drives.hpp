#pragma once

// Multi-frequency control fields for the qubit -> resonator transfer steps.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oqft/device.hpp"

namespace oqft::drives {

/// Photon numbers of resonator A that may be populated before step k.
struct OccupiedSet {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> photons;  // sorted
};

struct DriveComponent {
  double amplitude = 0.0;  // rad/us, signed
  double frequency = 0.0;  // rad/us
  std::size_t m = 0;       // resonator photons before the step
  std::size_t l = 0;       // link index in the chain (1-based)
  std::string transition;  // informational, e.g. "|1,+> <-> |2,->"
};

struct DrivePulse {
  std::size_t k = 0;
  double omega_ref = 0.0;  // Omega
  double duration = 0.0;   // tau_map = pi / Omega
  double guard_band = 0.0;
  std::vector<DriveComponent> components;

  /// f_k(t) = sum amplitude * cos(frequency * t); no range check.
  double evaluate(double t) const;
  /// Largest component frequency.
  double max_frequency() const;
};

struct SynthesisOptions {
  double guard_band_factor = 10.0;  // guard band = factor * Omega
};

/// {0, 2^{k+1}, ..., (2^{n-k-1} - 1) 2^{k+1}}. Throws DimensionError if k >= n.
OccupiedSet occupied_photon_numbers(std::size_t n, std::size_t k);

/// (l, omega_{m,l}) for l = 1 .. 2^k - 1 using the parity rule.
/// Throws PreconditionError for k = 0.
std::vector<std::pair<std::size_t, double>> transfer_frequencies(std::size_t k, std::size_t m,
                                                                 double omega_A, double g);

DrivePulse synthesize_transfer_drive(std::size_t k, const OccupiedSet& occupied, double omega,
                                     const dynamics::DeviceParams& params,
                                     const SynthesisOptions& options = {});

DrivePulse synthesize_photon_preserving_drive(const OccupiedSet& occupied, double omega,
                                              const dynamics::DeviceParams& params,
                                              const SynthesisOptions& options = {});

/// Dispatches on k: photon-preserving drive for k = 0, transfer drive otherwise.
DrivePulse synthesize_drive(const OccupiedSet& occupied, double omega,
                            const dynamics::DeviceParams& params,
                            const SynthesisOptions& options = {});

/// Links (Omega/2) sqrt(l (N - l)), l = 1 .. N-1, of a perfect-transfer chain.
std::vector<double> perfect_chain_couplings(std::size_t node_count, double omega);

/// f_k(t); throws PreconditionError outside [0, duration].
double evaluate_pulse(const DrivePulse& pulse, double t);

nlohmann::ordered_json to_json(const DrivePulse& pulse);

}  // namespace oqft::drives
