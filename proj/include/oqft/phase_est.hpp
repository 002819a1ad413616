#pragma once

// Phase estimation through the oscillator inverse Fourier transform, and the
// operation counts of three phase-estimation layouts.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqft/hilbert.hpp"
#include "oqft/kerr.hpp"
#include "oqft/transfer.hpp"

namespace oqft::phase_est {

using hilbert::StateVector;

enum class Mode { Ideal, Physical };

inline constexpr double kSupportTolerance = 1e-3;

struct PhaseScenario {
  double theta = 0.0;  // reduced mod 2 pi
  std::size_t n = 3;
  Mode mode = Mode::Ideal;
  std::size_t trials = 0;  // sampled measurement shots, 0 for none
  std::uint64_t seed = 0;
};

/// (1/sqrt q) sum_m e^{i m theta} |m>_A in an A factor of dimension `dim` (0 means q).
StateVector build_phase_state(double theta, std::size_t q, std::size_t dim = 0);

/// |1>_a|m>_A -> |0>_a|m+2^k>_A for m in the step-k occupied set. The joint
/// holds A and a one-qubit register; the map is the engine's step-k map.
/// Throws DimensionError if the ancilla-excited part puts more than
/// kSupportTolerance of weight outside the occupied set (pulse leakage from
/// earlier dynamical steps stays below it).
StateVector ancilla_map_step(const StateVector& joint, std::size_t k,
                             const transfer::TransferEngine& engine);

struct MappedPhaseState {
  StateVector state;            // over [A]
  double fidelity = 0.0;        // against build_phase_state
  double ancilla_residual = 0.0;  // excited ancilla population discarded per step, summed
};

/// Builds the phase state by n ancilla preparations and ancilla_map_step
/// calls (k = n-1 .. 0), recycling the ancilla in |0> after each step.
MappedPhaseState build_phase_state_mapped(double theta, const transfer::TransferEngine& engine);

struct EstimateResult {
  double theta = 0.0;
  std::size_t q = 0;
  std::vector<double> distribution;  // over n_hat in [0, q)
  std::size_t modal = 0;
  double theta_hat = 0.0;
  double error = 0.0;  // circular |theta_hat - theta|
  double probability = 0.0;  // post-selection success
  std::vector<std::size_t> counts;  // sampled shots when trials > 0
};

/// Builds the phase state (ideal, or mapped through `engine` in physical
/// mode), applies the inverse Kerr transform, projects A onto |p>, and reads
/// the B photon-number distribution. `kerr.direction` is forced to inverse.
EstimateResult run_phase_estimation(const PhaseScenario& scenario, kerr::KerrConfig kerr,
                                    const transfer::TransferEngine* engine = nullptr);

/// |sum_m e^{i m (theta - 2 pi n_hat / q)}|^2 / q^2.
double outcome_probability(double theta, std::size_t q, std::size_t n_hat);

struct ApproachCount {
  std::string approach;
  std::size_t hadamard = 0;
  std::size_t two_qubit = 0;
  std::size_t measurements = 0;
  std::size_t controlled_u = 0;
  std::size_t phase_gates = 0;   // P
  std::size_t resets = 0;        // R
  std::size_t transfers = 0;     // qubit <-> resonator maps
  std::size_t photon_measurements = 0;
  std::size_t total = 0;
  std::size_t ancilla_qubits = 0;
  std::size_t resonators = 0;
};

struct ResourceComparison {
  std::size_t n = 0;
  ApproachCount conventional;
  ApproachCount recycling;
  ApproachCount oscillator;
};

ResourceComparison resource_counts(std::size_t n);

std::string resources_csv(const std::vector<ResourceComparison>& rows);
nlohmann::ordered_json to_json(const EstimateResult& result);

}  // namespace oqft::phase_est
