#pragma once

// n-step transfer of a qubit register into the Fock states of resonator A,
// and its inverse.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oqft/drives.hpp"
#include "oqft/dynamics.hpp"
#include "oqft/hilbert.hpp"

namespace oqft::transfer {

using hilbert::Matrix;
using hilbert::StateVector;

enum class Backend { Ideal, Dynamical };
enum class InverseMode { RecordedAdjoint, Physical };

struct PlanOptions {
  std::size_t fock_pad = 4;  // A keeps 2^n + fock_pad levels; at least 2
  dynamics::DressingMode dressing = dynamics::DressingMode::Ideal;
  dynamics::Quadrature quadrature = dynamics::Quadrature::SigmaY;
  dynamics::PropagationConfig propagation;
  drives::SynthesisOptions synthesis;
  bool phase_correction = true;
  std::size_t samples = 200;  // population samples per step
};

struct StepPlan {
  std::size_t k = 0;
  drives::OccupiedSet occupied;
  double omega = 0.0;
  drives::DrivePulse pulse;
};

struct TransferPlan {
  std::size_t n = 0;
  std::size_t fock_dim = 0;
  dynamics::DeviceParams params;
  PlanOptions options;
  std::vector<StepPlan> steps;  // k = n-1 .. 0
  double tau1 = 0.0;            // sum of tau_map + 2 tau_ad

  const StepPlan& step_for(std::size_t k) const;
};

/// Decimal value of the bitstring (rightmost character is qubit 0).
std::size_t bits_to_fock(std::string_view bits);

/// `omegas` holds one Omega per step in execution order (k = n-1 .. 0), or a
/// single value for every step.
TransferPlan build_plan(std::size_t n, const std::vector<double>& omegas,
                        const dynamics::DeviceParams& params, const PlanOptions& options = {});

/// Swap |m,1> <-> |m+2^k,0> for m in the step-k occupied set, identity
/// elsewhere, on the (A dim fock_dim) x qubit pair. fock_dim = 0 means 2^n.
Matrix ideal_step_unitary(std::size_t k, std::size_t n, std::size_t fock_dim = 0);

/// Per-Fock-level phases of one dynamical step.
struct PhaseTable {
  std::vector<double> stay;      // arg <m,0|U|m,0>, indexed by A level
  std::vector<double> forward;   // arg <m+2^k,0|U|m,1>, indexed by target level
  std::vector<double> backward;  // arg <m,1|U|m+2^k,0>, indexed by source level m+2^k
};

struct StepPropagation {
  Matrix raw;               // pair unitary in the bare basis, dressing included
  Matrix forward;           // raw with the forward phase frame applied
  Matrix backward;          // raw with the reverse pre-correction applied
  PhaseTable phases;
  std::vector<double> sample_times;
  std::vector<Matrix> samples;  // pair map at each sample time
  dynamics::PropagationReport report;
  std::optional<dynamics::PropagationReport> ramp_in;
  std::optional<dynamics::PropagationReport> ramp_out;
};

/// Phases of a raw step map on the occupied support of `step`.
PhaseTable step_phases(const StepPlan& step, std::size_t fock_dim, const Matrix& raw);
/// Diagonal A-level frame removing the forward phases (applied after raw).
Matrix forward_frame(const StepPlan& step, std::size_t fock_dim, const PhaseTable& phases);
/// Diagonal A-level frame removing the reverse phases (applied before raw).
Matrix backward_frame(const StepPlan& step, std::size_t fock_dim, const PhaseTable& phases);

/// Raw pair unitaries of step `index` after drive durations `durations`
/// (ideal or ramp dressing as planned), without phase corrections.
std::vector<Matrix> propagate_step(const TransferPlan& plan, std::size_t index,
                                   const std::vector<double>& durations);

/// Lazily propagates and caches one pair unitary per plan step.
class TransferEngine {
 public:
  TransferEngine(TransferPlan plan, Backend backend);

  const TransferPlan& plan() const { return plan_; }
  Backend backend() const { return backend_; }

  /// Dynamical propagation of plan step `index`; throws for the ideal backend.
  const StepPropagation& propagation(std::size_t index) const;
  /// Forward map of step `index` for this backend.
  const Matrix& forward(std::size_t index) const;
  /// Physical reverse map of step `index` (same pulse, mirror chain).
  const Matrix& backward(std::size_t index) const;

 private:
  TransferPlan plan_;
  Backend backend_;
  std::vector<Matrix> ideal_;
  mutable std::vector<std::unique_ptr<StepPropagation>> cache_;
};

struct PopulationSample {
  double t_us;
  std::string label;
  double population;
};

struct StepReport {
  std::size_t k = 0;
  double fidelity = 1.0;             // phase-frame map on the ideal input
  double raw_fidelity = 1.0;         // same without phase correction
  double cumulative_fidelity = 1.0;  // actual state against the ideal pipeline
  double leakage = 0.0;              // top-two Fock level population, max over samples
  double qubit_excitation = 0.0;     // excited population of qubit k after the step
  std::vector<PopulationSample> series;
  std::optional<dynamics::PropagationReport> propagation;
};

struct TransferResult {
  StateVector state;
  std::vector<StepReport> reports;
};

/// Runs the plan on a state over (A, [B,] register); A must start in vacuum.
TransferResult execute_transfer(const StateVector& initial, const TransferEngine& engine);
TransferResult execute_transfer(const StateVector& initial, const TransferPlan& plan,
                                Backend backend);

/// Residual phase of one basis state under the physical reverse map.
struct PhaseMismatch {
  std::size_t k;
  std::string label;
  double phase;
};

struct InverseResult {
  StateVector state;
  std::vector<PhaseMismatch> mismatches;  // physical mode only, |phase| > 1e-6
};

InverseResult inverse_transfer(const StateVector& state, const TransferEngine& engine,
                               InverseMode mode);

/// Ideal pipeline target: sum_m c_m |m>_A |0...0> for a state over (A, [B,] register).
StateVector ideal_transfer(const StateVector& initial, std::size_t n);

struct ProtocolSchedule {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  double tau_ad = 0.0;
  double total() const { return 2.0 * tau1 + tau2 + tau3; }
};

std::string series_csv(const std::vector<StepReport>& reports);
std::string step_table_csv(const std::vector<StepReport>& reports);
nlohmann::ordered_json to_json(const TransferPlan& plan);
nlohmann::ordered_json to_json(const StepReport& report);

}  // namespace oqft::transfer
