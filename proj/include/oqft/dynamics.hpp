#pragma once

// Jaynes-Cummings dressed eigensystem of one qubit + resonator A, and
// time-dependent propagation of the Schroedinger equation.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oqft/device.hpp"
#include "oqft/drives.hpp"
#include "oqft/hilbert.hpp"

namespace oqft::dynamics {

using hilbert::cplx;
using hilbert::Matrix;
using hilbert::StateVector;
using hilbert::Vector;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// (|m,0> +- |m-1,1>)/sqrt(2), or |0,0> for the ground level, over [A, Q[1]].
StateVector dressed_state(std::size_t m, DressedSign sign, const hilbert::FockSpace& A);

/// Resonant dressed eigenbasis of the (A dim D) x (one qubit) pair.
///
/// Label order: 0 = ground, 1 + 2(m-1) = |m,+>, 2 + 2(m-1) = |m,->
/// (m = 1 .. D-1), 2D-1 = the unpaired top level |D-1,1>.
/// Bare pair index is 2a + q.
class DressedBasis {
 public:
  DressedBasis(std::size_t fock_dim, double omega_A, double g);

  std::size_t fock_dim() const { return fock_dim_; }
  std::size_t dim() const { return 2 * fock_dim_; }
  double omega_A() const { return omega_A_; }
  double g() const { return g_; }

  std::size_t index(std::size_t m, DressedSign sign) const;
  const DressedLevel& level(std::size_t j) const { return levels_.at(j); }
  const std::vector<DressedLevel>& levels() const { return levels_; }
  std::string label(std::size_t j) const;

  /// Columns are the dressed states in the bare pair basis.
  const Matrix& transform() const { return transform_; }
  const Eigen::VectorXd& energies() const { return energies_; }

  /// Label relabelling P: (P psi)_j = psi_{bare(j)} with |m,0> -> |m,->,
  /// |m,1> -> |m+1,+>, |0,0> -> ground, |D-1,1> -> top.
  const Matrix& label_map() const { return label_map_; }

  /// Dressed-label indices that touch the two highest Fock levels.
  std::vector<std::size_t> pad_levels() const;

 private:
  std::size_t fock_dim_;
  double omega_A_;
  double g_;
  std::vector<DressedLevel> levels_;
  Matrix transform_;
  Eigen::VectorXd energies_;
  Matrix label_map_;
};

/// Source of H(t) for the propagator.
class HamiltonianSource {
 public:
  virtual ~HamiltonianSource() = default;
  virtual std::size_t dim() const = 0;
  /// Largest angular frequency present (transitions and drives), rad/us.
  virtual double max_frequency() const = 0;
  /// Upper bound on the operator norm of H(t), rad/us.
  virtual double norm_bound() const { return max_frequency(); }
  virtual Matrix matrix(double t) const = 0;
  /// dy = -i H(t) y. The default goes through matrix(t).
  virtual void derivative(double t, const RowMatrix& y, RowMatrix& dy) const;
  /// Basis indices counted as truncation leakage.
  virtual std::vector<std::size_t> pad_levels() const { return {}; }
};

class ConstantHamiltonian : public HamiltonianSource {
 public:
  explicit ConstantHamiltonian(Matrix h);
  std::size_t dim() const override { return static_cast<std::size_t>(h_.rows()); }
  double max_frequency() const override { return max_freq_; }
  Matrix matrix(double) const override { return h_; }
  void derivative(double t, const RowMatrix& y, RowMatrix& dy) const override;

 private:
  Matrix h_;
  double max_freq_;
};

class FunctionHamiltonian : public HamiltonianSource {
 public:
  /// norm_bound = 0 takes max_frequency as the bound.
  FunctionHamiltonian(std::size_t dim, double max_frequency,
                      std::function<Matrix(double)> h, std::vector<std::size_t> pad = {},
                      double norm_bound = 0.0);
  std::size_t dim() const override { return dim_; }
  double max_frequency() const override { return max_freq_; }
  double norm_bound() const override { return norm_ > 0.0 ? norm_ : max_freq_; }
  Matrix matrix(double t) const override { return h_(t); }
  std::vector<std::size_t> pad_levels() const override { return pad_; }

 private:
  std::size_t dim_;
  double max_freq_;
  double norm_;
  std::function<Matrix(double)> h_;
  std::vector<std::size_t> pad_;
};

enum class Quadrature { SigmaY, SigmaX };

/// Interaction-picture drive Hamiltonian in the dressed label basis,
/// f(t) sum_{j1 != j2} <j1|sigma|j2> e^{i(E_j1 - E_j2)t} |j1><j2|, no RWA.
class DriveHamiltonian : public HamiltonianSource {
 public:
  DriveHamiltonian(const DressedBasis& basis, drives::DrivePulse pulse,
                   Quadrature quadrature = Quadrature::SigmaY);

  std::size_t dim() const override { return dim_; }
  double max_frequency() const override { return max_freq_; }
  /// Sum of |amplitude| over the components (sigma has unit norm).
  double norm_bound() const override;
  Matrix matrix(double t) const override;
  void derivative(double t, const RowMatrix& y, RowMatrix& dy) const override;
  std::vector<std::size_t> pad_levels() const override { return pad_; }

  /// <j1|sigma|j2> in the dressed basis.
  const Matrix& coupling() const { return sigma_; }
  const drives::DrivePulse& pulse() const { return pulse_; }

 private:
  struct Entry {
    std::size_t col;
    cplx value;
  };
  void refresh_phases(double t) const;

  std::size_t dim_;
  drives::DrivePulse pulse_;
  Eigen::VectorXd energies_;
  Matrix sigma_;
  std::vector<std::vector<Entry>> rows_;
  std::vector<std::size_t> pad_;
  double max_freq_ = 0.0;
  mutable double cached_t_ = -1.0;
  mutable std::vector<cplx> phases_;
};

Matrix interaction_hamiltonian(double t, const drives::DrivePulse& pulse,
                               const DressedBasis& basis,
                               Quadrature quadrature = Quadrature::SigmaY);

enum class Integrator { Rk4, ExpMidpoint };

struct PropagationConfig {
  double step = 0.0;        // 0 selects 1/(50 f_max) times step_scale
  double step_scale = 1.0;  // must be <= 1
  double norm_tolerance = 1e-9;
  bool convergence_check = false;
  Integrator integrator = Integrator::Rk4;
};

struct PropagationReport {
  double duration = 0.0;
  double step = 0.0;
  std::size_t steps = 0;
  double norm_drift = 0.0;
  double max_leakage = 0.0;
  std::optional<double> convergence_overlap;
  double wall_seconds = 0.0;
  Integrator integrator = Integrator::Rk4;
  std::vector<std::string> warnings;
};

nlohmann::ordered_json to_json(const PropagationReport& report);

/// Time step chosen for a source and duration; throws PreconditionError when
/// an explicit step violates the 1/(50 f_max) bound. The automatic RK4 step
/// also keeps the per-step norm loss (|H| h)^6 / 72 below a tenth of the
/// norm tolerance per us.
std::pair<double, std::size_t> choose_step(const HamiltonianSource& source, double duration,
                                           const PropagationConfig& config);

using Observer = std::function<void(double t, const RowMatrix& columns)>;

struct ColumnPropagation {
  RowMatrix columns;
  PropagationReport report;
};

/// Propagates every column of `initial` for `duration`. The step grid lands
/// exactly on each of `sample_times` (sorted, inside [0, duration]), where
/// `observer` is called. With an automatic step the run is repeated at half
/// the step (up to four times, noted in the report warnings) while the norm
/// drift is too large. Throws IntegrationError if that never succeeds or an
/// explicit step drifts.
ColumnPropagation propagate_columns(const RowMatrix& initial, const HamiltonianSource& source,
                                    double duration, const PropagationConfig& config = {},
                                    const std::vector<double>& sample_times = {},
                                    const Observer& observer = {});

/// The state must live in a space of dimension source.dim().
std::pair<StateVector, PropagationReport> propagate(const StateVector& state,
                                                    const HamiltonianSource& source,
                                                    double duration,
                                                    const PropagationConfig& config = {});

enum class DressDirection { BareToDressed, DressedToBare };
enum class DressingMode { Ideal, Ramp };

/// Detuning Delta(t) of the tanh ramp, from `detuning_start` at t = 0 down to
/// 0 at t = tau (BareToDressed), or the mirror image.
double ramp_detuning(double t, double tau, double detuning_start, DressDirection direction);

/// Pair unitary (bare pair basis) of the dressing step. Ideal mode is the
/// exact basis exchange T P (or its adjoint); ramp mode propagates the
/// detuning sweep and removes the adiabatic dynamical phases.
Matrix dressing_unitary(const DressedBasis& basis, DressDirection direction, DressingMode mode,
                        const DeviceParams& params, const PropagationConfig& config = {},
                        PropagationReport* report = nullptr);

struct DressingOutcome {
  StateVector state;
  std::vector<std::string> warnings;
  std::optional<PropagationReport> report;
};

/// Applies the dressing step of qubit k to a state over (A, ..., register).
DressingOutcome dressing_map(const StateVector& state, std::size_t k, DressDirection direction,
                             DressingMode mode, const DeviceParams& params,
                             const PropagationConfig& config = {});

}  // namespace oqft::dynamics
