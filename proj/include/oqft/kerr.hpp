#pragma once

// Cross-Kerr Fourier transform between resonators A and B.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqft/hilbert.hpp"
#include "oqft/transfer.hpp"

namespace oqft::kerr {

using hilbert::cplx;
using hilbert::DensityMatrix;
using hilbert::Matrix;
using hilbert::StateVector;
using hilbert::Vector;

enum class Direction { Forward, Inverse };

struct KerrConfig {
  double chi = 0.0;          // rad/us, signed
  unsigned winding = 0;
  Direction direction = Direction::Forward;
};

/// tau_2 = (-+2pi/q + 2 pi k) / chi. Throws PreconditionError when the
/// winding gives tau_2 <= 0 (the message suggests k+1).
double qft_duration(std::size_t q, const KerrConfig& config);

/// Multiplies |m>_A|n>_B by exp(-i chi t m n). The space must hold an A and a
/// B factor; other factors are spectators.
StateVector kerr_evolve(const StateVector& joint, double chi, double t);

/// (1/sqrt q) sum_{n<q} |n>_B in a B factor of dimension `dim` (0 means q).
StateVector prepare_uniform_B(std::size_t q, std::size_t dim = 0);

/// Brute-force sum (1/sqrt q) sum_m c_m exp(+-i 2 pi m n / q).
Vector dft_oracle(const Vector& c, Direction direction = Direction::Forward);

struct Projection {
  std::optional<StateVector> remainder;  // empty for a zero-probability outcome
  double probability = 0.0;
};

/// Born-rule projection of factor `factor` onto |p> = sum_{m<q} |m>/sqrt q.
/// The factor is removed from the remaining state. q = 0 means the factor dim.
Projection project_uniform(const StateVector& joint, std::size_t factor, std::size_t q = 0);

/// Projection of one Fock factor onto |0>, factor removed.
Projection project_vacuum(const StateVector& joint, std::size_t factor);

struct QftResult {
  StateVector b_state;
  double probability = 0.0;
  StateVector joint;  // before projection, over (A, B)
};

/// The A state lives in a single-factor space [A]; q = 0 means dim(A).
QftResult run_qft(const StateVector& a_state, const KerrConfig& config, std::size_t q = 0);

struct DisentangleResult {
  StateVector b_state;         // B after the qubit projection and A -> |0>
  double probability = 0.0;    // all qubits found in |+>
  double a_vacuum = 0.0;       // conditional probability of A in |0>
  DensityMatrix rho_b;         // B with A traced out
};

/// Moves A's content back into qubits (physical inverse transfer), projects
/// every qubit onto |+>. The joint holds A, B and optionally the register
/// (appended in |0...0> if absent).
DisentangleResult physical_disentangle(const StateVector& joint,
                                       const transfer::TransferEngine& engine);

struct WignerOptions {
  double x_min = -4.0, x_max = 4.0;
  double p_min = -4.0, p_max = 4.0;
  std::size_t nx = 81, np = 81;
};

struct WignerGrid {
  std::vector<double> x;
  std::vector<double> p;
  Eigen::MatrixXd w;  // w(ip, ix)
  std::vector<std::string> warnings;

  /// Riemann sum of W over the grid (alpha = x + i p).
  double integral() const;
};

/// W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dagger] for a single Fock factor.
WignerGrid wigner_grid(const DensityMatrix& rho, const WignerOptions& options = {});
double wigner_point(const Matrix& rho, cplx alpha);

std::string wigner_csv(const WignerGrid& grid);
nlohmann::ordered_json to_json(const QftResult& result);

}  // namespace oqft::kerr
