#pragma once

// Dense Fock-space / qubit-register tensor algebra.
//
// A CompositeSpace is an ordered product of factors. Basis indices use a
// mixed-radix layout with the first factor most significant. A qubit
// register of n qubits is a single factor of dimension 2^n whose index is the
// decimal value of the basis string b_{n-1}...b_0 (bit k <-> qubit k).

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace oqft::hilbert {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-9;

enum class FockRole { ResonatorA, ResonatorB };

struct FockSpace {
  std::size_t dim = 1;
  FockRole role = FockRole::ResonatorA;
};

struct QubitRegister {
  std::size_t n = 1;
  std::size_t dim() const { return std::size_t{1} << n; }
};

using Factor = std::variant<FockSpace, QubitRegister>;

std::size_t factor_dim(const Factor& f);
std::string factor_label(const Factor& f);

/// Selects a tensor axis: a whole factor, or one qubit (`bit`) of a register.
struct Axis {
  std::size_t factor = 0;
  int bit = -1;
};

class CompositeSpace {
 public:
  CompositeSpace() = default;
  explicit CompositeSpace(std::vector<Factor> factors);

  std::size_t size() const { return factors_.size(); }
  std::size_t dim() const { return total_; }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t factor_dim(std::size_t i) const { return dims_.at(i); }
  std::size_t stride(std::size_t i) const { return strides_.at(i); }

  /// Stride and extent of an axis.
  std::pair<std::size_t, std::size_t> axis_layout(const Axis& axis) const;

  std::size_t index_of(std::span<const std::size_t> occupations) const;
  std::vector<std::size_t> occupations(std::size_t index) const;

  /// Index of the first Fock factor with the given role; throws if absent.
  std::size_t find(FockRole role) const;
  /// Index of the first qubit register; throws if absent.
  std::size_t find_register() const;

  /// Human-readable label of a basis index, e.g. "|4>_A|011>".
  std::string basis_label(std::size_t index) const;
  std::string describe() const;

  bool operator==(const CompositeSpace& other) const;

 private:
  std::vector<Factor> factors_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

/// Unit-norm amplitude vector over a composite space.
class StateVector {
 public:
  /// Throws DimensionError on size mismatch and PreconditionError when
  /// the norm deviates from 1 by more than kNormTolerance.
  StateVector(CompositeSpace space, Vector amplitudes);

  /// Rescales to unit norm. Throws PreconditionError on a zero vector.
  static StateVector normalized(CompositeSpace space, Vector amplitudes);

  const CompositeSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  cplx amplitude(std::span<const std::size_t> occupations) const;
  double norm() const { return amps_.norm(); }

 private:
  CompositeSpace space_;
  Vector amps_;
};

class DensityMatrix {
 public:
  DensityMatrix(CompositeSpace space, Matrix matrix);

  const CompositeSpace& space() const { return space_; }
  const Matrix& matrix() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  /// Population of basis level `index`.
  double population(std::size_t index) const;

  /// Checks Hermiticity (1e-12), unit trace (1e-9) and PSD (eigenvalues
  /// >= -1e-9). Throws PreconditionError naming the violated property.
  void validate() const;

 private:
  CompositeSpace space_;
  Matrix rho_;
};

enum class Ladder { Raise, Lower };
enum class Pauli { X, Y, Z, Plus, Minus };

/// Decimal value of a basis string such as "110" (rightmost char = qubit 0).
std::size_t register_value(std::string_view bits);
/// Basis string of `value` padded to n characters.
std::string register_bits(std::size_t value, std::size_t n);

StateVector basis_state(const CompositeSpace& space,
                        std::span<const std::size_t> occupations);
StateVector basis_state(const CompositeSpace& space,
                        std::initializer_list<std::size_t> occupations);

/// Truncated a (Lower) or a^dagger (Raise).
Matrix ladder_operator(const FockSpace& space, Ladder kind);

/// 2x2 Pauli matrix in the (|0> ground, |1> excited) basis with
/// sigma_z|1> = +|1>, sigma_+ = |1><0|.
Matrix qubit_pauli(Pauli kind);

/// Pauli operator on qubit k, identity on the rest of the register.
Matrix pauli_operator(const QubitRegister& reg, std::size_t k, Pauli kind);

/// Applies `op` (acting on the ordered product of `axes`, first axis most
/// significant) to `v`, identity elsewhere.
Vector apply_local(const CompositeSpace& space, const Vector& v,
                   std::span<const Axis> axes, const Matrix& op);

/// Unitary convenience wrapper; the result is norm-checked.
StateVector apply_local(const StateVector& state, std::span<const Axis> axes,
                        const Matrix& op);

/// Multiplies every amplitude by `phases[occupation of axis]`.
Vector apply_diagonal(const CompositeSpace& space, const Vector& v,
                      const Axis& axis, std::span<const cplx> phases);

DensityMatrix partial_trace(const StateVector& state,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::size_t> keep);

/// |<a|b>|^2. Throws DimensionError on mismatched spaces.
double overlap_fidelity(const StateVector& a, const StateVector& b);

/// <psi|rho|psi> for a pure target.
double state_fidelity(const DensityMatrix& rho, const StateVector& psi);

/// Removes the global phase of `v` relative to `reference`, aligning on the
/// largest-magnitude amplitude of the reference.
Vector align_global_phase(const Vector& v, const Vector& reference);

/// Product state of the given factors in order.
StateVector tensor(const StateVector& a, const StateVector& b);

}  // namespace oqft::hilbert
