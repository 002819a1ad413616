#include "oqft/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oqft/exceptions.hpp"

namespace oqft::hilbert {

std::size_t factor_dim(const Factor& f) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, FockSpace>) {
          return x.dim;
        } else {
          return x.dim();
        }
      },
      f);
}

std::string factor_label(const Factor& f) {
  if (const auto* fock = std::get_if<FockSpace>(&f)) {
    return std::string(fock->role == FockRole::ResonatorA ? "A" : "B") + "[" +
           std::to_string(fock->dim) + "]";
  }
  return "Q[" + std::to_string(std::get<QubitRegister>(f).n) + "]";
}

CompositeSpace::CompositeSpace(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw DimensionError("composite space needs at least one factor");
  dims_.reserve(factors_.size());
  for (const auto& f : factors_) {
    if (const auto* fock = std::get_if<FockSpace>(&f); fock && fock->dim < 1) {
      throw DimensionError("Fock space dimension must be >= 1");
    }
    if (const auto* reg = std::get_if<QubitRegister>(&f); reg && reg->n < 1) {
      throw DimensionError("qubit register needs n >= 1");
    }
    dims_.push_back(hilbert::factor_dim(f));
  }
  strides_.assign(factors_.size(), 1);
  for (std::size_t i = factors_.size() - 1; i > 0; --i) {
    strides_[i - 1] = strides_[i] * dims_[i];
  }
  total_ = strides_[0] * dims_[0];
}

std::pair<std::size_t, std::size_t> CompositeSpace::axis_layout(const Axis& axis) const {
  if (axis.factor >= factors_.size()) throw DimensionError("axis factor out of range");
  if (axis.bit < 0) return {strides_[axis.factor], dims_[axis.factor]};
  const auto* reg = std::get_if<QubitRegister>(&factors_[axis.factor]);
  if (reg == nullptr) throw DimensionError("qubit axis on a non-register factor");
  if (static_cast<std::size_t>(axis.bit) >= reg->n) throw DimensionError("qubit index out of range");
  return {strides_[axis.factor] << axis.bit, 2};
}

std::size_t CompositeSpace::index_of(std::span<const std::size_t> occupations) const {
  if (occupations.size() != factors_.size()) {
    throw DimensionError("expected " + std::to_string(factors_.size()) + " occupations, got " +
                         std::to_string(occupations.size()));
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (occupations[i] >= dims_[i]) {
      throw DimensionError("occupation " + std::to_string(occupations[i]) + " out of range for " +
                           factor_label(factors_[i]));
    }
    idx += occupations[i] * strides_[i];
  }
  return idx;
}

std::vector<std::size_t> CompositeSpace::occupations(std::size_t index) const {
  if (index >= total_) throw DimensionError("basis index out of range");
  std::vector<std::size_t> occ(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    occ[i] = (index / strides_[i]) % dims_[i];
  }
  return occ;
}

std::size_t CompositeSpace::find(FockRole role) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (const auto* f = std::get_if<FockSpace>(&factors_[i]); f && f->role == role) return i;
  }
  throw DimensionError(std::string("no resonator ") + (role == FockRole::ResonatorA ? "A" : "B") +
                       " factor in " + describe());
}

std::size_t CompositeSpace::find_register() const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (std::holds_alternative<QubitRegister>(factors_[i])) return i;
  }
  throw DimensionError("no qubit register in " + describe());
}

std::string CompositeSpace::basis_label(std::size_t index) const {
  const auto occ = occupations(index);
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (const auto* fock = std::get_if<FockSpace>(&factors_[i])) {
      out += "|" + std::to_string(occ[i]) + ">_" + (fock->role == FockRole::ResonatorA ? "A" : "B");
    } else {
      out += "|" + register_bits(occ[i], std::get<QubitRegister>(factors_[i]).n) + ">";
    }
  }
  return out;
}

std::string CompositeSpace::describe() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) out += " x ";
    out += factor_label(factors_[i]);
  }
  return out;
}

bool CompositeSpace::operator==(const CompositeSpace& other) const {
  if (factors_.size() != other.factors_.size()) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].index() != other.factors_[i].index() || dims_[i] != other.dims_[i]) return false;
    if (const auto* f = std::get_if<FockSpace>(&factors_[i])) {
      if (f->role != std::get<FockSpace>(other.factors_[i]).role) return false;
    }
  }
  return true;
}

StateVector::StateVector(CompositeSpace space, Vector amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != space_.dim()) {
    throw DimensionError("amplitude count " + std::to_string(amps_.size()) +
                         " does not match space dimension " + std::to_string(space_.dim()));
  }
  const double drift = std::abs(amps_.norm() - 1.0);
  if (!(drift <= kNormTolerance)) {
    std::ostringstream os;
    os << "state norm deviates from 1 by " << drift;
    throw PreconditionError(os.str());
  }
}

StateVector StateVector::normalized(CompositeSpace space, Vector amplitudes) {
  const double nrm = amplitudes.norm();
  if (!(nrm > 0.0)) throw PreconditionError("cannot normalize a zero vector");
  return StateVector(std::move(space), amplitudes / nrm);
}

cplx StateVector::amplitude(std::span<const std::size_t> occupations) const {
  return amps_(static_cast<Eigen::Index>(space_.index_of(occupations)));
}

DensityMatrix::DensityMatrix(CompositeSpace space, Matrix matrix)
    : space_(std::move(space)), rho_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(space_.dim());
  if (rho_.rows() != d || rho_.cols() != d) throw DimensionError("density matrix shape mismatch");
}

double DensityMatrix::population(std::size_t index) const {
  return rho_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)).real();
}

void DensityMatrix::validate() const {
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("density matrix is not Hermitian");
  }
  if (std::abs(trace() - 1.0) > 1e-9) throw PreconditionError("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw PreconditionError("density matrix is not positive semidefinite");
  }
}

std::size_t register_value(std::string_view bits) {
  std::size_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw DimensionError("basis string may only contain 0/1");
    v = (v << 1) | static_cast<std::size_t>(c - '0');
  }
  return v;
}

std::string register_bits(std::size_t value, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t k = 0; k < n; ++k) {
    if ((value >> k) & 1u) s[n - 1 - k] = '1';
  }
  return s;
}

StateVector basis_state(const CompositeSpace& space, std::span<const std::size_t> occupations) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  v(static_cast<Eigen::Index>(space.index_of(occupations))) = 1.0;
  return StateVector(space, std::move(v));
}

StateVector basis_state(const CompositeSpace& space, std::initializer_list<std::size_t> occupations) {
  return basis_state(space, std::span<const std::size_t>(occupations.begin(), occupations.size()));
}

Matrix ladder_operator(const FockSpace& space, Ladder kind) {
  if (space.dim < 2) throw DimensionError("ladder operator needs dim >= 2");
  const auto d = static_cast<Eigen::Index>(space.dim);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index m = 1; m < d; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  return kind == Ladder::Lower ? a : Matrix(a.adjoint());
}

Matrix qubit_pauli(Pauli kind) {
  Matrix p = Matrix::Zero(2, 2);
  const cplx i{0.0, 1.0};
  switch (kind) {
    case Pauli::X: p(0, 1) = 1.0; p(1, 0) = 1.0; break;
    // sigma_y = -i sigma_+ + i sigma_-
    case Pauli::Y: p(1, 0) = -i; p(0, 1) = i; break;
    case Pauli::Z: p(0, 0) = -1.0; p(1, 1) = 1.0; break;
    case Pauli::Plus: p(1, 0) = 1.0; break;
    case Pauli::Minus: p(0, 1) = 1.0; break;
  }
  return p;
}

Matrix pauli_operator(const QubitRegister& reg, std::size_t k, Pauli kind) {
  if (k >= reg.n) throw DimensionError("qubit index " + std::to_string(k) + " out of range");
  const CompositeSpace space({reg});
  const auto d = static_cast<Eigen::Index>(reg.dim());
  const Axis axis{0, static_cast<int>(k)};
  Matrix out(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Vector e = Vector::Unit(d, c);
    out.col(c) = apply_local(space, e, std::span<const Axis>(&axis, 1), qubit_pauli(kind));
  }
  return out;
}

namespace {

struct LocalLayout {
  std::vector<std::size_t> offsets;  // full-index offset of each local index
  std::vector<std::pair<std::size_t, std::size_t>> axes;  // (stride, dim)
};

LocalLayout local_layout(const CompositeSpace& space, std::span<const Axis> axes) {
  LocalLayout lay;
  std::size_t local_dim = 1;
  for (const auto& a : axes) {
    lay.axes.push_back(space.axis_layout(a));
    local_dim *= lay.axes.back().second;
  }
  for (std::size_t i = 0; i < lay.axes.size(); ++i) {
    for (std::size_t j = i + 1; j < lay.axes.size(); ++j) {
      if (lay.axes[i].first == lay.axes[j].first) throw DimensionError("repeated axis");
    }
  }
  lay.offsets.resize(local_dim);
  for (std::size_t l = 0; l < local_dim; ++l) {
    std::size_t rem = l, off = 0;
    for (std::size_t a = lay.axes.size(); a-- > 0;) {
      off += (rem % lay.axes[a].second) * lay.axes[a].first;
      rem /= lay.axes[a].second;
    }
    lay.offsets[l] = off;
  }
  return lay;
}

bool is_base(std::size_t index, const LocalLayout& lay) {
  for (const auto& [stride, dim] : lay.axes) {
    if ((index / stride) % dim != 0) return false;
  }
  return true;
}

}  // namespace

Vector apply_local(const CompositeSpace& space, const Vector& v, std::span<const Axis> axes,
                   const Matrix& op) {
  if (static_cast<std::size_t>(v.size()) != space.dim()) throw DimensionError("vector size mismatch");
  const auto lay = local_layout(space, axes);
  const auto ld = static_cast<Eigen::Index>(lay.offsets.size());
  if (op.rows() != ld || op.cols() != ld) throw DimensionError("local operator shape mismatch");
  Vector out(v.size());
  Vector x(ld);
  for (std::size_t base = 0; base < space.dim(); ++base) {
    if (!is_base(base, lay)) continue;
    for (Eigen::Index l = 0; l < ld; ++l) x(l) = v(static_cast<Eigen::Index>(base + lay.offsets[l]));
    const Vector y = op * x;
    for (Eigen::Index l = 0; l < ld; ++l) out(static_cast<Eigen::Index>(base + lay.offsets[l])) = y(l);
  }
  return out;
}

StateVector apply_local(const StateVector& state, std::span<const Axis> axes, const Matrix& op) {
  return StateVector(state.space(), apply_local(state.space(), state.amplitudes(), axes, op));
}

Vector apply_diagonal(const CompositeSpace& space, const Vector& v, const Axis& axis,
                      std::span<const cplx> phases) {
  const auto [stride, dim] = space.axis_layout(axis);
  if (phases.size() != dim) throw DimensionError("phase table size mismatch");
  Vector out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) *= phases[(static_cast<std::size_t>(i) / stride) % dim];
  }
  return out;
}

namespace {

struct TraceSplit {
  CompositeSpace kept;
  std::vector<std::size_t> kept_index;    // per full index
  std::vector<std::size_t> traced_index;  // per full index
  std::size_t traced_dim = 1;
};

TraceSplit split_for_trace(const CompositeSpace& space, std::span<const std::size_t> keep) {
  if (keep.empty()) throw PreconditionError("partial trace needs a nonempty keep set");
  std::vector<bool> kept(space.size(), false);
  for (auto f : keep) {
    if (f >= space.size()) throw DimensionError("keep factor out of range");
    if (kept[f]) throw DimensionError("repeated keep factor");
    kept[f] = true;
  }
  std::vector<Factor> kept_factors;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (kept[i]) kept_factors.push_back(space.factor(i));
  }
  TraceSplit s{CompositeSpace(std::move(kept_factors)), {}, {}, 1};
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!kept[i]) s.traced_dim *= space.factor_dim(i);
  }
  s.kept_index.resize(space.dim());
  s.traced_index.resize(space.dim());
  for (std::size_t idx = 0; idx < space.dim(); ++idx) {
    const auto occ = space.occupations(idx);
    std::size_t k = 0, t = 0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (kept[i]) {
        k = k * space.factor_dim(i) + occ[i];
      } else {
        t = t * space.factor_dim(i) + occ[i];
      }
    }
    s.kept_index[idx] = k;
    s.traced_index[idx] = t;
  }
  return s;
}

}  // namespace

DensityMatrix partial_trace(const StateVector& state, std::span<const std::size_t> keep) {
  const auto s = split_for_trace(state.space(), keep);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(s.kept.dim()),
                          static_cast<Eigen::Index>(s.traced_dim));
  for (std::size_t idx = 0; idx < state.dim(); ++idx) {
    m(static_cast<Eigen::Index>(s.kept_index[idx]), static_cast<Eigen::Index>(s.traced_index[idx])) =
        state.amplitudes()(static_cast<Eigen::Index>(idx));
  }
  Matrix rho = m * m.adjoint();
  return DensityMatrix(s.kept, std::move(rho));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  const auto s = split_for_trace(rho.space(), keep);
  const auto kd = static_cast<Eigen::Index>(s.kept.dim());
  Matrix out = Matrix::Zero(kd, kd);
  const auto d = rho.space().dim();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (s.traced_index[i] != s.traced_index[j]) continue;
      out(static_cast<Eigen::Index>(s.kept_index[i]), static_cast<Eigen::Index>(s.kept_index[j])) +=
          rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityMatrix(s.kept, std::move(out));
}

double overlap_fidelity(const StateVector& a, const StateVector& b) {
  if (!(a.space() == b.space())) {
    throw DimensionError("overlap between states on different spaces: " + a.space().describe() +
                         " vs " + b.space().describe());
  }
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double state_fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (!(rho.space() == psi.space())) throw DimensionError("fidelity between mismatched spaces");
  return (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
}

Vector align_global_phase(const Vector& v, const Vector& reference) {
  Eigen::Index pivot = 0;
  reference.cwiseAbs().maxCoeff(&pivot);
  if (std::abs(v(pivot)) == 0.0 || std::abs(reference(pivot)) == 0.0) return v;
  const cplx rot = std::polar(1.0, std::arg(reference(pivot)) - std::arg(v(pivot)));
  return v * rot;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<Factor> factors = a.space().factors();
  factors.insert(factors.end(), b.space().factors().begin(), b.space().factors().end());
  Vector v(static_cast<Eigen::Index>(a.dim() * b.dim()));
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    v.segment(i * b.amplitudes().size(), b.amplitudes().size()) = a.amplitudes()(i) * b.amplitudes();
  }
  return StateVector::normalized(CompositeSpace(std::move(factors)), std::move(v));
}

}  // namespace oqft::hilbert
