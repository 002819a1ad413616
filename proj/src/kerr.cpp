#include "oqft/kerr.hpp"

#include <cmath>
#include <sstream>

#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

namespace oqft::kerr {

using hilbert::CompositeSpace;
using hilbert::FockRole;
using hilbert::FockSpace;

double qft_duration(std::size_t q, const KerrConfig& config) {
  if (q == 0) throw PreconditionError("qft_duration: q must be >= 1");
  if (config.chi == 0.0 || !std::isfinite(config.chi))
    throw PreconditionError("qft_duration: chi must be non-zero");
  const double base = units::kTwoPi / static_cast<double>(q);
  const double turn = units::kTwoPi * static_cast<double>(config.winding);
  const double tau = ((config.direction == Direction::Forward ? -base : base) + turn) / config.chi;
  if (!(tau > 0.0)) {
    std::ostringstream os;
    os << "qft_duration: winding k=" << config.winding << " gives tau_2 = " << tau
       << " us for chi = " << config.chi << " rad/us; ";
    if (((config.direction == Direction::Forward ? -base : base) + turn + units::kTwoPi) / config.chi > 0.0)
      os << "try k=" << config.winding + 1;
    else
      os << "no non-negative winding works for this sign of chi";
    throw PreconditionError(os.str());
  }
  return tau;
}

StateVector kerr_evolve(const StateVector& joint, double chi, double t) {
  const auto& space = joint.space();
  const std::size_t ia = space.find(FockRole::ResonatorA);
  const std::size_t ib = space.find(FockRole::ResonatorB);
  const auto [sa, da] = space.axis_layout({ia, -1});
  const auto [sb, db] = space.axis_layout({ib, -1});
  Vector v = joint.amplitudes();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double m = static_cast<double>((idx / sa) % da);
    const double n = static_cast<double>((idx / sb) % db);
    v(i) *= std::polar(1.0, -chi * t * m * n);
  }
  return StateVector(space, std::move(v));
}

StateVector prepare_uniform_B(std::size_t q, std::size_t dim) {
  if (q == 0) throw PreconditionError("prepare_uniform_B: q must be >= 1");
  if (dim == 0) dim = q;
  if (dim < q) throw DimensionError("prepare_uniform_B: B factor smaller than q");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v.head(static_cast<Eigen::Index>(q)).setConstant(1.0 / std::sqrt(static_cast<double>(q)));
  return StateVector::normalized(CompositeSpace({FockSpace{dim, FockRole::ResonatorB}}), std::move(v));
}

Vector dft_oracle(const Vector& c, Direction direction) {
  const auto q = c.size();
  if (q == 0) throw PreconditionError("dft_oracle: empty input");
  const double sign = direction == Direction::Forward ? 1.0 : -1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(q));
  Vector out = Vector::Zero(q);
  for (Eigen::Index n = 0; n < q; ++n) {
    cplx acc = 0.0;
    for (Eigen::Index m = 0; m < q; ++m) {
      // Reduce m n mod q before scaling so large q keeps full precision.
      const auto mn = static_cast<double>((m * n) % q);
      acc += c(m) * std::polar(1.0, sign * units::kTwoPi * mn / static_cast<double>(q));
    }
    out(n) = scale * acc;
  }
  return out;
}

namespace {

/// <bra| on `factor`, identity elsewhere; returns the vector over the rest.
std::pair<CompositeSpace, Vector> contract(const StateVector& joint, std::size_t factor,
                                           const Vector& bra) {
  const auto& space = joint.space();
  if (factor >= space.size()) throw DimensionError("projection: factor out of range");
  if (space.size() < 2) throw PreconditionError("projection: nothing would remain");
  std::vector<hilbert::Factor> rest;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (i != factor) rest.push_back(space.factor(i));
  CompositeSpace out_space(rest);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(out_space.dim()));
  const auto& v = joint.amplitudes();
  std::vector<std::size_t> occ_rest(rest.size());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const cplx a = v(static_cast<Eigen::Index>(i));
    if (a == cplx(0.0)) continue;
    const auto occ = space.occupations(i);
    const cplx w = std::conj(bra(static_cast<Eigen::Index>(occ[factor])));
    if (w == cplx(0.0)) continue;
    for (std::size_t f = 0, j = 0; f < occ.size(); ++f)
      if (f != factor) occ_rest[j++] = occ[f];
    out(static_cast<Eigen::Index>(out_space.index_of(occ_rest))) += w * a;
  }
  return {std::move(out_space), std::move(out)};
}

Projection finish(std::pair<CompositeSpace, Vector> c) {
  Projection p;
  p.probability = c.second.squaredNorm();
  if (p.probability > 0.0)
    p.remainder = StateVector::normalized(std::move(c.first), std::move(c.second));
  return p;
}

}  // namespace

Projection project_uniform(const StateVector& joint, std::size_t factor, std::size_t q) {
  const std::size_t dim = joint.space().factor_dim(factor);
  if (q == 0) q = dim;
  if (q > dim) throw DimensionError("project_uniform: q exceeds the factor dimension");
  Vector bra = Vector::Zero(static_cast<Eigen::Index>(dim));
  bra.head(static_cast<Eigen::Index>(q)).setConstant(1.0 / std::sqrt(static_cast<double>(q)));
  return finish(contract(joint, factor, bra));
}

Projection project_vacuum(const StateVector& joint, std::size_t factor) {
  Vector bra = Vector::Zero(static_cast<Eigen::Index>(joint.space().factor_dim(factor)));
  bra(0) = 1.0;
  return finish(contract(joint, factor, bra));
}

QftResult run_qft(const StateVector& a_state, const KerrConfig& config, std::size_t q) {
  const auto& space = a_state.space();
  if (space.size() != 1 || space.find(FockRole::ResonatorA) != 0)
    throw PreconditionError("run_qft: expects a state over resonator A alone");
  if (q == 0) q = space.dim();
  const double tau = qft_duration(q, config);
  StateVector joint = hilbert::tensor(a_state, prepare_uniform_B(q));
  joint = kerr_evolve(joint, config.chi, tau);
  auto proj = project_uniform(joint, 0, q);
  if (!proj.remainder) throw Error("run_qft: zero-probability projection");
  return {std::move(*proj.remainder), proj.probability, std::move(joint)};
}

DisentangleResult physical_disentangle(const StateVector& joint,
                                       const transfer::TransferEngine& engine) {
  const auto& plan = engine.plan();
  const auto& space = joint.space();
  const std::size_t ia = space.find(FockRole::ResonatorA);
  const std::size_t ib = space.find(FockRole::ResonatorB);
  (void)ia;
  (void)ib;

  StateVector full = joint;
  bool has_register = false;
  for (const auto& f : space.factors())
    if (std::holds_alternative<hilbert::QubitRegister>(f)) has_register = true;
  if (!has_register) {
    auto factors = space.factors();
    factors.push_back(hilbert::QubitRegister{plan.n});
    CompositeSpace ext(factors);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(ext.dim()));
    const std::size_t q = std::size_t{1} << plan.n;
    for (Eigen::Index i = 0; i < joint.amplitudes().size(); ++i)
      v(i * static_cast<Eigen::Index>(q)) = joint.amplitudes()(i);
    full = StateVector::normalized(std::move(ext), std::move(v));
  }

  auto back = transfer::inverse_transfer(full, engine, transfer::InverseMode::Physical);
  const std::size_t ir = back.state.space().find_register();
  auto qubits = project_uniform(back.state, ir);
  if (!qubits.remainder) throw Error("physical_disentangle: zero-probability qubit outcome");

  const auto& rest = *qubits.remainder;
  const std::size_t ra = rest.space().find(FockRole::ResonatorA);
  const std::size_t rb = rest.space().find(FockRole::ResonatorB);
  const std::size_t keep[] = {rb};
  DensityMatrix rho_b = hilbert::partial_trace(rest, keep);
  auto vac = project_vacuum(rest, ra);
  if (!vac.remainder) throw Error("physical_disentangle: resonator A left empty of vacuum");
  return {std::move(*vac.remainder), qubits.probability, vac.probability, std::move(rho_b)};
}

double WignerGrid::integral() const {
  if (x.size() < 2 || p.size() < 2) return 0.0;
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  const double dp = (p.back() - p.front()) / static_cast<double>(p.size() - 1);
  return w.sum() * dx * dp;
}

double wigner_point(const Matrix& rho, cplx alpha) {
  const auto d = rho.rows();
  const cplx beta = 2.0 * alpha;
  const double b2 = std::norm(beta);
  const double gauss = std::exp(-0.5 * b2);
  cplx acc = 0.0;
  for (Eigen::Index m = 0; m < d; ++m) {
    const double parity = (m % 2 == 0) ? 1.0 : -1.0;
    for (Eigen::Index n = 0; n < d; ++n) {
      const cplx r = rho(m, n);
      if (r == cplx(0.0)) continue;
      // <n|D(beta)|m>
      cplx elem;
      const auto lo = static_cast<unsigned>(std::min(m, n));
      const auto diff = static_cast<unsigned>(std::abs(n - m));
      const double ratio = std::exp(0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + diff + 1.0)));
      const double lag = std::assoc_laguerre(lo, diff, b2);
      if (n >= m)
        elem = ratio * std::pow(beta, static_cast<int>(diff)) * gauss * lag;
      else
        elem = ratio * std::pow(-std::conj(beta), static_cast<int>(diff)) * gauss * lag;
      acc += r * parity * elem;
    }
  }
  return 2.0 / units::kPi * acc.real();
}

WignerGrid wigner_grid(const DensityMatrix& rho, const WignerOptions& o) {
  if (rho.space().size() != 1 || !std::holds_alternative<FockSpace>(rho.space().factor(0)))
    throw PreconditionError("wigner_grid: needs a single Fock factor");
  if (o.nx < 2 || o.np < 2 || !(o.x_max > o.x_min) || !(o.p_max > o.p_min))
    throw PreconditionError("wigner_grid: invalid grid");
  WignerGrid g;
  const auto d = rho.matrix().rows();
  double top = 0.0;
  for (Eigen::Index m = std::max<Eigen::Index>(0, d - 2); m < d; ++m) top += rho.matrix()(m, m).real();
  if (top > 1e-4) {
    std::ostringstream os;
    os << "truncation: population " << top << " in the top two Fock levels";
    g.warnings.push_back(os.str());
  }
  for (std::size_t i = 0; i < o.nx; ++i)
    g.x.push_back(o.x_min + (o.x_max - o.x_min) * static_cast<double>(i) / static_cast<double>(o.nx - 1));
  for (std::size_t i = 0; i < o.np; ++i)
    g.p.push_back(o.p_min + (o.p_max - o.p_min) * static_cast<double>(i) / static_cast<double>(o.np - 1));
  g.w.resize(static_cast<Eigen::Index>(o.np), static_cast<Eigen::Index>(o.nx));
  for (std::size_t ip = 0; ip < o.np; ++ip)
    for (std::size_t ix = 0; ix < o.nx; ++ix)
      g.w(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(ix)) =
          wigner_point(rho.matrix(), cplx(g.x[ix], g.p[ip]));
  return g;
}

std::string wigner_csv(const WignerGrid& g) {
  std::ostringstream os;
  os.precision(10);
  os << "x,p,wigner\n";
  for (std::size_t ip = 0; ip < g.p.size(); ++ip)
    for (std::size_t ix = 0; ix < g.x.size(); ++ix)
      os << g.x[ix] << ',' << g.p[ip] << ','
         << g.w(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(ix)) << '\n';
  return os.str();
}

nlohmann::ordered_json to_json(const QftResult& r) {
  nlohmann::ordered_json j;
  j["probability"] = r.probability;
  auto& amps = j["b_amplitudes"] = nlohmann::ordered_json::array();
  const auto& v = r.b_state.amplitudes();
  for (Eigen::Index n = 0; n < v.size(); ++n)
    amps.push_back({{"n", n}, {"re", v(n).real()}, {"im", v(n).imag()}});
  return j;
}

}  // namespace oqft::kerr
