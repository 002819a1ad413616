#include "oqft/transfer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "oqft/exceptions.hpp"

namespace oqft::transfer {

using dynamics::DressDirection;
using hilbert::Axis;
using hilbert::cplx;
using hilbert::Vector;

namespace {

std::size_t bare(std::size_t a, std::size_t q) { return 2 * a + q; }

struct Layout {
  std::size_t a;    // factor index of resonator A
  std::size_t reg;  // factor index of the register
  std::size_t n;
  std::size_t fock_dim;
};

Layout layout_of(const hilbert::CompositeSpace& space) {
  Layout l{};
  l.a = space.find(hilbert::FockRole::ResonatorA);
  l.reg = space.find_register();
  l.n = std::get<hilbert::QubitRegister>(space.factor(l.reg)).n;
  l.fock_dim = space.factor_dim(l.a);
  return l;
}

std::array<Axis, 2> pair_axes(const Layout& l, std::size_t k) {
  return {Axis{l.a, -1}, Axis{l.reg, static_cast<int>(k)}};
}

Vector apply_pair(const hilbert::CompositeSpace& space, const Vector& v, const Layout& l,
                  std::size_t k, const Matrix& op) {
  const auto axes = pair_axes(l, k);
  return hilbert::apply_local(space, v, axes, op);
}

double overlap(const Vector& a, const Vector& b) { return std::norm(a.dot(b)); }

Matrix frame(std::size_t fock_dim, const std::vector<double>& phi) {
  Matrix d = Matrix::Zero(2 * fock_dim, 2 * fock_dim);
  for (std::size_t a = 0; a < fock_dim; ++a) {
    const cplx c = std::polar(1.0, -phi[a]);
    d(bare(a, 0), bare(a, 0)) = c;
    d(bare(a, 1), bare(a, 1)) = c;
  }
  return d;
}

}  // namespace

const StepPlan& TransferPlan::step_for(std::size_t k) const {
  for (const auto& s : steps)
    if (s.k == k) return s;
  throw DimensionError("plan has no step k=" + std::to_string(k));
}

std::size_t bits_to_fock(std::string_view bits) { return hilbert::register_value(bits); }

TransferPlan build_plan(std::size_t n, const std::vector<double>& omegas,
                        const dynamics::DeviceParams& params, const PlanOptions& options) {
  if (n == 0) throw PreconditionError("build_plan: n must be >= 1");
  if (n > 12) throw PreconditionError("build_plan: n > 12 is beyond dense simulation");
  if (omegas.size() != 1 && omegas.size() != n)
    throw PreconditionError("build_plan: give one Omega or one per step");
  if (options.fock_pad < 2)
    throw PreconditionError("build_plan: fock_pad must be >= 2 (the k=0 chain reaches 2^n)");
  params.validate(n);

  TransferPlan plan;
  plan.n = n;
  plan.fock_dim = (std::size_t{1} << n) + options.fock_pad;
  plan.params = params;
  plan.options = options;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = n - 1 - i;
    StepPlan s;
    s.k = k;
    s.omega = omegas.size() == 1 ? omegas[0] : omegas[i];
    if (!(s.omega > 0.0)) throw PreconditionError("build_plan: Omega must be > 0");
    s.occupied = drives::occupied_photon_numbers(n, k);
    s.pulse = drives::synthesize_drive(s.occupied, s.omega, params, options.synthesis);
    plan.tau1 += s.pulse.duration + 2.0 * params.tau_ad;
    plan.steps.push_back(std::move(s));
  }
  return plan;
}

Matrix ideal_step_unitary(std::size_t k, std::size_t n, std::size_t fock_dim) {
  if (k >= n) throw DimensionError("ideal_step_unitary: k out of range");
  if (fock_dim == 0) fock_dim = std::size_t{1} << n;
  if (fock_dim < (std::size_t{1} << n)) throw DimensionError("ideal_step_unitary: A too small");
  Matrix u = Matrix::Identity(2 * fock_dim, 2 * fock_dim);
  const std::size_t shift = std::size_t{1} << k;
  for (std::size_t m : drives::occupied_photon_numbers(n, k).photons) {
    const auto src = bare(m, 1), dst = bare(m + shift, 0);
    u(src, src) = 0.0;
    u(dst, dst) = 0.0;
    u(dst, src) = 1.0;
    u(src, dst) = 1.0;
  }
  return u;
}

namespace {

struct Dressing {
  dynamics::DressedBasis basis;
  Matrix in;   // bare pair -> physical dressed state
  Matrix out;  // physical -> bare pair
  std::optional<dynamics::PropagationReport> in_report, out_report;
};

Dressing make_dressing(const TransferPlan& plan, const StepPlan& step) {
  const auto& p = plan.params;
  Dressing d{dynamics::DressedBasis(plan.fock_dim, p.omega_A, p.coupling(step.k)), {}, {}, {}, {}};
  const auto mode = plan.options.dressing;
  const auto& cfg = plan.options.propagation;
  dynamics::PropagationReport r_in, r_out;
  d.in = dynamics::dressing_unitary(d.basis, DressDirection::BareToDressed, mode, p, cfg, &r_in);
  d.out = dynamics::dressing_unitary(d.basis, DressDirection::DressedToBare, mode, p, cfg, &r_out);
  if (mode == dynamics::DressingMode::Ramp) {
    d.in_report = r_in;
    d.out_report = r_out;
  }
  return d;
}

}  // namespace

PhaseTable step_phases(const StepPlan& step, std::size_t fock_dim, const Matrix& raw) {
  PhaseTable ph;
  ph.stay.assign(fock_dim, 0.0);
  ph.forward.assign(fock_dim, 0.0);
  ph.backward.assign(fock_dim, 0.0);
  const std::size_t shift = std::size_t{1} << step.k;
  for (std::size_t m : step.occupied.photons) {
    ph.stay[m] = std::arg(raw(bare(m, 0), bare(m, 0)));
    ph.forward[m + shift] = std::arg(raw(bare(m + shift, 0), bare(m, 1)));
    ph.backward[m + shift] = std::arg(raw(bare(m, 1), bare(m + shift, 0)));
  }
  return ph;
}

Matrix forward_frame(const StepPlan& step, std::size_t fock_dim, const PhaseTable& ph) {
  std::vector<double> phi(fock_dim, 0.0);
  const std::size_t shift = std::size_t{1} << step.k;
  for (std::size_t m : step.occupied.photons) {
    phi[m] = ph.stay[m];
    phi[m + shift] = ph.forward[m + shift];
  }
  return frame(fock_dim, phi);
}

Matrix backward_frame(const StepPlan& step, std::size_t fock_dim, const PhaseTable& ph) {
  std::vector<double> phi(fock_dim, 0.0);
  const std::size_t shift = std::size_t{1} << step.k;
  for (std::size_t m : step.occupied.photons) {
    phi[m] = ph.stay[m];
    phi[m + shift] = ph.backward[m + shift];
  }
  return frame(fock_dim, phi);
}

std::vector<Matrix> propagate_step(const TransferPlan& plan, std::size_t index,
                                   const std::vector<double>& durations) {
  const auto& step = plan.steps.at(index);
  auto dress = make_dressing(plan, step);
  dynamics::DriveHamiltonian h(dress.basis, step.pulse, plan.options.quadrature);
  std::vector<double> sorted = durations;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() < 0.0)
    throw PreconditionError("propagate_step: need non-negative durations");

  const auto N = static_cast<Eigen::Index>(dress.basis.dim());
  const Matrix& T = dress.basis.transform();
  std::map<double, Matrix> at;
  auto observe = [&](double t, const dynamics::RowMatrix& y) {
    at.emplace(t, dress.out * T * Matrix(y) * T.adjoint() * dress.in);
  };
  dynamics::propagate_columns(dynamics::RowMatrix::Identity(N, N), h, sorted.back(),
                              plan.options.propagation, sorted, observe);
  std::vector<Matrix> out;
  for (double t : durations) out.push_back(at.at(t));
  return out;
}

TransferEngine::TransferEngine(TransferPlan plan, Backend backend)
    : plan_(std::move(plan)), backend_(backend), cache_(plan_.steps.size()) {
  for (const auto& s : plan_.steps) ideal_.push_back(ideal_step_unitary(s.k, plan_.n, plan_.fock_dim));
}

const StepPropagation& TransferEngine::propagation(std::size_t index) const {
  if (backend_ == Backend::Ideal)
    throw PreconditionError("TransferEngine: the ideal backend has no propagation");
  auto& slot = cache_.at(index);
  if (slot) return *slot;

  const auto& step = plan_.steps[index];
  const std::size_t D = plan_.fock_dim;
  auto dress = make_dressing(plan_, step);
  dynamics::DriveHamiltonian h(dress.basis, step.pulse, plan_.options.quadrature);
  const auto N = static_cast<Eigen::Index>(dress.basis.dim());
  const Matrix& T = dress.basis.transform();
  const Matrix& P = dress.basis.label_map();
  const Matrix lift = T.adjoint() * dress.in;

  auto sp = std::make_unique<StepPropagation>();
  const double tau = step.pulse.duration;
  const std::size_t ns = plan_.options.samples;
  for (std::size_t i = 0; i < ns; ++i)
    sp->sample_times.push_back(ns == 1 ? tau : tau * static_cast<double>(i) / static_cast<double>(ns - 1));
  auto observe = [&](double, const dynamics::RowMatrix& y) {
    sp->samples.push_back(P.adjoint() * Matrix(y) * lift);
  };
  auto prop = dynamics::propagate_columns(dynamics::RowMatrix::Identity(N, N), h, tau,
                                          plan_.options.propagation, sp->sample_times, observe);
  sp->report = prop.report;
  sp->ramp_in = dress.in_report;
  sp->ramp_out = dress.out_report;
  sp->raw = dress.out * T * Matrix(prop.columns) * lift;

  sp->phases = step_phases(step, D, sp->raw);
  if (plan_.options.phase_correction) {
    sp->forward = forward_frame(step, D, sp->phases) * sp->raw;
    sp->backward = sp->raw * backward_frame(step, D, sp->phases);
  } else {
    sp->forward = sp->raw;
    sp->backward = sp->raw;
  }
  slot = std::move(sp);
  return *slot;
}

const Matrix& TransferEngine::forward(std::size_t index) const {
  if (backend_ == Backend::Ideal) return ideal_.at(index);
  return propagation(index).forward;
}

const Matrix& TransferEngine::backward(std::size_t index) const {
  if (backend_ == Backend::Ideal) return ideal_.at(index);
  return propagation(index).backward;
}

namespace {

void check_space(const hilbert::CompositeSpace& space, const TransferPlan& plan, const Layout& l) {
  if (l.n != plan.n)
    throw DimensionError("transfer: register has " + std::to_string(l.n) + " qubits, plan has " +
                         std::to_string(plan.n));
  if (l.fock_dim != plan.fock_dim)
    throw DimensionError("transfer: resonator A has dimension " + std::to_string(l.fock_dim) +
                         ", plan expects " + std::to_string(plan.fock_dim));
  (void)space;
}

double fock_population_at_least(const hilbert::CompositeSpace& space, const Vector& v,
                                std::size_t axis, std::size_t from) {
  const auto [stride, dim] = space.axis_layout(Axis{axis, -1});
  double w = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if ((static_cast<std::size_t>(i) / stride) % dim >= from) w += std::norm(v(i));
  return w;
}

}  // namespace

StateVector ideal_transfer(const StateVector& initial, std::size_t n) {
  const auto& space = initial.space();
  const Layout l = layout_of(space);
  if (l.n != n) throw DimensionError("ideal_transfer: register size mismatch");
  Vector v = initial.amplitudes();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = n - 1 - i;
    v = apply_pair(space, v, l, k, ideal_step_unitary(k, n, l.fock_dim));
  }
  return StateVector::normalized(space, std::move(v));
}

TransferResult execute_transfer(const StateVector& initial, const TransferEngine& engine) {
  const auto& plan = engine.plan();
  const auto& space = initial.space();
  const Layout l = layout_of(space);
  check_space(space, plan, l);
  if (fock_population_at_least(space, initial.amplitudes(), l.a, 1) > 1e-12)
    throw PreconditionError("execute_transfer: resonator A must start in vacuum");

  Vector ideal = initial.amplitudes();
  Vector actual = initial.amplitudes();
  std::vector<StepReport> reports;
  const auto [qstride, qdim] = space.axis_layout(Axis{l.reg, -1});
  (void)qdim;

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    StepReport rep;
    rep.k = step.k;
    const Vector ideal_out =
        apply_pair(space, ideal, l, step.k, ideal_step_unitary(step.k, plan.n, plan.fock_dim));
    if (engine.backend() == Backend::Dynamical) {
      const auto& sp = engine.propagation(i);
      rep.fidelity = overlap(ideal_out, apply_pair(space, ideal, l, step.k, sp.forward));
      rep.raw_fidelity = overlap(ideal_out, apply_pair(space, ideal, l, step.k, sp.raw));
      rep.propagation = sp.report;

      std::vector<Vector> snaps;
      snaps.reserve(sp.samples.size());
      std::vector<double> peak(static_cast<std::size_t>(actual.size()), 0.0);
      for (const auto& u : sp.samples) {
        Vector s = apply_pair(space, actual, l, step.k, u);
        rep.leakage = std::max(rep.leakage,
                               fock_population_at_least(space, s, l.a, plan.fock_dim - 2));
        for (Eigen::Index j = 0; j < s.size(); ++j)
          peak[static_cast<std::size_t>(j)] = std::max(peak[static_cast<std::size_t>(j)], std::norm(s(j)));
        snaps.push_back(std::move(s));
      }
      for (std::size_t j = 0; j < peak.size(); ++j) {
        if (peak[j] < 1e-3) continue;
        const std::string label = space.basis_label(j);
        for (std::size_t s = 0; s < snaps.size(); ++s)
          rep.series.push_back({sp.sample_times[s], label, std::norm(snaps[s](static_cast<Eigen::Index>(j)))});
      }
      std::stable_sort(rep.series.begin(), rep.series.end(),
                       [](const PopulationSample& a, const PopulationSample& b) { return a.t_us < b.t_us; });
      actual = apply_pair(space, actual, l, step.k, sp.forward);
    } else {
      actual = ideal_out;
    }
    actual.normalize();
    ideal = ideal_out;
    rep.cumulative_fidelity = overlap(ideal, actual);
    double exc = 0.0;
    for (Eigen::Index j = 0; j < actual.size(); ++j)
      if (((static_cast<std::size_t>(j) / qstride) >> step.k) & 1U) exc += std::norm(actual(j));
    rep.qubit_excitation = exc;
    reports.push_back(std::move(rep));
  }
  return {StateVector::normalized(space, std::move(actual)), std::move(reports)};
}

TransferResult execute_transfer(const StateVector& initial, const TransferPlan& plan,
                                Backend backend) {
  TransferEngine engine(plan, backend);
  return execute_transfer(initial, engine);
}

InverseResult inverse_transfer(const StateVector& state, const TransferEngine& engine,
                               InverseMode mode) {
  const auto& plan = engine.plan();
  const auto& space = state.space();
  const Layout l = layout_of(space);
  check_space(space, plan, l);

  Vector v = state.amplitudes();
  std::vector<PhaseMismatch> mismatches;
  for (std::size_t i = plan.steps.size(); i-- > 0;) {
    const auto& step = plan.steps[i];
    if (mode == InverseMode::RecordedAdjoint) {
      v = apply_pair(space, v, l, step.k, engine.forward(i).adjoint());
      continue;
    }
    v = apply_pair(space, v, l, step.k, engine.backward(i));
    if (engine.backend() != Backend::Dynamical) continue;
    // Raw phases of the reverse map; the phase frame removes them when enabled.
    const auto& ph = engine.propagation(i).phases;
    const std::size_t shift = std::size_t{1} << step.k;
    for (std::size_t m : step.occupied.photons) {
      if (std::abs(ph.stay[m]) > 1e-6)
        mismatches.push_back({step.k, "|" + std::to_string(m) + ">_A|0>", ph.stay[m]});
      if (std::abs(ph.backward[m + shift]) > 1e-6)
        mismatches.push_back({step.k, "|" + std::to_string(m + shift) + ">_A|0> -> |" +
                                          std::to_string(m) + ">_A|1>",
                              ph.backward[m + shift]});
    }
  }
  return {StateVector::normalized(space, std::move(v)), std::move(mismatches)};
}

std::string series_csv(const std::vector<StepReport>& reports) {
  std::ostringstream os;
  os.precision(10);
  os << "k,t_us,basis_label,population\n";
  for (const auto& r : reports)
    for (const auto& s : r.series) os << r.k << ',' << s.t_us << ',' << s.label << ',' << s.population << '\n';
  return os.str();
}

std::string step_table_csv(const std::vector<StepReport>& reports) {
  std::ostringstream os;
  os.precision(10);
  os << "k,fidelity,raw_fidelity,cumulative_fidelity,leakage,qubit_excitation\n";
  for (const auto& r : reports)
    os << r.k << ',' << r.fidelity << ',' << r.raw_fidelity << ',' << r.cumulative_fidelity << ','
       << r.leakage << ',' << r.qubit_excitation << '\n';
  return os.str();
}

nlohmann::ordered_json to_json(const TransferPlan& plan) {
  nlohmann::ordered_json j;
  j["n"] = plan.n;
  j["fock_dim"] = plan.fock_dim;
  j["dressing"] = plan.options.dressing == dynamics::DressingMode::Ideal ? "ideal" : "ramp";
  j["quadrature"] = plan.options.quadrature == dynamics::Quadrature::SigmaY ? "sigma_y" : "sigma_x";
  j["phase_correction"] = plan.options.phase_correction;
  j["tau1_us"] = plan.tau1;
  auto& steps = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : plan.steps) {
    nlohmann::ordered_json e;
    e["k"] = s.k;
    e["occupied"] = s.occupied.photons;
    e["omega_rad_per_us"] = s.omega;
    e["pulse"] = drives::to_json(s.pulse);
    steps.push_back(std::move(e));
  }
  return j;
}

nlohmann::ordered_json to_json(const StepReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["fidelity"] = r.fidelity;
  j["raw_fidelity"] = r.raw_fidelity;
  j["cumulative_fidelity"] = r.cumulative_fidelity;
  j["leakage"] = r.leakage;
  j["qubit_excitation"] = r.qubit_excitation;
  if (r.propagation) {
    auto p = dynamics::to_json(*r.propagation);
    p.erase("wall_seconds");
    j["propagation"] = std::move(p);
  }
  return j;
}

}  // namespace oqft::transfer
