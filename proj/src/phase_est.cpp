#include "oqft/phase_est.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oqft/exceptions.hpp"
#include "oqft/units.hpp"

namespace oqft::phase_est {

using hilbert::CompositeSpace;
using hilbert::cplx;
using hilbert::FockRole;
using hilbert::FockSpace;
using hilbert::Vector;
using units::kTwoPi;

namespace {

double reduce(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

StateVector ancilla(double phase) {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), phase);
  return StateVector(CompositeSpace({hilbert::QubitRegister{1}}), std::move(v));
}

}  // namespace

StateVector build_phase_state(double theta, std::size_t q, std::size_t dim) {
  if (q < 2) throw PreconditionError("build_phase_state: q must be >= 2");
  if (dim == 0) dim = q;
  if (dim < q) throw DimensionError("build_phase_state: A smaller than q");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  const double s = 1.0 / std::sqrt(static_cast<double>(q));
  const double t = reduce(theta);
  for (std::size_t m = 0; m < q; ++m)
    v(static_cast<Eigen::Index>(m)) = std::polar(s, std::fmod(static_cast<double>(m) * t, kTwoPi));
  return StateVector::normalized(CompositeSpace({FockSpace{dim, FockRole::ResonatorA}}), std::move(v));
}

StateVector ancilla_map_step(const StateVector& joint, std::size_t k,
                             const transfer::TransferEngine& engine) {
  const auto& plan = engine.plan();
  const auto& space = joint.space();
  const std::size_t ia = space.find(FockRole::ResonatorA);
  const std::size_t ir = space.find_register();
  if (std::get<hilbert::QubitRegister>(space.factor(ir)).n != 1)
    throw DimensionError("ancilla_map_step: expects a single ancilla qubit");
  if (space.factor_dim(ia) != plan.fock_dim)
    throw DimensionError("ancilla_map_step: resonator A dimension differs from the plan");

  std::size_t index = plan.steps.size();
  for (std::size_t i = 0; i < plan.steps.size(); ++i)
    if (plan.steps[i].k == k) index = i;
  if (index == plan.steps.size()) throw DimensionError("ancilla_map_step: k out of range");

  const auto& occ = plan.steps[index].occupied.photons;
  const auto [sa, da] = space.axis_layout({ia, -1});
  const auto [sr, dr] = space.axis_layout({ir, 0});
  double outside = 0.0;
  std::size_t worst = 0;
  double worst_w = 0.0;
  for (Eigen::Index i = 0; i < joint.amplitudes().size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if ((idx / sr) % dr != 1) continue;
    const std::size_t m = (idx / sa) % da;
    if (std::binary_search(occ.begin(), occ.end(), m)) continue;
    const double w = std::norm(joint.amplitudes()(i));
    outside += w;
    if (w > worst_w) worst_w = w, worst = m;
  }
  if (outside > kSupportTolerance) {
    std::ostringstream os;
    os << "ancilla_map_step: excited ancilla with " << worst << " photons is outside the step-" << k
       << " support (weight " << outside << ")";
    throw DimensionError(os.str());
  }
  const hilbert::Axis axes[] = {{ia, -1}, {ir, 0}};
  Vector v = hilbert::apply_local(space, joint.amplitudes(), axes, engine.forward(index));
  return StateVector::normalized(space, std::move(v));
}

MappedPhaseState build_phase_state_mapped(double theta, const transfer::TransferEngine& engine) {
  const auto& plan = engine.plan();
  const std::size_t q = std::size_t{1} << plan.n;
  CompositeSpace a_space({FockSpace{plan.fock_dim, FockRole::ResonatorA}});
  StateVector a = hilbert::basis_state(a_space, {0});
  double residual = 0.0;
  const double t = reduce(theta);
  for (const auto& step : plan.steps) {
    const double phase = std::fmod(std::ldexp(t, static_cast<int>(step.k)), kTwoPi);
    StateVector joint = hilbert::tensor(a, ancilla(phase));
    joint = ancilla_map_step(joint, step.k, engine);
    auto kept = kerr::project_vacuum(joint, 1);
    if (!kept.remainder) throw Error("build_phase_state_mapped: ancilla never returned to ground");
    residual += 1.0 - kept.probability;
    a = std::move(*kept.remainder);
  }
  const StateVector ideal = build_phase_state(theta, q, plan.fock_dim);
  const double fid = hilbert::overlap_fidelity(ideal, a);
  return {std::move(a), fid, residual};
}

double outcome_probability(double theta, std::size_t q, std::size_t n_hat) {
  const double d = reduce(theta) - kTwoPi * static_cast<double>(n_hat) / static_cast<double>(q);
  cplx acc = 0.0;
  for (std::size_t m = 0; m < q; ++m) acc += std::polar(1.0, static_cast<double>(m) * d);
  return std::norm(acc) / static_cast<double>(q * q);
}

EstimateResult run_phase_estimation(const PhaseScenario& sc, kerr::KerrConfig kc,
                                    const transfer::TransferEngine* engine) {
  if (sc.n == 0 || sc.n > 12) throw PreconditionError("run_phase_estimation: n out of range");
  const std::size_t q = std::size_t{1} << sc.n;
  EstimateResult r;
  r.theta = reduce(sc.theta);
  r.q = q;

  StateVector a = build_phase_state(r.theta, q);
  if (sc.mode == Mode::Physical) {
    if (!engine) throw PreconditionError("run_phase_estimation: physical mode needs a transfer engine");
    if (engine->plan().n != sc.n) throw DimensionError("run_phase_estimation: engine built for another n");
    a = build_phase_state_mapped(r.theta, *engine).state;
  }

  kc.direction = kerr::Direction::Inverse;
  const double tau2 = kerr::qft_duration(q, kc);
  StateVector joint = hilbert::tensor(a, kerr::prepare_uniform_B(q));
  joint = kerr::kerr_evolve(joint, kc.chi, tau2);
  auto proj = kerr::project_uniform(joint, 0, q);
  if (!proj.remainder) throw Error("run_phase_estimation: zero-probability projection");
  r.probability = proj.probability;

  const auto& b = proj.remainder->amplitudes();
  r.distribution.resize(q);
  for (std::size_t n = 0; n < q; ++n) r.distribution[n] = std::norm(b(static_cast<Eigen::Index>(n)));
  r.modal = static_cast<std::size_t>(
      std::max_element(r.distribution.begin(), r.distribution.end()) - r.distribution.begin());
  r.theta_hat = kTwoPi * static_cast<double>(r.modal) / static_cast<double>(q);
  const double d = std::abs(r.theta_hat - r.theta);
  r.error = std::min(d, kTwoPi - d);

  if (sc.trials > 0) {
    std::mt19937_64 rng(sc.seed);
    std::discrete_distribution<std::size_t> pick(r.distribution.begin(), r.distribution.end());
    r.counts.assign(q, 0);
    for (std::size_t i = 0; i < sc.trials; ++i) ++r.counts[pick(rng)];
  }
  return r;
}

ResourceComparison resource_counts(std::size_t n) {
  if (n == 0) throw PreconditionError("resource_counts: n must be >= 1");
  ResourceComparison rc;
  rc.n = n;

  auto& c = rc.conventional;
  c.approach = "conventional";
  c.hadamard = 2 * n;
  c.two_qubit = n * (n - 1) / 2;
  c.measurements = n;
  c.controlled_u = n;
  c.ancilla_qubits = n;
  c.total = c.hadamard + c.two_qubit + c.measurements + c.controlled_u;

  auto& r = rc.recycling;
  r.approach = "recycling";
  r.hadamard = 2 * n;
  r.measurements = n;
  r.phase_gates = n - 1;
  r.resets = n - 1;
  r.controlled_u = n;
  r.ancilla_qubits = 1;
  r.total = r.hadamard + r.measurements + r.phase_gates + r.resets + r.controlled_u;

  auto& o = rc.oscillator;
  o.approach = "oscillator";
  o.hadamard = n;
  o.transfers = 2 * n;
  o.measurements = n;
  o.photon_measurements = 1;
  o.controlled_u = n;
  o.ancilla_qubits = 1;
  o.resonators = 2;
  o.total = o.hadamard + o.transfers + o.measurements + o.photon_measurements + o.controlled_u;
  return rc;
}

std::string resources_csv(const std::vector<ResourceComparison>& rows) {
  std::ostringstream os;
  os << "n,approach,hadamard_count,two_qubit_count,measurement_count,controlled_u_count,"
        "phase_gate_count,reset_count,transfer_count,photon_measurement_count,total_ops,"
        "ancilla_qubits,resonators\n";
  for (const auto& row : rows) {
    for (const auto* a : {&row.conventional, &row.recycling, &row.oscillator}) {
      os << row.n << ',' << a->approach << ',' << a->hadamard << ',' << a->two_qubit << ','
         << a->measurements << ',' << a->controlled_u << ',' << a->phase_gates << ',' << a->resets
         << ',' << a->transfers << ',' << a->photon_measurements << ',' << a->total << ','
         << a->ancilla_qubits << ',' << a->resonators << '\n';
    }
  }
  return os.str();
}

nlohmann::ordered_json to_json(const EstimateResult& r) {
  nlohmann::ordered_json j;
  j["theta_rad"] = r.theta;
  j["q"] = r.q;
  j["theta_hat_rad"] = r.theta_hat;
  j["modal_outcome"] = r.modal;
  j["circular_error_rad"] = r.error;
  j["postselection_probability"] = r.probability;
  auto& d = j["distribution"] = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < r.distribution.size(); ++n) {
    nlohmann::ordered_json e{{"n_hat", n}, {"probability", r.distribution[n]}};
    if (!r.counts.empty()) e["counts"] = r.counts[n];
    d.push_back(std::move(e));
  }
  return j;
}

}  // namespace oqft::phase_est
