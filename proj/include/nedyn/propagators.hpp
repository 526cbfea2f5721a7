#pragma once

// Time evolution under H(t) = alpha(t) H_L + beta(t) H_M + gamma(t) H_R.
//
// Three propagators share one driver:
//  * trotter1 - first-order product of single-string exponentials with
//    coefficients frozen at the step midpoint;
//  * rk4      - classical Runge-Kutta on i d/dt psi = H(t) psi, renormalized
//    after every step with the pre-renormalization norm kept;
//  * exact    - dense exponential of the midpoint Hamiltonian.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/hamiltonian.hpp"
#include "nedyn/observables.hpp"
#include "nedyn/pauli.hpp"

namespace nedyn {

enum class Propagator { trotter1, rk4, exact };

inline const char* to_string(Propagator p) {
  switch (p) {
    case Propagator::trotter1: return "trotter1";
    case Propagator::rk4: return "rk4";
    default: return "exact";
  }
}

/// Union of the strings of H_L, H_M and H_R in lexicographic order with
/// one real coefficient per input Hamiltonian. Fixed for a whole run; this is
/// the factor order of every Trotter step.
class MixedTermTable {
 public:
  MixedTermTable(const PauliSum& h_l, const PauliSum& h_m, const PauliSum& h_r) : n_(h_l.num_qubits()) {
    if (h_m.num_qubits() != n_ || h_r.num_qubits() != n_) throw DimensionError("Hamiltonians act on different registers");
    for (const auto* h : {&h_l, &h_m, &h_r}) {
      if (!h->is_hermitian()) throw ContractError("propagation requires Hermitian Hamiltonians");
    }
    const PauliSum all = union_of(h_l, h_m, h_r);
    for (const auto& t : all) {
      strings_.push_back(t.letters());
      coefficients_.push_back({h_l.coefficient_of(t.letters()).real(), h_m.coefficient_of(t.letters()).real(),
                               h_r.coefficient_of(t.letters()).real()});
    }
  }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return strings_.size(); }
  const std::vector<PauliString>& strings() const noexcept { return strings_; }

  double coefficient(std::size_t k, const ScheduleWeights& w) const noexcept {
    const auto& c = coefficients_[k];
    return w.alpha * c[0] + w.beta * c[1] + w.gamma * c[2];
  }

 private:
  // Unit markers, so every string present in any input survives pruning.
  static PauliSum union_of(const PauliSum& a, const PauliSum& b, const PauliSum& c) {
    std::vector<PauliTerm> marks;
    for (const auto* h : {&a, &b, &c})
      for (const auto& t : *h) marks.emplace_back(t.num_qubits(), t.letters(), 1.0);
    return PauliSum(a.num_qubits(), marks);
  }

  std::size_t n_;
  std::vector<PauliString> strings_;
  std::vector<std::array<double, 3>> coefficients_;
};

/// One first-order Suzuki step in place: prod_k exp(-i h_k(t_mid) P_k dt).
inline void trotter_step_inplace(StateVector& state, const MixedTermTable& table, const ScheduleWeights& w_mid,
                                 double dt) {
  if (state.num_qubits() != table.num_qubits()) throw DimensionError("trotter_step: register size mismatch");
  if (!std::isfinite(dt)) throw ArgumentError("trotter_step: non-finite dt");
  if (dt == 0.0) return;
  for (std::size_t k = 0; k < table.size(); ++k) {
    exp_apply_inplace(table.strings()[k], table.coefficient(k, w_mid) * dt, state);
  }
}

inline StateVector trotter_step(const StateVector& state, const PauliSum& h_l, const PauliSum& h_m,
                                const PauliSum& h_r, const ScheduleWeights& w_mid, double dt) {
  StateVector out = state;
  trotter_step_inplace(out, MixedTermTable(h_l, h_m, h_r), w_mid, dt);
  return out;
}

struct Rk4Result {
  StateVector state;
  double norm_before_renormalization = 1.0;
};

namespace detail {

/// -i H psi for the mixture at weights w, using the shared term table.
inline StateVector rhs(const MixedTermTable& table, const ScheduleWeights& w, const StateVector& psi) {
  StateVector out(psi.num_qubits());
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double c = table.coefficient(k, w);
    if (c != 0.0) accumulate_string(table.strings()[k], cplx(0.0, -c), psi.amplitudes(), out.amplitudes());
  }
  return out;
}

inline StateVector plus_scaled(const StateVector& a, double s, const StateVector& b) {
  StateVector out = a;
  for (std::size_t i = 0; i < out.dimension(); ++i) out[i] += s * b[i];
  return out;
}

}  // namespace detail

inline Rk4Result rk4_step(const StateVector& state, const MixedTermTable& table, const Schedule& schedule, double t,
                          double dt) {
  if (state.num_qubits() != table.num_qubits()) throw DimensionError("rk4_step: register size mismatch");
  const auto w0 = schedule_weights(t, schedule);
  const auto wh = schedule_weights(t + 0.5 * dt, schedule);
  const auto w1 = schedule_weights(t + dt, schedule);
  const StateVector k1 = detail::rhs(table, w0, state);
  const StateVector k2 = detail::rhs(table, wh, detail::plus_scaled(state, 0.5 * dt, k1));
  const StateVector k3 = detail::rhs(table, wh, detail::plus_scaled(state, 0.5 * dt, k2));
  const StateVector k4 = detail::rhs(table, w1, detail::plus_scaled(state, dt, k3));
  Rk4Result r{state, 1.0};
  const double s = dt / 6.0;
  for (std::size_t i = 0; i < r.state.dimension(); ++i) {
    r.state[i] += s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  r.norm_before_renormalization = r.state.normalize();
  return r;
}

inline Rk4Result rk4_step(const StateVector& state, const PauliSum& h_l, const PauliSum& h_m, const PauliSum& h_r,
                          const Schedule& schedule, double t, double dt) {
  return rk4_step(state, MixedTermTable(h_l, h_m, h_r), schedule, t, dt);
}

namespace detail {

inline StateVector exact_dense_step(const StateVector& state, const Eigen::MatrixXcd& m, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("exact_step: eigensolver failed");
  const Eigen::VectorXcd phases =
      es.eigenvalues().unaryExpr([dt](double e) { return std::exp(cplx(0.0, -e * dt)); });
  const Eigen::VectorXcd coeffs = es.eigenvectors().adjoint() * state.to_eigen();
  return StateVector::from_eigen(state.num_qubits(), es.eigenvectors() * phases.cwiseProduct(coeffs));
}

/// Basis indices grouped into blocks no matrix ever connects.
inline std::vector<std::vector<Eigen::Index>> connected_blocks(const std::vector<const Eigen::MatrixXcd*>& ms) {
  const Eigen::Index dim = ms.front()->rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (const auto* m : ms) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      for (Eigen::Index r = 0; r < c; ++r) {
        if ((*m)(r, c) == cplx{0.0, 0.0}) continue;
        const auto a = find(r);
        const auto b = find(c);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(dim), -1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto root = static_cast<std::size_t>(find(i));
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return blocks;
}

/// Block-wise exp(-i M dt) applied to the state.
inline StateVector exact_block_step(const StateVector& state, const Eigen::MatrixXcd& m,
                                    const std::vector<std::vector<Eigen::Index>>& blocks, double dt) {
  StateVector out(state.num_qubits());
  for (const auto& idx : blocks) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXcd v(k);
    for (Eigen::Index a = 0; a < k; ++a) v(a) = state[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    if (v.squaredNorm() == 0.0) continue;
    Eigen::MatrixXcd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sub);
    if (es.info() != Eigen::Success) throw NumericalError("exact_step: eigensolver failed");
    const Eigen::VectorXcd phases =
        es.eigenvalues().unaryExpr([dt](double e) { return std::exp(cplx(0.0, -e * dt)); });
    const Eigen::VectorXcd w = es.eigenvectors() * phases.cwiseProduct(es.eigenvectors().adjoint() * v);
    for (Eigen::Index a = 0; a < k; ++a) out[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] = w(a);
  }
  return out;
}

}  // namespace detail

/// exp(-i H dt)|psi> through the eigendecomposition of the dense matrix.
inline StateVector exact_step(const StateVector& state, const PauliSum& h, double dt,
                              std::size_t max_qubits = kDenseQubitGuard) {
  if (state.num_qubits() != h.num_qubits()) throw DimensionError("exact_step: register size mismatch");
  if (!h.is_hermitian()) throw ContractError("exact_step: Hamiltonian is not Hermitian");
  if (dt == 0.0) return state;
  return detail::exact_dense_step(state, to_matrix(h, max_qubits), dt);
}

// ---------------------------------------------------------------------------
// Driver

struct PropagationPlan {
  double dt = 1.0;
  std::size_t n_steps = 1;
  Propagator propagator = Propagator::trotter1;
  std::size_t stride = 1;

  /// Throws ConfigError unless the plan is well formed and ends exactly at
  /// the schedule's final time.
  void validate(const Schedule& schedule) const {
    if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("dt must be positive");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (stride < 1) throw ConfigError("observation stride must be >= 1");
    const double end = dt * static_cast<double>(n_steps);
    if (std::abs(end - schedule.t_final) > 1e-9 * std::max(1.0, schedule.t_final)) {
      throw ConfigError("dt * n_steps = " + std::to_string(end) + " does not equal t_f = " +
                        std::to_string(schedule.t_final));
    }
  }
};

/// One sampled instant of a run.
struct TimeSeriesRecord {
  double t = 0.0;
  double energy = 0.0;
  double energy_left = 0.0;
  double energy_middle = 0.0;
  double energy_right = 0.0;
  double n_left = 0.0;
  double n_middle = 0.0;
  double n_right = 0.0;
  std::vector<double> electron_occupations;
  double entropy = 0.0;
  double fidelity_left = 0.0;
  double fidelity_middle = 0.0;
  double fidelity_right = 0.0;
  double norm = 1.0;
  double electrons = 0.0;
  double nuclei = 0.0;

  friend bool operator==(const TimeSeriesRecord&, const TimeSeriesRecord&) = default;
};

/// What evolve() measures at each record.
struct ObservationSpec {
  NumberOperatorBank bank;
  std::array<std::size_t, 3> nuclear_sites{0, 1, 2};  // nuclear modes read as n_L, n_M, n_R
  std::vector<std::size_t> tracked_electrons;        // electron modes recorded individually
  Partition partition;
  std::array<StateVector, 3> references;             // Psi_L, Psi_M, Psi_R

  ObservationSpec(const SectorLayout& layout, std::array<StateVector, 3> refs,
                  std::vector<std::size_t> tracked = {0, 1})
      : bank(layout),
        tracked_electrons(std::move(tracked)),
        partition(Partition::from_layout(layout)),
        references(std::move(refs)) {}
};

inline TimeSeriesRecord measure(const StateVector& state, double t, const ScheduleWeights& w, const PauliSum& h_l,
                                const PauliSum& h_m, const PauliSum& h_r, const ObservationSpec& obs, double norm) {
  TimeSeriesRecord r;
  r.t = t;
  const auto e = sector_energies(state, h_l, h_m, h_r, w);
  r.energy = e.total;
  r.energy_left = e.left;
  r.energy_middle = e.middle;
  r.energy_right = e.right;
  r.n_left = occupation(state, {Sector::nuclear, obs.nuclear_sites[0]}, obs.bank);
  r.n_middle = occupation(state, {Sector::nuclear, obs.nuclear_sites[1]}, obs.bank);
  r.n_right = occupation(state, {Sector::nuclear, obs.nuclear_sites[2]}, obs.bank);
  for (auto mode : obs.tracked_electrons) {
    r.electron_occupations.push_back(occupation(state, {Sector::electron, mode}, obs.bank));
  }
  r.entropy = entanglement_entropy(state, obs.partition);
  r.fidelity_left = fidelity(state, obs.references[0]);
  r.fidelity_middle = fidelity(state, obs.references[1]);
  r.fidelity_right = fidelity(state, obs.references[2]);
  r.norm = norm;
  const auto counts = total_numbers(state, obs.bank);
  r.electrons = counts.electrons;
  r.nuclei = counts.nuclei;
  return r;
}

struct EvolutionResult {
  std::vector<TimeSeriesRecord> records;
  StateVector final_state;
  double max_norm_drift = 0.0;  // largest |norm - 1| seen before any renormalization
};

/// Called with each record as soon as it is produced.
using RecordSink = std::function<void(const TimeSeriesRecord&)>;

/// Norm tolerance for unitary propagators; larger deviations abort the run.
inline constexpr double kUnitaryNormTolerance = 1e-9;
/// Per-step RK4 norm drift beyond which the step size is considered unstable.
inline constexpr double kRk4NormBlowup = 1e-4;

/// Steps t_j = j dt for j = 0 .. n_steps-1 and records at t = 0, every
/// stride steps and at t_f. Deterministic for identical inputs.
inline EvolutionResult evolve(const StateVector& initial, const PauliSum& h_l, const PauliSum& h_m,
                              const PauliSum& h_r, const Schedule& schedule, const PropagationPlan& plan,
                              const ObservationSpec& obs, const RecordSink& sink = {}) {
  plan.validate(schedule);
  if (initial.num_qubits() != h_l.num_qubits()) throw DimensionError("evolve: initial state register mismatch");
  if (std::abs(initial.norm() - 1.0) > 1e-10) throw ContractError("evolve: initial state is not normalized");
  for (const auto& ref : obs.references) {
    if (ref.num_qubits() != initial.num_qubits()) throw DimensionError("evolve: reference state register mismatch");
    if (std::abs(ref.norm() - 1.0) > 1e-10) throw ContractError("evolve: reference state is not normalized");
  }
  const MixedTermTable table(h_l, h_m, h_r);
  std::array<Eigen::MatrixXcd, 3> dense;
  std::vector<std::vector<Eigen::Index>> blocks;
  if (plan.propagator == Propagator::exact) {
    for (const auto* h : {&h_l, &h_m, &h_r}) {
      if (!h->is_hermitian()) throw ContractError("exact_step: Hamiltonian is not Hermitian");
    }
    dense = {to_matrix(h_l), to_matrix(h_m), to_matrix(h_r)};
    blocks = detail::connected_blocks({&dense[0], &dense[1], &dense[2]});
  }
  EvolutionResult result;
  StateVector state = initial;
  double last_norm = state.norm();

  auto emit = [&](std::size_t j) {
    const double t = plan.dt * static_cast<double>(j);
    result.records.push_back(measure(state, t, schedule_weights(t, schedule), h_l, h_m, h_r, obs, last_norm));
    if (sink) sink(result.records.back());
  };
  auto check_unitary = [&] {
    last_norm = state.norm();
    const double drift = std::abs(last_norm - 1.0);
    result.max_norm_drift = std::max(result.max_norm_drift, drift);
    if (drift > kUnitaryNormTolerance) {
      throw NumericalError("norm drifted to " + std::to_string(last_norm) + " under a unitary propagator");
    }
  };

  emit(0);
  for (std::size_t j = 0; j < plan.n_steps; ++j) {
    const double t = plan.dt * static_cast<double>(j);
    const auto w_mid = schedule_weights(t + 0.5 * plan.dt, schedule);
    switch (plan.propagator) {
      case Propagator::trotter1:
        trotter_step_inplace(state, table, w_mid, plan.dt);
        check_unitary();
        break;
      case Propagator::exact:
        state = detail::exact_block_step(
            state, w_mid.alpha * dense[0] + w_mid.beta * dense[1] + w_mid.gamma * dense[2], blocks, plan.dt);
        check_unitary();
        break;
      case Propagator::rk4: {
        auto r = rk4_step(state, table, schedule, t, plan.dt);
        state = std::move(r.state);
        last_norm = r.norm_before_renormalization;
        const double drift = std::abs(last_norm - 1.0);
        result.max_norm_drift = std::max(result.max_norm_drift, drift);
        if (drift > kRk4NormBlowup) {
          throw NumericalError("RK4 norm drift " + std::to_string(drift) + " at t = " + std::to_string(t) +
                               "; step size too large");
        }
        break;
      }
    }
    const std::size_t done = j + 1;
    if (done % plan.stride == 0 || done == plan.n_steps) emit(done);
  }
  result.final_state = std::move(state);
  return result;
}

inline EvolutionResult evolve(const StateVector& initial, const LmrHamiltonians& h, const Schedule& schedule,
                              const PropagationPlan& plan, const ObservationSpec& obs, const RecordSink& sink = {}) {
  return evolve(initial, h.left, h.middle, h.right, schedule, plan, obs, sink);
}

}  // namespace nedyn
