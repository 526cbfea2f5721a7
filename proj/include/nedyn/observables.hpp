#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/fermion.hpp"
#include "nedyn/hamiltonian.hpp"
#include "nedyn/pauli.hpp"
#include "nedyn/spectral.hpp"

namespace nedyn {

/// Split of the register into electron and nuclear qubits.
struct Partition {
  std::vector<std::size_t> electron;
  std::vector<std::size_t> nuclear;

  static Partition from_layout(const SectorLayout& layout) {
    return {layout.sector_qubit_indices(Sector::electron), layout.sector_qubit_indices(Sector::nuclear)};
  }

  void validate(std::size_t num_qubits) const {
    std::vector<int> seen(num_qubits, 0);
    for (const auto* part : {&electron, &nuclear}) {
      for (auto q : *part) {
        if (q >= num_qubits) throw ConfigError("partition qubit " + std::to_string(q) + " outside register");
        if (seen[q]++) throw ConfigError("partition qubit " + std::to_string(q) + " listed twice");
      }
    }
    if (electron.size() + nuclear.size() != num_qubits) throw ConfigError("partition does not cover the register");
  }
};

inline constexpr double kEntropyEigenFloor = 1e-14;

/// Von Neumann entropies of both reduced density matrices, in nats.
struct EntropyPair {
  double electron = 0.0;
  double nuclear = 0.0;
};

namespace detail {

inline double entropy_from_density(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l >= kEntropyEigenFloor) s -= l * std::log(l);
  }
  return std::max(s, 0.0);
}

}  // namespace detail

/// Computes both partial traces through the coefficient matrix M
/// (rows: electron configurations, columns: nuclear configurations):
/// rho_e = M M^dag and rho_n = M^T conj(M).
inline EntropyPair entropy_pair(const StateVector& state, const Partition& part) {
  part.validate(state.num_qubits());
  const auto rows = static_cast<Eigen::Index>(std::size_t{1} << part.electron.size());
  const auto cols = static_cast<Eigen::Index>(std::size_t{1} << part.nuclear.size());
  auto gather = [](std::size_t b, const std::vector<std::size_t>& qubits) {
    std::size_t out = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) out |= ((b >> qubits[k]) & 1U) << k;
    return static_cast<Eigen::Index>(out);
  };
  Eigen::MatrixXcd m(rows, cols);
  for (std::size_t b = 0; b < state.dimension(); ++b) m(gather(b, part.electron), gather(b, part.nuclear)) = state[b];
  const Eigen::MatrixXcd rho_e = m * m.adjoint();
  const Eigen::MatrixXcd rho_n = m.transpose() * m.conjugate();
  return {detail::entropy_from_density(rho_e), detail::entropy_from_density(rho_n)};
}

/// s = -Tr rho_e ln rho_e. The two partial traces must agree to 1e-10.
inline double entanglement_entropy(const StateVector& state, const Partition& part) {
  const auto [se, sn] = entropy_pair(state, part);
  if (std::abs(se - sn) > 1e-10) {
    throw NumericalError("entropy asymmetry: electron " + std::to_string(se) + " vs nuclear " + std::to_string(sn));
  }
  return se;
}

/// |<a|b>|^2.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) throw DimensionError("fidelity: register size mismatch");
  return std::clamp(std::norm(a.inner(b)), 0.0, 1.0);
}

struct TrackedMode {
  Sector sector = Sector::electron;
  std::size_t mode = 0;

  friend bool operator==(const TrackedMode&, const TrackedMode&) = default;
};

/// Mapped number operators for every mode plus per-sector totals, tapered
/// consistently with the layout.
class NumberOperatorBank {
 public:
  explicit NumberOperatorBank(const SectorLayout& layout) : layout_(layout) {
    for (Sector s : {Sector::electron, Sector::nuclear}) {
      auto& ops = s == Sector::electron ? electron_ : nuclear_;
      PauliSum total(layout.qubits());
      for (std::size_t j = 0; j < layout.modes(s); ++j) {
        ops.push_back(taper(number_operator(s, j, layout), layout).hermitized());
        total += ops.back();
      }
      (s == Sector::electron ? electron_total_ : nuclear_total_) = total;
    }
  }

  const SectorLayout& layout() const noexcept { return layout_; }
  std::size_t num_qubits() const noexcept { return layout_.qubits(); }

  const PauliSum& op(const TrackedMode& m) const {
    const auto& ops = m.sector == Sector::electron ? electron_ : nuclear_;
    if (m.mode >= ops.size()) {
      throw IndexError(std::string(to_string(m.sector)) + " mode " + std::to_string(m.mode) + " not in bank");
    }
    return ops[m.mode];
  }
  const PauliSum& total(Sector s) const noexcept { return s == Sector::electron ? electron_total_ : nuclear_total_; }

  /// Filter selecting basis states with the given particle counts.
  SectorFilter particle_filter(double electrons, double nuclei) const {
    return {{electron_total_, electrons}, {nuclear_total_, nuclei}};
  }

 private:
  SectorLayout layout_;
  std::vector<PauliSum> electron_;
  std::vector<PauliSum> nuclear_;
  PauliSum electron_total_;
  PauliSum nuclear_total_;
};

/// <psi|a^dag a|psi>, asserted to lie in [-1e-10, 1 + 1e-10] and clipped.
inline double occupation(const StateVector& state, const TrackedMode& mode, const NumberOperatorBank& bank) {
  if (state.num_qubits() != bank.num_qubits()) throw DimensionError("occupation: register size mismatch");
  const double v = expectation(bank.op(mode), state);
  if (v < -1e-10 || v > 1.0 + 1e-10) {
    throw NumericalError("occupation " + std::to_string(v) + " outside [0, 1]");
  }
  return std::clamp(v, 0.0, 1.0);
}

struct ParticleNumbers {
  double electrons = 0.0;
  double nuclei = 0.0;
};

inline ParticleNumbers total_numbers(const StateVector& state, const NumberOperatorBank& bank) {
  return {expectation(bank.total(Sector::electron), state), expectation(bank.total(Sector::nuclear), state)};
}

struct SectorEnergies {
  double total = 0.0;  // alpha E_L + beta E_M + gamma E_R
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
};

inline SectorEnergies sector_energies(const StateVector& state, const PauliSum& h_l, const PauliSum& h_m,
                                      const PauliSum& h_r, const ScheduleWeights& w) {
  SectorEnergies e;
  e.left = expectation(h_l, state);
  e.middle = expectation(h_m, state);
  e.right = expectation(h_r, state);
  e.total = w.alpha * e.left + w.beta * e.middle + w.gamma * e.right;
  return e;
}

}  // namespace nedyn
