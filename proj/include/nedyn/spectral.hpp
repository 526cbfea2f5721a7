#pragma once

// Exact low-lying eigenpairs of Pauli sums, optionally restricted to a
// particle-number sector.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/pauli.hpp"

namespace nedyn {

/// Restricts diagonalization to basis states where a diagonal operator (for
/// example a mapped particle-number sum) takes a given value.
struct SectorConstraint {
  PauliSum op;
  double value = 0.0;
};
using SectorFilter = std::vector<SectorConstraint>;

/// Basis indices of the register satisfying every constraint. An empty
/// filter selects the whole register.
inline std::vector<std::size_t> sector_indices(std::size_t num_qubits, const SectorFilter& filter) {
  for (const auto& c : filter) {
    if (c.op.num_qubits() != num_qubits) throw DimensionError("sector constraint register mismatch");
    if (!c.op.is_diagonal()) throw ArgumentError("sector constraint operator must be diagonal");
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < dim; ++b) {
    bool keep = true;
    for (const auto& c : filter) {
      cplx v{0.0, 0.0};
      for (const auto& t : c.op) v += t.coefficient() * t.letters().phase_on(b);
      if (std::abs(v - c.value) > 1e-9) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(b);
  }
  if (out.empty()) throw ArgumentError("sector filter selects no basis states");
  return out;
}

struct SpectralOptions {
  enum class Method { automatic, dense, lanczos };
  Method method = Method::automatic;
  std::size_t dense_max_qubits = kDenseQubitGuard;
  std::size_t krylov_dim = 120;
  int max_restarts = 60;
  double residual_tol = 1e-10;
};

struct EigenResult {
  std::vector<double> eigenvalues;          // ascending (Hartree)
  std::vector<StateVector> eigenvectors;
  bool degenerate_ground = false;           // lowest gap below 1e-10
};

struct GroundState {
  double energy = 0.0;
  StateVector state;
  bool degenerate = false;
  double gap = std::numeric_limits<double>::infinity();  // to the next level in the sector
};

inline constexpr double kDegeneracyGap = 1e-10;

namespace detail {

/// Largest-magnitude amplitude made real-positive; first index wins ties.
inline void fix_phase(StateVector& v) {
  double best = -1.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < v.dimension(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best + 1e-12) {
      best = a;
      at = i;
    }
  }
  if (best <= 0.0) return;
  const cplx phase = std::conj(v[at]) / std::abs(v[at]);
  for (auto& a : v.amplitudes()) a *= phase;
  v[at] = cplx(v[at].real(), 0.0);
}

inline Eigen::MatrixXcd sector_matrix(const PauliSum& h, const std::vector<std::size_t>& idx) {
  std::unordered_map<std::size_t, Eigen::Index> pos;
  pos.reserve(idx.size() * 2);
  for (std::size_t k = 0; k < idx.size(); ++k) pos.emplace(idx[k], static_cast<Eigen::Index>(k));
  const auto dim = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h) {
    const auto& p = t.letters();
    for (Eigen::Index col = 0; col < dim; ++col) {
      const std::size_t b = idx[static_cast<std::size_t>(col)];
      const auto it = pos.find(b ^ p.x);
      if (it == pos.end()) continue;
      m(it->second, col) += t.coefficient() * p.phase_on(b);
    }
  }
  return m;
}

inline StateVector embed(std::size_t n, const std::vector<std::size_t>& idx, const Eigen::VectorXcd& v) {
  StateVector s(n);
  for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = v(static_cast<Eigen::Index>(k));
  return s;
}

inline EigenResult dense_spectrum(const PauliSum& h, std::size_t k, const std::vector<std::size_t>& idx) {
  const Eigen::MatrixXcd m = sector_matrix(h, idx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  EigenResult r;
  const std::size_t count = std::min<std::size_t>(k, idx.size());
  for (std::size_t j = 0; j < count; ++j) {
    r.eigenvalues.push_back(es.eigenvalues()(static_cast<Eigen::Index>(j)));
    StateVector v = embed(h.num_qubits(), idx, es.eigenvectors().col(static_cast<Eigen::Index>(j)));
    fix_phase(v);
    r.eigenvectors.push_back(std::move(v));
  }
  if (idx.size() > 1) {
    r.degenerate_ground = es.eigenvalues()(1) - es.eigenvalues()(0) < kDegeneracyGap;
  }
  return r;
}

/// Lanczos with full reorthogonalization and restart from the current Ritz
/// vectors. Works on the sector subspace; converged pairs are locked by
/// deflation, so repeated eigenvalues are found one copy at a time.
inline EigenResult lanczos_spectrum(const PauliSum& h, std::size_t k, const std::vector<std::size_t>& idx,
                                    const SpectralOptions& opt) {
  const std::size_t n = h.num_qubits();
  const std::size_t dim = idx.size();
  std::vector<char> in_sector(std::size_t{1} << n, 0);
  for (auto b : idx) in_sector[b] = 1;
  auto project = [&](StateVector& v) {
    for (std::size_t b = 0; b < v.dimension(); ++b)
      if (!in_sector[b]) v[b] = 0.0;
  };
  auto axpy = [](StateVector& y, cplx a, const StateVector& x) {
    for (std::size_t i = 0; i < y.dimension(); ++i) y[i] += a * x[i];
  };

  std::vector<StateVector> locked;
  std::vector<double> locked_values;
  auto deflate = [&](StateVector& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : locked) axpy(v, -u.inner(v), u);
  };

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  StateVector start(n);
  for (auto b : idx) start[b] = cplx(gauss(rng), gauss(rng));

  const std::size_t want = std::min(k, dim);
  int restarts = 0;
  while (locked.size() < want) {
    deflate(start);
    project(start);
    start.normalize();
    const std::size_t m_max = std::min(opt.krylov_dim, dim - locked.size());
    std::vector<StateVector> basis{start};
    std::vector<double> alpha, beta;
    for (std::size_t j = 0; j < m_max; ++j) {
      StateVector w = apply_sum(h, basis[j]);
      project(w);
      const double a = basis[j].inner(w).real();
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) axpy(w, -q.inner(w), q);
        deflate(w);
      }
      const double b = w.norm();
      if (j + 1 == m_max || b < 1e-12) break;
      beta.push_back(b);
      for (auto& a_ : w.amplitudes()) a_ /= b;
      basis.push_back(std::move(w));
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    StateVector ritz(n);
    for (Eigen::Index i = 0; i < m; ++i) axpy(ritz, es.eigenvectors()(i, 0), basis[static_cast<std::size_t>(i)]);
    ritz.normalize();
    const double theta = es.eigenvalues()(0);
    StateVector resid = apply_sum(h, ritz);
    project(resid);
    axpy(resid, -theta, ritz);
    if (resid.norm() < opt.residual_tol * std::max(1.0, std::abs(theta)) || static_cast<std::size_t>(m) == dim - locked.size()) {
      locked.push_back(ritz);
      locked_values.push_back(theta);
      StateVector fresh(n);
      for (auto b : idx) fresh[b] = cplx(gauss(rng), gauss(rng));
      start = fresh;
      restarts = 0;
      continue;
    }
    if (++restarts > opt.max_restarts) throw NumericalError("Lanczos did not converge");
    start = ritz;
  }

  std::vector<std::size_t> order(locked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return locked_values[a] < locked_values[b]; });
  EigenResult r;
  for (auto i : order) {
    r.eigenvalues.push_back(locked_values[i]);
    StateVector v = locked[i];
    fix_phase(v);
    r.eigenvectors.push_back(std::move(v));
  }
  if (r.eigenvalues.size() > 1) r.degenerate_ground = r.eigenvalues[1] - r.eigenvalues[0] < kDegeneracyGap;
  return r;
}

inline bool use_dense(const PauliSum& h, const SpectralOptions& opt) {
  switch (opt.method) {
    case SpectralOptions::Method::dense:
      if (h.num_qubits() > opt.dense_max_qubits) {
        throw ResourceError("dense eigensolver: " + std::to_string(h.num_qubits()) + " qubits exceeds guard of " +
                            std::to_string(opt.dense_max_qubits));
      }
      return true;
    case SpectralOptions::Method::lanczos: return false;
    default: return h.num_qubits() <= opt.dense_max_qubits;
  }
}

}  // namespace detail

/// k lowest eigenpairs, ascending.
inline EigenResult low_spectrum(const PauliSum& h, std::size_t k, const SectorFilter& filter = {},
                                const SpectralOptions& opt = {}) {
  if (!h.is_hermitian()) throw ContractError("low_spectrum: Hamiltonian is not Hermitian");
  if (h.num_qubits() > kMaxStateQubits) throw ResourceError("register too large for state vectors");
  const auto idx = sector_indices(h.num_qubits(), filter);
  if (k < 1 || k > idx.size()) throw ArgumentError("low_spectrum: k must be in [1, dimension]");
  return detail::use_dense(h, opt) ? detail::dense_spectrum(h, k, idx) : detail::lanczos_spectrum(h, k, idx, opt);
}

/// Lowest eigenpair with deterministic phase; degeneracy is flagged, not
/// resolved.
inline GroundState ground_state(const PauliSum& h, const SectorFilter& filter = {}, const SpectralOptions& opt = {}) {
  if (!h.is_hermitian()) throw ContractError("ground_state: Hamiltonian is not Hermitian");
  const auto idx = sector_indices(h.num_qubits(), filter);
  const std::size_t k = std::min<std::size_t>(2, idx.size());
  EigenResult r = low_spectrum(h, k, filter, opt);
  GroundState g;
  g.energy = r.eigenvalues[0];
  g.state = std::move(r.eigenvectors[0]);
  if (r.eigenvalues.size() > 1) g.gap = r.eigenvalues[1] - r.eigenvalues[0];
  g.degenerate = g.gap < kDegeneracyGap;
  return g;
}

}  // namespace nedyn
