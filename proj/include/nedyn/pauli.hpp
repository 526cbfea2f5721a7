#pragma once

// Weighted Pauli strings and their action on dense state vectors.
//
// Conventions used throughout the library:
//  * qubit 0 is the least-significant bit of an amplitude index;
//  * textual strings are written most-significant qubit first, so "XZ"
//    on two qubits means X on qubit 1 and Z on qubit 0;
//  * a string is stored as an (x, z) mask pair and denotes
//    i^{|x & z|} X^x Z^z, i.e. Y = iXZ on every qubit where both bits are set.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nedyn/detail/parallel.hpp"
#include "nedyn/errors.hpp"

namespace nedyn {

using cplx = std::complex<double>;
using Mask = std::uint64_t;

/// Terms with |coefficient| below this are dropped on canonicalization.
inline constexpr double kPruneThreshold = 1e-12;
/// Largest register for which dense matrices are built by default.
inline constexpr std::size_t kDenseQubitGuard = 12;
/// Largest register a StateVector may hold.
inline constexpr std::size_t kMaxStateQubits = 30;

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

namespace detail {

inline int parity(Mask m) noexcept { return std::popcount(m) & 1; }

/// i^k for integer k (any sign).
inline cplx i_pow(int k) noexcept {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline Mask low_mask(std::size_t n) noexcept {
  return n >= 64 ? ~Mask{0} : (Mask{1} << n) - 1;
}

}  // namespace detail

/// Tensor product of single-qubit Pauli letters with unit coefficient.
struct PauliString {
  Mask x = 0;
  Mask z = 0;

  friend bool operator==(const PauliString&, const PauliString&) = default;

  Letter letter(std::size_t qubit) const noexcept {
    const bool xb = (x >> qubit) & 1U;
    const bool zb = (z >> qubit) & 1U;
    if (xb) return zb ? Letter::Y : Letter::X;
    return zb ? Letter::Z : Letter::I;
  }

  void set(std::size_t qubit, Letter l) noexcept {
    const Mask bit = Mask{1} << qubit;
    x &= ~bit;
    z &= ~bit;
    if (l == Letter::X || l == Letter::Y) x |= bit;
    if (l == Letter::Z || l == Letter::Y) z |= bit;
  }

  bool is_identity() const noexcept { return x == 0 && z == 0; }
  bool is_diagonal() const noexcept { return x == 0; }

  /// Number of Y letters; P = i^{y_count} X^x Z^z.
  int y_count() const noexcept { return std::popcount(x & z); }

  /// Phase s_b with P|b> = s_b |b ^ x>.
  cplx phase_on(Mask basis) const noexcept {
    return detail::i_pow(y_count() + 2 * detail::parity(z & basis));
  }

  bool commutes_with(const PauliString& o) const noexcept {
    return detail::parity((x & o.z) ^ (z & o.x)) == 0;
  }

  static PauliString single(std::size_t qubit, Letter l) {
    PauliString s;
    s.set(qubit, l);
    return s;
  }

  /// Parses an n-character string over {I,X,Y,Z}, most-significant qubit first.
  static PauliString parse(std::string_view text) {
    if (text.size() > 64) throw ArgumentError("Pauli string longer than 64 qubits");
    PauliString s;
    const std::size_t n = text.size();
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t qubit = n - 1 - pos;
      switch (text[pos]) {
        case 'I': break;
        case 'X': s.set(qubit, Letter::X); break;
        case 'Y': s.set(qubit, Letter::Y); break;
        case 'Z': s.set(qubit, Letter::Z); break;
        default:
          throw ArgumentError("invalid Pauli letter '" + std::string(1, text[pos]) + "'");
      }
    }
    return s;
  }

  std::string to_string(std::size_t n) const {
    static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
    std::string out(n, 'I');
    for (std::size_t q = 0; q < n; ++q) {
      out[n - 1 - q] = kChars[static_cast<int>(letter(q))];
    }
    return out;
  }
};

/// Lexicographic order of the textual form (I < X < Y < Z, most-significant
/// qubit compared first). This is the canonical term order of a PauliSum and
/// the Trotter factor order.
inline bool lex_less(const PauliString& a, const PauliString& b, std::size_t n) noexcept {
  for (std::size_t k = n; k-- > 0;) {
    const auto la = a.letter(k);
    const auto lb = b.letter(k);
    if (la != lb) return la < lb;
  }
  return false;
}

/// Product of two strings: returns (phase, string) with a*b = phase * string.
inline std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) noexcept {
  PauliString c{a.x ^ b.x, a.z ^ b.z};
  const int k = a.y_count() + b.y_count() - c.y_count() + 2 * std::popcount(a.z & b.x);
  return {detail::i_pow(k), c};
}

class PauliTerm {
 public:
  PauliTerm() = default;
  PauliTerm(std::size_t num_qubits, PauliString letters, cplx coefficient)
      : n_(num_qubits), letters_(letters), coefficient_(coefficient) {
    if (n_ > 64) throw ArgumentError("register larger than 64 qubits");
    if (!std::isfinite(coefficient_.real()) || !std::isfinite(coefficient_.imag())) {
      throw ArgumentError("Pauli term coefficient is not finite");
    }
    if (((letters_.x | letters_.z) & ~detail::low_mask(n_)) != 0) {
      throw DimensionError("Pauli letters exceed register size");
    }
  }

  /// Convenience: PauliTerm("XZY", 0.5).
  PauliTerm(std::string_view text, cplx coefficient)
      : PauliTerm(text.size(), PauliString::parse(text), coefficient) {}

  std::size_t num_qubits() const noexcept { return n_; }
  const PauliString& letters() const noexcept { return letters_; }
  cplx coefficient() const noexcept { return coefficient_; }
  std::string to_string() const { return letters_.to_string(n_); }

 private:
  std::size_t n_ = 0;
  PauliString letters_{};
  cplx coefficient_{0.0, 0.0};
};

/// Canonical weighted sum of Pauli strings over a fixed register.
///
/// Canonical form: at most one term per string, no term with
/// |coefficient| < kPruneThreshold, terms sorted by lex_less.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(std::size_t num_qubits) : n_(num_qubits) {
    if (n_ > 64) throw ArgumentError("register larger than 64 qubits");
  }
  PauliSum(std::size_t num_qubits, std::span<const PauliTerm> terms) : PauliSum(num_qubits) {
    for (const auto& t : terms) {
      if (t.num_qubits() != n_) throw DimensionError("term register size differs from sum");
    }
    terms_.assign(terms.begin(), terms.end());
    canonicalize_in_place();
  }
  PauliSum(std::size_t num_qubits, std::initializer_list<PauliTerm> terms)
      : PauliSum(num_qubits, std::span<const PauliTerm>(terms.begin(), terms.size())) {}

  static PauliSum identity(std::size_t n, cplx coefficient = 1.0) {
    return PauliSum(n, {PauliTerm(n, PauliString{}, coefficient)});
  }
  static PauliSum from_term(const PauliTerm& t) { return PauliSum(t.num_qubits(), {t}); }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  auto begin() const noexcept { return terms_.begin(); }
  auto end() const noexcept { return terms_.end(); }

  /// Coefficient of a string (zero when absent).
  cplx coefficient_of(const PauliString& s) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                               [this](const PauliTerm& t, const PauliString& key) {
                                 return lex_less(t.letters(), key, n_);
                               });
    if (it != terms_.end() && it->letters() == s) return it->coefficient();
    return {0.0, 0.0};
  }

  /// All coefficients real within a relative tolerance. Since every Pauli
  /// string is Hermitian this is equivalent to the sum being Hermitian.
  bool is_hermitian(double tol = 1e-12) const noexcept {
    return std::all_of(terms_.begin(), terms_.end(), [tol](const PauliTerm& t) {
      return std::abs(t.coefficient().imag()) <= tol * std::max(1.0, std::abs(t.coefficient()));
    });
  }

  /// True when every term is diagonal in the computational basis.
  bool is_diagonal() const noexcept {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const PauliTerm& t) { return t.letters().is_diagonal(); });
  }

  /// Largest absolute coefficient difference against another sum.
  double max_abs_difference(const PauliSum& other) const {
    if (other.n_ != n_) throw DimensionError("register size mismatch");
    const PauliSum diff = *this + other * cplx(-1.0);
    double m = 0.0;
    for (const auto& t : diff) m = std::max(m, std::abs(t.coefficient()));
    return m;
  }

  /// Sum of |coefficient| over non-identity terms; an upper bound on the
  /// spectral spread used to size integrator steps.
  double one_norm() const noexcept {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coefficient());
    return s;
  }

  PauliSum adjoint() const {
    PauliSum out(n_);
    out.terms_.reserve(terms_.size());
    for (const auto& t : terms_) out.terms_.emplace_back(n_, t.letters(), std::conj(t.coefficient()));
    return out;
  }

  friend PauliSum operator+(const PauliSum& a, const PauliSum& b) {
    if (a.n_ != b.n_) throw DimensionError("register size mismatch in Pauli sum addition");
    PauliSum out(a.n_);
    out.terms_.reserve(a.terms_.size() + b.terms_.size());
    out.terms_.insert(out.terms_.end(), a.terms_.begin(), a.terms_.end());
    out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
    out.canonicalize_in_place();
    return out;
  }
  PauliSum& operator+=(const PauliSum& b) { return *this = *this + b; }

  friend PauliSum operator*(const PauliSum& a, cplx s) {
    PauliSum out(a.n_);
    out.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) out.terms_.emplace_back(a.n_, t.letters(), t.coefficient() * s);
    out.canonicalize_in_place();
    return out;
  }
  friend PauliSum operator*(cplx s, const PauliSum& a) { return a * s; }

  /// Exact operator product with single-qubit phase bookkeeping.
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    if (a.n_ != b.n_) throw DimensionError("register size mismatch in Pauli sum product");
    PauliSum out(a.n_);
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_) {
      for (const auto& tb : b.terms_) {
        const auto [phase, s] = multiply(ta.letters(), tb.letters());
        out.terms_.emplace_back(a.n_, s, phase * ta.coefficient() * tb.coefficient());
      }
    }
    out.canonicalize_in_place();
    return out;
  }

  /// Returns a copy with every imaginary part removed after verifying it is
  /// below tol (relative to max(1, |c|)).
  PauliSum hermitized(double tol = 1e-10) const {
    PauliSum out(n_);
    out.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      const cplx c = t.coefficient();
      if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) {
        throw ContractError("Pauli sum is not Hermitian: term " + t.to_string() +
                            " has imaginary coefficient " + std::to_string(c.imag()));
      }
      out.terms_.emplace_back(n_, t.letters(), cplx(c.real(), 0.0));
    }
    out.canonicalize_in_place();
    return out;
  }

  friend bool operator==(const PauliSum& a, const PauliSum& b) {
    if (a.n_ != b.n_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k) {
      if (a.terms_[k].letters() != b.terms_[k].letters() ||
          a.terms_[k].coefficient() != b.terms_[k].coefficient()) {
        return false;
      }
    }
    return true;
  }

 private:
  void canonicalize_in_place() {
    const std::size_t n = n_;
    auto less = [n](const PauliString& a, const PauliString& b) { return lex_less(a, b, n); };
    std::map<PauliString, cplx, decltype(less)> merged(less);
    for (const auto& t : terms_) merged[t.letters()] += t.coefficient();
    terms_.clear();
    for (const auto& [s, c] : merged) {
      if (std::abs(c) >= kPruneThreshold) terms_.emplace_back(n_, s, c);
    }
  }

  std::size_t n_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Re-applies canonical form. PauliSum is always canonical, so this is the
/// identity on valid values; kept as a named operation for callers that
/// assemble terms by hand.
inline PauliSum canonicalize(const PauliSum& s) {
  return PauliSum(s.num_qubits(), std::span<const PauliTerm>(s.terms()));
}

inline PauliSum multiply(const PauliSum& a, const PauliSum& b) { return a * b; }

/// 2^n complex amplitudes; amplitude index bit q is qubit q.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t num_qubits) : n_(num_qubits) {
    if (n_ > kMaxStateQubits) throw ResourceError("state vector larger than 2^30 amplitudes");
    amps_.assign(std::size_t{1} << n_, cplx{0.0, 0.0});
  }
  StateVector(std::size_t num_qubits, std::vector<cplx> amplitudes) : n_(num_qubits) {
    if (n_ > kMaxStateQubits) throw ResourceError("state vector larger than 2^30 amplitudes");
    if (amplitudes.size() != (std::size_t{1} << n_)) {
      throw DimensionError("amplitude count is not 2^n");
    }
    amps_ = std::move(amplitudes);
  }

  static StateVector basis(std::size_t n, std::size_t index) {
    StateVector s(n);
    if (index >= s.dimension()) throw IndexError("basis index out of range");
    s.amps_[index] = 1.0;
    return s;
  }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  cplx& operator[](std::size_t i) noexcept { return amps_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return amps_[i]; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }

  double norm() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  /// Scales to unit norm and returns the norm before scaling.
  double normalize() {
    const double nrm = norm();
    if (nrm == 0.0 || !std::isfinite(nrm)) throw NumericalError("cannot normalize state of norm " + std::to_string(nrm));
    const double inv = 1.0 / nrm;
    for (auto& a : amps_) a *= inv;
    return nrm;
  }

  cplx inner(const StateVector& other) const {
    if (other.n_ != n_) throw DimensionError("state register size mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s;
  }

  double distance(const StateVector& other) const {
    if (other.n_ != n_) throw DimensionError("state register size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::norm(amps_[i] - other.amps_[i]);
    return std::sqrt(s);
  }

  Eigen::VectorXcd to_eigen() const {
    return Eigen::Map<const Eigen::VectorXcd>(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
  }
  static StateVector from_eigen(std::size_t n, const Eigen::VectorXcd& v) {
    return StateVector(n, std::vector<cplx>(v.data(), v.data() + v.size()));
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> amps_;
};

// ---------------------------------------------------------------------------
// Kernels

/// out += scale * P|in>, where P is the bare string (no coefficient).
inline void accumulate_string(const PauliString& p, cplx scale, std::span<const cplx> in,
                              std::span<cplx> out) {
  const cplx base = detail::i_pow(p.y_count()) * scale;
  const Mask x = p.x;
  const Mask z = p.z;
  // (P psi)_c = s_{c^x} psi_{c^x}
  detail::parallel_chunks(in.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const std::size_t b = c ^ x;
      const cplx v = in[b];
      out[c] += detail::parity(z & b) ? -base * v : base * v;
    }
  });
}

inline StateVector apply_term(const PauliTerm& term, const StateVector& state) {
  if (term.num_qubits() != state.num_qubits()) {
    throw DimensionError("apply_term: term has " + std::to_string(term.num_qubits()) +
                         " qubits, state has " + std::to_string(state.num_qubits()));
  }
  StateVector out(state.num_qubits());
  accumulate_string(term.letters(), term.coefficient(), state.amplitudes(), out.amplitudes());
  return out;
}

/// H|psi> for a whole sum.
inline StateVector apply_sum(const PauliSum& sum, const StateVector& state) {
  if (sum.num_qubits() != state.num_qubits()) throw DimensionError("apply_sum: register size mismatch");
  StateVector out(state.num_qubits());
  for (const auto& t : sum) accumulate_string(t.letters(), t.coefficient(), state.amplitudes(), out.amplitudes());
  return out;
}

/// In-place exp(-i theta P)|psi> = cos(theta)|psi> - i sin(theta) P|psi>.
inline void exp_apply_inplace(const PauliString& p, double theta, StateVector& state) {
  if (!std::isfinite(theta)) throw ArgumentError("exp_apply: non-finite angle");
  if (((p.x | p.z) & ~detail::low_mask(state.num_qubits())) != 0) {
    throw DimensionError("exp_apply: Pauli string exceeds register");
  }
  if (theta == 0.0) return;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Mask x = p.x;
  const Mask z = p.z;
  auto amps = state.amplitudes();
  // -i * i^{y}
  const cplx base = cplx(0.0, -s) * detail::i_pow(p.y_count());

  if (x == 0) {
    const cplx plus = cplx(c, 0.0) + base;   // eigenvalue +1 of P (z-parity even)
    const cplx minus = cplx(c, 0.0) - base;  // eigenvalue -1
    detail::parallel_chunks(amps.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t b = lo; b < hi; ++b) amps[b] *= detail::parity(z & b) ? minus : plus;
    });
    return;
  }
  // Pair each b with b ^ x; visit the member whose highest x bit is clear.
  const Mask top = Mask{1} << (std::bit_width(x) - 1);
  detail::parallel_chunks(amps.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      if (b & top) continue;
      const std::size_t f = b ^ x;
      const cplx vb = amps[b];
      const cplx vf = amps[f];
      // (P psi)_b = s_f psi_f, (P psi)_f = s_b psi_b, with s_k = i^y (-1)^{|z&k|}
      const cplx pb = detail::parity(z & f) ? -vf : vf;
      const cplx pf = detail::parity(z & b) ? -vb : vb;
      amps[b] = c * vb + base * pb;
      amps[f] = c * vf + base * pf;
    }
  });
}

inline StateVector exp_apply(const PauliString& p, double theta, const StateVector& state) {
  StateVector out = state;
  exp_apply_inplace(p, theta, out);
  return out;
}

/// <psi|P|psi> for a bare string.
inline cplx string_expectation(const PauliString& p, std::span<const cplx> amps) {
  const Mask x = p.x;
  const Mask z = p.z;
  cplx acc{0.0, 0.0};
  for (std::size_t b = 0; b < amps.size(); ++b) {
    const cplx t = std::conj(amps[b ^ x]) * amps[b];
    acc += detail::parity(z & b) ? -t : t;
  }
  return detail::i_pow(p.y_count()) * acc;
}

/// <psi|H|psi> for a Hermitian sum. The imaginary residue of the complex
/// accumulation must vanish to 1e-10; it is then discarded.
inline double expectation(const PauliSum& sum, const StateVector& state) {
  if (sum.num_qubits() != state.num_qubits()) throw DimensionError("expectation: register size mismatch");
  if (!sum.is_hermitian()) throw ContractError("expectation: Pauli sum is not Hermitian");
  cplx acc{0.0, 0.0};
  for (const auto& t : sum) acc += t.coefficient() * string_expectation(t.letters(), state.amplitudes());
  if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, std::abs(acc.real()))) {
    throw NumericalError("expectation: imaginary residue " + std::to_string(acc.imag()));
  }
  return acc.real();
}

/// Dense 2^n x 2^n matrix of a sum. Guarded by max_qubits.
inline Eigen::MatrixXcd to_matrix(const PauliSum& sum, std::size_t max_qubits = kDenseQubitGuard) {
  const std::size_t n = sum.num_qubits();
  if (n > max_qubits) {
    throw ResourceError("to_matrix: " + std::to_string(n) + " qubits exceeds dense guard of " +
                        std::to_string(max_qubits));
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : sum) {
    const auto& p = t.letters();
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto row = static_cast<Eigen::Index>(static_cast<Mask>(b) ^ p.x);
      m(row, b) += t.coefficient() * p.phase_on(static_cast<Mask>(b));
    }
  }
  return m;
}

}  // namespace nedyn
