#pragma once

// Fermion-to-qubit compilation for two distinguishable particle species.
//
// Electrons occupy the low qubit block [0, electron_modes) and quantum nuclei
// the high block. Operators of one species carry their antisymmetry strings
// only inside their own block, so electron and nuclear operators commute.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/pauli.hpp"

namespace nedyn {

enum class Sector { electron, nuclear };
enum class Mapping { jordan_wigner, parity };
enum class OpKind { create, annihilate };

inline const char* to_string(Sector s) { return s == Sector::electron ? "electron" : "nuclear"; }
inline const char* to_string(Mapping m) { return m == Mapping::jordan_wigner ? "jordan_wigner" : "parity"; }

/// Qubits fixed to a Z eigenvalue and removed from one sector.
/// Positions are sector-local (0 .. modes-1).
struct Tapering {
  std::vector<std::size_t> removed;
  std::vector<int> eigenvalues;  // +1 or -1, one per removed position

  bool empty() const noexcept { return removed.empty(); }
};

struct SectorSpec {
  std::size_t modes = 1;
  Mapping mapping = Mapping::jordan_wigner;
  Tapering tapering;
};

class SectorLayout {
 public:
  SectorLayout() = default;
  SectorLayout(SectorSpec electron, SectorSpec nuclear)
      : electron_(std::move(electron)), nuclear_(std::move(nuclear)) {
    validate(electron_, "electron");
    validate(nuclear_, "nuclear");
    if (full_qubits() > 64) throw ValidationError("layout needs more than 64 qubits");
  }

  /// Untapered Jordan-Wigner layout, the common case.
  static SectorLayout jordan_wigner(std::size_t electron_modes, std::size_t nuclear_modes) {
    return SectorLayout({electron_modes, Mapping::jordan_wigner, {}},
                        {nuclear_modes, Mapping::jordan_wigner, {}});
  }

  const SectorSpec& spec(Sector s) const noexcept { return s == Sector::electron ? electron_ : nuclear_; }
  std::size_t modes(Sector s) const noexcept { return spec(s).modes; }
  std::size_t electron_modes() const noexcept { return electron_.modes; }
  std::size_t nuclear_modes() const noexcept { return nuclear_.modes; }

  /// Register size before tapering: one qubit per mode.
  std::size_t full_qubits() const noexcept { return electron_.modes + nuclear_.modes; }
  /// First qubit of a sector block in the untapered register.
  std::size_t offset(Sector s) const noexcept { return s == Sector::electron ? 0 : electron_.modes; }

  std::size_t sector_qubits(Sector s) const noexcept {
    return spec(s).modes - spec(s).tapering.removed.size();
  }
  /// Register size after tapering.
  std::size_t qubits() const noexcept { return sector_qubits(Sector::electron) + sector_qubits(Sector::nuclear); }
  bool tapered() const noexcept { return !electron_.tapering.empty() || !nuclear_.tapering.empty(); }

  /// Qubit indices of a sector in the tapered register.
  std::vector<std::size_t> sector_qubit_indices(Sector s) const {
    const std::size_t lo = s == Sector::electron ? 0 : sector_qubits(Sector::electron);
    std::vector<std::size_t> out(sector_qubits(s));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = lo + k;
    return out;
  }

 private:
  static void validate(const SectorSpec& s, const char* name) {
    if (s.modes < 1) throw ValidationError(std::string(name) + " sector needs at least one mode");
    const auto& t = s.tapering;
    if (t.removed.size() != t.eigenvalues.size()) {
      throw ValidationError(std::string(name) + " tapering: removed/eigenvalue count mismatch");
    }
    if (t.removed.size() >= s.modes) {
      throw ValidationError(std::string(name) + " tapering removes every qubit of the sector");
    }
    std::vector<std::size_t> sorted = t.removed;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError(std::string(name) + " tapering: duplicate removed position");
    }
    for (std::size_t k = 0; k < t.removed.size(); ++k) {
      if (t.removed[k] >= s.modes) throw ValidationError(std::string(name) + " tapering: position out of range");
      if (t.eigenvalues[k] != 1 && t.eigenvalues[k] != -1) {
        throw ValidationError(std::string(name) + " tapering: eigenvalue must be +1 or -1");
      }
    }
  }

  SectorSpec electron_;
  SectorSpec nuclear_;
};

struct FermionFactor {
  Sector sector = Sector::electron;
  std::size_t mode = 0;
  OpKind kind = OpKind::create;
};

/// prefactor * f_0 f_1 ... f_{k-1}, applied right to left as written.
struct FermionProduct {
  std::vector<FermionFactor> factors;
  cplx prefactor{1.0, 0.0};
};

/// Single creation or annihilation operator on the untapered register.
inline PauliSum lower_op(Sector sector, std::size_t mode, OpKind kind, const SectorLayout& layout) {
  const std::size_t n = layout.full_qubits();
  const std::size_t modes = layout.modes(sector);
  if (mode >= modes) {
    throw IndexError(std::string(to_string(sector)) + " mode " + std::to_string(mode) + " out of range (" +
                     std::to_string(modes) + " modes)");
  }
  const std::size_t off = layout.offset(sector);
  const std::size_t q = off + mode;
  const cplx half{0.5, 0.0};
  // Creation is built first; annihilation is its adjoint.
  PauliSum create(n);
  if (layout.spec(sector).mapping == Mapping::jordan_wigner) {
    PauliString chain;
    for (std::size_t k = off; k < q; ++k) chain.set(k, Letter::Z);
    PauliString xs = chain;
    xs.set(q, Letter::X);
    PauliString ys = chain;
    ys.set(q, Letter::Y);
    // a_j^dag = Z...Z (X - iY)/2
    create = PauliSum(n, {PauliTerm(n, xs, half), PauliTerm(n, ys, cplx(0.0, -0.5))});
  } else {
    // Parity basis: qubit k stores the parity of modes 0..k of the sector.
    // a_j^dag = X_{j+1..end} (Z_{j-1} X_j + X_j Z_j) / 2
    PauliString update;
    for (std::size_t k = q + 1; k < off + modes; ++k) update.set(k, Letter::X);
    const PauliSum update_sum = PauliSum::from_term(PauliTerm(n, update, 1.0));
    const PauliSum xj = PauliSum::from_term(PauliTerm(n, PauliString::single(q, Letter::X), 1.0));
    const PauliSum zj = PauliSum::from_term(PauliTerm(n, PauliString::single(q, Letter::Z), 1.0));
    PauliSum first = xj;
    if (mode > 0) {
      first = PauliSum::from_term(PauliTerm(n, PauliString::single(q - 1, Letter::Z), 1.0)) * xj;
    }
    create = update_sum * ((first + xj * zj) * half);
  }
  return kind == OpKind::create ? create : create.adjoint();
}

inline PauliSum map_product(const FermionProduct& prod, const SectorLayout& layout) {
  PauliSum out = PauliSum::identity(layout.full_qubits(), prod.prefactor);
  for (const auto& f : prod.factors) out = out * lower_op(f.sector, f.mode, f.kind, layout);
  return out;
}

/// Removes the layout's tapered qubits: Z on a removed qubit becomes its
/// eigenvalue, I stays, X or Y is a symmetry violation. Input lives on the
/// untapered register.
inline PauliSum taper(const PauliSum& sum, const SectorLayout& layout) {
  if (sum.num_qubits() != layout.full_qubits()) {
    throw DimensionError("taper: sum has " + std::to_string(sum.num_qubits()) + " qubits, layout expects " +
                         std::to_string(layout.full_qubits()));
  }
  if (!layout.tapered()) return sum;
  Mask removed = 0;
  Mask negative = 0;  // removed qubits with eigenvalue -1
  for (Sector s : {Sector::electron, Sector::nuclear}) {
    const auto& t = layout.spec(s).tapering;
    for (std::size_t k = 0; k < t.removed.size(); ++k) {
      const Mask bit = Mask{1} << (layout.offset(s) + t.removed[k]);
      removed |= bit;
      if (t.eigenvalues[k] == -1) negative |= bit;
    }
  }
  const std::size_t n_full = layout.full_qubits();
  auto compress = [&](Mask m) {
    Mask out = 0;
    std::size_t dst = 0;
    for (std::size_t q = 0; q < n_full; ++q) {
      if (removed & (Mask{1} << q)) continue;
      if (m & (Mask{1} << q)) out |= Mask{1} << dst;
      ++dst;
    }
    return out;
  };
  const std::size_t n_out = layout.qubits();
  std::vector<PauliTerm> terms;
  terms.reserve(sum.size());
  for (const auto& t : sum) {
    const auto& p = t.letters();
    if ((p.x & removed) != 0) {
      throw SymmetryError("taper: term " + t.to_string() + " acts with X or Y on a removed qubit");
    }
    const double sign = detail::parity(p.z & negative) ? -1.0 : 1.0;
    terms.emplace_back(n_out, PauliString{compress(p.x), compress(p.z)}, sign * t.coefficient());
  }
  return PauliSum(n_out, terms);
}

/// a^dag_j a_j on the untapered register.
inline PauliSum number_operator(Sector sector, std::size_t mode, const SectorLayout& layout) {
  return map_product({{{sector, mode, OpKind::create}, {sector, mode, OpKind::annihilate}}}, layout);
}

/// Total particle number of one sector on the untapered register.
inline PauliSum sector_number_operator(Sector sector, const SectorLayout& layout) {
  PauliSum total(layout.full_qubits());
  for (std::size_t j = 0; j < layout.modes(sector); ++j) total += number_operator(sector, j, layout);
  return total;
}

/// Computational-basis index of an occupation-number configuration on the
/// (possibly tapered) register. Throws SymmetryError when the configuration
/// is outside the tapered symmetry sector.
inline std::size_t occupation_basis_index(const SectorLayout& layout, const std::vector<int>& electron_occ,
                                          const std::vector<int>& nuclear_occ) {
  Mask full = 0;
  for (Sector s : {Sector::electron, Sector::nuclear}) {
    const auto& occ = s == Sector::electron ? electron_occ : nuclear_occ;
    if (occ.size() != layout.modes(s)) throw DimensionError("occupation vector length differs from mode count");
    int running = 0;
    for (std::size_t j = 0; j < occ.size(); ++j) {
      if (occ[j] != 0 && occ[j] != 1) throw ArgumentError("occupations must be 0 or 1");
      running ^= occ[j];
      const int bit = layout.spec(s).mapping == Mapping::jordan_wigner ? occ[j] : running;
      if (bit) full |= Mask{1} << (layout.offset(s) + j);
    }
  }
  std::size_t index = 0;
  std::size_t dst = 0;
  for (Sector s : {Sector::electron, Sector::nuclear}) {
    const auto& t = layout.spec(s).tapering;
    for (std::size_t j = 0; j < layout.modes(s); ++j) {
      const bool bit = (full >> (layout.offset(s) + j)) & 1U;
      const auto it = std::find(t.removed.begin(), t.removed.end(), j);
      if (it != t.removed.end()) {
        const int ev = t.eigenvalues[static_cast<std::size_t>(it - t.removed.begin())];
        if ((ev == 1) == bit) throw SymmetryError("occupation lies outside the tapered symmetry sector");
        continue;
      }
      if (bit) index |= std::size_t{1} << dst;
      ++dst;
    }
  }
  return index;
}

}  // namespace nedyn
