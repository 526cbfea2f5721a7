#pragma once

// Multicomponent electron-nuclear Hamiltonians built from integrals, the
// L/M/R mixing schedule, and a small synthetic proton-transfer model.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/fermion.hpp"
#include "nedyn/pauli.hpp"
#include "nedyn/pauli_io.hpp"

namespace nedyn {

/// Dense real tensor of rank R with equal extent per axis group.
template <std::size_t R>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::array<std::size_t, R> extents) : extents_(extents) {
    std::size_t total = 1;
    for (auto e : extents_) total *= e;
    data_.assign(total, 0.0);
  }

  template <class... Idx>
  double& operator()(Idx... idx) {
    return data_[flat({static_cast<std::size_t>(idx)...})];
  }
  template <class... Idx>
  double operator()(Idx... idx) const {
    return data_[flat({static_cast<std::size_t>(idx)...})];
  }

  const std::array<std::size_t, R>& extents() const noexcept { return extents_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool in_range(const std::array<std::size_t, R>& idx) const noexcept {
    for (std::size_t k = 0; k < R; ++k) {
      if (idx[k] >= extents_[k]) return false;
    }
    return true;
  }

 private:
  std::size_t flat(std::array<std::size_t, R> idx) const noexcept {
    std::size_t f = 0;
    for (std::size_t k = 0; k < R; ++k) f = f * extents_[k] + idx[k];
    return f;
  }

  std::array<std::size_t, R> extents_{};
  std::vector<double> data_;
};

/// One- and two-body integrals of the electron-nuclear Hamiltonian (Hartree).
///
/// h_e already contains the attraction to classical nuclei (subtracted) and
/// h_n the repulsion from them (added). g_en enters the Hamiltonian with a
/// minus sign. core_energy holds the classical nuclear repulsion and any
/// frozen-core constant.
struct IntegralSet {
  Tensor<2> h_e;
  Tensor<2> h_n;
  Tensor<4> g_ee;
  Tensor<4> g_nn;
  Tensor<4> g_en;  // [i][j][K][L]
  double core_energy = 0.0;

  IntegralSet() = default;
  IntegralSet(std::size_t electron_modes, std::size_t nuclear_modes)
      : h_e({electron_modes, electron_modes}),
        h_n({nuclear_modes, nuclear_modes}),
        g_ee({electron_modes, electron_modes, electron_modes, electron_modes}),
        g_nn({nuclear_modes, nuclear_modes, nuclear_modes, nuclear_modes}),
        g_en({electron_modes, electron_modes, nuclear_modes, nuclear_modes}) {}

  std::size_t electron_modes() const noexcept { return h_e.extents()[0]; }
  std::size_t nuclear_modes() const noexcept { return h_n.extents()[0]; }

  /// Checks finiteness, consistent extents and the Hermiticity pattern
  ///   h[p][q] = h[q][p],  g[p][q][r][s] = g[q][p][s][r]
  /// required for a Hermitian operator.
  void validate(double tol = 1e-10) const {
    const std::size_t ne = electron_modes();
    const std::size_t nn = nuclear_modes();
    if (h_e.extents() != std::array<std::size_t, 2>{ne, ne} || h_n.extents() != std::array<std::size_t, 2>{nn, nn} ||
        g_ee.extents() != std::array<std::size_t, 4>{ne, ne, ne, ne} ||
        g_nn.extents() != std::array<std::size_t, 4>{nn, nn, nn, nn} ||
        g_en.extents() != std::array<std::size_t, 4>{ne, ne, nn, nn}) {
      throw DimensionError("integral tensor extents are inconsistent");
    }
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!std::isfinite(core_energy) || !finite(h_e.data()) || !finite(h_n.data()) || !finite(g_ee.data()) ||
        !finite(g_nn.data()) || !finite(g_en.data())) {
      throw ValidationError("integrals contain non-finite entries");
    }
    auto check2 = [tol](const Tensor<2>& h, const char* name) {
      const auto n = h.extents()[0];
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
          if (std::abs(h(p, q) - h(q, p)) > tol)
            throw ValidationError(std::string(name) + " is not symmetric at (" + std::to_string(p) + "," +
                                  std::to_string(q) + ")");
    };
    auto check4 = [tol](const Tensor<4>& g, const char* name) {
      const auto& e = g.extents();
      for (std::size_t p = 0; p < e[0]; ++p)
        for (std::size_t q = 0; q < e[1]; ++q)
          for (std::size_t r = 0; r < e[2]; ++r)
            for (std::size_t s = 0; s < e[3]; ++s)
              if (std::abs(g(p, q, r, s) - g(q, p, s, r)) > tol)
                throw ValidationError(std::string(name) + " breaks g[p][q][r][s] = g[q][p][s][r] at (" +
                                      std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(r) + "," +
                                      std::to_string(s) + ")");
    };
    check2(h_e, "h_e");
    check2(h_n, "h_n");
    check4(g_ee, "g_ee");
    check4(g_nn, "g_nn");
    check4(g_en, "g_en");
  }
};

/// Compiles
///   sum h_e a+_i a_j + sum h_n a+_I a_J
///   + 1/2 sum g_ee a+_i a+_k a_l a_j + 1/2 sum g_nn a+_I a+_K a_L a_J
///   - sum g_en a+_i a+_K a_L a_j + core_energy
/// onto the layout's qubit register (tapered when the layout says so).
inline PauliSum build_hamiltonian(const IntegralSet& ints, const SectorLayout& layout) {
  if (ints.electron_modes() != layout.electron_modes() || ints.nuclear_modes() != layout.nuclear_modes()) {
    throw DimensionError("integral dimensions (" + std::to_string(ints.electron_modes()) + "," +
                         std::to_string(ints.nuclear_modes()) + ") do not match layout (" +
                         std::to_string(layout.electron_modes()) + "," + std::to_string(layout.nuclear_modes()) +
                         ")");
  }
  ints.validate();
  const std::size_t ne = ints.electron_modes();
  const std::size_t nn = ints.nuclear_modes();
  const std::size_t n = layout.full_qubits();

  auto lowered = [&](Sector s, std::size_t count) {
    std::vector<PauliSum> cr, an;
    for (std::size_t j = 0; j < count; ++j) {
      cr.push_back(lower_op(s, j, OpKind::create, layout));
      an.push_back(lower_op(s, j, OpKind::annihilate, layout));
    }
    return std::pair{cr, an};
  };
  const auto [ec, ea] = lowered(Sector::electron, ne);
  const auto [nc, na] = lowered(Sector::nuclear, nn);

  std::vector<PauliTerm> terms;
  auto add = [&](const PauliSum& s, double w) {
    for (const auto& t : s) terms.emplace_back(n, t.letters(), t.coefficient() * w);
  };
  terms.emplace_back(n, PauliString{}, ints.core_energy);

  for (std::size_t i = 0; i < ne; ++i)
    for (std::size_t j = 0; j < ne; ++j)
      if (ints.h_e(i, j) != 0.0) add(ec[i] * ea[j], ints.h_e(i, j));
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j)
      if (ints.h_n(i, j) != 0.0) add(nc[i] * na[j], ints.h_n(i, j));

  auto two_body = [&](const Tensor<4>& g, const std::vector<PauliSum>& c1, const std::vector<PauliSum>& a1,
                      const std::vector<PauliSum>& c2, const std::vector<PauliSum>& a2, double scale) {
    const auto& e = g.extents();
    for (std::size_t i = 0; i < e[0]; ++i)
      for (std::size_t j = 0; j < e[1]; ++j)
        for (std::size_t k = 0; k < e[2]; ++k)
          for (std::size_t l = 0; l < e[3]; ++l) {
            const double v = g(i, j, k, l);
            if (v == 0.0) continue;
            // a+_i a+_k a_l a_j
            add(c1[i] * c2[k] * a2[l] * a1[j], scale * v);
          }
  };
  two_body(ints.g_ee, ec, ea, ec, ea, 0.5);
  two_body(ints.g_nn, nc, na, nc, na, 0.5);
  two_body(ints.g_en, ec, ea, nc, na, -1.0);

  PauliSum full(n, terms);
  return taper(full, layout).hermitized(1e-10);
}

// ---------------------------------------------------------------------------
// Integral text file
//
//   MODES <electron_modes> <nuclear_modes>      (mandatory, first entry)
//   E_CORE <val>
//   HE <i> <j> <val>
//   HN <I> <J> <val>
//   GEE <i> <j> <k> <l> <val>
//   GNN <I> <J> <K> <L> <val>
//   GEN <i> <j> <K> <L> <val>
//
// 0-based indices, unlisted entries zero. The Hermitian partner of each
// entry is filled in automatically; listing both with different values is an
// error.

namespace detail {

template <std::size_t R>
void set_with_partner(Tensor<R>& t, std::array<std::size_t, R> idx, std::array<std::size_t, R> partner, double v,
                      std::set<std::array<std::size_t, R>>& explicit_entries, const std::string& source, int line,
                      double tol = 1e-10) {
  if (!t.in_range(idx)) throw ParseError(source, line, "index out of range");
  auto conflict = [&](const std::array<std::size_t, R>& key) {
    return explicit_entries.count(key) && std::abs(std::apply([&](auto... k) { return t(k...); }, key) - v) > tol;
  };
  if (conflict(idx) || conflict(partner)) {
    throw ParseError(source, line, "entry conflicts with a previously listed value or its Hermitian partner");
  }
  explicit_entries.insert(idx);
  std::apply([&](auto... k) { t(k...) = v; }, idx);
  std::apply([&](auto... k) { t(k...) = v; }, partner);
}

}  // namespace detail

inline IntegralSet read_integrals(std::istream& in, const std::string& source = "<integrals>") {
  std::string line;
  int lineno = 0;
  bool have_modes = false;
  bool have_core = false;
  IntegralSet ints;
  std::set<std::array<std::size_t, 2>> seen_he, seen_hn;
  std::set<std::array<std::size_t, 4>> seen_gee, seen_gnn, seen_gen;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::strip_comment(line);
    if (detail::is_blank(body)) continue;
    std::istringstream ls(body);
    std::string key;
    ls >> key;
    auto read_indices = [&](auto& arr) {
      for (auto& v : arr) {
        long long x = -1;
        ls >> x;
        if (ls.fail() || x < 0) throw ParseError(source, lineno, "expected non-negative integer index");
        v = static_cast<std::size_t>(x);
      }
    };
    auto read_value = [&]() {
      double v = 0.0;
      ls >> v;
      if (ls.fail()) throw ParseError(source, lineno, "expected numeric value");
      std::string extra;
      if (ls >> extra) throw ParseError(source, lineno, "trailing tokens");
      if (!std::isfinite(v)) throw ParseError(source, lineno, "non-finite value");
      return v;
    };

    if (key == "MODES") {
      if (have_modes) throw ParseError(source, lineno, "duplicate MODES line");
      std::array<std::size_t, 2> m{};
      read_indices(m);
      std::string extra;
      if (ls >> extra) throw ParseError(source, lineno, "trailing tokens");
      if (m[0] < 1 || m[1] < 1) throw ParseError(source, lineno, "mode counts must be >= 1");
      if (m[0] + m[1] > 64) throw ParseError(source, lineno, "more than 64 modes in total");
      ints = IntegralSet(m[0], m[1]);
      have_modes = true;
      continue;
    }
    if (!have_modes) throw ParseError(source, lineno, "MODES line must come first");
    if (key == "E_CORE") {
      if (have_core) throw ParseError(source, lineno, "duplicate E_CORE line");
      ints.core_energy = read_value();
      have_core = true;
    } else if (key == "HE" || key == "HN") {
      std::array<std::size_t, 2> idx{};
      read_indices(idx);
      const double v = read_value();
      auto& t = key == "HE" ? ints.h_e : ints.h_n;
      auto& seen = key == "HE" ? seen_he : seen_hn;
      detail::set_with_partner(t, idx, {idx[1], idx[0]}, v, seen, source, lineno);
    } else if (key == "GEE" || key == "GNN" || key == "GEN") {
      std::array<std::size_t, 4> idx{};
      read_indices(idx);
      const double v = read_value();
      auto& t = key == "GEE" ? ints.g_ee : key == "GNN" ? ints.g_nn : ints.g_en;
      auto& seen = key == "GEE" ? seen_gee : key == "GNN" ? seen_gnn : seen_gen;
      detail::set_with_partner(t, idx, {idx[1], idx[0], idx[3], idx[2]}, v, seen, source, lineno);
    } else {
      throw ParseError(source, lineno, "unknown record '" + key + "'");
    }
  }
  if (!have_modes) throw ParseError(source, lineno, "missing MODES line");
  try {
    ints.validate();
  } catch (const Error& e) {
    throw ParseError(source, lineno, e.what());
  }
  return ints;
}

inline IntegralSet load_integrals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_integrals(in, path);
}

/// Writes every non-zero entry; round-trips through read_integrals.
inline void write_integrals(std::ostream& out, const IntegralSet& ints) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "MODES " << ints.electron_modes() << ' ' << ints.nuclear_modes() << '\n';
  out << "E_CORE " << ints.core_energy << '\n';
  auto dump2 = [&](const char* key, const Tensor<2>& t) {
    const auto& e = t.extents();
    for (std::size_t p = 0; p < e[0]; ++p)
      for (std::size_t q = 0; q < e[1]; ++q)
        if (t(p, q) != 0.0) out << key << ' ' << p << ' ' << q << ' ' << t(p, q) << '\n';
  };
  auto dump4 = [&](const char* key, const Tensor<4>& t) {
    const auto& e = t.extents();
    for (std::size_t p = 0; p < e[0]; ++p)
      for (std::size_t q = 0; q < e[1]; ++q)
        for (std::size_t r = 0; r < e[2]; ++r)
          for (std::size_t s = 0; s < e[3]; ++s)
            if (t(p, q, r, s) != 0.0)
              out << key << ' ' << p << ' ' << q << ' ' << r << ' ' << s << ' ' << t(p, q, r, s) << '\n';
  };
  dump2("HE", ints.h_e);
  dump2("HN", ints.h_n);
  dump4("GEE", ints.g_ee);
  dump4("GNN", ints.g_nn);
  dump4("GEN", ints.g_en);
}

// ---------------------------------------------------------------------------
// Mixing schedule

/// Weights of H(t) = alpha H_L + beta H_M + gamma H_R.
struct ScheduleWeights {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;

  ScheduleWeights() = default;
  ScheduleWeights(double a, double b, double g) : alpha(a), beta(b), gamma(g) {
    auto ok = [](double v) { return std::isfinite(v) && v >= -1e-12 && v <= 1.0 + 1e-12; };
    if (!ok(a) || !ok(b) || !ok(g)) throw RangeError("schedule weight outside [0, 1]");
    if (std::abs(a + b + g - 1.0) > 1e-12) throw RangeError("schedule weights do not sum to 1");
  }
};

enum class ScheduleShape { pairwise_linear };

inline const char* to_string(ScheduleShape) { return "pairwise_linear"; }

struct Schedule {
  double t_final = 1.0;
  ScheduleShape shape = ScheduleShape::pairwise_linear;

  Schedule() = default;
  explicit Schedule(double t_f, ScheduleShape s = ScheduleShape::pairwise_linear) : t_final(t_f), shape(s) {
    if (!(std::isfinite(t_f) && t_f > 0.0)) throw ArgumentError("schedule t_f must be positive and finite");
  }
};

/// Pairwise linear ramps: H_L -> H_M over the first half, H_M -> H_R over the
/// second. Times within 1e-9 * t_f past either end are clamped.
inline ScheduleWeights schedule_weights(double t, const Schedule& sched) {
  const double tf = sched.t_final;
  const double slack = 1e-9 * std::max(1.0, tf);
  if (!std::isfinite(t) || t < -slack || t > tf + slack) {
    throw RangeError("schedule time " + std::to_string(t) + " outside [0, " + std::to_string(tf) + "]");
  }
  t = std::clamp(t, 0.0, tf);
  const double u = 2.0 * t / tf;
  if (u <= 1.0) return {1.0 - u, u, 0.0};
  return {0.0, 2.0 - u, u - 1.0};
}

inline PauliSum mix(const PauliSum& h_l, const PauliSum& h_m, const PauliSum& h_r, const ScheduleWeights& w) {
  if (h_l.num_qubits() != h_m.num_qubits() || h_l.num_qubits() != h_r.num_qubits()) {
    throw DimensionError("mix: Hamiltonians act on different registers");
  }
  if (!h_l.is_hermitian() || !h_m.is_hermitian() || !h_r.is_hermitian()) {
    throw ContractError("mix: inputs must be Hermitian");
  }
  const std::size_t n = h_l.num_qubits();
  std::vector<PauliTerm> terms;
  terms.reserve(h_l.size() + h_m.size() + h_r.size());
  for (const auto& [h, c] : {std::pair{&h_l, w.alpha}, std::pair{&h_m, w.beta}, std::pair{&h_r, w.gamma}}) {
    if (c == 0.0) continue;
    for (const auto& t : *h) terms.emplace_back(n, t.letters(), t.coefficient() * c);
  }
  return PauliSum(n, terms);
}

// ---------------------------------------------------------------------------
// Synthetic three-site proton-transfer model

enum class Site : std::size_t { L = 0, M = 1, R = 2 };

inline const char* to_string(Site s) {
  switch (s) {
    case Site::L: return "L";
    case Site::M: return "M";
    default: return "R";
  }
}

/// Parameters of the synthetic model (Hartree).
///
/// The electronic part is two spatial orbitals (spin orbital 2p + sigma)
/// holding two electrons. The variants differ in the orbital mixing and in
/// which site the low pair is tied to.
struct SyntheticParams {
  double coupling = 0.005;       // nuclear nearest-neighbour hopping magnitude
  double detuning = 0.02;        // depth of the variant's own site
  double barrier = 0.005;        // raise of the middle site
  double en_coupling = 0.01;     // low pair <-> outer sites, high pair <-> middle site
  double variant_tie = 0.0018;   // extra low pair <-> own-site attraction of each variant
  double orbital_gap = 0.0;      // high minus low orbital energy
  double mixing_side = 0.03;     // low/high orbital mixing in H_L and H_R
  double mixing_middle = 0.025;  // low/high orbital mixing in H_M
  double onsite_repulsion = 0.02;
};

inline constexpr std::size_t kSyntheticElectronModes = 4;
inline constexpr std::size_t kSyntheticNuclearModes = 3;

/// Integrals of one variant of the synthetic model: one proton on three
/// sites and two electrons in four spin orbitals.
inline IntegralSet synthetic_integrals(const SyntheticParams& p, Site variant) {
  for (double v : {p.coupling, p.detuning, p.barrier, p.en_coupling, p.orbital_gap, p.mixing_side, p.mixing_middle,
                   p.onsite_repulsion, p.variant_tie}) {
    if (!std::isfinite(v)) throw ArgumentError("synthetic model parameters must be finite");
  }
  if (!(p.barrier > 0.0)) throw ArgumentError("synthetic model barrier must be positive");
  IntegralSet ints(kSyntheticElectronModes, kSyntheticNuclearModes);
  const auto x = static_cast<std::size_t>(variant);
  const auto l = static_cast<std::size_t>(Site::L);
  const auto m = static_cast<std::size_t>(Site::M);
  const auto r = static_cast<std::size_t>(Site::R);

  // Nuclear sector: shared hopping, variant-dependent site energies.
  ints.h_n(x, x) = -p.detuning;
  ints.h_n(m, m) += p.barrier;
  ints.h_n(l, m) = ints.h_n(m, l) = -p.coupling;
  ints.h_n(m, r) = ints.h_n(r, m) = -p.coupling;

  // Electronic sector.
  const double mixing = variant == Site::M ? p.mixing_middle : p.mixing_side;
  for (std::size_t sigma = 0; sigma < 2; ++sigma) {
    const std::size_t lo = sigma;
    const std::size_t hi = 2 + sigma;
    ints.h_e(hi, hi) = p.orbital_gap;
    ints.h_e(lo, hi) = ints.h_e(hi, lo) = -mixing;
  }
  for (std::size_t orb = 0; orb < 2; ++orb) {
    const std::size_t a = 2 * orb;
    const std::size_t b = 2 * orb + 1;
    ints.g_ee(a, a, b, b) = p.onsite_repulsion;
    ints.g_ee(b, b, a, a) = p.onsite_repulsion;
  }

  // Mixed sector: the low orbital pair follows a proton on an outer site, the
  // high pair a proton on the middle site. Each variant also ties the low
  // pair to its own site.
  for (std::size_t i = 0; i < 2; ++i) {
    ints.g_en(i, i, l, l) += p.en_coupling;
    ints.g_en(i, i, r, r) += p.en_coupling;
    ints.g_en(i + 2, i + 2, m, m) += p.en_coupling;
    ints.g_en(i, i, x, x) += p.variant_tie;
  }
  return ints;
}

struct LmrHamiltonians {
  PauliSum left;
  PauliSum middle;
  PauliSum right;

  const PauliSum& operator[](Site s) const noexcept {
    return s == Site::L ? left : s == Site::M ? middle : right;
  }
};

/// Default register of the synthetic model: 4 electron + 3 nuclear qubits.
inline SectorLayout synthetic_layout() {
  return SectorLayout::jordan_wigner(kSyntheticElectronModes, kSyntheticNuclearModes);
}

inline LmrHamiltonians synthetic_lmr(const SyntheticParams& p, const SectorLayout& layout = synthetic_layout()) {
  return {build_hamiltonian(synthetic_integrals(p, Site::L), layout),
          build_hamiltonian(synthetic_integrals(p, Site::M), layout),
          build_hamiltonian(synthetic_integrals(p, Site::R), layout)};
}

}  // namespace nedyn
