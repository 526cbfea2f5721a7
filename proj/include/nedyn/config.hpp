#pragma once

// Sectioned key = value run configuration.
//
//   [source]      kind = synthetic | integrals | pauli, left/middle/right paths,
//                 synthetic model parameters
//   [layout]      modes, mappings, tapering, particle sector
//   [schedule]    t_final, shape
//   [plan]        dt, n_steps, propagator, stride
//   [reference]   enabled, propagator, dt
//   [observables] tracked_modes, nuclear_sites
//   [output]      csv, reference_csv, metadata
//   [run]         seed
//
// '#' starts a comment. Unknown keys are errors; a [provenance] section is
// skipped so a metadata sidecar parses as a configuration.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nedyn/errors.hpp"
#include "nedyn/fermion.hpp"
#include "nedyn/hamiltonian.hpp"
#include "nedyn/pauli_io.hpp"
#include "nedyn/propagators.hpp"

namespace nedyn {

enum class SourceKind { synthetic, integrals, pauli };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::synthetic: return "synthetic";
    case SourceKind::integrals: return "integrals";
    default: return "pauli";
  }
}

struct RunConfig {
  SourceKind source = SourceKind::synthetic;
  std::array<std::string, 3> files;  // L, M, R
  SyntheticParams synthetic;

  std::optional<std::size_t> electron_modes;
  std::optional<std::size_t> nuclear_modes;
  Mapping electron_mapping = Mapping::jordan_wigner;
  Mapping nuclear_mapping = Mapping::jordan_wigner;
  Tapering electron_taper;
  Tapering nuclear_taper;
  std::optional<double> electrons;  // particle sector for ground states
  std::optional<double> nuclei;

  double t_final = 4000.0;
  ScheduleShape shape = ScheduleShape::pairwise_linear;

  double dt = 1.0;
  std::size_t n_steps = 4000;
  Propagator propagator = Propagator::trotter1;
  std::size_t stride = 1;

  bool reference = false;
  Propagator reference_propagator = Propagator::rk4;
  double reference_dt = 0.1;

  std::vector<std::size_t> tracked_modes{0, 1};
  std::array<std::size_t, 3> nuclear_sites{0, 1, 2};

  std::string csv = "run.csv";
  std::string reference_csv;
  std::string metadata = "run.meta";

  std::uint64_t seed = 0;

  /// Directory relative input paths are resolved against.
  std::filesystem::path base_dir;

  Schedule schedule() const { return Schedule(t_final, shape); }
  PropagationPlan plan() const { return {dt, n_steps, propagator, stride}; }

  std::string resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? path : (base_dir / p).lexically_normal().string();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest text that reads back to the same double.
inline std::string format_short(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class ConfigReader {
 public:
  ConfigReader(std::string source, int line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

  double real(const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) fail("expected a finite number, got '" + v + "'");
    return x;
  }
  std::size_t count(const std::string& v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      fail("expected a non-negative integer, got '" + v + "'");
    }
    return static_cast<std::size_t>(std::stoull(v));
  }
  bool flag(const std::string& v) const {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail("expected true or false, got '" + v + "'");
  }
  Propagator propagator(const std::string& v) const {
    if (v == "trotter1" || v == "trotter") return Propagator::trotter1;
    if (v == "rk4") return Propagator::rk4;
    if (v == "exact") return Propagator::exact;
    fail("unknown propagator '" + v + "'");
  }
  Mapping mapping(const std::string& v) const {
    if (v == "jordan_wigner" || v == "jw") return Mapping::jordan_wigner;
    if (v == "parity") return Mapping::parity;
    fail("unknown mapping '" + v + "'");
  }
  Tapering tapering(const std::string& v) const {
    Tapering t;
    for (const auto& item : split_list(v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail("tapering entries are <position>:<+1|-1>");
      t.removed.push_back(count(trim(item.substr(0, colon))));
      const std::string ev = trim(item.substr(colon + 1));
      if (ev == "+1" || ev == "1") {
        t.eigenvalues.push_back(1);
      } else if (ev == "-1") {
        t.eigenvalues.push_back(-1);
      } else {
        fail("tapering eigenvalue must be +1 or -1");
      }
    }
    return t;
  }
  std::vector<std::size_t> counts(const std::string& v) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(count(item));
    return out;
  }

 private:
  std::string source_;
  int line_;
};

inline std::string tapering_text(const Tapering& t) {
  std::string out;
  for (std::size_t k = 0; k < t.removed.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(t.removed[k]) + (t.eigenvalues[k] > 0 ? ":+1" : ":-1");
  }
  return out;
}

inline std::string counts_text(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + std::to_string(v[k]);
  return out;
}

}  // namespace detail

/// Parses a configuration. Throws ParseError (with line numbers) for syntax
/// and value errors and ConfigError for cross-field inconsistencies.
inline RunConfig read_config(std::istream& in, const std::string& source = "<config>") {
  RunConfig c;
  std::string section;
  std::string line;
  int lineno = 0;
  bool have_kind = false;
  bool have_n_steps = false;
  std::map<std::string, int> seen;

  using Setter = std::function<void(const detail::ConfigReader&, const std::string&)>;
  auto& p = c.synthetic;
  const std::map<std::string, std::map<std::string, Setter>> table = {
      {"source",
       {{"kind",
         [&](const auto& r, const auto& v) {
           have_kind = true;
           if (v == "synthetic") c.source = SourceKind::synthetic;
           else if (v == "integrals") c.source = SourceKind::integrals;
           else if (v == "pauli") c.source = SourceKind::pauli;
           else r.fail("source kind must be synthetic, integrals or pauli");
         }},
        {"left", [&](const auto&, const auto& v) { c.files[0] = v; }},
        {"middle", [&](const auto&, const auto& v) { c.files[1] = v; }},
        {"right", [&](const auto&, const auto& v) { c.files[2] = v; }},
        {"coupling", [&](const auto& r, const auto& v) { p.coupling = r.real(v); }},
        {"detuning", [&](const auto& r, const auto& v) { p.detuning = r.real(v); }},
        {"barrier", [&](const auto& r, const auto& v) { p.barrier = r.real(v); }},
        {"en_coupling", [&](const auto& r, const auto& v) { p.en_coupling = r.real(v); }},
        {"variant_tie", [&](const auto& r, const auto& v) { p.variant_tie = r.real(v); }},
        {"orbital_gap", [&](const auto& r, const auto& v) { p.orbital_gap = r.real(v); }},
        {"mixing_side", [&](const auto& r, const auto& v) { p.mixing_side = r.real(v); }},
        {"mixing_middle", [&](const auto& r, const auto& v) { p.mixing_middle = r.real(v); }},
        {"onsite_repulsion", [&](const auto& r, const auto& v) { p.onsite_repulsion = r.real(v); }}}},
      {"layout",
       {{"electron_modes", [&](const auto& r, const auto& v) { c.electron_modes = r.count(v); }},
        {"nuclear_modes", [&](const auto& r, const auto& v) { c.nuclear_modes = r.count(v); }},
        {"electron_mapping", [&](const auto& r, const auto& v) { c.electron_mapping = r.mapping(v); }},
        {"nuclear_mapping", [&](const auto& r, const auto& v) { c.nuclear_mapping = r.mapping(v); }},
        {"electron_taper", [&](const auto& r, const auto& v) { c.electron_taper = r.tapering(v); }},
        {"nuclear_taper", [&](const auto& r, const auto& v) { c.nuclear_taper = r.tapering(v); }},
        {"electrons", [&](const auto& r, const auto& v) { c.electrons = r.real(v); }},
        {"nuclei", [&](const auto& r, const auto& v) { c.nuclei = r.real(v); }}}},
      {"schedule",
       {{"t_final", [&](const auto& r, const auto& v) { c.t_final = r.real(v); }},
        {"shape",
         [&](const auto& r, const auto& v) {
           if (v != "pairwise_linear") r.fail("unknown schedule shape '" + v + "'");
           c.shape = ScheduleShape::pairwise_linear;
         }}}},
      {"plan",
       {{"dt", [&](const auto& r, const auto& v) { c.dt = r.real(v); }},
        {"n_steps",
         [&](const auto& r, const auto& v) {
           c.n_steps = r.count(v);
           have_n_steps = true;
         }},
        {"propagator", [&](const auto& r, const auto& v) { c.propagator = r.propagator(v); }},
        {"stride", [&](const auto& r, const auto& v) { c.stride = r.count(v); }}}},
      {"reference",
       {{"enabled", [&](const auto& r, const auto& v) { c.reference = r.flag(v); }},
        {"propagator", [&](const auto& r, const auto& v) { c.reference_propagator = r.propagator(v); }},
        {"dt", [&](const auto& r, const auto& v) { c.reference_dt = r.real(v); }}}},
      {"observables",
       {{"tracked_modes", [&](const auto& r, const auto& v) { c.tracked_modes = r.counts(v); }},
        {"nuclear_sites",
         [&](const auto& r, const auto& v) {
           const auto s = r.counts(v);
           if (s.size() != 3) r.fail("nuclear_sites needs exactly three modes (L, M, R)");
           c.nuclear_sites = {s[0], s[1], s[2]};
         }}}},
      {"output",
       {{"csv", [&](const auto&, const auto& v) { c.csv = v; }},
        {"reference_csv", [&](const auto&, const auto& v) { c.reference_csv = v; }},
        {"metadata", [&](const auto&, const auto& v) { c.metadata = v; }}}},
      {"run", {{"seed", [&](const auto& r, const auto& v) { c.seed = r.count(v); }}}},
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    const detail::ConfigReader reader(source, lineno);
    if (body.front() == '[') {
      if (body.back() != ']') reader.fail("malformed section header");
      section = detail::trim(body.substr(1, body.size() - 2));
      if (section != "provenance" && !table.count(section)) reader.fail("unknown section [" + section + "]");
      continue;
    }
    if (section == "provenance") continue;
    if (section.empty()) reader.fail("key outside of any section");
    const auto eq = body.find('=');
    if (eq == std::string::npos) reader.fail("expected 'key = value'");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) reader.fail("unknown key '" + key + "' in [" + section + "]");
    if (seen[section + "." + key]++) reader.fail("duplicate key '" + key + "'");
    it->second(reader, value);
  }

  if (!have_kind) throw ParseError(source, lineno, "missing [source] kind");
  if (c.source != SourceKind::synthetic) {
    for (const auto& f : c.files) {
      if (f.empty()) throw ConfigError("source '" + std::string(to_string(c.source)) + "' needs left, middle and right files");
    }
  }
  if (c.source == SourceKind::pauli && (!c.electron_modes || !c.nuclear_modes)) {
    throw ConfigError("pauli sources need [layout] electron_modes and nuclear_modes");
  }
  if (!(c.t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.reference_dt > 0.0)) throw ConfigError("reference dt must be positive");
  if (!have_n_steps) c.n_steps = static_cast<std::size_t>(std::llround(c.t_final / c.dt));
  c.plan().validate(c.schedule());
  if (c.reference && std::abs(std::round(c.t_final / c.reference_dt) * c.reference_dt - c.t_final) >
                         1e-9 * std::max(1.0, c.t_final)) {
    throw ConfigError("reference dt does not divide t_final");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  RunConfig c = read_config(in, path);
  c.base_dir = std::filesystem::absolute(path).parent_path();
  return c;
}

/// Canonical text of a configuration. Input paths are written resolved and
/// absolute so the text reproduces the run from any directory.
inline void write_config(std::ostream& out, const RunConfig& c) {
  const auto format_double = detail::format_short;
  auto abs_input = [&](const std::string& f) {
    return f.empty() ? f : std::filesystem::absolute(c.resolve(f)).lexically_normal().string();
  };
  out << "[source]\nkind = " << to_string(c.source) << '\n';
  if (c.source == SourceKind::synthetic) {
    const auto& p = c.synthetic;
    out << "coupling = " << format_double(p.coupling) << '\n'
        << "detuning = " << format_double(p.detuning) << '\n'
        << "barrier = " << format_double(p.barrier) << '\n'
        << "en_coupling = " << format_double(p.en_coupling) << '\n'
        << "variant_tie = " << format_double(p.variant_tie) << '\n'
        << "orbital_gap = " << format_double(p.orbital_gap) << '\n'
        << "mixing_side = " << format_double(p.mixing_side) << '\n'
        << "mixing_middle = " << format_double(p.mixing_middle) << '\n'
        << "onsite_repulsion = " << format_double(p.onsite_repulsion) << '\n';
  } else {
    out << "left = " << abs_input(c.files[0]) << '\n'
        << "middle = " << abs_input(c.files[1]) << '\n'
        << "right = " << abs_input(c.files[2]) << '\n';
  }
  out << "\n[layout]\n";
  if (c.electron_modes) out << "electron_modes = " << *c.electron_modes << '\n';
  if (c.nuclear_modes) out << "nuclear_modes = " << *c.nuclear_modes << '\n';
  out << "electron_mapping = " << to_string(c.electron_mapping) << '\n'
      << "nuclear_mapping = " << to_string(c.nuclear_mapping) << '\n';
  if (!c.electron_taper.empty()) out << "electron_taper = " << detail::tapering_text(c.electron_taper) << '\n';
  if (!c.nuclear_taper.empty()) out << "nuclear_taper = " << detail::tapering_text(c.nuclear_taper) << '\n';
  if (c.electrons) out << "electrons = " << format_double(*c.electrons) << '\n';
  if (c.nuclei) out << "nuclei = " << format_double(*c.nuclei) << '\n';
  out << "\n[schedule]\nt_final = " << format_double(c.t_final) << "\nshape = " << to_string(c.shape) << '\n';
  out << "\n[plan]\ndt = " << format_double(c.dt) << "\nn_steps = " << c.n_steps
      << "\npropagator = " << to_string(c.propagator) << "\nstride = " << c.stride << '\n';
  out << "\n[reference]\nenabled = " << (c.reference ? "true" : "false")
      << "\npropagator = " << to_string(c.reference_propagator) << "\ndt = " << format_double(c.reference_dt) << '\n';
  out << "\n[observables]\ntracked_modes = " << detail::counts_text(c.tracked_modes)
      << "\nnuclear_sites = " << detail::counts_text({c.nuclear_sites.begin(), c.nuclear_sites.end()}) << '\n';
  out << "\n[output]\ncsv = " << c.csv << '\n';
  if (!c.reference_csv.empty()) out << "reference_csv = " << c.reference_csv << '\n';
  out << "metadata = " << c.metadata << '\n';
  out << "\n[run]\nseed = " << c.seed << '\n';
}

inline std::string config_text(const RunConfig& c) {
  std::ostringstream s;
  write_config(s, c);
  return s.str();
}

}  // namespace nedyn
