#pragma once

// Batch commands behind the command-line tool: run, ground, sweep-dt, map.

#include <Eigen/Core>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nedyn/config.hpp"
#include "nedyn/detail/parallel.hpp"
#include "nedyn/errors.hpp"
#include "nedyn/fermion.hpp"
#include "nedyn/hamiltonian.hpp"
#include "nedyn/observables.hpp"
#include "nedyn/pauli_io.hpp"
#include "nedyn/propagators.hpp"
#include "nedyn/spectral.hpp"
#include "nedyn/version.hpp"

namespace nedyn {

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitResource = 4 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ResourceError*>(&e) || dynamic_cast<const std::bad_alloc*>(&e)) return kExitResource;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const ContractError*>(&e)) return kExitNumerical;
  return kExitConfig;
}

/// Hamiltonians, layout and particle sector resolved from a configuration.
struct Problem {
  SectorLayout layout;
  LmrHamiltonians h;
  SectorFilter filter;
};

inline SectorLayout layout_from(const RunConfig& c, std::size_t electron_modes, std::size_t nuclear_modes) {
  if ((c.electron_modes && *c.electron_modes != electron_modes) ||
      (c.nuclear_modes && *c.nuclear_modes != nuclear_modes)) {
    throw ConfigError("[layout] mode counts disagree with the Hamiltonian source");
  }
  try {
    return SectorLayout({electron_modes, c.electron_mapping, c.electron_taper},
                        {nuclear_modes, c.nuclear_mapping, c.nuclear_taper});
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("layout: ") + e.what());
  }
}

inline Problem build_problem(const RunConfig& c) {
  Problem p;
  std::optional<double> electrons = c.electrons;
  std::optional<double> nuclei = c.nuclei;
  switch (c.source) {
    case SourceKind::synthetic: {
      p.layout = layout_from(c, kSyntheticElectronModes, kSyntheticNuclearModes);
      p.h = synthetic_lmr(c.synthetic, p.layout);
      if (!electrons) electrons = 2.0;
      if (!nuclei) nuclei = 1.0;
      break;
    }
    case SourceKind::integrals: {
      std::array<IntegralSet, 3> ints;
      for (std::size_t k = 0; k < 3; ++k) ints[k] = load_integrals(c.resolve(c.files[k]));
      for (std::size_t k = 1; k < 3; ++k) {
        if (ints[k].electron_modes() != ints[0].electron_modes() || ints[k].nuclear_modes() != ints[0].nuclear_modes()) {
          throw ConfigError("integral files disagree on MODES");
        }
      }
      p.layout = layout_from(c, ints[0].electron_modes(), ints[0].nuclear_modes());
      p.h = {build_hamiltonian(ints[0], p.layout), build_hamiltonian(ints[1], p.layout),
             build_hamiltonian(ints[2], p.layout)};
      break;
    }
    case SourceKind::pauli: {
      p.layout = layout_from(c, *c.electron_modes, *c.nuclear_modes);
      std::array<PauliSum, 3> sums;
      for (std::size_t k = 0; k < 3; ++k) {
        sums[k] = load_pauli_sum(c.resolve(c.files[k]));
        if (sums[k].num_qubits() != p.layout.qubits()) {
          throw ConfigError(c.files[k] + ": " + std::to_string(sums[k].num_qubits()) + " qubits, layout has " +
                            std::to_string(p.layout.qubits()));
        }
        if (!sums[k].is_hermitian()) throw ConfigError(c.files[k] + ": Hamiltonian is not Hermitian");
      }
      p.h = {sums[0].hermitized(), sums[1].hermitized(), sums[2].hermitized()};
      break;
    }
  }
  const NumberOperatorBank bank(p.layout);
  if (electrons) p.filter.push_back({bank.total(Sector::electron), *electrons});
  if (nuclei) p.filter.push_back({bank.total(Sector::nuclear), *nuclei});
  return p;
}

inline std::array<GroundState, 3> reference_states(const Problem& p) {
  return {ground_state(p.h.left, p.filter), ground_state(p.h.middle, p.filter), ground_state(p.h.right, p.filter)};
}

inline ObservationSpec observation_spec(const RunConfig& c, const Problem& p, const std::array<GroundState, 3>& refs) {
  for (auto m : c.tracked_modes) {
    if (m >= p.layout.electron_modes()) throw ConfigError("tracked mode " + std::to_string(m) + " out of range");
  }
  for (auto m : c.nuclear_sites) {
    if (m >= p.layout.nuclear_modes()) throw ConfigError("nuclear site " + std::to_string(m) + " out of range");
  }
  ObservationSpec obs(p.layout, {refs[0].state, refs[1].state, refs[2].state}, c.tracked_modes);
  obs.nuclear_sites = c.nuclear_sites;
  return obs;
}

// ---------------------------------------------------------------------------
// CSV

/// Column order: t, E, E_L, E_M, E_R, n_L, n_M, n_R, occ_<mode>..., entropy,
/// F_L, F_M, F_R, norm, N_e, N_p. Values at 17 significant digits.
inline std::string csv_header(const std::vector<std::size_t>& tracked) {
  std::string h = "t,E,E_L,E_M,E_R,n_L,n_M,n_R";
  for (auto m : tracked) h += ",occ_" + std::to_string(m);
  return h + ",entropy,F_L,F_M,F_R,norm,N_e,N_p";
}

inline std::string csv_row(const TimeSeriesRecord& r) {
  std::string line;
  auto put = [&](double v) {
    if (!line.empty()) line += ',';
    line += detail::format_double(v);
  };
  for (double v : {r.t, r.energy, r.energy_left, r.energy_middle, r.energy_right, r.n_left, r.n_middle, r.n_right}) {
    put(v);
  }
  for (double v : r.electron_occupations) put(v);
  for (double v : {r.entropy, r.fidelity_left, r.fidelity_middle, r.fidelity_right, r.norm, r.electrons, r.nuclei}) {
    put(v);
  }
  return line;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::size_t>& tracked) : out_(path), path_(path) {
    if (!out_) throw ConfigError("cannot open " + path + " for writing");
    out_ << csv_header(tracked) << '\n';
    out_.flush();
  }
  void operator()(const TimeSeriesRecord& r) {
    out_ << csv_row(r) << '\n';
    out_.flush();
    if (!out_) throw Error("write to " + path_ + " failed");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// run

struct Drifts {
  double norm = 0.0;
  double electrons = 0.0;
  double nuclei = 0.0;
};

inline Drifts conserved_drifts(const EvolutionResult& r) {
  Drifts d{r.max_norm_drift, 0.0, 0.0};
  const auto& first = r.records.front();
  for (const auto& rec : r.records) {
    d.norm = std::max(d.norm, std::abs(rec.norm - 1.0));
    d.electrons = std::max(d.electrons, std::abs(rec.electrons - first.electrons));
    d.nuclei = std::max(d.nuclei, std::abs(rec.nuclei - first.nuclei));
  }
  return d;
}

struct RunOutcome {
  EvolutionResult result;
  std::optional<EvolutionResult> reference;
  std::array<GroundState, 3> refs;
  double wall_seconds = 0.0;
};

inline std::string reference_csv_path(const RunConfig& c) {
  if (!c.reference_csv.empty()) return c.reference_csv;
  const auto dot = c.csv.rfind('.');
  return (dot == std::string::npos ? c.csv : c.csv.substr(0, dot)) + ".ref.csv";
}

inline void write_metadata(const RunConfig& c, const RunOutcome& o) {
  std::ofstream out(c.metadata);
  if (!out) throw ConfigError("cannot open " + c.metadata + " for writing");
  write_config(out, c);
  const auto d = conserved_drifts(o.result);
  const auto& last = o.result.records.back();
  out << "\n[provenance]\n"
      << "version = " << kVersion << '\n'
      << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
      << "compiler = " << __VERSION__ << '\n'
      << "threads = " << detail::kernel_threads() << '\n'
      << "wall_seconds = " << detail::format_double(o.wall_seconds) << '\n'
      << "records = " << o.result.records.size() << '\n'
      << "norm_drift = " << detail::format_double(d.norm) << '\n'
      << "electron_drift = " << detail::format_double(d.electrons) << '\n'
      << "proton_drift = " << detail::format_double(d.nuclei) << '\n'
      << "final_fidelity_right = " << detail::format_double(last.fidelity_right) << '\n'
      << "final_entropy = " << detail::format_double(last.entropy) << '\n';
  for (std::size_t k = 0; k < 3; ++k) {
    out << "ground_energy_" << to_string(static_cast<Site>(k)) << " = " << detail::format_double(o.refs[k].energy)
        << '\n';
  }
  if (o.reference) {
    const auto& rl = o.reference->records.back();
    out << "reference_final_entropy = " << detail::format_double(rl.entropy) << '\n'
        << "reference_fidelity_deficit = "
        << detail::format_double(1.0 - fidelity(o.result.final_state, o.reference->final_state)) << '\n';
  }
}

/// Evolves from the ground state of H_L and writes the CSV, the optional
/// reference CSV and the metadata sidecar.
inline RunOutcome cmd_run(const RunConfig& c, std::ostream& log = std::clog) {
  const auto start = std::chrono::steady_clock::now();
  const Problem p = build_problem(c);
  RunOutcome o;
  o.refs = reference_states(p);
  for (std::size_t k = 0; k < 3; ++k) {
    if (o.refs[k].degenerate) {
      log << "warning: ground state of H_" << to_string(static_cast<Site>(k)) << " is degenerate (gap "
          << o.refs[k].gap << ")\n";
    }
  }
  const auto obs = observation_spec(c, p, o.refs);
  {
    CsvWriter csv(c.csv, c.tracked_modes);
    o.result = evolve(o.refs[0].state, p.h, c.schedule(), c.plan(), obs, std::ref(csv));
  }
  if (c.reference) {
    const auto n = static_cast<std::size_t>(std::llround(c.t_final / c.reference_dt));
    const std::size_t stride = std::max<std::size_t>(1, n / std::max<std::size_t>(1, c.n_steps / c.stride));
    CsvWriter csv(reference_csv_path(c), c.tracked_modes);
    o.reference = evolve(o.refs[0].state, p.h, c.schedule(), {c.reference_dt, n, c.reference_propagator, stride},
                         obs, std::ref(csv));
  }
  o.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_metadata(c, o);
  return o;
}

// ---------------------------------------------------------------------------
// ground

inline void write_state(const std::string& path, const StateVector& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  for (std::size_t b = 0; b < s.dimension(); ++b) {
    out << b << ' ' << detail::format_double(s[b].real()) << ' ' << detail::format_double(s[b].imag()) << '\n';
  }
}

/// Prints the ground energy at 12 significant digits and writes the state.
inline GroundState cmd_ground(const RunConfig& c, Site which, const std::string& state_path, std::ostream& out,
                              std::ostream& warn) {
  const Problem p = build_problem(c);
  GroundState g = ground_state(p.h[which], p.filter);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", g.energy);
  out << buf << '\n';
  if (g.degenerate) warn << "warning: ground state of H_" << to_string(which) << " is degenerate (gap " << g.gap << ")\n";
  write_state(state_path, g.state);
  return g;
}

// ---------------------------------------------------------------------------
// sweep-dt

struct SweepRow {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::optional<double> fidelity;  // vs the exact oracle on the same grid
  std::optional<double> error;     // Euclidean distance to the exact oracle
  std::optional<double> order;     // log2 error ratio per halving
  double entropy = 0.0;
  std::optional<double> reference_entropy;
  std::optional<double> residual_entropy;  // |s - s_reference|
  double wall_seconds = 0.0;
};

inline std::vector<SweepRow> sweep_dt(const RunConfig& c, const std::vector<double>& dts) {
  if (dts.empty()) throw ConfigError("sweep-dt needs at least one dt");
  const Problem p = build_problem(c);
  if (c.reference && p.layout.qubits() > kDenseQubitGuard) {
    throw ResourceError("exact oracle needs " + std::to_string(p.layout.qubits()) + " qubits, guard is " +
                        std::to_string(kDenseQubitGuard));
  }
  const auto refs = reference_states(p);
  const auto obs = observation_spec(c, p, refs);
  const Schedule sched = c.schedule();
  auto plan_for = [&](double dt, Propagator prop) {
    if (!(dt > 0.0)) throw ConfigError("dt values must be positive");
    const auto n = static_cast<std::size_t>(std::llround(c.t_final / dt));
    PropagationPlan plan{dt, std::max<std::size_t>(n, 1), prop, std::max<std::size_t>(n, 1)};
    plan.validate(sched);
    return plan;
  };
  std::optional<EvolutionResult> reference;
  if (c.reference) {
    reference = evolve(refs[0].state, p.h, sched, plan_for(c.reference_dt, c.reference_propagator), obs);
  }
  std::vector<SweepRow> rows;
  for (double dt : dts) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    const auto plan = plan_for(dt, c.propagator);
    row.dt = dt;
    row.n_steps = plan.n_steps;
    const auto run = evolve(refs[0].state, p.h, sched, plan, obs);
    row.entropy = run.records.back().entropy;
    if (c.reference) {
      auto oracle_plan = plan;
      oracle_plan.propagator = Propagator::exact;
      const auto oracle = evolve(refs[0].state, p.h, sched, oracle_plan, obs);
      row.fidelity = fidelity(run.final_state, oracle.final_state);
      row.error = run.final_state.distance(oracle.final_state);
      row.reference_entropy = reference->records.back().entropy;
      row.residual_entropy = std::abs(row.entropy - *row.reference_entropy);
      if (!rows.empty() && rows.back().error && *rows.back().error > 0.0 && *row.error > 0.0) {
        row.order = std::log2(*rows.back().error / *row.error) / std::log2(rows.back().dt / dt);
      }
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string("NA"); };
  out << "dt,n_steps,fidelity_vs_exact,error_vs_exact,order,entropy,reference_entropy,residual_entropy,wall_seconds\n";
  for (const auto& r : rows) {
    out << detail::format_double(r.dt) << ',' << r.n_steps << ',' << opt(r.fidelity) << ',' << opt(r.error) << ','
        << opt(r.order) << ',' << detail::format_double(r.entropy) << ',' << opt(r.reference_entropy) << ','
        << opt(r.residual_entropy) << ',' << detail::format_double(r.wall_seconds) << '\n';
  }
}

// ---------------------------------------------------------------------------
// map

inline PauliSum cmd_map(const std::string& integral_path, const std::string& out_path, Mapping electron_mapping,
                        Mapping nuclear_mapping) {
  const IntegralSet ints = load_integrals(integral_path);
  const SectorLayout layout({ints.electron_modes(), electron_mapping, {}}, {ints.nuclear_modes(), nuclear_mapping, {}});
  PauliSum h = build_hamiltonian(ints, layout);
  save_pauli_sum(out_path, h);
  return h;
}

}  // namespace nedyn
