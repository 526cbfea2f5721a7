// nedyn: command-line front end.
//
//   nedyn run <config> [--csv PATH] [--reference-csv PATH] [--metadata PATH] [-q]
//   nedyn ground <config> --which L|M|R [--state PATH]
//   nedyn sweep-dt <config> --dt 1.0,0.5 [--out PATH]
//   nedyn map <integral-file> --out <pauli-file> [--mapping jordan_wigner|parity]
//
// NEDYN_THREADS sets the kernel thread count. Exit codes: 0 ok, 2 config or
// parse error, 3 numerical contract violation, 4 resource guard.

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nedyn/config.hpp"
#include "nedyn/errors.hpp"
#include "nedyn/runner.hpp"
#include "nedyn/version.hpp"

namespace {

std::vector<double> parse_dt_list(const std::string& text) {
  std::vector<double> out;
  const nedyn::detail::ConfigReader reader("--dt", 1);
  for (const auto& item : nedyn::detail::split_list(text)) out.push_back(reader.real(item));
  if (out.empty()) throw nedyn::ConfigError("--dt needs at least one value");
  return out;
}

nedyn::Mapping parse_mapping(const std::string& text) {
  return nedyn::detail::ConfigReader("--mapping", 1).mapping(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicomponent electron-proton dynamics on a simulated qubit register"};
  app.set_version_flag("--version", nedyn::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Evolve from the H_L ground state and write the time series");
  std::string csv_out, ref_out, meta_out;
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--csv", csv_out, "Override the CSV output path");
  run->add_option("--reference-csv", ref_out, "Override the reference CSV output path");
  run->add_option("--metadata", meta_out, "Override the metadata sidecar path");
  run->add_flag("-q,--quiet", quiet, "Suppress the summary line");

  auto* ground = app.add_subcommand("ground", "Ground state of one of H_L, H_M, H_R");
  std::string which;
  std::string state_out;
  ground->add_option("config", config_path, "Configuration file")->required();
  ground->add_option("--which", which, "L, M or R")->required()->check(CLI::IsMember({"L", "M", "R"}));
  ground->add_option("--state", state_out, "State file (default ground_<which>.txt)");

  auto* sweep = app.add_subcommand("sweep-dt", "Step-size convergence table against the exact oracle");
  std::string dt_list;
  std::string sweep_out = "sweep_dt.csv";
  sweep->add_option("config", config_path, "Configuration file")->required();
  sweep->add_option("--dt", dt_list, "Comma-separated step sizes")->required();
  sweep->add_option("--out", sweep_out, "Table output path");

  auto* map = app.add_subcommand("map", "Compile an integral file to a Pauli sum file");
  std::string integral_path, pauli_out, mapping = "jordan_wigner";
  map->add_option("integrals", integral_path, "Integral file")->required();
  map->add_option("--out", pauli_out, "Pauli sum output path")->required();
  map->add_option("--mapping", mapping, "jordan_wigner or parity (both sectors)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nedyn::kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = nedyn::load_config(config_path);
      if (!csv_out.empty()) cfg.csv = csv_out;
      if (!ref_out.empty()) cfg.reference_csv = ref_out;
      if (!meta_out.empty()) cfg.metadata = meta_out;
      const auto o = nedyn::cmd_run(cfg, std::cerr);
      if (!quiet) {
        const auto& last = o.result.records.back();
        std::cout << "records " << o.result.records.size() << "  F_R " << last.fidelity_right << "  entropy "
                  << last.entropy << "  wall " << o.wall_seconds << " s\n";
      }
    } else if (*ground) {
      const auto cfg = nedyn::load_config(config_path);
      const nedyn::Site site = which == "L" ? nedyn::Site::L : which == "M" ? nedyn::Site::M : nedyn::Site::R;
      if (state_out.empty()) state_out = "ground_" + which + ".txt";
      nedyn::cmd_ground(cfg, site, state_out, std::cout, std::cerr);
    } else if (*sweep) {
      const auto cfg = nedyn::load_config(config_path);
      const auto rows = nedyn::sweep_dt(cfg, parse_dt_list(dt_list));
      std::ofstream out(sweep_out);
      if (!out) throw nedyn::ConfigError("cannot open " + sweep_out + " for writing");
      nedyn::write_sweep(out, rows);
      nedyn::write_sweep(std::cout, rows);
    } else if (*map) {
      nedyn::cmd_map(integral_path, pauli_out, parse_mapping(mapping), parse_mapping(mapping));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nedyn::exit_code_for(e);
  }
  return nedyn::kExitOk;
}
