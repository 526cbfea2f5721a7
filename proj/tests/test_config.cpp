#include <gtest/gtest.h>

#include <sstream>

#include "nedyn/config.hpp"
#include "nedyn/runner.hpp"

using namespace nedyn;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return read_config(in, "test.cfg");
}

int parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

const char* kMinimal = "[source]\nkind = synthetic\n";

}  // namespace

TEST(Config, MinimalSyntheticUsesDefaults) {
  const auto c = parse(kMinimal);
  EXPECT_EQ(c.source, SourceKind::synthetic);
  EXPECT_EQ(c.t_final, 4000.0);
  EXPECT_EQ(c.dt, 1.0);
  EXPECT_EQ(c.n_steps, 4000u);
  EXPECT_EQ(c.propagator, Propagator::trotter1);
  EXPECT_FALSE(c.reference);
  EXPECT_EQ(c.tracked_modes, (std::vector<std::size_t>{0, 1}));
}

TEST(Config, StepCountDerivedFromDt) {
  const auto c = parse(std::string(kMinimal) + "[schedule]\nt_final = 100\n[plan]\ndt = 0.25\n");
  EXPECT_EQ(c.n_steps, 400u);
}

TEST(Config, CommentsAndWhitespace) {
  const auto c = parse("# header\n  [source]  \n kind = synthetic   # trailing\n\n[plan]\npropagator=rk4\n"
                       "[schedule]\nt_final = 10\n");
  EXPECT_EQ(c.propagator, Propagator::rk4);
  EXPECT_EQ(c.n_steps, 10u);
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[bogus]\n"), 3);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\nwhat = 1\n"), 3);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\nkind = pauli\n"), 3);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[plan]\n\ndt = fast\n"), 5);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[plan]\nstride = -1\n"), 4);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[plan]\npropagator = leapfrog\n"), 4);
  EXPECT_EQ(parse_error_line("[source]\nkind = quantum\n"), 2);
  EXPECT_EQ(parse_error_line("kind = synthetic\n"), 1);
  EXPECT_EQ(parse_error_line("[source\nkind = synthetic\n"), 1);
  EXPECT_EQ(parse_error_line("[source]\nkind synthetic\n"), 2);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[reference]\nenabled = maybe\n"), 4);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[layout]\nelectron_taper = 3:+2\n"), 4);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[observables]\nnuclear_sites = 0, 1\n"), 4);
  EXPECT_EQ(parse_error_line("[source]\nkind = synthetic\n[schedule]\nt_final = inf\n"), 4);
  EXPECT_GT(parse_error_line("[plan]\ndt = 1\n"), 0);
}

TEST(Config, InconsistentPlanIsConfigError) {
  EXPECT_THROW(parse(std::string(kMinimal) + "[schedule]\nt_final = 100\n[plan]\ndt = 1\nn_steps = 50\n"),
               ConfigError);
  EXPECT_NO_THROW(parse(std::string(kMinimal) + "[schedule]\nt_final = 100\n[plan]\ndt = 2\nn_steps = 50\n"));
  EXPECT_THROW(parse(std::string(kMinimal) + "[plan]\ndt = 0\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kMinimal) + "[schedule]\nt_final = -3\n"), ConfigError);
}

TEST(Config, ReferenceStepMustDivideFinalTime) {
  const std::string base = std::string(kMinimal) + "[schedule]\nt_final = 10\n[reference]\nenabled = true\n";
  EXPECT_THROW(parse(base + "dt = 0.3\n"), ConfigError);
  EXPECT_NO_THROW(parse(base + "dt = 0.25\n"));
}

TEST(Config, ExternalSourcesNeedFilesAndModes) {
  EXPECT_THROW(parse("[source]\nkind = integrals\nleft = a\nmiddle = b\n"), ConfigError);
  EXPECT_THROW(parse("[source]\nkind = pauli\nleft = a\nmiddle = b\nright = c\n"), ConfigError);
  const auto c = parse("[source]\nkind = pauli\nleft = a\nmiddle = b\nright = c\n"
                       "[layout]\nelectron_modes = 2\nnuclear_modes = 2\n");
  EXPECT_EQ(*c.electron_modes, 2u);
  EXPECT_EQ(c.files[2], "c");
}

TEST(Config, LayoutValues) {
  const auto c = parse(std::string(kMinimal) +
                       "[layout]\nelectron_mapping = parity\nnuclear_mapping = jw\n"
                       "electron_taper = 3:+1\nnuclear_taper = 2:-1, 0:1\nelectrons = 2\nnuclei = 1\n");
  EXPECT_EQ(c.electron_mapping, Mapping::parity);
  EXPECT_EQ(c.nuclear_mapping, Mapping::jordan_wigner);
  EXPECT_EQ(c.electron_taper.removed, (std::vector<std::size_t>{3}));
  EXPECT_EQ(c.electron_taper.eigenvalues, (std::vector<int>{1}));
  EXPECT_EQ(c.nuclear_taper.removed, (std::vector<std::size_t>{2, 0}));
  EXPECT_EQ(c.nuclear_taper.eigenvalues, (std::vector<int>{-1, 1}));
  EXPECT_EQ(*c.electrons, 2.0);
  EXPECT_EQ(*c.nuclei, 1.0);
}

TEST(Config, ProvenanceSectionIsIgnored) {
  const auto c = parse(std::string(kMinimal) + "[provenance]\nversion = 9\nanything = goes\n[plan]\nstride = 3\n");
  EXPECT_EQ(c.stride, 3u);
}

TEST(Config, CanonicalTextRoundTrips) {
  auto c = parse(std::string(kMinimal) +
                 "coupling = 0.0071\nbarrier = 0.0125\n[schedule]\nt_final = 300\n[plan]\ndt = 0.3\n"
                 "propagator = exact\nstride = 7\n[reference]\nenabled = true\ndt = 0.1\n"
                 "[layout]\nelectron_mapping = parity\nelectron_taper = 3:-1\nelectrons = 2\n"
                 "[observables]\ntracked_modes = 3, 1\nnuclear_sites = 2, 1, 0\n[run]\nseed = 77\n");
  const std::string text = config_text(c);
  const auto again = parse(text);
  EXPECT_EQ(config_text(again), text);
  EXPECT_EQ(again.synthetic.coupling, 0.0071);
  EXPECT_EQ(again.dt, 0.3);
  EXPECT_EQ(again.n_steps, 1000u);
  EXPECT_EQ(again.propagator, Propagator::exact);
  EXPECT_EQ(again.tracked_modes, (std::vector<std::size_t>{3, 1}));
  EXPECT_EQ(again.nuclear_sites, (std::array<std::size_t, 3>{2, 1, 0}));
  EXPECT_EQ(again.seed, 77u);
}

TEST(Config, ExampleConfigsLoad) {
  for (const char* name : {"slow.cfg", "fast.cfg", "long.cfg"}) {
    const auto c = load_config(std::string(NEDYN_EXAMPLES_DIR) + "/" + name);
    EXPECT_EQ(c.source, SourceKind::synthetic) << name;
    EXPECT_NEAR(c.dt * static_cast<double>(c.n_steps), c.t_final, 1e-9 * c.t_final) << name;
  }
  EXPECT_THROW(load_config(std::string(NEDYN_EXAMPLES_DIR) + "/missing.cfg"), ParseError);
}

TEST(Config, RelativeInputsResolveAgainstConfigDirectory) {
  auto c = parse("[source]\nkind = pauli\nleft = l.txt\nmiddle = /abs/m.txt\nright = ../r.txt\n"
                 "[layout]\nelectron_modes = 1\nnuclear_modes = 1\n");
  c.base_dir = "/data/runs";
  EXPECT_EQ(c.resolve(c.files[0]), "/data/runs/l.txt");
  EXPECT_EQ(c.resolve(c.files[1]), "/abs/m.txt");
  EXPECT_EQ(c.resolve(c.files[2]), "/data/r.txt");
}

TEST(Runner, CsvHeaderAndRow) {
  EXPECT_EQ(csv_header({0, 2}), "t,E,E_L,E_M,E_R,n_L,n_M,n_R,occ_0,occ_2,entropy,F_L,F_M,F_R,norm,N_e,N_p");
  TimeSeriesRecord r;
  r.t = 0.5;
  r.electron_occupations = {0.25, 1.0};
  r.norm = 1.0;
  const auto row = csv_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 16);
  EXPECT_EQ(row.substr(0, 4), "0.5,");
}

TEST(Runner, ExitCodes) {
  EXPECT_EQ(exit_code_for(ParseError("x", 1, "bad")), kExitConfig);
  EXPECT_EQ(exit_code_for(ConfigError("bad")), kExitConfig);
  EXPECT_EQ(exit_code_for(NumericalError("bad")), kExitNumerical);
  EXPECT_EQ(exit_code_for(ContractError("bad")), kExitNumerical);
  EXPECT_EQ(exit_code_for(ResourceError("bad")), kExitResource);
  EXPECT_EQ(exit_code_for(std::bad_alloc()), kExitResource);
}

TEST(Runner, ReferenceCsvPath) {
  RunConfig c;
  c.csv = "out/slow.csv";
  EXPECT_EQ(reference_csv_path(c), "out/slow.ref.csv");
  c.csv = "plain";
  EXPECT_EQ(reference_csv_path(c), "plain.ref.csv");
  c.reference_csv = "chosen.csv";
  EXPECT_EQ(reference_csv_path(c), "chosen.csv");
}

TEST(Runner, LayoutMismatchIsConfigError) {
  RunConfig c;
  c.electron_modes = 3;
  EXPECT_THROW(layout_from(c, 4, 3), ConfigError);
  c.electron_modes.reset();
  c.electron_taper = {{9}, {1}};
  EXPECT_THROW(layout_from(c, 4, 3), ConfigError);
}

TEST(Runner, SyntheticProblemUsesTwoElectronsOneProton) {
  RunConfig c;
  const auto p = build_problem(c);
  EXPECT_EQ(p.layout.qubits(), 7u);
  ASSERT_EQ(p.filter.size(), 2u);
  EXPECT_EQ(p.filter[0].value, 2.0);
  EXPECT_EQ(p.filter[1].value, 1.0);
}
