#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nedyn/hamiltonian.hpp"
#include "nedyn/pauli_io.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace nedyn;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("nedyn_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Runs the tool inside the temp directory; returns the exit status.
  int run(const std::string& args, std::string* out = nullptr) const {
    const std::string capture = path("stdout.txt");
    const std::string cmd = "cd '" + dir_.string() + "' && '" + NEDYN_CLI_PATH + "' " + args + " > '" + capture +
                            "' 2> '" + path("stderr.txt") + "'";
    const int raw = std::system(cmd.c_str());
    if (out) *out = read(capture);
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  // Three-site 2+2 Pauli drive from a fixed seed.
  void write_pauli_drive(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    for (const char* name : {"l.txt", "m.txt", "r.txt"}) {
      save_pauli_sum(path(name), oracle::random_hermitian(4, 8, rng));
    }
  }

  fs::path dir_;
};

const char* kShortSynthetic =
    "[source]\nkind = synthetic\n[schedule]\nt_final = 20\n[plan]\ndt = 1\nstride = 4\n"
    "[output]\ncsv = short.csv\nmetadata = short.meta\n";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream s(text);
  std::string line;
  while (std::getline(s, line)) rows.push_back(split_line(line));
  return rows;
}

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("ground x.cfg --which Q"), 2);
  EXPECT_EQ(run("sweep-dt x.cfg"), 2);
  EXPECT_EQ(run("--version"), 0);
}

TEST_F(Cli, BadConfigExitsTwo) {
  write("bad.cfg", "[source]\nkind = synthetic\n[plan]\nwarp = 9\n");
  EXPECT_EQ(run("run bad.cfg"), 2);
  EXPECT_NE(read(path("stderr.txt")).find("bad.cfg:4"), std::string::npos) << read(path("stderr.txt"));
  EXPECT_EQ(run("run missing.cfg"), 2);
}

TEST_F(Cli, InconsistentStepCountFailsBeforeComputing) {
  write("plan.cfg", "[source]\nkind = synthetic\n[schedule]\nt_final = 100\n[plan]\ndt = 1\nn_steps = 99\n"
                    "[output]\ncsv = plan.csv\nmetadata = plan.meta\n");
  EXPECT_EQ(run("run plan.cfg"), 2);
  EXPECT_FALSE(fs::exists(path("plan.csv")));
  EXPECT_FALSE(fs::exists(path("plan.meta")));
}

TEST_F(Cli, Rk4BlowupExitsThree) {
  const std::string h = "qubits 4\nZIII 5 0\nXIII 1 0\n";
  write("h.txt", h);
  write("blow.cfg", "[source]\nkind = pauli\nleft = h.txt\nmiddle = h.txt\nright = h.txt\n"
                    "[layout]\nelectron_modes = 1\nnuclear_modes = 3\n[observables]\ntracked_modes = 0\n[schedule]\nt_final = 2\n"
                    "[plan]\ndt = 1\npropagator = rk4\n[output]\ncsv = blow.csv\nmetadata = blow.meta\n");
  EXPECT_EQ(run("run blow.cfg"), 3);
}

TEST_F(Cli, OversizedOracleExitsFour) {
  write("big.txt", "qubits 13\nIIIIIIIIIIIIZ 1 0\nIIIIIIIIIIIZI 0.5 0\n");
  write("big.cfg", "[source]\nkind = pauli\nleft = big.txt\nmiddle = big.txt\nright = big.txt\n"
                   "[layout]\nelectron_modes = 7\nnuclear_modes = 6\n[schedule]\nt_final = 1\n"
                   "[reference]\nenabled = true\n");
  EXPECT_EQ(run("sweep-dt big.cfg --dt 0.5"), 4);
}

TEST_F(Cli, GroundEnergiesOfMirrorSitesAgree) {
  write("syn.cfg", kShortSynthetic);
  std::string el, er, em;
  ASSERT_EQ(run("ground syn.cfg --which L", &el), 0);
  ASSERT_EQ(run("ground syn.cfg --which R", &er), 0);
  ASSERT_EQ(run("ground syn.cfg --which M --state m_state.txt", &em), 0);
  EXPECT_EQ(el, er);
  EXPECT_NEAR(std::stod(em) - std::stod(el), 0.013573264874914, 1e-10);
  EXPECT_TRUE(fs::exists(path("ground_L.txt")));
  EXPECT_TRUE(fs::exists(path("m_state.txt")));
}

TEST_F(Cli, GroundOfSingleZTerm) {
  write("z.txt", "qubits 4\nZIII 1 0\n");
  write("z.cfg", "[source]\nkind = pauli\nleft = z.txt\nmiddle = z.txt\nright = z.txt\n"
                 "[layout]\nelectron_modes = 1\nnuclear_modes = 3\n[observables]\ntracked_modes = 0\n");
  std::string out;
  ASSERT_EQ(run("ground z.cfg --which M", &out), 0);
  EXPECT_EQ(std::stod(out), -1.0);
}

TEST_F(Cli, RunIsReproducibleAndSidecarReplays) {
  write("syn.cfg", kShortSynthetic);
  ASSERT_EQ(run("run syn.cfg -q"), 0);
  const std::string first = read(path("short.csv"));
  ASSERT_EQ(run("run syn.cfg -q --csv again.csv --metadata again.meta"), 0);
  EXPECT_EQ(read(path("again.csv")), first);
  ASSERT_EQ(run("run short.meta -q --csv replay.csv --metadata replay.meta"), 0);
  EXPECT_EQ(read(path("replay.csv")), first);

  const auto rows = csv_rows(first);
  ASSERT_EQ(rows.size(), 7u);  // header, t = 0, 4, ..., 20
  const auto& header = rows[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  EXPECT_NEAR(std::stod(rows[1][col("F_L")]), 1.0, 1e-9);
  EXPECT_EQ(std::stod(rows[1][col("t")]), 0.0);
  EXPECT_EQ(std::stod(rows.back()[col("t")]), 20.0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_NEAR(std::stod(rows[r][col("norm")]), 1.0, 1e-9);
    EXPECT_NEAR(std::stod(rows[r][col("N_e")]), 2.0, 1e-9);
    EXPECT_NEAR(std::stod(rows[r][col("N_p")]), 1.0, 1e-9);
  }
  EXPECT_NE(read(path("short.meta")).find("[provenance]"), std::string::npos);
}

TEST_F(Cli, SweepShowsFirstOrderConvergence) {
  write_pauli_drive(91);
  write("drive.cfg", "[source]\nkind = pauli\nleft = l.txt\nmiddle = m.txt\nright = r.txt\n"
                     "[layout]\nelectron_modes = 1\nnuclear_modes = 3\n[observables]\ntracked_modes = 0\n[schedule]\nt_final = 8\n"
                     "[reference]\nenabled = true\n");
  std::string out;
  ASSERT_EQ(run("sweep-dt drive.cfg --dt 1.0,0.5,0.25 --out sweep.csv", &out), 0) << read(path("stderr.txt"));
  EXPECT_EQ(read(path("sweep.csv")), out);
  const auto rows = csv_rows(out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][4], "order");
  EXPECT_EQ(rows[1][4], "NA");
  for (std::size_t r = 2; r < 4; ++r) {
    const double order = std::stod(rows[r][4]);
    EXPECT_GE(order, 0.8) << out;
    EXPECT_LE(order, 1.2) << out;
  }
}

TEST_F(Cli, SweepWithoutReferenceLeavesNa) {
  write_pauli_drive(92);
  write("drive.cfg", "[source]\nkind = pauli\nleft = l.txt\nmiddle = m.txt\nright = r.txt\n"
                     "[layout]\nelectron_modes = 1\nnuclear_modes = 3\n[observables]\ntracked_modes = 0\n[schedule]\nt_final = 2\n");
  std::string out;
  ASSERT_EQ(run("sweep-dt drive.cfg --dt 0.5", &out), 0);
  const auto rows = csv_rows(out);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t c : {2u, 3u, 4u, 6u, 7u}) EXPECT_EQ(rows[1][c], "NA");
  EXPECT_NE(rows[1][5], "NA");
}

TEST_F(Cli, MapWritesLoadablePauliSum) {
  std::mt19937_64 rng(93);
  const auto ints = oracle::random_integrals(3, 2, rng, 0.5);
  {
    std::ofstream out(path("ints.txt"));
    write_integrals(out, ints);
  }
  ASSERT_EQ(run("map ints.txt --out h.txt"), 0) << read(path("stderr.txt"));
  const auto h = load_pauli_sum(path("h.txt"));
  EXPECT_EQ(h.num_qubits(), 5u);
  EXPECT_TRUE(h.is_hermitian());
  const auto direct = build_hamiltonian(ints, SectorLayout::jordan_wigner(3, 2));
  EXPECT_LT(h.max_abs_difference(direct), 1e-14);
  ASSERT_EQ(run("map ints.txt --out hp.txt --mapping parity"), 0);
  EXPECT_EQ(load_pauli_sum(path("hp.txt")).num_qubits(), 5u);
  EXPECT_EQ(run("map nothing.txt --out x.txt"), 2);
}
