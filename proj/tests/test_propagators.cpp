#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nedyn/hamiltonian.hpp"
#include "nedyn/observables.hpp"
#include "nedyn/propagators.hpp"
#include "nedyn/spectral.hpp"
#include "oracle.hpp"

using namespace nedyn;
using oracle::cplx;
using oracle::Mat;

namespace {

// Endpoint distance to the exact exponential for a time-independent drive.
double trotter_error(const PauliSum& h, const StateVector& psi0, double tf, double dt) {
  const MixedTermTable table(h, h, h);
  auto psi = psi0;
  const auto steps = static_cast<std::size_t>(std::llround(tf / dt));
  for (std::size_t j = 0; j < steps; ++j) trotter_step_inplace(psi, table, {1.0, 0.0, 0.0}, dt);
  const oracle::Vec exact = oracle::expm_hermitian(oracle::dense(h), tf) * oracle::to_vec(psi0);
  return (oracle::to_vec(psi) - exact).norm();
}

double rk4_error(const PauliSum& h, const StateVector& psi0, double tf, double dt) {
  const MixedTermTable table(h, h, h);
  const Schedule s(tf);
  auto psi = psi0;
  const auto steps = static_cast<std::size_t>(std::llround(tf / dt));
  for (std::size_t j = 0; j < steps; ++j) psi = rk4_step(psi, table, s, dt * static_cast<double>(j), dt).state;
  const oracle::Vec exact = oracle::expm_hermitian(oracle::dense(h), tf) * oracle::to_vec(psi0);
  return (oracle::to_vec(psi) - exact).norm();
}

std::array<StateVector, 3> basis_refs(std::size_t n) {
  return {StateVector::basis(n, 0), StateVector::basis(n, 1), StateVector::basis(n, 2)};
}

// Mutually commuting random strings.
PauliSum commuting_sum(std::size_t n, std::size_t terms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PauliTerm> out;
  while (out.size() < terms) {
    const auto p = PauliString::parse(oracle::random_word(n, rng, false));
    bool ok = true;
    for (const auto& t : out) ok = ok && t.letters().commutes_with(p) && !(t.letters() == p);
    if (ok) out.emplace_back(n, p, u(rng));
  }
  return PauliSum(n, out);
}

struct SyntheticSetup {
  SectorLayout layout = synthetic_layout();
  LmrHamiltonians h = synthetic_lmr({});
  std::array<StateVector, 3> refs;
  SyntheticSetup() {
    const NumberOperatorBank bank(layout);
    const auto f = bank.particle_filter(2, 1);
    refs = {ground_state(h.left, f).state, ground_state(h.middle, f).state, ground_state(h.right, f).state};
  }
};

const SyntheticSetup& synthetic() {
  static const SyntheticSetup s;
  return s;
}

}  // namespace

TEST(Trotter, ZeroStepIsIdentity) {
  std::mt19937_64 rng(61);
  const auto h = oracle::random_hermitian(4, 10, rng);
  const auto psi = oracle::random_state(4, rng);
  EXPECT_EQ(trotter_step(psi, h, h, h, {}, 0.0), psi);
}

TEST(Trotter, SingleTermIsExact) {
  std::mt19937_64 rng(62);
  const auto h = PauliSum::from_term(PauliTerm("IZI", 0.37));
  const auto psi = oracle::random_state(3, rng);
  for (double dt : {0.1, 1.0, 7.5}) {
    EXPECT_LT(trotter_step(psi, h, h, h, {}, dt).distance(exact_step(psi, h, dt)), 1e-13);
  }
}

TEST(Trotter, UsesMidpointWeightsOfEachHamiltonian) {
  // Commuting inputs: one step with weights w equals exp(-i mix(w) dt).
  std::mt19937_64 rng(63);
  const auto hl = PauliSum(2, {PauliTerm("ZI", 0.4), PauliTerm("IZ", -0.2)});
  const auto hr = PauliSum(2, {PauliTerm("ZZ", 0.9), PauliTerm("IZ", 0.3)});
  const auto psi = oracle::random_state(2, rng);
  const ScheduleWeights w(0.25, 0.0, 0.75);
  const auto out = trotter_step(psi, hl, hl, hr, w, 0.8);
  EXPECT_LT(out.distance(exact_step(psi, mix(hl, hl, hr, w), 0.8)), 1e-14);
}

TEST(Trotter, RejectsRegisterMismatch) {
  const auto h = PauliSum::identity(3);
  EXPECT_THROW(trotter_step(StateVector::basis(2, 0), h, h, h, {}, 0.1), DimensionError);
}

TEST(Trotter, FirstOrderConvergence) {
  std::mt19937_64 rng(64);
  const auto h = oracle::random_hermitian(4, 10, rng);
  const auto psi = oracle::random_state(4, rng);
  const double e1 = trotter_error(h, psi, 1.0, 0.01);
  const double e2 = trotter_error(h, psi, 1.0, 0.005);
  const double e3 = trotter_error(h, psi, 1.0, 0.0025);
  EXPECT_GE(e1 / e2, 1.7);
  EXPECT_LE(e1 / e2, 2.3);
  EXPECT_GE(e2 / e3, 1.7);
  EXPECT_LE(e2 / e3, 2.3);
}

TEST(Trotter, FirstOrderConvergenceUnderTimeDependentDrive) {
  std::mt19937_64 rng(65);
  const auto hl = oracle::random_hermitian(4, 6, rng);
  const auto hm = oracle::random_hermitian(4, 6, rng);
  const auto hr = oracle::random_hermitian(4, 6, rng);
  const auto psi0 = oracle::random_state(4, rng);
  const Schedule s(4.0);
  auto run_trotter = [&](double dt) {
    const MixedTermTable table(hl, hm, hr);
    auto psi = psi0;
    const auto steps = static_cast<std::size_t>(std::llround(4.0 / dt));
    for (std::size_t j = 0; j < steps; ++j)
      trotter_step_inplace(psi, table, schedule_weights((static_cast<double>(j) + 0.5) * dt, s), dt);
    return psi;
  };
  const MixedTermTable table(hl, hm, hr);
  auto ref = psi0;
  for (std::size_t j = 0; j < 40000; ++j) ref = rk4_step(ref, table, s, static_cast<double>(j) * 1e-4, 1e-4).state;
  const double e1 = run_trotter(0.02).distance(ref);
  const double e2 = run_trotter(0.01).distance(ref);
  const double e3 = run_trotter(0.005).distance(ref);
  EXPECT_GE(e1 / e2, 1.7);
  EXPECT_LE(e1 / e2, 2.3);
  EXPECT_GE(e2 / e3, 1.7);
  EXPECT_LE(e2 / e3, 2.3);
}

TEST(Rk4, ZeroHamiltonianLeavesStateUnchanged) {
  std::mt19937_64 rng(66);
  const PauliSum zero(3);
  const auto psi = oracle::random_state(3, rng);
  const auto r = rk4_step(psi, zero, zero, zero, Schedule(1.0), 0.0, 0.5);
  EXPECT_EQ(r.state, psi);
  EXPECT_EQ(r.norm_before_renormalization, 1.0);
}

TEST(Rk4, RotationOracle) {
  const double omega = 0.8;
  const auto h = PauliSum::from_term(PauliTerm("Z", omega));
  const double r = 1.0 / std::sqrt(2.0);
  const StateVector plus(1, {r, r});
  const StateVector minus(1, {r, -r});
  const double t = std::numbers::pi / (2.0 * omega);
  auto error = [&](std::size_t steps) {
    const double dt = t / static_cast<double>(steps);
    const MixedTermTable table(h, h, h);
    const Schedule s(t);
    auto psi = plus;
    for (std::size_t j = 0; j < steps; ++j) psi = rk4_step(psi, table, s, static_cast<double>(j) * dt, dt).state;
    const cplx phase = minus.inner(psi) / std::abs(minus.inner(psi));
    StateVector aligned = minus;
    for (auto& a : aligned.amplitudes()) a *= phase;
    return psi.distance(aligned);
  };
  const double e1 = error(10), e2 = error(20), e3 = error(40);
  EXPECT_LT(e1, 1e-3);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
  EXPECT_GE(e2 / e3, 12.0);
  EXPECT_LE(e2 / e3, 20.0);
}

TEST(Rk4, FourthOrderConvergence) {
  std::mt19937_64 rng(67);
  const auto h = oracle::random_hermitian(4, 10, rng);
  const auto psi = oracle::random_state(4, rng);
  const double e1 = rk4_error(h, psi, 1.0, 0.04);
  const double e2 = rk4_error(h, psi, 1.0, 0.02);
  const double e3 = rk4_error(h, psi, 1.0, 0.01);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
  EXPECT_GE(e2 / e3, 12.0);
  EXPECT_LE(e2 / e3, 20.0);
}

TEST(Rk4, ScheduleRangeErrorPropagates) {
  const auto h = PauliSum::identity(1);
  EXPECT_THROW(rk4_step(StateVector::basis(1, 0), h, h, h, Schedule(1.0), 0.9, 0.5), RangeError);
}

TEST(Exact, ZeroStepAndHalfRotation) {
  std::mt19937_64 rng(68);
  const auto h = oracle::random_hermitian(3, 5, rng);
  const auto psi = oracle::random_state(3, rng);
  EXPECT_EQ(exact_step(psi, h, 0.0), psi);
  const auto out = exact_step(StateVector::basis(1, 0), PauliSum::from_term(PauliTerm("X", std::numbers::pi / 2)), 1.0);
  EXPECT_LT(std::abs(out[0]), 1e-15);
  EXPECT_LT(std::abs(out[1] - cplx(0.0, -1.0)), 1e-15);
}

TEST(Exact, MatchesOracleAndIsUnitary) {
  std::mt19937_64 rng(69);
  for (int k = 0; k < 10; ++k) {
    const auto h = oracle::random_hermitian(5, 12, rng);
    const auto psi = oracle::random_state(5, rng);
    const auto out = exact_step(psi, h, 2.3);
    EXPECT_LT((oracle::to_vec(out) - oracle::expm_hermitian(oracle::dense(h), 2.3) * oracle::to_vec(psi)).norm(), 1e-12);
    EXPECT_LT(std::abs(out.norm() - 1.0), 1e-12);
  }
}

TEST(Exact, GuardAndContract) {
  EXPECT_THROW(exact_step(StateVector::basis(13, 0), PauliSum::identity(13), 1.0), ResourceError);
  EXPECT_THROW(exact_step(StateVector::basis(1, 0), PauliSum::from_term(PauliTerm("X", cplx(0, 1))), 1.0),
               ContractError);
}

TEST(Exact, BlockStepMatchesDenseStep) {
  const auto& s = synthetic();
  std::mt19937_64 rng(70);
  const auto psi = oracle::random_state(7, rng);
  const Mat ml = to_matrix(s.h.left), mm = to_matrix(s.h.middle), mr = to_matrix(s.h.right);
  const auto blocks = detail::connected_blocks({&ml, &mm, &mr});
  EXPECT_GT(blocks.size(), 1u);
  const Mat m = 0.3 * ml + 0.7 * mm;
  EXPECT_LT(detail::exact_block_step(psi, m, blocks, 5.0).distance(detail::exact_dense_step(psi, m, 5.0)), 1e-12);
}

TEST(Evolve, PlanMustEndAtFinalTime) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  EXPECT_THROW(evolve(s.refs[0], s.h, Schedule(10.0), {1.0, 9, Propagator::trotter1, 1}, obs), ConfigError);
  EXPECT_THROW(evolve(s.refs[0], s.h, Schedule(10.0), {1.0, 10, Propagator::trotter1, 0}, obs), ConfigError);
  EXPECT_THROW(evolve(s.refs[0], s.h, Schedule(10.0), {-1.0, 10, Propagator::trotter1, 1}, obs), ConfigError);
}

TEST(Evolve, SingleStepConservesEnergyOfSingleTerm) {
  const auto h = PauliSum::from_term(PauliTerm("XIII", 0.7));
  std::mt19937_64 rng(71);
  const auto psi = oracle::random_state(4, rng);
  const ObservationSpec obs(SectorLayout::jordan_wigner(1, 3), basis_refs(4), {0});
  const auto r = evolve(psi, h, h, h, Schedule(3.0), {3.0, 1, Propagator::trotter1, 1}, obs);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].t, 0.0);
  EXPECT_EQ(r.records[1].t, 3.0);
  EXPECT_NEAR(r.records[0].energy, r.records[1].energy, 1e-14);
}

TEST(Evolve, RecordsAtStrideAndEnd) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  const auto r = evolve(s.refs[0], s.h, Schedule(10.0), {1.0, 10, Propagator::trotter1, 4}, obs);
  std::vector<double> times;
  for (const auto& rec : r.records) times.push_back(rec.t);
  EXPECT_EQ(times, (std::vector<double>{0.0, 4.0, 8.0, 10.0}));
  EXPECT_NEAR(r.records[0].fidelity_left, 1.0, 1e-12);
}

TEST(Evolve, TimeIndependentEnergyDrift) {
  std::mt19937_64 rng(72);
  const auto h = commuting_sum(4, 6, rng) + PauliSum::from_term(PauliTerm("IIII", 0.1));
  const auto psi = oracle::random_state(4, rng);
  const ObservationSpec obs(SectorLayout::jordan_wigner(1, 3), basis_refs(4), {0});
  const auto r = evolve(psi, h, h, h, Schedule(1000.0), {0.1, 10000, Propagator::trotter1, 1000}, obs);
  for (const auto& rec : r.records) EXPECT_NEAR(rec.energy, r.records[0].energy, 1e-8);
}

TEST(Evolve, DeterministicRecords) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  for (auto p : {Propagator::trotter1, Propagator::rk4, Propagator::exact}) {
    const PropagationPlan plan{0.5, 100, p, 7};
    const auto a = evolve(s.refs[0], s.h, Schedule(50.0), plan, obs);
    const auto b = evolve(s.refs[0], s.h, Schedule(50.0), plan, obs);
    EXPECT_EQ(a.records, b.records) << to_string(p);
    EXPECT_EQ(a.final_state, b.final_state);
  }
}

TEST(Evolve, PropagatorsAgreeOnSyntheticDrive) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  const Schedule sched(40.0);
  const auto tr = evolve(s.refs[0], s.h, sched, {1e-3, 40000, Propagator::trotter1, 40000}, obs);
  const auto rk = evolve(s.refs[0], s.h, sched, {1e-2, 4000, Propagator::rk4, 4000}, obs);
  const auto ex = evolve(s.refs[0], s.h, sched, {1e-2, 4000, Propagator::exact, 4000}, obs);
  EXPECT_LT(1.0 - fidelity(tr.final_state, rk.final_state), 1e-4);
  EXPECT_LT(1.0 - fidelity(tr.final_state, ex.final_state), 1e-4);
  EXPECT_LT(1.0 - fidelity(rk.final_state, ex.final_state), 1e-4);
  EXPECT_LT(tr.max_norm_drift, 1e-9);
  EXPECT_LT(ex.max_norm_drift, 1e-9);
}

TEST(Evolve, ConservedNumbersAndNegativeControl) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  const PropagationPlan plan{1.0, 400, Propagator::trotter1, 10};
  const auto ok = evolve(s.refs[0], s.h, Schedule(400.0), plan, obs);
  for (const auto& rec : ok.records) {
    EXPECT_NEAR(rec.electrons, 2.0, 1e-8);
    EXPECT_NEAR(rec.nuclei, 1.0, 1e-8);
  }
  const auto kick = PauliSum::from_term(PauliTerm("IIIIIIX", 0.01));
  const auto bad = evolve(s.refs[0], s.h.left + kick, s.h.middle + kick, s.h.right + kick, Schedule(400.0), plan, obs);
  double worst = 0.0;
  for (const auto& rec : bad.records) worst = std::max(worst, std::abs(rec.electrons - 2.0));
  EXPECT_GT(worst, 1e-4);
}

TEST(Evolve, Rk4BlowupIsANumericalError) {
  const auto h = PauliSum(4, {PauliTerm("XIII", 50.0), PauliTerm("ZZII", 40.0)});
  const ObservationSpec obs(SectorLayout::jordan_wigner(1, 3), basis_refs(4), {0});
  EXPECT_THROW(evolve(StateVector::basis(4, 0), h, h, h, Schedule(10.0), {1.0, 10, Propagator::rk4, 1}, obs),
               NumericalError);
}

TEST(Evolve, RejectsUnnormalizedInput) {
  const auto& s = synthetic();
  const ObservationSpec obs(s.layout, s.refs);
  StateVector bad = s.refs[0];
  bad[0] += 0.1;
  EXPECT_THROW(evolve(bad, s.h, Schedule(1.0), {1.0, 1, Propagator::trotter1, 1}, obs), ContractError);
}
