#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "symvqe/driver.hpp"

using namespace symvqe;

namespace {

const std::string kFcidumpDir = std::string(SYMVQE_DATA_DIR) + "/fcidump";
const std::string kDeviceDir = std::string(SYMVQE_DATA_DIR) + "/devices";

// Ground energies from the external generator's determinant CI.
constexpr double kFciGround0735 = -1.1373059866;

FermionIntegrals equilibrium() {
  return load_fcidump(kFcidumpDir + "/d0.735.fcid");
}

VqeRunConfig exact_aswap_config() {
  VqeRunConfig cfg;
  cfg.ansatz.family = AnsatzFamily::Aswap;
  cfg.ansatz.sector = {4, 2, 0.0, {}};
  cfg.ansatz.layers = 2;
  cfg.backend = BackendChoice::StatevectorExact;
  cfg.optimizer = OptimizerChoice::Lbfgs;
  cfg.budget = 800;
  cfg.n_starts = 4;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("exact diagonalization") {
  PauliSum two_z(2);
  two_z.add(0.5, "IZ").add(0.5, "ZI");
  const Eigen::VectorXd vals = exact_diagonalize(simplify(two_z), 0.0);
  REQUIRE(vals.size() == 4);
  CHECK(vals[0] == doctest::Approx(-1.0));
  CHECK(vals[1] == doctest::Approx(0.0));
  CHECK(vals[2] == doctest::Approx(0.0));
  CHECK(vals[3] == doctest::Approx(1.0));

  PauliSum z(1);
  z.add(1.0, "Z");
  const Eigen::VectorXd zvals = exact_diagonalize(simplify(z), 0.0);
  CHECK(zvals[0] == doctest::Approx(-1.0));
  CHECK(zvals[1] == doctest::Approx(1.0));

  const FermionIntegrals ints = equilibrium();
  const PauliSum h = jordan_wigner(second_quantized(ints));
  const Eigen::VectorXd spectrum = exact_diagonalize(h, ints.e_nuc);
  CHECK(spectrum.size() == 16);
  CHECK(spectrum[0] == doctest::Approx(kFciGround0735).epsilon(1e-7));
  for (int i = 1; i < 16; ++i) CHECK(spectrum[i] >= spectrum[i - 1]);
}

TEST_CASE("sector-restricted exact minima") {
  const FermionIntegrals ints = equilibrium();
  const PauliSum h = jordan_wigner(second_quantized(ints));
  const Eigen::MatrixXcd dense = pauli_to_matrix(h);

  // The vacuum sector holds only |0000>, whose electronic energy vanishes.
  const double vacuum =
      sector_exact_minimum(dense, ints.e_nuc, {4, 0, 0.0, {}});
  CHECK(vacuum == doctest::Approx(ints.e_nuc).epsilon(1e-10));

  // The global ground state lives in the (N=2, Sz=0) sector.
  const double singlet =
      sector_exact_minimum(dense, ints.e_nuc, {4, 2, 0.0, {}});
  CHECK(singlet == doctest::Approx(kFciGround0735).epsilon(1e-7));

  double best = 1e300;
  for (const auto& sector : default_sector_list(4))
    best = std::min(best, sector_exact_minimum(dense, ints.e_nuc, sector));
  CHECK(best == doctest::Approx(singlet));
}

TEST_CASE("objective construction") {
  const FermionIntegrals ints = equilibrium();
  const PauliSum h = jordan_wigner(second_quantized(ints));
  const auto groups = group_qubitwise_commuting(h);
  const Circuit circuit = build_aswap({4, 2, 0.0, {}}, 1);

  VqeRunConfig cfg = exact_aswap_config();
  ObjectiveFunction exact =
      make_objective(cfg, h, groups, circuit, ints.e_nuc);
  Eigen::VectorXd params(3);
  params << 0.4, 1.9, 5.2;
  const auto [value, err] = exact.evaluate(params);
  CHECK(err == 0.0);
  const double want =
      sv_expectation(sv_run(bind_parameters(circuit, params)), h) + ints.e_nuc;
  CHECK(value == doctest::Approx(want).epsilon(1e-12));

  // Sampled path: same master seed, fresh objective, identical values.
  cfg.backend = BackendChoice::StatevectorSampled;
  cfg.optimizer = OptimizerChoice::NelderMead;
  cfg.seed = 77;
  ObjectiveFunction s1 = make_objective(cfg, h, groups, circuit, ints.e_nuc);
  ObjectiveFunction s2 = make_objective(cfg, h, groups, circuit, ints.e_nuc);
  CHECK(s1.evaluate(params).first == s2.evaluate(params).first);

  // Noisy objective respects the variational bound up to statistics.
  cfg.backend = BackendChoice::NoisyDm;
  cfg.device = load_device(kDeviceDir + "/vigo.json");
  const double exact_ground = exact_diagonalize(h, ints.e_nuc)[0];
  ObjectiveFunction noisy = make_objective(cfg, h, groups, circuit, ints.e_nuc);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = angle(rng);
    const auto [v, sigma] = noisy.evaluate(x);
    CHECK(v >= exact_ground - 3 * sigma);
  }
}

TEST_CASE("config validation") {
  VqeRunConfig cfg = exact_aswap_config();
  cfg.backend = BackendChoice::NoisyDm;
  CHECK_THROWS(cfg.validate());  // lbfgs forbidden off the exact path

  cfg.optimizer = OptimizerChoice::Direct;
  CHECK_THROWS(cfg.validate());  // device missing
  cfg.device = load_device(kDeviceDir + "/vigo.json");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("ground run on the exact backend") {
  const VqeRunConfig cfg = exact_aswap_config();
  OptimizerResult trace;
  GroundOptions opts;
  opts.trace_out = &trace;
  const VqeResult result = run_ground(cfg, equilibrium(), opts);

  CHECK(result.abs_error < 1.5e-3);
  CHECK(result.exact_energy == doctest::Approx(kFciGround0735).epsilon(1e-7));
  CHECK(std::abs(result.n_expectation - 2.0) < 1e-10);
  CHECK(std::abs(result.sz_expectation) < 1e-10);
  CHECK(result.nearest_exact_index == 0);
  CHECK(result.n_evaluations == trace.n_evaluations);

  // Variational bound along the whole optimization.
  for (const auto& tp : trace.trace)
    CHECK(tp.value >= result.exact_energy - 1e-10);
}

TEST_CASE("ground runs are reproducible") {
  VqeRunConfig cfg = exact_aswap_config();
  cfg.backend = BackendChoice::StatevectorSampled;
  cfg.optimizer = OptimizerChoice::NelderMead;
  cfg.budget = 60;
  cfg.n_starts = 2;
  cfg.shots = 512;
  const VqeResult a = run_ground(cfg, equilibrium());
  const VqeResult b = run_ground(cfg, equilibrium());
  CHECK(a.energy == b.energy);
  CHECK(a.n_evaluations == b.n_evaluations);
  CHECK(a.params == b.params);
}

TEST_CASE("swaprz receives the reference occupation") {
  AnsatzSpec spec;
  spec.family = AnsatzFamily::Swaprz;
  spec.sector = {4, 2, 0.0, {}};
  spec.depth = 1;
  const Circuit c = build_ansatz(spec);
  int n_x = 0;
  for (const auto& g : c.gates) n_x += g.kind == GateKind::X ? 1 : 0;
  CHECK(n_x == 2);

  // The circuit stays inside the target sector for random parameters.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  Eigen::VectorXd params(c.n_free_params);
  for (int i = 0; i < params.size(); ++i) params[i] = angle(rng);
  const Statevector psi = sv_run(bind_parameters(c, params));
  CHECK(std::abs(sv_expectation(psi, number_operator(4)) - 2.0) < 1e-10);
}

TEST_CASE("sector scan on the statevector backend") {
  VqeRunConfig cfg = exact_aswap_config();
  cfg.n_starts = 4;
  const FermionIntegrals ints = equilibrium();
  const auto sectors = default_sector_list(4);
  const auto results = sector_scan(cfg, sectors, ints, 2);
  REQUIRE(results.size() == 6);

  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].abs_error < 1.5e-3);
    CHECK(std::abs(results[i].n_expectation - sectors[i].n_particles) < 1e-9);
    CHECK(std::abs(results[i].sz_expectation - sectors[i].sz) < 1e-9);
  }

  // The vacuum sector needs no optimization and lands on e_nuc exactly.
  CHECK(results[0].n_evaluations == 0);
  CHECK(results[0].energy == doctest::Approx(ints.e_nuc).epsilon(1e-9));
}

TEST_CASE("dissociation curve mechanics") {
  VqeRunConfig cfg = exact_aswap_config();
  cfg.n_starts = 2;
  const auto rows = dissociation_curve(cfg, {0.735}, kFcidumpDir, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].distance == doctest::Approx(0.735));
  CHECK(rows[0].result.abs_error < 1.5e-3);

  CHECK_THROWS(dissociation_curve(cfg, {0.123}, kFcidumpDir, 1));

  write_curve_csv(rows, "/tmp/symvqe_curve_test.csv");
  std::ifstream in("/tmp/symvqe_curve_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "distance,energy,exact_energy,abs_err,abs_log_err,n_mean,sz_mean,"
        "evals");
}

TEST_CASE("result json") {
  VqeRunConfig cfg = exact_aswap_config();
  cfg.n_starts = 1;
  const VqeResult result = run_ground(cfg, equilibrium());
  const std::string text = vqe_result_to_json(result);
  CHECK(text.find("\"energy\"") != std::string::npos);
  CHECK(text.find("\"sector\"") != std::string::npos);
}
