#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <random>

#include "symvqe/backend.hpp"
#include "symvqe/circuit.hpp"

#include "oracles.hpp"

using namespace symvqe;

namespace {

double phase_aligned_error(const Eigen::MatrixXcd& got,
                           const Eigen::MatrixXcd& want) {
  int r = 0, c = 0;
  want.cwiseAbs().maxCoeff(&r, &c);
  Complex ratio = got(r, c) / want(r, c);
  ratio /= std::abs(ratio);
  return (got / ratio - want).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("A gate matrix") {
  const Eigen::Matrix4cd at_zero = a_gate_matrix(0, 0);
  CHECK(at_zero(0, 0) == Complex(1, 0));
  CHECK(at_zero(1, 1) == Complex(1, 0));
  CHECK(at_zero(2, 2) == Complex(-1, 0));
  CHECK(at_zero(3, 3) == Complex(1, 0));

  const Eigen::Matrix4cd swap = a_gate_matrix(M_PI / 2, 0);
  CHECK(std::abs(swap(1, 2) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(swap(2, 1) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(swap(1, 1)) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix4cd a = a_gate_matrix(angle(rng), angle(rng));
    CHECK((a.adjoint() * a - Eigen::Matrix4cd::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("A gate decomposition is exact with three CNOTs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double theta = i == 0 ? 0.0 : angle(rng);
    const double phi = i == 0 ? 0.0 : angle(rng);
    const auto seq = decompose_a_gate(theta, phi);
    int cnots = 0;
    for (const auto& g : seq) {
      const bool allowed = g.kind == GateKind::RY || g.kind == GateKind::RZ ||
                           g.kind == GateKind::CNOT;
      CHECK(allowed);
      cnots += g.kind == GateKind::CNOT ? 1 : 0;
    }
    CHECK(cnots == 3);

    Circuit c(2);
    c.gates = seq;
    worst = std::max(worst, phase_aligned_error(oracle::dense_circuit(c),
                                                a_gate_matrix(theta, phi)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("ASWAP construction") {
  const SectorSpec singlet{4, 2, 0.0, {}};
  const Circuit c = build_aswap(singlet, 1);
  int n_x = 0, n_a = 0;
  std::vector<int> x_qubits;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::X) {
      ++n_x;
      x_qubits.push_back(g.qubits[0]);
    }
    if (g.kind == GateKind::A) ++n_a;
  }
  CHECK(n_x == 2);
  CHECK(x_qubits == std::vector<int>{0, 2});
  CHECK(n_a == 2);
  const ResourceReport r = resources(c);
  CHECK(r.n_free_params == 3);
  CHECK(r.n_cnots == 6);

  const Circuit vacuum = build_aswap({4, 0, 0.0, {}});
  CHECK(vacuum.gates.empty());
  CHECK(vacuum.n_free_params == 0);

  const Circuit full = build_aswap({4, 4, 0.0, {}});
  CHECK(full.gates.size() == 4);
  CHECK(full.n_free_params == 0);

  CHECK_THROWS(build_aswap({4, 5, 0.0, {}}));
  CHECK_THROWS(build_aswap({4, 2, 2.0, {}}));
  CHECK_THROWS(build_aswap({4, 1, 0.0, {}}));  // m/2 + sz not an integer
}

TEST_CASE("two-layer ASWAP couples the spin blocks") {
  const Circuit c = build_aswap({4, 2, 0.0, {}}, 2);
  const ResourceReport r = resources(c);
  CHECK(r.n_free_params == 7);
  CHECK(r.n_cnots == 13);  // four A gates plus the diagonal coupler
  int n_cz = 0;
  for (const auto& g : c.gates) n_cz += g.kind == GateKind::CZ ? 1 : 0;
  CHECK(n_cz == 1);

  // A single brick layer of block-local gates only reaches block-product
  // amplitude patterns; the coupled circuit escapes them. Product patterns
  // satisfy a01*a10 == a00*a11 on the (up-excitation, down-excitation)
  // amplitudes, so check a point that violates it.
  Eigen::VectorXd params(7);
  params << 0.9, 1.7, 0.0, 0.8, 0.0, 1.2, 0.0;
  const Statevector psi = sv_run(bind_parameters(c, params));
  const Complex cross = psi.amps[0b0101] * psi.amps[0b1010] -
                        psi.amps[0b0110] * psi.amps[0b1001];
  CHECK(std::abs(cross) > 1e-3);
}

TEST_CASE("ASWAP preserves its sector exactly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  const PauliSum n_op = number_operator(4), sz_op = sz_operator(4);
  const std::uint64_t up_mask = 0b0011;

  for (const SectorSpec sector :
       {SectorSpec{4, 2, 0.0, {}}, SectorSpec{4, 1, 0.5, {}},
        SectorSpec{4, 3, 0.5, {}}, SectorSpec{4, 2, 1.0, {}}}) {
    const Circuit c = build_aswap(sector, 1);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd params(c.n_free_params);
      for (int i = 0; i < params.size(); ++i) params[i] = angle(rng);
      const Statevector psi = sv_run(bind_parameters(c, params));
      CHECK(std::abs(sv_expectation(psi, n_op) - sector.n_particles) < 1e-10);
      CHECK(std::abs(sv_expectation(psi, sz_op) - sector.sz) < 1e-10);
      // Stronger: zero amplitude outside the (m, sz) sector.
      for (std::uint64_t b = 0; b < 16; ++b) {
        const int total = std::popcount(b);
        const int up = std::popcount(b & up_mask);
        const double sz = 0.5 * (2 * up - total);
        if (total == sector.n_particles && std::abs(sz - sector.sz) < 1e-12)
          continue;
        CHECK(std::abs(psi.amps[static_cast<Eigen::Index>(b)]) < 1e-12);
      }
    }
  }
}

TEST_CASE("sector coverage has full parameter rank") {
  const Circuit c = build_aswap({4, 2, 0.0, {}}, 1);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(0.3, 5.5);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = angle(rng);
    // Finite-difference Jacobian of the real state map R^3 -> R^32.
    const double h = 1e-6;
    Eigen::MatrixXd jac(32, 3);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const Eigen::VectorXcd dp = sv_run(bind_parameters(c, xp)).amps;
      const Eigen::VectorXcd dm = sv_run(bind_parameters(c, xm)).amps;
      const Eigen::VectorXcd d = (dp - dm) / (2 * h);
      jac.block(0, i, 16, 1) = d.real();
      jac.block(16, i, 16, 1) = d.imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    int rank = 0;
    for (int i = 0; i < 3; ++i)
      if (svd.singularValues()[i] > 1e-6 * svd.singularValues()[0]) ++rank;
    CHECK(rank == 3);
  }
}

TEST_CASE("ad hoc ansatz shapes") {
  const Circuit ry = build_adhoc(AdhocKind::RY, 4, 1, Entanglement::Full);
  CHECK(resources(ry).n_free_params == 8);
  CHECK(resources(ry).n_cnots == 6);  // all qubit pairs of CZ

  const Circuit ryrz = build_adhoc(AdhocKind::RYRZ, 4, 1, Entanglement::Full);
  CHECK(resources(ryrz).n_free_params == 16);

  const Circuit ry0 = build_adhoc(AdhocKind::RY, 4, 0, Entanglement::Full);
  CHECK(resources(ry0).n_free_params == 4);
  CHECK(resources(ry0).n_cnots == 0);

  // Nearest-neighbour entanglement drops the CNOT count to n-1 per layer.
  const Circuit ry_lin = build_adhoc(AdhocKind::RY, 4, 1, Entanglement::Linear);
  CHECK(resources(ry_lin).n_free_params == 8);
  CHECK(resources(ry_lin).n_cnots == 3);

  const Circuit swaprz =
      build_adhoc(AdhocKind::SwapRZ, 4, 1, Entanglement::Full);
  CHECK(resources(swaprz).n_free_params == 14);
  CHECK(resources(swaprz).n_cnots == 12);  // six parameterized swaps
}

TEST_CASE("resource accounting") {
  const Circuit empty(3);
  const ResourceReport r0 = resources(empty);
  CHECK(r0.n_free_params == 0);
  CHECK(r0.n_cnots == 0);
  CHECK(r0.depth == 0);

  Circuit cz(2);
  cz.gates.push_back(Gate::cz(0, 1));
  CHECK(resources(cz).n_cnots == 1);
}

TEST_CASE("CNOT folding") {
  const Circuit aswap = build_aswap({4, 2, 0.0, {}}, 1);
  Eigen::VectorXd params(3);
  params << 0.7, 1.3, 2.1;
  const Circuit native = lower_to_native(bind_parameters(aswap, params));
  CHECK(resources(native).n_cnots == 6);

  const Circuit same = fold_cnots(native, 1);
  CHECK(same.gates.size() == native.gates.size());

  const Circuit tripled = fold_cnots(native, 3);
  CHECK(resources(tripled).n_cnots == 18);
  CHECK_THROWS(fold_cnots(native, 2));

  const Statevector a = sv_run(native), b = sv_run(tripled);
  CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lowering preserves the unitary up to phase") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> angle(-3.1, 3.1);
  for (int trial = 0; trial < 25; ++trial) {
    Circuit c(3);
    c.gates.push_back(Gate::a(0, 2, GateParam::bound(angle(rng)),
                              GateParam::bound(angle(rng))));
    c.gates.push_back(Gate::pswap(1, 0, GateParam::bound(angle(rng))));
    c.gates.push_back(Gate::cz(2, 1));
    const Circuit low = lower_to_native(c);
    for (const auto& g : low.gates) {
      const bool native = g.kind != GateKind::A && g.kind != GateKind::CZ &&
                          g.kind != GateKind::PSWAP;
      CHECK(native);
    }
    CHECK(phase_aligned_error(oracle::dense_circuit(low),
                              oracle::dense_circuit(c)) < 1e-10);
  }
}

TEST_CASE("parameter count formulas") {
  CHECK(parameter_count(CountMode::FullHilbert, 2) == 6);
  CHECK(parameter_count(CountMode::FixedN, 4, 2) == 10);
  CHECK(parameter_count(CountMode::FixedNSSz, 4, 2, 0.0) == 3);
  CHECK(parameter_count(CountMode::FixedNSSz, 4, 2, 1.0) == 1);
  CHECK(parameter_count(CountMode::FixedNSSz, 4, 1, 0.5) == 2);
  CHECK_THROWS(parameter_count(CountMode::FixedNSSz, 4, 2, 2.0));
  CHECK_THROWS(parameter_count(CountMode::FixedNSSz, 4, 2, 0.5));
  CHECK_THROWS(parameter_count(CountMode::FixedN, 4, 5));
}

TEST_CASE("parameter binding") {
  const Circuit c = build_aswap({4, 2, 0.0, {}}, 1);
  Eigen::VectorXd params(3);
  params << 0.1, 0.2, 0.3;
  const Circuit bound = bind_parameters(c, params);
  CHECK(bound.fully_bound());
  CHECK(resources(bound).n_free_params == 0);
  CHECK(bound.gates.size() == c.gates.size());

  Eigen::VectorXd wrong(2);
  CHECK_THROWS(bind_parameters(c, wrong));
}

TEST_CASE("circuit json round trip") {
  const Circuit c = build_aswap({4, 2, 0.0, {}}, 1);
  const Circuit back = circuit_from_json(circuit_to_json(c));
  CHECK(back.n_qubits == c.n_qubits);
  CHECK(back.n_free_params == c.n_free_params);
  REQUIRE(back.gates.size() == c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    CHECK(back.gates[i].kind == c.gates[i].kind);
    CHECK(back.gates[i].qubits == c.gates[i].qubits);
  }
  CHECK(!circuit_pretty(c).empty());
}
