#include "symvqe/driver.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace symvqe {

//=============================================================================
// Configuration
//=============================================================================

AnsatzFamily ansatz_family_from_name(const std::string& name) {
  if (name == "aswap") return AnsatzFamily::Aswap;
  if (name == "ry") return AnsatzFamily::Ry;
  if (name == "ryrz") return AnsatzFamily::Ryrz;
  if (name == "swaprz") return AnsatzFamily::Swaprz;
  throw std::invalid_argument("unknown ansatz: " + name);
}

const char* ansatz_family_name(AnsatzFamily family) {
  switch (family) {
    case AnsatzFamily::Aswap: return "aswap";
    case AnsatzFamily::Ry: return "ry";
    case AnsatzFamily::Ryrz: return "ryrz";
    case AnsatzFamily::Swaprz: return "swaprz";
  }
  return "?";
}

void VqeRunConfig::validate() const {
  ansatz.sector.validate();
  if (backend == BackendChoice::NoisyDm && !device)
    throw std::invalid_argument("noisy backend requires a device model");
  if (optimizer == OptimizerChoice::Lbfgs &&
      backend != BackendChoice::StatevectorExact)
    throw std::invalid_argument(
        "lbfgs requires the exact statevector backend");
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
  mitigation.validate();
}

//=============================================================================
// Exact references
//=============================================================================

Eigen::VectorXd exact_diagonalize(const PauliSum& h, double e_offset) {
  const Eigen::MatrixXcd m = pauli_to_matrix(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m,
                                                         Eigen::EigenvaluesOnly);
  Eigen::VectorXd vals = solver.eigenvalues();
  std::sort(vals.data(), vals.data() + vals.size());
  return vals.array() + e_offset;
}

double sector_exact_minimum(const Eigen::MatrixXcd& h_dense, double e_offset,
                            const SectorSpec& sector) {
  sector.validate();
  const int n = sector.n_qubits;
  if ((1ll << n) != h_dense.rows())
    throw std::invalid_argument("sector/Hamiltonian dimension mismatch");
  const std::uint64_t up_mask = (1ull << (n / 2)) - 1;

  std::vector<Eigen::Index> basis;
  for (std::uint64_t b = 0; b < (1ull << n); ++b) {
    const int total = std::popcount(b);
    if (total != sector.n_particles) continue;
    const int up = std::popcount(b & up_mask);
    const double sz = 0.5 * (2 * up - total);
    if (std::abs(sz - sector.sz) > 1e-9) continue;
    basis.push_back(static_cast<Eigen::Index>(b));
  }
  if (basis.empty()) throw std::invalid_argument("empty sector");

  Eigen::MatrixXcd block(basis.size(), basis.size());
  for (std::size_t r = 0; r < basis.size(); ++r)
    for (std::size_t c = 0; c < basis.size(); ++c)
      block(r, c) = h_dense(basis[r], basis[c]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block,
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() + e_offset;
}

//=============================================================================
// Ansatz assembly
//=============================================================================

Circuit build_ansatz(const AnsatzSpec& spec) {
  switch (spec.family) {
    case AnsatzFamily::Aswap:
      return build_aswap(spec.sector, spec.layers);
    case AnsatzFamily::Ry:
      return build_adhoc(AdhocKind::RY, spec.sector.n_qubits, spec.depth,
                         spec.entanglement);
    case AnsatzFamily::Ryrz:
      return build_adhoc(AdhocKind::RYRZ, spec.sector.n_qubits, spec.depth,
                         spec.entanglement);
    case AnsatzFamily::Swaprz: {
      spec.sector.validate();
      Circuit body = build_adhoc(AdhocKind::SwapRZ, spec.sector.n_qubits,
                                 spec.depth, spec.entanglement);
      Circuit out(body.n_qubits);
      out.n_free_params = body.n_free_params;
      const int half = spec.sector.n_qubits / 2;
      for (int i = 0; i < spec.sector.m_up(); ++i)
        out.gates.push_back(Gate::x(i));
      for (int i = 0; i < spec.sector.m_down(); ++i)
        out.gates.push_back(Gate::x(half + i));
      out.gates.insert(out.gates.end(), body.gates.begin(), body.gates.end());
      return out;
    }
  }
  throw std::invalid_argument("unknown ansatz family");
}

//=============================================================================
// Objective
//=============================================================================

ObjectiveFunction make_objective(const VqeRunConfig& config, const PauliSum& h,
                                 const std::vector<MeasurementGroup>& groups,
                                 const Circuit& circuit, double e_offset,
                                 const CalibrationMatrix* spam_cal) {
  config.validate();
  if (circuit.n_qubits != h.n_qubits)
    throw std::invalid_argument("circuit/Hamiltonian qubit count mismatch");

  if (config.backend == BackendChoice::StatevectorExact) {
    return ObjectiveFunction(
        circuit.n_free_params, [circuit, h, e_offset](const Eigen::VectorXd& x) {
          const Statevector psi = sv_run(bind_parameters(circuit, x));
          return std::make_pair(sv_expectation(psi, h) + e_offset, 0.0);
        });
  }

  EstimatorBackend backend;
  backend.kind = config.backend == BackendChoice::NoisyDm
                     ? EstimatorBackend::Kind::NoisyDm
                     : EstimatorBackend::Kind::SvSampled;
  auto device = std::make_shared<std::optional<DeviceModel>>(config.device);
  auto counter = std::make_shared<std::uint64_t>(0);
  auto cal = spam_cal ? std::make_shared<CalibrationMatrix>(*spam_cal)
                      : nullptr;
  const MitigationConfig mitigation = config.mitigation;
  const long shots = config.shots;
  const std::uint64_t master = config.seed;

  return ObjectiveFunction(
      circuit.n_free_params,
      [backend, device, counter, cal, mitigation, shots, master, e_offset,
       groups, h, circuit](const Eigen::VectorXd& x) {
        EstimatorBackend be = backend;
        if (device->has_value()) be.device = &device->value();
        const std::uint64_t eval_seed = derive_seed(master, (*counter)++);
        const EnergyEstimate est =
            energy_from_groups(h, groups, be, circuit, x, shots, mitigation,
                               e_offset, eval_seed, cal.get());
        return std::make_pair(est.value, est.std_error);
      });
}

//=============================================================================
// Ground-state runs
//=============================================================================

namespace {

struct Pipeline {
  PauliSum h;
  std::vector<MeasurementGroup> groups;
  Eigen::MatrixXcd h_dense;
  Eigen::VectorXd spectrum;  // includes e_nuc
  double e_nuc = 0.0;
};

Pipeline build_pipeline(const FermionIntegrals& ints) {
  Pipeline p;
  p.h = jordan_wigner(second_quantized(ints));
  p.groups = group_qubitwise_commuting(p.h);
  p.h_dense = pauli_to_matrix(p.h);
  p.e_nuc = ints.e_nuc;
  p.spectrum = exact_diagonalize(p.h, ints.e_nuc);
  return p;
}

double state_expectation(const VqeRunConfig& config, const Circuit& bound,
                         const PauliSum& op) {
  if (config.backend == BackendChoice::NoisyDm)
    return dm_expectation(dm_run(lower_to_native(bound), *config.device), op);
  return sv_expectation(sv_run(bound), op);
}

}  // namespace

VqeResult run_ground(const VqeRunConfig& config, const FermionIntegrals& ints,
                     const GroundOptions& options) {
  config.validate();
  const Pipeline pipe = build_pipeline(ints);
  const Circuit circuit = build_ansatz(config.ansatz);
  if (circuit.n_qubits != pipe.h.n_qubits)
    throw std::invalid_argument("ansatz size does not match Hamiltonian");

  // SPAM calibration is built once per run and reused by every evaluation.
  std::unique_ptr<CalibrationMatrix> spam_cal;
  if (config.mitigation.spam &&
      config.backend != BackendChoice::StatevectorExact) {
    DeviceModel readout_dev;
    if (config.device) {
      readout_dev = *config.device;
    } else {
      readout_dev.name = "ideal";
      readout_dev.qubits.assign(circuit.n_qubits, {1e12, 1e12, {0.0, 0.0}});
    }
    spam_cal = std::make_unique<CalibrationMatrix>(build_spam_matrix(
        readout_dev, circuit.n_qubits, config.shots,
        derive_seed(config.seed, 0xCA1ull)));
  }

  ObjectiveFunction objective = make_objective(config, pipe.h, pipe.groups,
                                               circuit, pipe.e_nuc,
                                               spam_cal.get());

  OptimizerResult opt;
  if (circuit.n_free_params == 0) {
    opt.best_params = Eigen::VectorXd(0);
    opt.n_evaluations = 0;
  } else {
    const Bounds bounds =
        Bounds::uniform(circuit.n_free_params, 0.0, 2.0 * std::numbers::pi);
    switch (config.optimizer) {
      case OptimizerChoice::Direct:
        opt = direct_minimize(objective, bounds, config.budget);
        break;
      case OptimizerChoice::NelderMead:
        opt = multistart(objective, bounds, config.n_starts, config.seed,
                         [&](ObjectiveFunction& f, const Eigen::VectorXd& x0) {
                           return nelder_mead_minimize(f, x0, 0.5,
                                                       config.budget);
                         });
        break;
      case OptimizerChoice::Lbfgs:
        opt = multistart(objective, bounds, config.n_starts, config.seed,
                         [&](ObjectiveFunction& f, const Eigen::VectorXd& x0) {
                           return lbfgs_fd_minimize(f, x0, config.budget);
                         });
        break;
    }
  }
  if (options.trace_out) *options.trace_out = opt;

  VqeResult result;
  result.params = opt.best_params;
  result.n_evaluations = opt.n_evaluations;
  result.sector = config.ansatz.sector;

  // Final energy re-estimated at the best parameters, decoupled from the
  // optimization noise: exact value on the statevector path, a 4x-shot
  // estimate otherwise.
  if (config.backend == BackendChoice::StatevectorExact) {
    const Circuit bound = bind_parameters(circuit, result.params);
    result.energy = sv_expectation(sv_run(bound), pipe.h) + pipe.e_nuc;
    result.energy_std_error = 0.0;
  } else {
    EstimatorBackend be;
    be.kind = config.backend == BackendChoice::NoisyDm
                  ? EstimatorBackend::Kind::NoisyDm
                  : EstimatorBackend::Kind::SvSampled;
    if (config.device) be.device = &*config.device;
    const EnergyEstimate est = energy_from_groups(
        pipe.h, pipe.groups, be, circuit, result.params, config.shots * 4,
        config.mitigation, pipe.e_nuc, derive_seed(config.seed, 0xF1Aull),
        spam_cal.get());
    result.energy = est.value;
    result.energy_std_error = est.std_error;
    result.mitigation_tags = est.mitigation_tags;
  }

  result.exact_energy = options.exact_energy_override
                            ? *options.exact_energy_override
                            : pipe.spectrum[0];
  result.abs_error = std::abs(result.energy - result.exact_energy);

  const Circuit bound = bind_parameters(circuit, result.params);
  result.n_expectation =
      state_expectation(config, bound, number_operator(circuit.n_qubits));
  result.sz_expectation =
      state_expectation(config, bound, sz_operator(circuit.n_qubits));

  int nearest = 0;
  for (int i = 1; i < pipe.spectrum.size(); ++i)
    if (std::abs(pipe.spectrum[i] - result.energy) <
        std::abs(pipe.spectrum[nearest] - result.energy))
      nearest = i;
  result.nearest_exact_index = nearest;
  return result;
}

//=============================================================================
// Sector scans and curves
//=============================================================================

std::vector<SectorSpec> default_sector_list(int n_qubits) {
  return {
      {n_qubits, 0, 0.0, {}},  {n_qubits, 1, 0.5, {}}, {n_qubits, 2, 0.0, {}},
      {n_qubits, 2, 1.0, {}},  {n_qubits, 3, 0.5, {}}, {n_qubits, 4, 0.0, {}},
  };
}

namespace {

/// Deterministic index-ordered parallel map over 0..count-1.
void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        task(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<VqeResult> sector_scan(const VqeRunConfig& config,
                                   const std::vector<SectorSpec>& sectors,
                                   const FermionIntegrals& ints, int jobs) {
  const Pipeline pipe = build_pipeline(ints);
  std::vector<VqeResult> results(sectors.size());
  std::vector<std::string> errors(sectors.size());

  parallel_for(static_cast<int>(sectors.size()), jobs, [&](int i) {
    try {
      VqeRunConfig cfg = config;
      cfg.ansatz.family = AnsatzFamily::Aswap;
      cfg.ansatz.sector = sectors[i];
      // Extra brick layers only matter when both spin blocks carry free
      // gates; otherwise they just lengthen the circuit, which costs
      // accuracy on noisy backends.
      const int half = sectors[i].n_qubits / 2;
      const bool up = sectors[i].m_up() > 0 && sectors[i].m_up() < half;
      const bool down = sectors[i].m_down() > 0 && sectors[i].m_down() < half;
      if (!(up && down)) cfg.ansatz.layers = std::min(cfg.ansatz.layers, 1);
      cfg.mitigation.particle_number = sectors[i].n_particles;
      cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
      GroundOptions opts;
      opts.exact_energy_override =
          sector_exact_minimum(pipe.h_dense, pipe.e_nuc, sectors[i]);
      results[i] = run_ground(cfg, ints, opts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("sector scan failed: " + err);
  return results;
}

std::string fcidump_path(const std::string& integral_dir, double distance) {
  char name[32];
  std::snprintf(name, sizeof name, "d%.3f.fcid", distance);
  return integral_dir + "/" + name;
}

std::vector<CurveRow> dissociation_curve(const VqeRunConfig& config,
                                         const std::vector<double>& distances,
                                         const std::string& integral_dir,
                                         int jobs) {
  // Load everything up front so a missing file fails before any work runs.
  std::vector<FermionIntegrals> ints;
  ints.reserve(distances.size());
  for (const double d : distances)
    ints.push_back(load_fcidump(fcidump_path(integral_dir, d)));

  std::vector<CurveRow> rows(distances.size());
  std::vector<std::string> errors(distances.size());
  parallel_for(static_cast<int>(distances.size()), jobs, [&](int i) {
    try {
      VqeRunConfig cfg = config;
      cfg.seed = derive_seed(config.seed, 0xD15Cull + i);
      rows[i].distance = distances[i];
      rows[i].result = run_ground(cfg, ints[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty())
      throw std::runtime_error("dissociation curve failed: " + err);
  return rows;
}

void write_curve_csv(const std::vector<CurveRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "distance,energy,exact_energy,abs_err,abs_log_err,n_mean,sz_mean,"
         "evals\n";
  char buf[256];
  for (const auto& row : rows) {
    const double abs_err = std::max(row.result.abs_error, 1e-300);
    std::snprintf(buf, sizeof buf,
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%ld\n",
                  row.distance, row.result.energy, row.result.exact_energy,
                  row.result.abs_error, std::log10(abs_err),
                  row.result.n_expectation, row.result.sz_expectation,
                  row.result.n_evaluations);
    out << buf;
  }
}

std::string vqe_result_to_json(const VqeResult& result) {
  nlohmann::json tags = nlohmann::json::array();
  for (const Mitigation m : result.mitigation_tags)
    tags.push_back(m == Mitigation::Spam      ? "spam"
                   : m == Mitigation::Symmetry ? "symmetry"
                                               : "richardson");
  nlohmann::json root = {
      {"energy", result.energy},
      {"exact_energy", result.exact_energy},
      {"abs_error", result.abs_error},
      {"energy_std_error", result.energy_std_error},
      {"n_evaluations", result.n_evaluations},
      {"n_expectation", result.n_expectation},
      {"sz_expectation", result.sz_expectation},
      {"nearest_exact_index", result.nearest_exact_index},
      {"mitigation", tags},
  };
  root["params"] = std::vector<double>(
      result.params.data(), result.params.data() + result.params.size());
  if (result.sector) {
    root["sector"] = {{"n_qubits", result.sector->n_qubits},
                      {"n_particles", result.sector->n_particles},
                      {"sz", result.sector->sz}};
  }
  return root.dump(2);
}

}  // namespace symvqe
