#include "symvqe/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "symvqe/driver.hpp"

namespace symvqe {

namespace {

std::vector<double> parse_double_csv(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> default_distance_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 22; ++k) grid.push_back(0.3 + 0.1 * k);
  return grid;
}

MitigationConfig mitigation_from_tokens(const std::vector<std::string>& tokens,
                                        int particle_number,
                                        const std::vector<long>& folds) {
  MitigationConfig m;
  m.particle_number = particle_number;
  for (const auto& t : tokens) {
    if (t == "spam")
      m.spam = true;
    else if (t == "symmetry" || t == "sy")
      m.symmetry = true;
    else if (t == "richardson" || t == "re")
      m.richardson = true;
    else if (t == "none")
      continue;
    else
      throw CliError(2, "unknown mitigation strategy: " + t);
  }
  m.folds.clear();
  for (const long f : folds) m.folds.push_back(static_cast<int>(f));
  m.validate();
  return m;
}

VqeRunConfig invocation_to_config(const CliInvocation& inv) {
  VqeRunConfig cfg;
  cfg.ansatz.family = ansatz_family_from_name(inv.ansatz);
  cfg.ansatz.sector = {inv.n_qubits, inv.n_particles, inv.sz, {}};
  cfg.ansatz.depth = inv.depth;
  cfg.ansatz.layers = inv.layers;
  if (inv.entanglement == "full")
    cfg.ansatz.entanglement = Entanglement::Full;
  else if (inv.entanglement == "linear")
    cfg.ansatz.entanglement = Entanglement::Linear;
  else
    throw CliError(2, "unknown entanglement: " + inv.entanglement);

  if (inv.backend == "statevector")
    cfg.backend = BackendChoice::StatevectorExact;
  else if (inv.backend == "sampled")
    cfg.backend = BackendChoice::StatevectorSampled;
  else if (inv.backend == "noisy")
    cfg.backend = BackendChoice::NoisyDm;
  else
    throw CliError(2, "unknown backend: " + inv.backend);

  if (cfg.backend == BackendChoice::NoisyDm) {
    if (inv.device_path.empty())
      throw CliError(2, "--backend noisy requires --device");
    cfg.device = load_device(inv.device_path);
  }

  std::string opt = inv.optimizer;
  if (opt.empty())
    opt = cfg.backend == BackendChoice::StatevectorExact ? "lbfgs" : "direct";
  if (opt == "direct")
    cfg.optimizer = OptimizerChoice::Direct;
  else if (opt == "neldermead")
    cfg.optimizer = OptimizerChoice::NelderMead;
  else if (opt == "lbfgs")
    cfg.optimizer = OptimizerChoice::Lbfgs;
  else
    throw CliError(2, "unknown optimizer: " + opt);

  cfg.shots = inv.shots;
  cfg.budget = inv.budget;
  cfg.n_starts = inv.starts;
  cfg.seed = inv.seed;
  cfg.mitigation = mitigation_from_tokens(split_csv(inv.mitigate),
                                          inv.n_particles, inv.folds);
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw CliError(2, e.what());
  }
  return cfg;
}

//-----------------------------------------------------------------------------
// Manifest
//-----------------------------------------------------------------------------

class Manifest {
 public:
  Manifest(const CliInvocation& inv)
      : inv_(inv), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(inv.out);
  }

  std::string artifact(const std::string& name) {
    names_.push_back(name);
    return inv_.out + "/" + name;
  }

  void write() const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    nlohmann::json root;
    root["subcommand"] = inv_.subcommand;
    root["config"] = nlohmann::json::parse(inv_.resolved_json());
    root["seed"] = inv_.seed;
    root["versions"] = {{"symvqe", "0.1.0"},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." +
                                      std::to_string(EIGEN_MINOR_VERSION)}};
    root["wall_time_s"] = wall;
    root["artifacts"] = names_;
    std::ofstream out(inv_.out + "/manifest.json");
    out << root.dump(2) << "\n";
  }

 private:
  const CliInvocation& inv_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> names_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

int effective_jobs(const CliInvocation& inv) {
  if (inv.jobs > 0) return inv.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

//-----------------------------------------------------------------------------
// Subcommand bodies
//-----------------------------------------------------------------------------

int run_ground_cmd(const CliInvocation& inv) {
  if (inv.fcidump.empty()) throw CliError(2, "ground requires --fcidump");
  const VqeRunConfig cfg = invocation_to_config(inv);
  const FermionIntegrals ints = load_fcidump(inv.fcidump);

  Manifest manifest(inv);
  OptimizerResult trace;
  GroundOptions opts;
  opts.trace_out = &trace;
  const VqeResult result = run_ground(cfg, ints, opts);

  write_text(manifest.artifact("ground_result.json"),
             vqe_result_to_json(result));
  trace_to_csv(trace, manifest.artifact("trace.csv"));
  manifest.write();
  std::printf("energy=%.10f exact=%.10f abs_err=%.3e evals=%ld\n",
              result.energy, result.exact_energy, result.abs_error,
              result.n_evaluations);
  return 0;
}

int run_sectors_cmd(const CliInvocation& inv) {
  const VqeRunConfig cfg = invocation_to_config(inv);
  std::vector<std::pair<double, std::string>> sources;
  if (!inv.fcidump.empty()) {
    sources.emplace_back(0.0, inv.fcidump);
  } else if (!inv.fcidump_dir.empty()) {
    const auto distances =
        inv.distances.empty() ? default_distance_grid() : inv.distances;
    for (const double d : distances)
      sources.emplace_back(d, fcidump_path(inv.fcidump_dir, d));
  } else {
    throw CliError(2, "sectors requires --fcidump or --fcidump-dir");
  }

  Manifest manifest(inv);
  std::ostringstream csv;
  csv << "distance,n,sz,energy,exact_energy,abs_err,abs_log_err,evals\n";
  char buf[256];
  for (const auto& [distance, path] : sources) {
    const FermionIntegrals ints = load_fcidump(path);
    const auto sectors = default_sector_list(inv.n_qubits);
    const auto results = sector_scan(cfg, sectors, ints, effective_jobs(inv));
    for (std::size_t i = 0; i < results.size(); ++i) {
      const VqeResult& r = results[i];
      std::snprintf(buf, sizeof buf,
                    "%.12g,%d,%.1f,%.12g,%.12g,%.12g,%.12g,%ld\n", distance,
                    sectors[i].n_particles, sectors[i].sz, r.energy,
                    r.exact_energy, r.abs_error,
                    std::log10(std::max(r.abs_error, 1e-300)),
                    r.n_evaluations);
      csv << buf;
    }
  }
  write_text(manifest.artifact("sectors.csv"), csv.str());
  manifest.write();
  std::printf("wrote %s/sectors.csv\n", inv.out.c_str());
  return 0;
}

int run_curve_cmd(const CliInvocation& inv) {
  if (inv.fcidump_dir.empty()) throw CliError(2, "curve requires --fcidump-dir");
  const VqeRunConfig cfg = invocation_to_config(inv);
  const auto distances =
      inv.distances.empty() ? default_distance_grid() : inv.distances;

  Manifest manifest(inv);
  const auto rows =
      dissociation_curve(cfg, distances, inv.fcidump_dir, effective_jobs(inv));
  write_curve_csv(rows, manifest.artifact("curve.csv"));
  manifest.write();
  std::printf("wrote %s/curve.csv (%zu rows)\n", inv.out.c_str(), rows.size());
  return 0;
}

int run_resources_cmd(const CliInvocation& inv) {
  AnsatzSpec spec;
  spec.family = ansatz_family_from_name(inv.ansatz);
  spec.sector = {inv.n_qubits, inv.n_particles, inv.sz, {}};
  spec.depth = inv.depth;
  spec.layers = inv.layers;
  spec.entanglement = inv.entanglement == "linear" ? Entanglement::Linear
                                                   : Entanglement::Full;
  const ResourceReport report = resources(build_ansatz(spec));

  Manifest manifest(inv);
  nlohmann::json rec = {{"ansatz", inv.ansatz},
                        {"n_free_params", report.n_free_params},
                        {"n_cnots", report.n_cnots},
                        {"depth", report.depth}};
  write_text(manifest.artifact("resources.json"), rec.dump(2));
  manifest.write();
  std::printf("params=%d cnots=%d\n", report.n_free_params, report.n_cnots);
  return 0;
}

int run_exact_cmd(const CliInvocation& inv) {
  if (inv.fcidump.empty()) throw CliError(2, "exact requires --fcidump");
  const FermionIntegrals ints = load_fcidump(inv.fcidump);
  const PauliSum h = jordan_wigner(second_quantized(ints));
  const Eigen::VectorXd spectrum = exact_diagonalize(h, ints.e_nuc);

  Manifest manifest(inv);
  std::ostringstream csv;
  csv << "index,energy\n";
  char buf[64];
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    std::printf("%.12f\n", spectrum[i]);
    std::snprintf(buf, sizeof buf, "%lld,%.12g\n",
                  static_cast<long long>(i), spectrum[i]);
    csv << buf;
  }
  write_text(manifest.artifact("exact.csv"), csv.str());
  manifest.write();
  return 0;
}

int run_mitigate_bench_cmd(const CliInvocation& inv) {
  if (inv.fcidump.empty())
    throw CliError(2, "mitigate-bench requires --fcidump");
  if (inv.device_path.empty())
    throw CliError(2, "mitigate-bench requires --device");

  CliInvocation base = inv;
  base.backend = "noisy";
  Manifest manifest(inv);
  std::ostringstream csv;
  csv << "strategy,energy,exact_energy,abs_err,std_error,evals\n";
  char buf[256];
  for (const auto& strategy : split_csv(inv.strategies)) {
    std::string tokens;
    if (strategy == "none") tokens = "";
    else if (strategy == "re") tokens = "richardson";
    else if (strategy == "sy") tokens = "symmetry";
    else if (strategy == "spam") tokens = "spam";
    else if (strategy == "spamre") tokens = "spam,richardson";
    else if (strategy == "spamsy") tokens = "spam,symmetry";
    else if (strategy == "spamsyre") tokens = "spam,symmetry,richardson";
    else throw CliError(2, "unknown strategy: " + strategy);

    base.mitigate = tokens;
    const VqeRunConfig cfg = invocation_to_config(base);
    const FermionIntegrals ints = load_fcidump(inv.fcidump);
    const VqeResult r = run_ground(cfg, ints);
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g,%ld\n",
                  strategy.c_str(), r.energy, r.exact_energy, r.abs_error,
                  r.energy_std_error, r.n_evaluations);
    csv << buf;
    std::printf("%-9s abs_err=%.4e\n", strategy.c_str(), r.abs_error);
  }
  write_text(manifest.artifact("mitigate_bench.csv"), csv.str());
  manifest.write();
  return 0;
}

int run_spam_cal_cmd(const CliInvocation& inv) {
  if (inv.device_path.empty()) throw CliError(2, "spam-cal requires --device");
  const DeviceModel dev = load_device(inv.device_path);
  const CalibrationMatrix cal =
      build_spam_matrix(dev, inv.n_qubits, inv.shots, inv.seed);

  Manifest manifest(inv);
  write_text(manifest.artifact("spam_cal.json"), calibration_to_json(cal));
  manifest.write();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cal.t);
  std::printf("condition=%.6g\n", svd.singularValues().maxCoeff() /
                                      svd.singularValues().minCoeff());
  return 0;
}

}  // namespace

//=============================================================================
// Parsing
//=============================================================================

std::string CliInvocation::resolved_json() const {
  nlohmann::json root = {
      {"subcommand", subcommand}, {"fcidump", fcidump},
      {"fcidump-dir", fcidump_dir}, {"distances", distances},
      {"ansatz", ansatz},         {"n", n_particles},
      {"sz", sz},                 {"depth", depth},
      {"entanglement", entanglement}, {"layers", layers},
      {"n-qubits", n_qubits},     {"backend", backend},
      {"device", device_path},    {"shots", shots},
      {"optimizer", optimizer},   {"budget", budget},
      {"starts", starts},         {"mitigate", mitigate},
      {"folds", folds},           {"strategies", strategies},
      {"seed", seed},             {"out", out},
      {"jobs", jobs},
  };
  return root.dump(2);
}

CliInvocation parse_and_validate(const std::vector<std::string>& args) {
  CLI::App app{"Symmetry-preserving VQE simulation toolkit"};
  app.require_subcommand(1);

  CliInvocation inv;
  std::string config_path;
  std::string distances_csv, folds_csv;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags win)");
    cmd->add_option("--fcidump", inv.fcidump, "integral file");
    cmd->add_option("--fcidump-dir", inv.fcidump_dir, "integral directory");
    cmd->add_option("--distances", distances_csv, "comma-separated distances");
    cmd->add_option("--ansatz", inv.ansatz, "aswap|ry|ryrz|swaprz")
        ->check(CLI::IsMember({"aswap", "ry", "ryrz", "swaprz"}));
    cmd->add_option("--n", inv.n_particles, "particle number");
    cmd->add_option("--sz", inv.sz, "spin projection (half-integer)");
    cmd->add_option("--depth", inv.depth, "ad hoc ansatz depth")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--entanglement", inv.entanglement, "full|linear")
        ->check(CLI::IsMember({"full", "linear"}));
    cmd->add_option("--layers", inv.layers, "ASWAP brick layers")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n-qubits", inv.n_qubits, "register size");
    cmd->add_option("--backend", inv.backend, "statevector|sampled|noisy")
        ->check(CLI::IsMember({"statevector", "sampled", "noisy"}));
    cmd->add_option("--device", inv.device_path, "device model JSON");
    cmd->add_option("--shots", inv.shots, "shots per experiment")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--optimizer", inv.optimizer, "direct|neldermead|lbfgs")
        ->check(CLI::IsMember({"", "direct", "neldermead", "lbfgs"}));
    cmd->add_option("--budget", inv.budget, "objective call budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--starts", inv.starts, "multistart count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mitigate", inv.mitigate,
                    "csv of spam,symmetry,richardson");
    cmd->add_option("--folds", folds_csv, "odd CNOT fold factors");
    cmd->add_option("--strategies", inv.strategies,
                    "mitigate-bench strategy list");
    cmd->add_option("--seed", inv.seed, "master seed");
    cmd->add_option("--out", inv.out, "output directory");
    cmd->add_option("--jobs", inv.jobs, "parallel tasks (0 = cores)");
    cmd->add_flag("--dry-run", inv.dry_run, "print resolved config and exit");
    return cmd;
  };

  std::vector<CLI::App*> cmds;
  for (const char* name : {"ground", "sectors", "curve", "resources", "exact",
                           "mitigate-bench", "spam-cal"})
    cmds.push_back(add_common(app.add_subcommand(name)));

  // Two-pass parse: the first pass locates --config so its values can act
  // as defaults, and the second pass lets explicit flags override them.
  std::vector<std::string> argv_copy(args);
  for (std::size_t i = 0; i + 1 < argv_copy.size(); ++i)
    if (argv_copy[i] == "--config") config_path = argv_copy[i + 1];
  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw CliError(2, "cannot open config file: " + config_path);
    try {
      in >> config;
    } catch (const std::exception& e) {
      throw CliError(2, std::string("bad config file: ") + e.what());
    }
  }

  try {
    // CLI11 wants reversed argv without the program name.
    std::vector<std::string> rev(argv_copy.rbegin(), argv_copy.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw CliError(2, e.what());
  }

  CLI::App* active = app.get_subcommands().at(0);
  inv.subcommand = active->get_name();

  // Apply config-file values for options the command line left untouched.
  auto maybe = [&](const char* key, auto& field) {
    using Field = std::remove_reference_t<decltype(field)>;
    const std::string flag = std::string("--") + key;
    if (!config.contains(key)) return;
    const CLI::Option* opt = active->get_option_no_throw(flag);
    if (opt && opt->count() > 0) return;  // flag wins
    field = config.at(key).get<Field>();
  };
  maybe("fcidump", inv.fcidump);
  maybe("fcidump-dir", inv.fcidump_dir);
  maybe("ansatz", inv.ansatz);
  maybe("n", inv.n_particles);
  maybe("sz", inv.sz);
  maybe("depth", inv.depth);
  maybe("entanglement", inv.entanglement);
  maybe("layers", inv.layers);
  maybe("n-qubits", inv.n_qubits);
  maybe("backend", inv.backend);
  maybe("device", inv.device_path);
  maybe("shots", inv.shots);
  maybe("optimizer", inv.optimizer);
  maybe("budget", inv.budget);
  maybe("starts", inv.starts);
  maybe("mitigate", inv.mitigate);
  maybe("strategies", inv.strategies);
  maybe("seed", inv.seed);
  maybe("out", inv.out);
  maybe("jobs", inv.jobs);
  maybe("distances", distances_csv);
  maybe("folds", folds_csv);

  try {
    if (!distances_csv.empty()) inv.distances = parse_double_csv(distances_csv);
    if (!folds_csv.empty()) {
      inv.folds.clear();
      for (const double f : parse_double_csv(folds_csv))
        inv.folds.push_back(static_cast<long>(f));
    }
  } catch (const std::exception&) {
    throw CliError(2, "invalid numeric list");
  }

  if (inv.shots < 1) throw CliError(2, "--shots must be positive");
  if (inv.n_qubits < 2 || inv.n_qubits % 2 != 0)
    throw CliError(2, "--n-qubits must be even and at least 2");

  // Subcommand-specific required inputs surface before any computation.
  if (inv.subcommand == "ground" && inv.fcidump.empty() && !inv.dry_run)
    throw CliError(2, "ground requires --fcidump");
  if (inv.subcommand == "ground" || inv.subcommand == "sectors" ||
      inv.subcommand == "curve" || inv.subcommand == "mitigate-bench")
    invocation_to_config(inv);  // full validation, throws CliError

  return inv;
}

int run_subcommand(const CliInvocation& inv) {
  if (inv.dry_run) {
    std::printf("%s\n", inv.resolved_json().c_str());
    return 0;
  }
  if (inv.subcommand == "ground") return run_ground_cmd(inv);
  if (inv.subcommand == "sectors") return run_sectors_cmd(inv);
  if (inv.subcommand == "curve") return run_curve_cmd(inv);
  if (inv.subcommand == "resources") return run_resources_cmd(inv);
  if (inv.subcommand == "exact") return run_exact_cmd(inv);
  if (inv.subcommand == "mitigate-bench") return run_mitigate_bench_cmd(inv);
  if (inv.subcommand == "spam-cal") return run_spam_cal_cmd(inv);
  throw CliError(2, "unknown subcommand: " + inv.subcommand);
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run_subcommand(parse_and_validate(args));
  } catch (const CliError& e) {
    nlohmann::json err = {{"error", e.what()}, {"exit_code", e.exit_code}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return e.exit_code;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", e.what()}, {"exit_code", 3}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
  }
}

}  // namespace symvqe
