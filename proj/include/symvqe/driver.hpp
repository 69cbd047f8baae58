#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/backend.hpp"
#include "symvqe/circuit.hpp"
#include "symvqe/fermion.hpp"
#include "symvqe/measure.hpp"
#include "symvqe/optimize.hpp"
#include "symvqe/pauli.hpp"

namespace symvqe {

//=============================================================================
// Run configuration
//=============================================================================

enum class BackendChoice { StatevectorExact, StatevectorSampled, NoisyDm };
enum class OptimizerChoice { Direct, NelderMead, Lbfgs };
enum class AnsatzFamily { Aswap, Ry, Ryrz, Swaprz };

AnsatzFamily ansatz_family_from_name(const std::string& name);
const char* ansatz_family_name(AnsatzFamily family);

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::Aswap;
  SectorSpec sector;  ///< target symmetry sector
  int depth = 1;
  Entanglement entanglement = Entanglement::Full;
  int layers = 1;
};

struct VqeRunConfig {
  AnsatzSpec ansatz;
  BackendChoice backend = BackendChoice::StatevectorExact;
  std::optional<DeviceModel> device;
  long shots = 8192;
  OptimizerChoice optimizer = OptimizerChoice::Lbfgs;
  long budget = 300;
  int n_starts = 1;
  MitigationConfig mitigation;
  std::uint64_t seed = 0;

  /// Noisy backends need a device model; LBFGS only runs on the exact path.
  void validate() const;
};

struct VqeResult {
  double energy = 0.0;        ///< includes e_nuc
  double exact_energy = 0.0;
  double abs_error = 0.0;
  double energy_std_error = 0.0;
  Eigen::VectorXd params;
  long n_evaluations = 0;
  double n_expectation = 0.0;
  double sz_expectation = 0.0;
  std::set<Mitigation> mitigation_tags;
  std::optional<SectorSpec> sector;
  int nearest_exact_index = 0;  ///< exact eigenvalue closest to the energy
};

//=============================================================================
// Exact references
//=============================================================================

/// Dense Hermitian eigendecomposition of the Pauli sum plus offset,
/// ascending. Limited to 12 qubits.
Eigen::VectorXd exact_diagonalize(const PauliSum& h, double e_offset);

/// Minimum eigenvalue of the Hamiltonian restricted to the simultaneous
/// (particle number, spin projection) eigenspace of the sector.
double sector_exact_minimum(const Eigen::MatrixXcd& h_dense, double e_offset,
                            const SectorSpec& sector);

//=============================================================================
// Pipeline pieces
//=============================================================================

/// Ansatz circuit for a run: ASWAP from the sector, or an ad hoc form.
/// SwapRZ additionally receives the sector's reference X layer, since its
/// gates conserve particle number and would otherwise be stuck in the
/// vacuum sector.
Circuit build_ansatz(const AnsatzSpec& spec);

/// Objective closing over the measurement pipeline. On the exact backend
/// the value is sv_expectation + e_offset with zero std_error; sampled
/// paths derive one seed per evaluation from the config's master seed.
ObjectiveFunction make_objective(const VqeRunConfig& config,
                                 const PauliSum& h,
                                 const std::vector<MeasurementGroup>& groups,
                                 const Circuit& circuit, double e_offset,
                                 const CalibrationMatrix* spam_cal = nullptr);

//=============================================================================
// Experiments
//=============================================================================

struct GroundOptions {
  std::optional<double> exact_energy_override;
  OptimizerResult* trace_out = nullptr;  ///< optional full optimizer trace
};

/// Full pipeline: second quantization, JW mapping, grouping, ansatz
/// construction, optimization, and a final re-estimate at the best
/// parameters with 4x shots. Records exact <N> and <S_z> of the final
/// state (statevector or Tr(rho .) as appropriate).
VqeResult run_ground(const VqeRunConfig& config, const FermionIntegrals& ints,
                     const GroundOptions& options = {});

/// Default sector list for a 4-qubit scan (the six symmetry subspaces).
std::vector<SectorSpec> default_sector_list(int n_qubits);

/// Independent VQE per sector; dimension-1 sectors skip optimization and
/// evaluate the fixed state once. Each result's exact energy is the
/// sector-restricted exact minimum.
std::vector<VqeResult> sector_scan(const VqeRunConfig& config,
                                   const std::vector<SectorSpec>& sectors,
                                   const FermionIntegrals& ints, int jobs = 1);

struct CurveRow {
  double distance = 0.0;
  VqeResult result;
};

/// One VQE per bond distance, reading "d%.3f.fcid" files from the integral
/// directory. Seeds derive from the config seed and the distance index;
/// rows come back in distance order regardless of scheduling.
std::vector<CurveRow> dissociation_curve(const VqeRunConfig& config,
                                         const std::vector<double>& distances,
                                         const std::string& integral_dir,
                                         int jobs = 1);

/// Path of the bundled integral file for a distance.
std::string fcidump_path(const std::string& integral_dir, double distance);

/// CSV with columns distance, energy, exact_energy, abs_err, abs_log_err,
/// n_mean, sz_mean, evals (12 significant digits, '.' decimal).
void write_curve_csv(const std::vector<CurveRow>& rows,
                     const std::string& path);

std::string vqe_result_to_json(const VqeResult& result);

}  // namespace symvqe
