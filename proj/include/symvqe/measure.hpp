#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/backend.hpp"
#include "symvqe/circuit.hpp"
#include "symvqe/pauli.hpp"

namespace symvqe {

//=============================================================================
// Seeds
//=============================================================================

std::uint64_t splitmix64(std::uint64_t x);

/// Per-experiment seed derived from a master seed and an experiment index,
/// so results are reproducible regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

//=============================================================================
// Counts
//=============================================================================

/// Measured shot histogram. Bitstring keys have qubit 0 rightmost.
struct Counts {
  int n_qubits = 0;
  long shots = 0;
  std::map<std::string, long> table;

  Eigen::VectorXd to_vector() const;
  static Counts from_vector(int n_qubits, const Eigen::VectorXd& v);
};

std::string counts_to_json(const Counts& counts);
Counts counts_from_json(const std::string& text);

std::string index_to_bitstring(std::uint64_t index, int n_qubits);
std::uint64_t bitstring_to_index(const std::string& bits);

//=============================================================================
// Sampling
//=============================================================================

/// Draw computational-basis samples from the Born distribution, then flip
/// each measured bit independently per the confusion probabilities.
/// `readout` may be empty (ideal measurement) or hold one entry per qubit.
Counts sample_counts(const Statevector& psi, long shots,
                     const std::vector<ReadoutError>& readout,
                     std::uint64_t seed);
Counts sample_counts(const DensityMatrix& rho, long shots,
                     const std::vector<ReadoutError>& readout,
                     std::uint64_t seed);

//=============================================================================
// Grouped expectation estimation
//=============================================================================

/// Single-qubit post-rotations mapping the group's shared basis onto Z:
/// X basis -> H, Y basis -> Sdg then H, Z or I -> nothing.
std::vector<Gate> measurement_circuit(const MeasurementGroup& group);

struct MemberEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Parity estimates for each group member from (quasi-)counts taken under
/// the group's post-rotations. `weights` is the length-2^n count vector and
/// `shots` the effective shot total used for the binomial error.
std::vector<MemberEstimate> estimate_expectations(
    const Eigen::VectorXd& weights, double shots, const PauliSum& sum,
    const MeasurementGroup& group);
std::vector<MemberEstimate> estimate_expectations(const Counts& counts,
                                                  const PauliSum& sum,
                                                  const MeasurementGroup& group);

//=============================================================================
// Partial symmetry enforcement
//=============================================================================

/// Retain bitstrings of Hamming weight exactly m. Returns nullopt when every
/// shot is discarded, signalling the caller to fall back to the unfiltered
/// counts. Only meaningful for z-only groups.
std::optional<Counts> symmetry_postselect(const Counts& counts, int m);
std::optional<Eigen::VectorXd> symmetry_postselect(
    const Eigen::VectorXd& weights, int n_qubits, int m);

//=============================================================================
// SPAM calibration
//=============================================================================

/// Column j is the measured-outcome distribution when basis state j is
/// prepared; columns sum to one.
struct CalibrationMatrix {
  int n_qubits = 0;
  Eigen::MatrixXd t;
};

std::string calibration_to_json(const CalibrationMatrix& cal);
CalibrationMatrix calibration_from_json(const std::string& text);

/// Prepare each basis state, sample it under the device's readout model,
/// and normalize the outcome histograms into columns.
CalibrationMatrix build_spam_matrix(const DeviceModel& dev, int n_qubits,
                                    long shots_per_state, std::uint64_t seed);

struct SpamCorrected {
  Eigen::VectorXd weights;
  bool skipped = false;     ///< true when T was too ill-conditioned to use
  double condition = 0.0;
};

/// Least-squares solve of T x = y with negative entries clamped to zero and
/// the result rescaled to the observed shot total. Correction is skipped
/// (and reported) when cond(T) exceeds 1e8.
SpamCorrected apply_spam_correction(const Eigen::VectorXd& observed,
                                    const CalibrationMatrix& cal);

//=============================================================================
// Richardson extrapolation
//=============================================================================

struct RichardsonPoint {
  int fold_factor = 1;
  double energy = 0.0;
  double std_error = 0.0;
};

enum class Mitigation { Spam, Symmetry, Richardson };

struct EnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long shots_used = 0;
  std::set<Mitigation> mitigation_tags;
};

/// Least-squares polynomial fit of energy against fold factor, evaluated at
/// factor zero with the measurement errors propagated through the fit.
EnergyEstimate richardson_extrapolate(const std::vector<RichardsonPoint>& points,
                                      int degree);

//=============================================================================
// Mitigated grouped energy estimation
//=============================================================================

struct MitigationConfig {
  bool spam = false;
  bool symmetry = false;
  int particle_number = 0;  ///< target m for the symmetry filter
  bool richardson = false;
  std::vector<int> folds = {1, 3, 5};
  int fit_degree = 1;

  void validate() const;  ///< folds odd, strictly increasing, first == 1
};

struct EstimatorBackend {
  enum class Kind { SvExact, SvSampled, NoisyDm };
  Kind kind = Kind::SvExact;
  const DeviceModel* device = nullptr;  ///< required for NoisyDm
};

/// One measured experiment per group (per fold factor under Richardson),
/// with SPAM correction and then particle-number post-selection applied to
/// z-only groups when enabled. Member expectations are weighted by the
/// Hamiltonian coefficients and offset by e_offset; errors combine as a
/// root sum of squares. The SvExact backend bypasses sampling entirely.
EnergyEstimate energy_from_groups(const PauliSum& sum,
                                  const std::vector<MeasurementGroup>& groups,
                                  const EstimatorBackend& backend,
                                  const Circuit& circuit,
                                  const Eigen::VectorXd& params, long shots,
                                  const MitigationConfig& mitigation,
                                  double e_offset, std::uint64_t seed,
                                  const CalibrationMatrix* spam_cal = nullptr);

}  // namespace symvqe
